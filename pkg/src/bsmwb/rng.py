"""Seedable, splittable randomness.

Every randomized operation in the workbench takes an explicit integer seed;
there is no ambient entropy.  Child streams are derived by hashing the
parent seed together with a string tag, so independent sampling loops can
be re-run (or distributed) reproducibly.
"""

import hashlib
import random


def child_seed(seed: int, tag) -> int:
    """Derive a stable 64-bit child seed from (seed, tag)."""
    h = hashlib.sha256(f"{seed}:{tag}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def fisher_yates(n: int, rng: random.Random) -> list:
    """Uniform permutation of range(n), explicit Fisher-Yates."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.randrange(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
