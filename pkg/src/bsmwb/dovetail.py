"""Counting messages and a dovetailing referee for semi-decidable pair languages.

Each party sends its input together with the number of accepted pairs it
forms with all partners no longer than itself.  The referee takes the
count attached to the longer input (ties go to the first party), runs the
recognizer on every candidate pair in a round-robin with step budgets
growing by one per sweep, stops the moment the promised number of
acceptances has appeared, and accepts iff the actual pair is among them.
A correct count makes halting unconditional even though the recognizer
alone may diverge on non-members.

Demo languages are step-bounded stand-ins with certified budgets; the
recognizer interface also represents genuinely unbounded machines, but
then nothing certifies the referee's instrumentation ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import DemoConfigError, RejectedInput

DESK_LENGTH_LIMIT = 6


@dataclass
class SemiDecider:
    """step(x, y, budget) -> True iff the machine accepts within the budget.

    Monotone in the budget: once accepted, accepted forever.
    """

    step: Callable


@dataclass
class DemoLanguage:
    """An exactly decidable pair language with a certified acceptance budget."""

    name: str
    member: Callable  # (x, y) -> bool
    accept_budget: Callable  # (x, y) -> steps needed, for members

    def semi_decider(self) -> SemiDecider:
        return SemiDecider(
            step=lambda x, y, budget: self.member(x, y)
            and budget >= self.accept_budget(x, y))

    def certified_budget(self, max_len: int) -> int:
        worst = 1
        for x in _strings_up_to(max_len):
            for y in _strings_up_to(max_len):
                if self.member(x, y):
                    worst = max(worst, self.accept_budget(x, y))
        return worst


def eq_language() -> DemoLanguage:
    return DemoLanguage(
        name="eq",
        member=lambda x, y: x == y,
        accept_budget=lambda x, y: len(x) + 1)


def prefix_language() -> DemoLanguage:
    return DemoLanguage(
        name="prefix",
        member=lambda x, y: x.startswith(y) or y.startswith(x),
        accept_budget=lambda x, y: max(len(x), len(y)) + 1)


def language_from_pairs(pairs) -> DemoLanguage:
    """Explicit finite language: iterable of (x, y) bit-string pairs."""
    table = {(x, y) for x, y in pairs}
    return DemoLanguage(
        name="custom",
        member=lambda x, y: (x, y) in table,
        accept_budget=lambda x, y: len(x) + len(y) + 1)


def _strings_up_to(max_len: int):
    for length in range(max_len + 1):
        for v in range(1 << length):
            yield format(v, f"0{length}b") if length else ""


def _strings_of_lengths_up_to(limit: int):
    return list(_strings_up_to(limit))


# ---------------------------------------------------------------------------
# messages


@dataclass(frozen=True)
class CountMessage:
    """An input plus the count of accepted pairs with no-longer partners.

    Serializes to len(x) + (len(x) + 1) bits: the input, then the count
    big-endian in a field just wide enough for 2^(n+1) - 1.
    """

    input: str
    count: int

    def __post_init__(self):
        if set(self.input) - {"0", "1"}:
            raise RejectedInput("input must be a bit string")
        n = len(self.input)
        if not 0 <= self.count < 1 << (n + 1):
            raise RejectedInput(f"count {self.count} does not fit in {n + 1} bits")

    def serialize_bits(self) -> str:
        n = len(self.input)
        return self.input + format(self.count, f"0{n + 1}b")

    def bit_length(self) -> int:
        return 2 * len(self.input) + 1


def _count_partners(fixed: str, lang: DemoLanguage, fixed_is_left: bool) -> int:
    count = 0
    for other in _strings_up_to(len(fixed)):
        pair = (fixed, other) if fixed_is_left else (other, fixed)
        if lang.member(*pair):
            count += 1
    return count


def alice_message(x: str, lang: DemoLanguage,
                  length_limit: int = DESK_LENGTH_LIMIT) -> CountMessage:
    """x plus |{y' : |y'| <= |x|, (x, y') in L}|, via the exact oracle."""
    if len(x) > length_limit:
        raise RejectedInput(f"|x| beyond the desk limit {length_limit}")
    return CountMessage(x, _count_partners(x, lang, fixed_is_left=True))


def bob_message(y: str, lang: DemoLanguage,
                length_limit: int = DESK_LENGTH_LIMIT) -> CountMessage:
    if len(y) > length_limit:
        raise RejectedInput(f"|y| beyond the desk limit {length_limit}")
    return CountMessage(y, _count_partners(y, lang, fixed_is_left=False))


# ---------------------------------------------------------------------------
# the referee


@dataclass
class DovetailTrace:
    rows: list = field(default_factory=list)  # (sweep, candidate, state)
    sweeps: int = 0
    steps: int = 0


def carol_dovetail(msg_a: CountMessage, msg_b: CountMessage,
                   machine: SemiDecider,
                   step_ceiling: Optional[int] = None,
                   trace: Optional[DovetailTrace] = None) -> int:
    """Accept iff (x, y) is among the first `count` accepted candidates.

    The party with the longer input provides the count (ties: the first
    party), since only its candidate list contains the actual pair.
    Candidates are ordered by length then value; each sweep raises every
    candidate's step budget by one.  With a correct count the loop always
    halts; the optional ceiling only guards against misconfigured demos
    and raises rather than mis-answering.
    """
    x, y = msg_a.input, msg_b.input
    if len(x) >= len(y):
        count = msg_a.count
        candidates = [(x, other) for other in _strings_up_to(len(x))]
        actual = (x, y)
    else:
        count = msg_b.count
        candidates = [(other, y) for other in _strings_up_to(len(y))]
        actual = (x, y)

    if count == 0:
        return 0

    accepted = set()
    budget = 0
    while True:
        budget += 1
        if step_ceiling is not None and budget > step_ceiling:
            raise DemoConfigError(
                f"count {count} not reached within the certified ceiling "
                f"{step_ceiling}; the declared count disagrees with the machine")
        if trace is not None:
            trace.sweeps = budget
        for pair in candidates:
            if pair in accepted:
                continue
            if trace is not None:
                trace.steps += 1
            if machine.step(pair[0], pair[1], budget):
                accepted.add(pair)
                if trace is not None:
                    trace.rows.append((budget, pair[0] or "-", pair[1] or "-"))
                if len(accepted) == count:
                    return int(actual in accepted)


def run_protocol(x: str, y: str, lang: DemoLanguage,
                 trace: Optional[DovetailTrace] = None,
                 length_limit: int = DESK_LENGTH_LIMIT) -> int:
    """End to end: both messages, then the dovetailing referee."""
    msg_a = alice_message(x, lang, length_limit)
    msg_b = bob_message(y, lang, length_limit)
    ceiling = lang.certified_budget(max(len(x), len(y))) + 1
    return carol_dovetail(msg_a, msg_b, lang.semi_decider(),
                          step_ceiling=ceiling, trace=trace)
