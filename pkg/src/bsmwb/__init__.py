"""Workbench for two-party simultaneous-message protocols.

Construct protocols (degree-reduced polynomial referees, matching-vector
equality over Z6, DNF / monotone / alternation / covering-code protocols
for bitwise-combined functions, counting referees for semi-decidable
languages), transform them (split reductions of SAT / 3COL / PARTITION,
conversions to and from instance hiding, PIR, and smooth codes, bilinear
extraction from arithmetic referees), and verify everything exhaustively.
"""

from .core import (BsmProtocol, CarolCost, Message, TruthTable, measure,
                   tabulate, verify_exhaustive)

__all__ = ["BsmProtocol", "CarolCost", "Message", "TruthTable", "measure",
           "tabulate", "verify_exhaustive"]

__version__ = "0.1.0"
