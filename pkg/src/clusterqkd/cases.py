"""Local operations, the four operation cases, and the expected-result table."""

from __future__ import annotations

import enum

from .qcore import BellOutcome

# Protocol qubit positions (0-based): Alice's s1, Bob's s2, Charlie's s3 and s4.
QA, QB, QC3, QC4 = 0, 1, 2, 3


class LocalOp(enum.Enum):
    Identity = "I"
    Hadamard = "H"


class CaseKind(enum.Enum):
    Case1 = 1
    Case2 = 2
    Case3 = 3
    Case4 = 4

    @classmethod
    def from_ops(cls, alice_op: LocalOp, bob_op: LocalOp) -> "CaseKind":
        return _CASE_OF[(LocalOp(alice_op), LocalOp(bob_op))]

    @property
    def ops(self) -> tuple[LocalOp, LocalOp]:
        return _OPS_OF[self]


_CASE_OF = {
    (LocalOp.Identity, LocalOp.Identity): CaseKind.Case1,
    (LocalOp.Identity, LocalOp.Hadamard): CaseKind.Case2,
    (LocalOp.Hadamard, LocalOp.Identity): CaseKind.Case3,
    (LocalOp.Hadamard, LocalOp.Hadamard): CaseKind.Case4,
}
_OPS_OF = {v: k for k, v in _CASE_OF.items()}

CORRELATED_BELL = frozenset({BellOutcome.PhiMinus, BellOutcome.PsiPlus})


def expected_consistent(
    case: CaseKind,
    mr_a: int,
    mr_b: int,
    mr_c3: int | None = None,
    mr_c4: int | None = None,
    mr_c34: BellOutcome | None = None,
) -> bool:
    """True iff the outcomes match the expected-result table for ``case``."""
    if case is CaseKind.Case4:
        if mr_c34 is None:
            raise ValueError("Case4 needs Charlie's Bell outcome")
        if mr_c34 in CORRELATED_BELL:
            return mr_a == mr_b
        return mr_a == mr_b ^ 1
    if mr_c3 is None or mr_c4 is None:
        raise ValueError(f"{case.name} needs Charlie's Z outcomes on s3 and s4")
    if case is CaseKind.Case1:
        return mr_a == mr_c4 and mr_b == mr_c3
    if case is CaseKind.Case2:
        return mr_a == mr_c4 and mr_b == mr_c3 ^ mr_a
    return mr_b == mr_c3 and mr_a == mr_c4 ^ mr_b
