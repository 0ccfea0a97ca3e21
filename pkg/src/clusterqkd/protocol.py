"""Round simulation, eavesdrop checking, and sifting for the three-party protocol."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import qcore
from .attacks import PROTOCOL_QUBITS, AttackKind, AttackModel, apply_attack, initial_joint_state
from .cases import QA, QB, QC3, QC4, CaseKind, LocalOp, expected_consistent
from .qcore import BellOutcome

# spawn_key prefixes that separate the per-round streams from the sifting stream
_ROUND_STREAM = 0
_SIFT_STREAM = 1


class Designation(enum.Enum):
    Check = "Check"
    Key = "Key"
    Discard = "Discard"


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    epsilon: float = 0.0
    check_fraction: float = 0.5
    error_threshold: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if not 0.0 < self.check_fraction <= 1.0:
            raise ValueError(f"check_fraction must lie in (0, 1], got {self.check_fraction}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError(f"error_threshold must lie in [0, 1], got {self.error_threshold}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def num_rounds(self) -> int:
        """Number of cluster states Charlie prepares, ``round(4n(1 + epsilon))``."""
        return int(round(4 * self.n * (1 + self.epsilon)))


@dataclass
class RoundRecord:
    index: int
    alice_op: LocalOp
    bob_op: LocalOp
    case: CaseKind
    mr_A: int
    mr_B: int
    mr_C3: int | None = None
    mr_C4: int | None = None
    mr_C34: BellOutcome | None = None
    designation: Designation = Designation.Discard
    # attacker-side bookkeeping (intercept-resend memory readout); never serialised
    attacker_bit: int | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.case is CaseKind.Case4:
            if self.mr_C34 is None or self.mr_C3 is not None or self.mr_C4 is not None:
                raise ValueError("Case4 records carry only the Bell outcome for Charlie")
        elif self.mr_C3 is None or self.mr_C4 is None or self.mr_C34 is not None:
            raise ValueError(f"{self.case.name} records carry Z outcomes on s3 and s4")


@dataclass
class SiftOutcome:
    raw_key_CA: list[int]
    raw_key_CB: list[int]
    case_error_rates: dict[CaseKind, float]
    aborted: bool
    counts: dict[CaseKind, int]
    checked: dict[CaseKind, int] = field(default_factory=dict)


def round_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-style stream keyed by ``(seed, index)``; rounds can run in any order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_ROUND_STREAM, index)))


def sift_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SIFT_STREAM,)))


def run_round(
    alice_op: LocalOp,
    bob_op: LocalOp,
    attack: AttackModel,
    rng: np.random.Generator,
    index: int = 0,
) -> RoundRecord:
    """Simulate one cluster state from preparation through all measurements."""
    alice_op, bob_op = LocalOp(alice_op), LocalOp(bob_op)
    case = CaseKind.from_ops(alice_op, bob_op)
    psi = initial_joint_state(attack)
    psi = apply_attack(attack, psi, rng)

    if alice_op is LocalOp.Hadamard:
        psi = qcore.apply_unitary(psi, qcore.H, [QA])
    mr_a, psi = qcore.measure_z(psi, QA, float(rng.random()))
    if bob_op is LocalOp.Hadamard:
        psi = qcore.apply_unitary(psi, qcore.H, [QB])
    mr_b, psi = qcore.measure_z(psi, QB, float(rng.random()))

    mr_c3 = mr_c4 = mr_c34 = None
    if case is CaseKind.Case4:
        mr_c34, psi = qcore.measure_bell(psi, QC3, QC4, float(rng.random()))
    else:
        if case is CaseKind.Case2:
            psi = qcore.apply_unitary(psi, qcore.H, [QC3])
        elif case is CaseKind.Case3:
            psi = qcore.apply_unitary(psi, qcore.H, [QC4])
        mr_c3, psi = qcore.measure_z(psi, QC3, float(rng.random()))
        mr_c4, psi = qcore.measure_z(psi, QC4, float(rng.random()))

    record = RoundRecord(index, alice_op, bob_op, case, mr_a, mr_b, mr_c3, mr_c4, mr_c34)
    if attack.kind is AttackKind.INTERCEPT_RESEND_Z:
        # Bob mirrors Alice's announced operation on the stored original, then reads it out
        mem = PROTOCOL_QUBITS
        if alice_op is LocalOp.Hadamard:
            psi = qcore.apply_unitary(psi, qcore.H, [mem])
        record.attacker_bit, psi = qcore.measure_z(psi, mem, float(rng.random()))
    return record


def consistency_check(record: RoundRecord) -> bool:
    """Does the round agree with the expected-result table for its case?"""
    return expected_consistent(
        record.case, record.mr_A, record.mr_B, record.mr_C3, record.mr_C4, record.mr_C34
    )


def draw_ops(rng: np.random.Generator) -> tuple[LocalOp, LocalOp]:
    a, b = rng.integers(0, 2, size=2)
    ops = (LocalOp.Identity, LocalOp.Hadamard)
    return ops[a], ops[b]


def simulate_round(seed: int, index: int, attack: AttackModel) -> RoundRecord:
    rng = round_rng(seed, index)
    alice_op, bob_op = draw_ops(rng)
    return run_round(alice_op, bob_op, attack, rng, index=index)


def run_rounds(config: ProtocolConfig, attack: AttackModel, indices: Iterable[int] | None = None) -> list[RoundRecord]:
    if indices is None:
        indices = range(config.num_rounds)
    return [simulate_round(config.seed, i, attack) for i in indices]


def sift(records: Sequence[RoundRecord], config: ProtocolConfig, rng: np.random.Generator | None = None) -> SiftOutcome:
    """Pick check positions, estimate per-case error rates, and assemble both raw keys.

    Sets ``designation`` on every record in place.
    """
    if rng is None:
        rng = sift_rng(config.seed)
    ordered = sorted(records, key=lambda r: r.index)
    by_case: dict[CaseKind, list[RoundRecord]] = {c: [] for c in CaseKind}
    for r in ordered:
        by_case[r.case].append(r)

    rates: dict[CaseKind, float] = {}
    checked: dict[CaseKind, int] = {}
    for case in CaseKind:
        group = by_case[case]
        if case is CaseKind.Case4:
            check_idx = set(range(len(group)))
        else:
            k = math.floor(config.check_fraction * len(group))
            check_idx = set(rng.choice(len(group), size=k, replace=False).tolist()) if k else set()
        failures = 0
        for i, r in enumerate(group):
            if i in check_idx:
                r.designation = Designation.Check
                failures += not consistency_check(r)
            else:
                r.designation = Designation.Key
        checked[case] = len(check_idx)
        rates[case] = failures / len(check_idx) if check_idx else 0.0

    key_ca = [r.mr_A for r in ordered if r.designation is Designation.Key and r.case in (CaseKind.Case1, CaseKind.Case2)]
    key_cb = [r.mr_B for r in ordered if r.designation is Designation.Key and r.case in (CaseKind.Case1, CaseKind.Case3)]
    aborted = any(rate > config.error_threshold for rate in rates.values())
    return SiftOutcome(
        raw_key_CA=key_ca,
        raw_key_CB=key_cb,
        case_error_rates=rates,
        aborted=aborted,
        counts={c: len(by_case[c]) for c in CaseKind},
        checked=checked,
    )


def run_protocol(config: ProtocolConfig, attack: AttackModel | None = None) -> tuple[list[RoundRecord], SiftOutcome]:
    attack = attack or AttackModel.none()
    records = run_rounds(config, attack)
    return records, sift(records, config)


def charlie_key_bits(records: Sequence[RoundRecord]) -> tuple[list[int], list[int]]:
    """Charlie's copies of the two raw keys (her s4 bits for R_CA, s3 bits for R_CB)."""
    ordered = sorted(records, key=lambda r: r.index)
    keyed = [r for r in ordered if r.designation is Designation.Key]
    ca = [r.mr_C4 for r in keyed if r.case in (CaseKind.Case1, CaseKind.Case2)]
    cb = [r.mr_C3 for r in keyed if r.case in (CaseKind.Case1, CaseKind.Case3)]
    return ca, cb


def disclosure_report(records: Sequence[RoundRecord], outcome: SiftOutcome) -> dict:
    """Everything sent over the public channels: operations, check-position results, verdict.

    Charlie's own outcomes are never disclosed.
    """
    ordered = sorted(records, key=lambda r: r.index)
    return {
        "announcements": [
            {"index": r.index, "alice_op": r.alice_op.value, "bob_op": r.bob_op.value} for r in ordered
        ],
        "check_disclosures": [
            {"index": r.index, "mr_A": r.mr_A, "mr_B": r.mr_B}
            for r in ordered
            if r.designation is Designation.Check
        ],
        "aborted": outcome.aborted,
    }


def qubit_efficiency(config: ProtocolConfig) -> Fraction:
    """Raw-key bits per generated qubit, ``c / (q + b)`` with ``c = 2n``, ``q = 16n``, ``b = 0``."""
    if config.epsilon != 0:
        raise ValueError("the analytic efficiency is defined for epsilon = 0")
    c = 2 * config.n
    q = 16 * config.n
    b = 0
    return Fraction(c, q + b)


def empirical_efficiency(config: ProtocolConfig, outcome: SiftOutcome) -> float:
    return (len(outcome.raw_key_CA) + len(outcome.raw_key_CB)) / (16 * config.n)
