"""Adversary models on the Charlie -> Alice / Bob quantum channels.

Every model acts on the joint register ``cluster4 (x) ancilla`` where the
ancilla (attacker memory or probe) occupies the least-significant qubits and
starts in ``|0...0>``. Stochastic models are described by weighted pure-state
branches, so the same description drives both sampling and exact analysis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import qcore
from .cases import QA, QB, QC3, QC4, CaseKind, LocalOp, expected_consistent
from .qcore import BELL_ORDER, QuantumStateError

PROTOCOL_QUBITS = 4
INTERNAL_ANCILLA_DIM = 4
EXTERNAL_ANCILLA_DIM = 16


class AttackKind(enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND_Z = "intercept-resend"
    MEASURE_RESEND_Z = "measure-resend"
    MEASURE_RESEND_BELL = "measure-resend-bell"
    DEPOLARIZING = "depolarizing"
    COLLECTIVE_INTERNAL = "collective-internal"
    COLLECTIVE_EXTERNAL = "collective-external"


COLLECTIVE_KINDS = frozenset({AttackKind.COLLECTIVE_INTERNAL, AttackKind.COLLECTIVE_EXTERNAL})


@dataclass(frozen=True, eq=False)
class AttackModel:
    """One adversary strategy.

    ``q`` is only meaningful for ``DEPOLARIZING``; ``unitary`` only for the
    collective kinds, where it acts on (attacked qubits) (x) ancilla.
    """

    kind: AttackKind
    q: float = 0.0
    unitary: np.ndarray | None = None
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.kind is AttackKind.DEPOLARIZING and not 0.0 <= self.q <= 0.5:
            raise ValueError(f"depolarizing parameter {self.q} outside [0, 0.5]")
        if self.kind in COLLECTIVE_KINDS:
            if self.unitary is None:
                raise ValueError(f"{self.kind.value} needs a unitary")
            u = np.asarray(self.unitary, dtype=complex)
            attacked = 1 if self.kind is AttackKind.COLLECTIVE_INTERNAL else 2
            dim = u.shape[0]
            if dim < 2 ** (attacked + 1) or dim & (dim - 1):
                raise QuantumStateError(f"collective unitary dimension {dim} is not 2^k with an ancilla")
            if not qcore.is_unitary(u):
                raise QuantumStateError("collective attack operator is not unitary")
            u.setflags(write=False)
            object.__setattr__(self, "unitary", u)

    @classmethod
    def none(cls) -> "AttackModel":
        return cls(AttackKind.NONE)

    @classmethod
    def intercept_resend(cls) -> "AttackModel":
        return cls(AttackKind.INTERCEPT_RESEND_Z)

    @classmethod
    def measure_resend(cls) -> "AttackModel":
        return cls(AttackKind.MEASURE_RESEND_Z)

    @classmethod
    def measure_resend_bell(cls) -> "AttackModel":
        return cls(AttackKind.MEASURE_RESEND_BELL)

    @classmethod
    def depolarizing(cls, q: float) -> "AttackModel":
        return cls(AttackKind.DEPOLARIZING, q=float(q))

    @classmethod
    def collective_internal(cls, u: np.ndarray, label: str = "") -> "AttackModel":
        return cls(AttackKind.COLLECTIVE_INTERNAL, unitary=u, label=label)

    @classmethod
    def collective_external(cls, u: np.ndarray, label: str = "") -> "AttackModel":
        return cls(AttackKind.COLLECTIVE_EXTERNAL, unitary=u, label=label)

    @property
    def attacked_qubits(self) -> list[int]:
        if self.kind in (AttackKind.COLLECTIVE_EXTERNAL, AttackKind.MEASURE_RESEND_BELL):
            return [QA, QB]
        return [QA]

    @property
    def ancilla_qubits(self) -> int:
        if self.kind is AttackKind.INTERCEPT_RESEND_Z:
            return 1
        if self.kind in COLLECTIVE_KINDS:
            return int(self.unitary.shape[0]).bit_length() - 1 - len(self.attacked_qubits)
        return 0

    def describe(self) -> str:
        if self.kind is AttackKind.DEPOLARIZING:
            return f"depolarizing:{self.q!r}"
        if self.label:
            return self.label
        return self.kind.value


@dataclass
class AttackStats:
    per_case_error: dict[CaseKind, float]
    detection_prob_per_check: float
    eve_info: float | None = None


# --- state preparation and attack application ----------------------------


def initial_joint_state(model: AttackModel) -> np.ndarray:
    anc = model.ancilla_qubits
    psi = qcore.cluster4()
    if anc:
        psi = qcore.tensor(psi, qcore.basis_state("0" * anc))
    return psi


def _ancilla_indices(model: AttackModel) -> list[int]:
    return list(range(PROTOCOL_QUBITS, PROTOCOL_QUBITS + model.ancilla_qubits))


def attack_branches(model: AttackModel, joint_state: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Weighted normalised branches ``(p, state)`` produced by the attack; weights sum to 1."""
    n = qcore.num_qubits(joint_state)
    expected = PROTOCOL_QUBITS + model.ancilla_qubits
    if n != expected:
        raise QuantumStateError(
            f"{model.kind.value} expects {expected} qubits (4 protocol + ancilla), got {n}"
        )
    kind = model.kind
    if kind is AttackKind.NONE:
        return [(1.0, joint_state)]
    if kind is AttackKind.INTERCEPT_RESEND_Z:
        # park the original s1 in the memory qubit, then resend a random Z-basis qubit
        order = list(range(n))
        mem = PROTOCOL_QUBITS
        order[QA], order[mem] = mem, QA
        stored = qcore.permute_qubits(joint_state, order)
        return [(0.5, stored), (0.5, qcore.apply_unitary(stored, qcore.X, [QA]))]
    if kind is AttackKind.MEASURE_RESEND_Z:
        out = []
        for bit in (0, 1):
            p = qcore.z_probabilities(joint_state, QA)[bit]
            if p > 0:
                proj = np.diag([1.0 - bit, float(bit)]).astype(complex)
                out.append((p, qcore.apply_unitary(joint_state, proj, [QA]) / math.sqrt(p)))
        return out
    if kind is AttackKind.MEASURE_RESEND_BELL:
        probs = qcore.bell_probabilities(joint_state, QA, QB)
        out = []
        for k in BELL_ORDER:
            if probs[k] > 0:
                v = qcore.bell_state(k)
                post = qcore.apply_unitary(joint_state, np.outer(v, v.conj()), [QA, QB])
                out.append((probs[k], post / math.sqrt(probs[k])))
        return out
    if kind is AttackKind.DEPOLARIZING:
        q = model.q
        xs = qcore.apply_unitary(joint_state, qcore.X, [QA])
        zs = qcore.apply_unitary(joint_state, qcore.Z, [QA])
        xzs = qcore.apply_unitary(zs, qcore.X, [QA])
        weighted = [((1 - q) ** 2, joint_state), (q * (1 - q), xs), (q * (1 - q), zs), (q * q, xzs)]
        return [(w, s) for w, s in weighted if w > 0]
    targets = model.attacked_qubits + _ancilla_indices(model)
    return [(1.0, qcore.apply_unitary(joint_state, model.unitary, targets))]


def apply_attack(model: AttackModel, joint_state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample one branch of the attack on ``joint_state``."""
    branches = attack_branches(model, joint_state)
    if len(branches) == 1:
        return branches[0][1]
    i = qcore._pick([w for w, _ in branches], float(rng.random()))
    return branches[i][1]


# --- exact analysis -------------------------------------------------------


def _apply_case_ops(state: np.ndarray, case: CaseKind) -> np.ndarray:
    alice_op, bob_op = case.ops
    if alice_op is LocalOp.Hadamard:
        state = qcore.apply_unitary(state, qcore.H, [QA])
    if bob_op is LocalOp.Hadamard:
        state = qcore.apply_unitary(state, qcore.H, [QB])
    if case is CaseKind.Case2:
        state = qcore.apply_unitary(state, qcore.H, [QC3])
    elif case is CaseKind.Case3:
        state = qcore.apply_unitary(state, qcore.H, [QC4])
    elif case is CaseKind.Case4:
        state = qcore.apply_unitary(state, qcore.BELL_BASIS_CHANGE, [QC3, QC4])
    return state


def case_outcome_distribution(model: AttackModel, case: CaseKind) -> dict[tuple, float]:
    """Exact joint distribution of the parties' outcomes in ``case``.

    Keys are ``(mr_A, mr_B, mr_C3, mr_C4)`` for Cases 1-3 and
    ``(mr_A, mr_B, BellOutcome)`` for Case 4.
    """
    case = CaseKind(case)
    acc = np.zeros(16)
    for w, branch in attack_branches(model, initial_joint_state(model)):
        psi = _apply_case_ops(branch, case).reshape(16, -1)
        acc += w * np.einsum("ij,ij->i", psi.conj(), psi).real
    out: dict[tuple, float] = {}
    for idx, p in enumerate(acc):
        a, b, c3, c4 = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        if case is CaseKind.Case4:
            key = (a, b, BELL_ORDER[(c3 << 1) | c4])
        else:
            key = (a, b, c3, c4)
        out[key] = out.get(key, 0.0) + float(p)
    return out


def _is_consistent(case: CaseKind, key: tuple) -> bool:
    if case is CaseKind.Case4:
        a, b, bell = key
        return expected_consistent(case, a, b, mr_c34=bell)
    a, b, c3, c4 = key
    return expected_consistent(case, a, b, c3, c4)


def case_error_rates(model: AttackModel) -> dict[CaseKind, float]:
    """Exact probability that a checked round of each case violates the expected-result table."""
    rates = {}
    for case in CaseKind:
        dist = case_outcome_distribution(model, case)
        err = sum(p for key, p in dist.items() if not _is_consistent(case, key))
        rates[case] = min(1.0, max(0.0, err))
    return rates


def detection_probability(model: AttackModel) -> float:
    """Exact per-position detection probability with uniformly random local operations."""
    rates = case_error_rates(model)
    return float(np.mean([rates[c] for c in CaseKind]))


def _conditional_ancilla(state: np.ndarray, key_qubit: int, bit: int, ancilla: list[int]) -> np.ndarray:
    n = qcore.num_qubits(state)
    psi = state.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[key_qubit] = 1 - bit
    psi[tuple(idx)] = 0.0
    psi = psi.reshape(-1)
    p = float(np.vdot(psi, psi).real)
    return qcore.partial_trace(psi / math.sqrt(p), ancilla)


def eve_information(model: AttackModel) -> float:
    """Trace distance between the attacker's ancilla states given key bit 0 vs 1.

    Key bits are Alice's Z outcome on s1 (identity rounds); for external attacks
    Bob's key bit on s2 is examined too and the larger distance is returned.
    """
    if model.kind is AttackKind.NONE:
        return 0.0
    if model.kind not in COLLECTIVE_KINDS:
        raise ValueError(f"eve_information needs a collective attack, got {model.kind.value}")
    (_, state), = attack_branches(model, initial_joint_state(model))
    ancilla = _ancilla_indices(model)
    key_qubits = [QA] if model.kind is AttackKind.COLLECTIVE_INTERNAL else [QA, QB]
    best = 0.0
    for kq in key_qubits:
        rho0 = _conditional_ancilla(state, kq, 0, ancilla)
        rho1 = _conditional_ancilla(state, kq, 1, ancilla)
        best = max(best, qcore.trace_distance(rho0, rho1))
    return best


def attack_stats(model: AttackModel) -> AttackStats:
    rates = case_error_rates(model)
    info = eve_information(model) if model.kind in COLLECTIVE_KINDS | {AttackKind.NONE} else None
    return AttackStats(rates, float(np.mean(list(rates.values()))), info)


def detection_curve(model: AttackModel | AttackKind, m: int) -> float:
    """Probability of at least one failed check over ``m`` checked positions."""
    kind = model.kind if isinstance(model, AttackModel) else AttackKind(model)
    if m < 0:
        raise ValueError("number of checked positions must be non-negative")
    # Bell-basis measure-resend collapses s1 s2 onto a Bell pair, which breaks
    # the Case 1-3 correlations half the time on average (exact value 1/2).
    if kind in (AttackKind.INTERCEPT_RESEND_Z, AttackKind.MEASURE_RESEND_BELL):
        return 1.0 - 0.5**m
    if kind is AttackKind.MEASURE_RESEND_Z:
        return 1.0 - 0.75**m
    raise ValueError(f"no analytic detection curve for {kind.value}")


# --- collective attack construction ---------------------------------------


def complete_unitary(columns: dict[int, np.ndarray], dim: int, atol: float = qcore.ATOL) -> np.ndarray:
    """Extend orthonormal ``columns`` (index -> vector) to a ``dim x dim`` unitary.

    Free columns are filled left to right by Gram-Schmidt over the canonical
    basis in index order, so the result is deterministic.
    """
    u = np.zeros((dim, dim), dtype=complex)
    fixed = sorted(columns)
    for j in fixed:
        v = np.asarray(columns[j], dtype=complex)
        if v.shape != (dim,):
            raise QuantumStateError(f"column {j} has shape {v.shape}, expected ({dim},)")
        u[:, j] = v
    given = u[:, fixed]
    if not np.allclose(given.conj().T @ given, np.eye(len(fixed)), atol=atol, rtol=0):
        raise QuantumStateError("prescribed columns are not orthonormal; no unitary extends them")
    basis = [u[:, j] for j in fixed]
    candidates = iter(range(dim))
    for j in range(dim):
        if j in columns:
            continue
        for m in candidates:
            v = np.zeros(dim, dtype=complex)
            v[m] = 1.0
            for _ in range(2):
                for b in basis:
                    v = v - np.vdot(b, v) * b
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                v = v / norm
                break
        else:  # pragma: no cover - canonical basis always spans
            raise QuantumStateError("unitary completion ran out of basis vectors")
        u[:, j] = v
        basis.append(v)
    return u


def _unit(v: Sequence[complex], name: str) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if abs(np.linalg.norm(v) - 1.0) > qcore.ATOL:
        raise ValueError(f"ancilla state {name} is not normalised")
    return v


@dataclass(frozen=True)
class CollectiveAttackParams:
    """Single-qubit probe ``|0>|e> -> a|0>|e00> + b|1>|e01>``, ``|1>|e> -> c|0>|e10> + d|1>|e11>``."""

    a: complex
    b: complex
    c: complex
    d: complex
    e00: np.ndarray
    e01: np.ndarray
    e10: np.ndarray
    e11: np.ndarray

    def __post_init__(self) -> None:
        for lhs, rhs, name in ((self.a, self.b, "|a|^2+|b|^2"), (self.c, self.d, "|c|^2+|d|^2")):
            if abs(abs(lhs) ** 2 + abs(rhs) ** 2 - 1.0) > qcore.ATOL:
                raise ValueError(f"{name} must equal 1")
        dims = set()
        for name in ("e00", "e01", "e10", "e11"):
            v = _unit(getattr(self, name), name)
            object.__setattr__(self, name, v)
            dims.add(v.shape)
        if len(dims) != 1:
            raise ValueError("ancilla states must share one dimension")

    @property
    def ancilla_dim(self) -> int:
        return self.e00.shape[0]


def constrained_attack(params: CollectiveAttackParams, label: str = "") -> AttackModel:
    """Build the internal collective attack defined by ``params`` (ancilla starts at basis state 0)."""
    d_anc = params.ancilla_dim
    ket0, ket1 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    col0 = params.a * np.kron(ket0, params.e00) + params.b * np.kron(ket1, params.e01)
    col1 = params.c * np.kron(ket0, params.e10) + params.d * np.kron(ket1, params.e11)
    u = complete_unitary({0: col0, d_anc: col1}, 2 * d_anc)
    return AttackModel.collective_internal(u, label=label)


@dataclass(frozen=True)
class ExternalAttackParams:
    """Two-qubit probe ``|xy>|e'> -> sum_k coeffs[xy, k] |k>|anc[xy, k]>`` (sixteen ancilla states)."""

    coeffs: np.ndarray
    ancilla: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        anc = np.asarray(self.ancilla, dtype=complex)
        if coeffs.shape != (4, 4) or anc.ndim != 3 or anc.shape[:2] != (4, 4):
            raise ValueError("coeffs must be 4x4 and ancilla 4x4xd")
        if not np.allclose(np.sum(np.abs(coeffs) ** 2, axis=1), 1.0, atol=qcore.ATOL, rtol=0):
            raise ValueError("each coefficient row must have unit norm")
        if not np.allclose(np.linalg.norm(anc, axis=2), 1.0, atol=qcore.ATOL, rtol=0):
            raise ValueError("ancilla states must be normalised")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "ancilla", anc)

    @property
    def ancilla_dim(self) -> int:
        return self.ancilla.shape[2]


def external_attack(params: ExternalAttackParams, label: str = "") -> AttackModel:
    d_anc = params.ancilla_dim
    cols = {}
    for xy in range(4):
        col = np.zeros(4 * d_anc, dtype=complex)
        for k in range(4):
            col += params.coeffs[xy, k] * np.kron(np.eye(4)[k], params.ancilla[xy, k])
        cols[xy * d_anc] = col
    return AttackModel.collective_external(complete_unitary(cols, 4 * d_anc), label=label)


# --- samplers used by tests and the CLI ------------------------------------


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _random_phase(rng: np.random.Generator) -> complex:
    return complex(np.exp(1j * rng.uniform(0, 2 * np.pi)))


def random_internal_params(rng: np.random.Generator, d_anc: int = INTERNAL_ANCILLA_DIM) -> CollectiveAttackParams:
    """Random probe with four orthonormal (fully distinguishable) ancilla states."""
    a, b = _random_unit(rng, 2)
    c, d = _random_unit(rng, 2)
    e = qcore.random_unitary(d_anc, rng)
    return CollectiveAttackParams(a, b, c, d, e[:, 0], e[:, 1], e[:, 2], e[:, 3])


def project_zero_error(params: CollectiveAttackParams) -> CollectiveAttackParams:
    """Nearest member of the undetectable family: ``b = c = 0``, ``a = d`` (unit), ``e11 = e00``."""
    phase = params.a / abs(params.a) if abs(params.a) > 1e-12 else 1.0 + 0j
    return CollectiveAttackParams(phase, 0, 0, phase, params.e00, params.e01, params.e10, params.e00)


def overlap_internal_params(
    theta: float, rng: np.random.Generator, d_anc: int = INTERNAL_ANCILLA_DIM
) -> CollectiveAttackParams:
    """``a = d = 1``, ``b = c = 0`` with ``<e00|e11> = cos(theta)``: leaks ``sin(theta)``."""
    e = qcore.random_unitary(d_anc, rng)
    e00, v = e[:, 0], e[:, 1]
    e11 = math.cos(theta) * e00 + math.sin(theta) * v
    return CollectiveAttackParams(1, 0, 0, 1, e00, e[:, 2], e[:, 3], e11)


def random_external_params(rng: np.random.Generator, d_anc: int = EXTERNAL_ANCILLA_DIM) -> ExternalAttackParams:
    """Random coefficients with sixteen orthonormal ancilla states."""
    coeffs = np.array([_random_unit(rng, 4) for _ in range(4)])
    e = qcore.random_unitary(d_anc, rng)
    anc = np.array([[e[:, 4 * xy + k] for k in range(4)] for xy in range(4)])
    return ExternalAttackParams(coeffs, anc)


def project_zero_error_external(params: ExternalAttackParams) -> ExternalAttackParams:
    """Keep only the diagonal terms with one common phase and one shared ancilla state."""
    a0 = params.coeffs[0, 0]
    phase = a0 / abs(a0) if abs(a0) > 1e-12 else 1.0 + 0j
    coeffs = np.eye(4, dtype=complex) * phase
    anc = params.ancilla.copy()
    for xy in range(4):
        anc[xy, xy] = params.ancilla[0, 0]
    return ExternalAttackParams(coeffs, anc)


def overlap_external_params(
    theta: float, rng: np.random.Generator, d_anc: int = EXTERNAL_ANCILLA_DIM
) -> ExternalAttackParams:
    """Diagonal probe whose four ancilla states tilt by ``theta`` off a shared vector."""
    e = qcore.random_unitary(d_anc, rng)
    shared = e[:, 0]
    # off-diagonal coefficients are zero, so those ancilla slots never get populated
    anc = np.tile(shared, (4, 4, 1))
    for xy in range(4):
        anc[xy, xy] = math.cos(theta) * shared + math.sin(theta) * e[:, 1 + xy]
    return ExternalAttackParams(np.eye(4, dtype=complex), anc)


def sample_models(kind: str, count: int, seed: int) -> Iterable[AttackModel]:
    """Deterministic batches of collective attacks for property checks.

    ``kind`` is one of ``internal-zero``, ``internal-leaky``, ``external-zero``,
    ``external-leaky``. Leaky batches alternate fully random probes with
    small-overlap probes near the undetectable family.
    """
    rng = np.random.default_rng(seed)
    for i in range(count):
        if kind == "internal-zero":
            p = random_internal_params(rng)
            yield constrained_attack(project_zero_error(p), label=f"internal-zero#{i}")
        elif kind == "internal-leaky":
            if i % 2:
                p = overlap_internal_params(rng.uniform(0.11, math.pi / 2), rng)
                yield constrained_attack(p, label=f"internal-overlap#{i}")
            else:
                yield AttackModel.collective_internal(
                    qcore.random_unitary(2 * INTERNAL_ANCILLA_DIM, rng), label=f"internal-haar#{i}"
                )
        elif kind == "external-zero":
            p = random_external_params(rng)
            yield external_attack(project_zero_error_external(p), label=f"external-zero#{i}")
        elif kind == "external-leaky":
            if i % 2:
                p = overlap_external_params(rng.uniform(0.11, math.pi / 2), rng)
                yield external_attack(p, label=f"external-overlap#{i}")
            else:
                yield external_attack(random_external_params(rng), label=f"external-random#{i}")
        else:
            raise ValueError(f"unknown model batch {kind!r}")
