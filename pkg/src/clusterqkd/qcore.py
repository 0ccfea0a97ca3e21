"""Exact small-register state algebra.

States are plain ``numpy`` complex vectors of length ``2**n``. Qubit ``0`` is
the most-significant bit of the basis index, so ``|q0 q1 q2 q3>`` sits at index
``q0*8 + q1*4 + q2*2 + q3``. Qubit indices in this package are 0-based; the
protocol's "qubit 1" is index 0.

Density matrices are ``numpy`` complex square arrays. All entropies are base 2.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

ATOL = 1e-9

SQRT1_2 = 1.0 / math.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
H = SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class BellOutcome(enum.Enum):
    PhiPlus = "PhiPlus"
    PhiMinus = "PhiMinus"
    PsiPlus = "PsiPlus"
    PsiMinus = "PsiMinus"


BELL_ORDER = (BellOutcome.PhiPlus, BellOutcome.PhiMinus, BellOutcome.PsiPlus, BellOutcome.PsiMinus)

_BELL_VECTORS = {
    BellOutcome.PhiPlus: SQRT1_2 * np.array([1, 0, 0, 1], dtype=complex),
    BellOutcome.PhiMinus: SQRT1_2 * np.array([1, 0, 0, -1], dtype=complex),
    BellOutcome.PsiPlus: SQRT1_2 * np.array([0, 1, 1, 0], dtype=complex),
    BellOutcome.PsiMinus: SQRT1_2 * np.array([0, 1, -1, 0], dtype=complex),
}

# Rows are <bell_k|, so applying this on a pair maps Bell state k to |k>.
BELL_BASIS_CHANGE = np.array([_BELL_VECTORS[k].conj() for k in BELL_ORDER])


class QuantumStateError(ValueError):
    """Raised for malformed states, operators, or qubit index lists."""


# --- construction ---------------------------------------------------------


def num_qubits(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or state.shape[0] != 1 << n or n < 1:
        raise QuantumStateError(f"state length {state.shape} is not a power of two >= 2")
    return n


def validate_state(state: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Return ``state`` as a complex vector after checking length, finiteness and norm."""
    state = np.asarray(state, dtype=complex)
    num_qubits(state)
    if not np.all(np.isfinite(state)):
        raise QuantumStateError("state has non-finite amplitudes")
    norm = float(np.vdot(state, state).real)
    if abs(norm - 1.0) > atol:
        raise QuantumStateError(f"state norm^2 is {norm}, expected 1")
    return state


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis ket, e.g. ``basis_state("0110")``."""
    bits = [int(b) for b in bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise QuantumStateError(f"invalid bit string {bits!r}")
    out = np.zeros(1 << len(bits), dtype=complex)
    out[int("".join(map(str, bits)), 2)] = 1.0
    return out


def tensor(*parts: np.ndarray) -> np.ndarray:
    """Kronecker product of kets or operators, left factor most significant."""
    out = np.array([1.0 + 0j]) if parts[0].ndim == 1 else np.eye(1, dtype=complex)
    for p in parts:
        out = np.kron(out, p)
    return out


def bell_state(kind: BellOutcome) -> np.ndarray:
    return _BELL_VECTORS[BellOutcome(kind)].copy()


def cluster4() -> np.ndarray:
    """The four-qubit cluster state ``(|0000> + |0110> + |1001> - |1111>) / 2``."""
    out = np.zeros(16, dtype=complex)
    out[0b0000] = 0.5
    out[0b0110] = 0.5
    out[0b1001] = 0.5
    out[0b1111] = -0.5
    return out


def permute_qubits(state: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``k`` of the result is qubit ``order[k]`` of the input."""
    n = num_qubits(state)
    _check_targets(order, n)
    if len(order) != n:
        raise QuantumStateError("permutation must list every qubit")
    return state.reshape((2,) * n).transpose(order).reshape(-1)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0
    )


# --- evolution and measurement -------------------------------------------


def _check_targets(targets: Sequence[int], n: int) -> None:
    if len(set(targets)) != len(targets):
        raise QuantumStateError(f"duplicate qubit index in {list(targets)}")
    for t in targets:
        if not 0 <= t < n:
            raise QuantumStateError(f"qubit index {t} out of range for {n} qubits")


def apply_unitary(state: np.ndarray, u: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply ``u`` to the ordered ``targets`` (first target = most significant factor of ``u``)."""
    n = num_qubits(state)
    targets = list(targets)
    _check_targets(targets, n)
    k = len(targets)
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << k, 1 << k):
        raise QuantumStateError(f"operator shape {u.shape} does not match {k} target qubits")
    psi = state.reshape((2,) * n)
    psi = np.tensordot(u.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), targets))
    # tensordot puts the new target axes first; move them back into place
    rest = [q for q in range(n) if q not in targets]
    inverse = np.argsort(targets + rest)
    return psi.transpose(inverse).reshape(-1)


def _pick(probs: Sequence[float], draw: float) -> int:
    if not 0.0 <= draw < 1.0:
        raise QuantumStateError(f"draw {draw} outside [0, 1)")
    total = float(sum(probs))
    acc = 0.0
    chosen = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p / total
        if draw < acc:
            chosen = i
            break
    # float round-off can land past the last nonzero branch
    while probs[chosen] <= 0.0 and chosen > 0:
        chosen -= 1
    if probs[chosen] <= 0.0:
        raise QuantumStateError("selected a zero-probability branch")
    return chosen


def z_probabilities(state: np.ndarray, target: int) -> tuple[float, float]:
    n = num_qubits(state)
    _check_targets([target], n)
    psi = np.moveaxis(state.reshape((2,) * n), target, 0).reshape(2, -1)
    p = np.einsum("ij,ij->i", psi.conj(), psi).real
    return float(p[0]), float(p[1])


def measure_z(state: np.ndarray, target: int, draw: float) -> tuple[int, np.ndarray]:
    """Projective Z measurement; returns the bit and the renormalised post-measurement state."""
    n = num_qubits(state)
    probs = z_probabilities(state, target)
    bit = _pick(probs, draw)
    psi = state.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[target] = 1 - bit
    psi[tuple(idx)] = 0.0
    return bit, psi.reshape(-1) / math.sqrt(probs[bit])


def bell_probabilities(state: np.ndarray, t1: int, t2: int) -> dict[BellOutcome, float]:
    n = num_qubits(state)
    if t1 == t2:
        raise QuantumStateError("Bell measurement needs two distinct qubits")
    _check_targets([t1, t2], n)
    rotated = apply_unitary(state, BELL_BASIS_CHANGE, [t1, t2])
    psi = np.moveaxis(rotated.reshape((2,) * n), [t1, t2], [0, 1]).reshape(4, -1)
    p = np.einsum("ij,ij->i", psi.conj(), psi).real
    return {k: float(p[i]) for i, k in enumerate(BELL_ORDER)}


def measure_bell(state: np.ndarray, t1: int, t2: int, draw: float) -> tuple[BellOutcome, np.ndarray]:
    """Project the pair ``(t1, t2)`` onto the Bell basis with Born probability."""
    probs = bell_probabilities(state, t1, t2)
    i = _pick([probs[k] for k in BELL_ORDER], draw)
    kind = BELL_ORDER[i]
    v = _BELL_VECTORS[kind]
    projector = np.outer(v, v.conj())
    post = apply_unitary(state, projector, [t1, t2])
    return kind, post / math.sqrt(probs[kind])


# --- density matrices ----------------------------------------------------


def density(state: np.ndarray) -> np.ndarray:
    return np.outer(state, state.conj())


def partial_trace(state: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of ``keep`` (in the given order) from a pure state."""
    n = num_qubits(state)
    keep = list(keep)
    if not keep:
        raise QuantumStateError("keep must be non-empty")
    _check_targets(keep, n)
    rest = [q for q in range(n) if q not in keep]
    psi = state.reshape((2,) * n).transpose(keep + rest).reshape(1 << len(keep), -1)
    return psi @ psi.conj().T


def validate_density(rho: np.ndarray, atol: float = ATOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise QuantumStateError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise QuantumStateError("density matrix has non-finite entries")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise QuantumStateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise QuantumStateError(f"density matrix trace is {tr}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise QuantumStateError("density matrix has a negative eigenvalue")
    return rho


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = ATOL) -> bool:
    """Amplitude equality after removing the phase of ``a``'s first nonzero entry."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    nz = np.flatnonzero(np.abs(a) > atol)
    if nz.size == 0:
        return bool(np.allclose(b, 0, atol=atol))
    i = nz[0]
    if abs(b[i]) <= atol:
        return False
    phase = (a[i] / abs(a[i])) / (b[i] / abs(b[i]))
    return bool(np.allclose(a, phase * b, atol=atol, rtol=0))


# --- entropies -----------------------------------------------------------


def _xlog2x(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def shannon_entropy(dist: Sequence[float]) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = np.asarray(dist, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a non-empty 1-D sequence")
    if np.any(p < 0) or abs(p.sum() - 1.0) > ATOL:
        raise ValueError(f"not a probability distribution: {dist!r}")
    return float(max(0.0, -_xlog2x(p).sum()))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary entropy argument {p} outside [0, 1]")
    return float(-_xlog2x(np.array([p, 1.0 - p])).sum())


def von_neumann_entropy(rho: np.ndarray) -> float:
    rho = validate_density(rho)
    lam = np.linalg.eigvalsh(rho)
    lam = np.where(lam < 0, 0.0, lam)
    return float(max(0.0, -_xlog2x(lam).sum()))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    rho = validate_density(rho)
    sigma = validate_density(sigma)
    if rho.shape != sigma.shape:
        raise QuantumStateError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    d = 0.5 * float(np.abs(np.linalg.eigvalsh(rho - sigma)).sum())
    return min(1.0, max(0.0, d))
