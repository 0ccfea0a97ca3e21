import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterqkd import qcore
from clusterqkd.qcore import BellOutcome, H, QuantumStateError

Phi_p, Phi_m, Psi_p, Psi_m = (qcore.bell_state(k) for k in qcore.BELL_ORDER)


def test_cluster4_amplitudes():
    c = qcore.cluster4()
    expected = {0b0000: 0.5, 0b0110: 0.5, 0b1001: 0.5, 0b1111: -0.5}
    for i, amp in enumerate(c):
        assert amp == pytest.approx(expected.get(i, 0.0), abs=1e-12)
    assert np.vdot(c, c).real == pytest.approx(1.0, abs=1e-12)


def test_cluster_z14_outcome_00_leaves_phi_plus_on_23():
    c = qcore.cluster4()
    _, post = qcore.measure_z(c, 0, 0.1)
    _, post = qcore.measure_z(post, 3, 0.1)
    # qubits 0 and 3 are now |0>; read off the middle pair
    middle = post.reshape(2, 2, 2, 2)[0, :, :, 0].reshape(-1)
    assert qcore.equal_up_to_phase(middle, Phi_p)


def test_bell_states_orthonormal():
    vecs = [qcore.bell_state(k) for k in qcore.BELL_ORDER]
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.allclose(gram, np.eye(4), atol=1e-12)
    assert np.allclose(Phi_p, np.array([1, 0, 0, 1]) / math.sqrt(2))


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=4, max_size=4))
def test_bell_completeness(amps):
    psi = np.array(amps, dtype=complex)
    if np.linalg.norm(psi) < 1e-3:
        return
    psi /= np.linalg.norm(psi)
    total = sum(abs(np.vdot(qcore.bell_state(k), psi)) ** 2 for k in qcore.BELL_ORDER)
    assert total == pytest.approx(1.0, abs=1e-9)


def test_apply_h_to_zero():
    out = qcore.apply_unitary(qcore.basis_state("0"), H, [0])
    assert np.allclose(out, [1 / math.sqrt(2), 1 / math.sqrt(2)])


HH = np.kron(H, H)


@pytest.mark.parametrize(
    "before, after, phase",
    [(Phi_p, Phi_p, 1), (Phi_m, Psi_p, 1), (Psi_p, Phi_m, 1), (Psi_m, Psi_m, -1)],
    ids=["phi+", "phi-", "psi+", "psi-"],
)
def test_hadamard_on_bell_table(before, after, phase):
    out = qcore.apply_unitary(before, HH, [0, 1])
    # amplitude level, including the -1 on psi-
    assert np.allclose(out, phase * after, atol=1e-9)
    assert qcore.equal_up_to_phase(out, after)


def test_cluster_regroupings():
    c = qcore.cluster4()
    ket0, ket1 = qcore.basis_state("0"), qcore.basis_state("1")
    bell_bell = 0.5 * (
        qcore.tensor(Phi_p, Phi_m) + qcore.tensor(Phi_m, Phi_p) + qcore.tensor(Psi_p, Psi_p) - qcore.tensor(Psi_m, Psi_m)
    )
    assert np.allclose(bell_bell, c, atol=1e-9)

    # factors laid out as (q1, q4, q2, q3) then reordered to (q1, q2, q3, q4)
    pair14 = (qcore.tensor(Phi_p, ket0, ket0) + qcore.tensor(Phi_m, ket1, ket1)) / math.sqrt(2)
    assert np.allclose(qcore.permute_qubits(pair14, [0, 2, 3, 1]), c, atol=1e-9)

    pair23 = (qcore.tensor(ket0, Phi_p, ket0) + qcore.tensor(ket1, Phi_m, ket1)) / math.sqrt(2)
    assert np.allclose(pair23, c, atol=1e-9)


def test_apply_unitary_respects_target_order():
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    psi = qcore.basis_state("010")
    # control qubit 1, target qubit 2
    assert np.allclose(qcore.apply_unitary(psi, cnot, [1, 2]), qcore.basis_state("011"))
    # control qubit 2 (|0>), target qubit 1: nothing happens
    assert np.allclose(qcore.apply_unitary(psi, cnot, [2, 1]), psi)


@pytest.mark.parametrize(
    "u, targets",
    [(np.eye(4), [0]), (H, [0, 1]), (H, [5]), (np.eye(4), [1, 1])],
    ids=["dim-mismatch", "too-many-targets", "out-of-range", "duplicate"],
)
def test_apply_unitary_errors(u, targets):
    with pytest.raises(QuantumStateError):
        qcore.apply_unitary(qcore.cluster4(), u, targets)


unitaries_2q = st.integers(0, 2**32 - 1).map(lambda s: qcore.random_unitary(4, np.random.default_rng(s)))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), unitaries_2q, st.permutations([0, 1, 2, 3]))
def test_norm_preserved(seed, u, perm):
    psi = qcore.random_unitary(16, np.random.default_rng(seed))[:, 0]
    out = qcore.apply_unitary(psi, u, perm[:2])
    assert abs(np.linalg.norm(out) - 1) < 1e-9


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_hadamard_involution(seed, q):
    psi = qcore.random_unitary(16, np.random.default_rng(seed))[:, 0]
    twice = qcore.apply_unitary(qcore.apply_unitary(psi, H, [q]), H, [q])
    assert np.allclose(twice, psi, atol=1e-9)


def test_measure_z_cluster_marginal():
    assert qcore.z_probabilities(qcore.cluster4(), 0) == pytest.approx((0.5, 0.5), abs=1e-12)


def test_measure_z_eigenstate():
    for draw in (0.0, 0.5, 0.999999):
        bit, post = qcore.measure_z(qcore.basis_state("0"), 0, draw)
        assert bit == 0 and np.allclose(post, qcore.basis_state("0"))


def test_sequential_z_on_cluster_enumerates_four_patterns():
    # brute force: enumerate every branch of the four sequential measurements
    weights = {}

    def walk(state, q, prefix, w):
        if q == 4:
            weights[prefix] = weights.get(prefix, 0.0) + w
            return
        p0, p1 = qcore.z_probabilities(state, q)
        for bit, p in ((0, p0), (1, p1)):
            if p > 1e-15:
                draw = 0.0 if bit == 0 else 1 - 1e-12
                _, post = qcore.measure_z(state, q, draw)
                walk(post, q + 1, prefix + str(bit), w * p)

    walk(qcore.cluster4(), 0, "", 1.0)
    assert set(weights) == {"0000", "0110", "1001", "1111"}
    assert all(w == pytest.approx(0.25, abs=1e-12) for w in weights.values())


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.floats(0, 0.999999))
def test_collapse_idempotent_and_complete(seed, q, draw):
    psi = qcore.random_unitary(16, np.random.default_rng(seed))[:, 0]
    assert sum(qcore.z_probabilities(psi, q)) == pytest.approx(1.0, abs=1e-9)
    bit, post = qcore.measure_z(psi, q, draw)
    again = qcore.z_probabilities(post, q)
    assert again[bit] == pytest.approx(1.0, abs=1e-9)


def test_measure_bell_eigenstate():
    kind, post = qcore.measure_bell(Phi_p, 0, 1, 0.73)
    assert kind is BellOutcome.PhiPlus
    assert qcore.equal_up_to_phase(post, Phi_p)


def test_measure_bell_on_00():
    probs = qcore.bell_probabilities(qcore.basis_state("00"), 0, 1)
    assert probs[BellOutcome.PhiPlus] == pytest.approx(0.5)
    assert probs[BellOutcome.PhiMinus] == pytest.approx(0.5)
    assert probs[BellOutcome.PsiPlus] == pytest.approx(0.0, abs=1e-15)


def test_measure_bell_case4_state_uniform():
    state = qcore.apply_unitary(qcore.cluster4(), np.kron(H, H), [0, 1])
    probs = qcore.bell_probabilities(state, 2, 3)
    # oracle: expand the Case-04 decomposition term by term
    ket = {b: qcore.basis_state(b) for b in ("00", "01", "10", "11")}
    expansion = 0.5 * (
        qcore.tensor(ket["00"], (Phi_m + Psi_p) / math.sqrt(2))
        + qcore.tensor(ket["11"], (Phi_m - Psi_p) / math.sqrt(2))
        + qcore.tensor(ket["01"], (Phi_p + Psi_m) / math.sqrt(2))
        + qcore.tensor(ket["10"], (Phi_p - Psi_m) / math.sqrt(2))
    )
    assert np.allclose(expansion, state, atol=1e-12)
    oracle = {}
    for k in qcore.BELL_ORDER:
        v = qcore.bell_state(k)
        amps = expansion.reshape(4, 4) @ v.conj()
        oracle[k] = float(np.vdot(amps, amps).real)
    for k in qcore.BELL_ORDER:
        assert probs[k] == pytest.approx(0.25, abs=1e-12)
        assert oracle[k] == pytest.approx(probs[k], abs=1e-12)


def test_measure_bell_requires_distinct_qubits():
    with pytest.raises(QuantumStateError):
        qcore.measure_bell(qcore.cluster4(), 2, 2, 0.1)


def test_partial_trace_examples():
    assert np.allclose(qcore.partial_trace(Phi_p, [0]), np.eye(2) / 2)
    psi = qcore.random_unitary(8, np.random.default_rng(3))[:, 0]
    assert np.allclose(qcore.partial_trace(psi, [0, 1, 2]), np.outer(psi, psi.conj()))
    rho1 = qcore.partial_trace(qcore.cluster4(), [0])
    assert np.allclose(rho1, np.eye(2) / 2, atol=1e-12)
    qcore.validate_density(qcore.partial_trace(qcore.cluster4(), [1, 3]))
    with pytest.raises(QuantumStateError):
        qcore.partial_trace(Phi_p, [])


def test_partial_trace_keep_order_swaps_factors():
    psi = qcore.tensor(qcore.basis_state("0"), qcore.basis_state("1"))
    assert np.allclose(qcore.partial_trace(psi, [1, 0]), np.diag([0, 0, 1, 0]))


@pytest.mark.parametrize(
    "dist, expected",
    [((0.5, 0.5), 1.0), ((1, 0, 0, 0), 0.0), ((0.25, 0.25, 0.25, 0.25), 2.0)],
)
def test_shannon_entropy(dist, expected):
    assert qcore.shannon_entropy(dist) == pytest.approx(expected, abs=1e-12)


def test_shannon_entropy_rejects_bad_input():
    with pytest.raises(ValueError):
        qcore.shannon_entropy([0.6, 0.6])
    with pytest.raises(ValueError):
        qcore.shannon_entropy([1.2, -0.2])


def test_binary_entropy():
    assert qcore.binary_entropy(0.5) == 1.0
    assert qcore.binary_entropy(0.0) == 0.0
    assert qcore.binary_entropy(1.0) == 0.0
    assert qcore.binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)
    with pytest.raises(ValueError):
        qcore.binary_entropy(1.5)


def test_von_neumann_entropy():
    assert qcore.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)
    assert qcore.von_neumann_entropy(qcore.density(Psi_m)) == pytest.approx(0.0, abs=1e-9)
    assert qcore.von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(0.81128, abs=1e-5)
    with pytest.raises(QuantumStateError):
        qcore.von_neumann_entropy(np.diag([0.7, 0.7]))


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.sampled_from([[0], [1, 2], [0, 1, 3]]))
def test_entropy_bounds(seed, keep):
    psi = qcore.random_unitary(16, np.random.default_rng(seed))[:, 0]
    rho = qcore.partial_trace(psi, keep)
    s = qcore.von_neumann_entropy(rho)
    assert -1e-9 <= s <= len(keep) + 1e-9


def test_trace_distance():
    zero, one = qcore.density(qcore.basis_state("0")), qcore.density(qcore.basis_state("1"))
    plus = qcore.density(qcore.apply_unitary(qcore.basis_state("0"), H, [0]))
    assert qcore.trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-12)
    assert qcore.trace_distance(zero, one) == pytest.approx(1.0)
    assert qcore.trace_distance(zero, plus) == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    with pytest.raises(QuantumStateError):
        qcore.trace_distance(zero, np.eye(4) / 4)


def test_validate_state():
    with pytest.raises(QuantumStateError):
        qcore.validate_state(np.array([1, 1, 0], dtype=complex))
    with pytest.raises(QuantumStateError):
        qcore.validate_state(np.array([1, 1], dtype=complex))
    with pytest.raises(QuantumStateError):
        qcore.validate_state(np.array([np.nan, 0], dtype=complex))
    qcore.validate_state(qcore.cluster4())


def test_random_unitary_is_unitary(rng):
    for dim in (2, 8, 64):
        assert qcore.is_unitary(qcore.random_unitary(dim, rng))
