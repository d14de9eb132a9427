"""Purification attack demo: partial traces, purifications, cheating unitary.

The construction under test: any two pure states sharing the same reduced
state on one side are related by a unitary on the other side alone.  The
tests pin the textbook cases exactly and then hammer the constructor with
random shared-marginal pairs, where the fidelity certificate
|<psi1|(U_A x I)|psi0>| >= 1 - 1e-9 must hold case by case.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitcommit import (
    DensityMatrix,
    InsufficientAncillaError,
    NogoError,
    NotEquallyConcealingError,
    PureState,
    UnitaryMatrix,
    apply_on_A,
    cheating_unitary,
    fidelity,
    haar_unitary,
    partial_trace_A,
    random_density_matrix,
    random_purification,
    trace_distance,
    unitarity_defect,
)

RT2 = 1.0 / np.sqrt(2.0)


def bell_phi_plus():
    return PureState(2, 2, np.array([RT2, 0.0, 0.0, RT2], dtype=complex))


def bell_psi_plus():
    return PureState(2, 2, np.array([0.0, RT2, RT2, 0.0], dtype=complex))


class TestStateTypes:
    def test_norm_enforced(self):
        with pytest.raises(NogoError):
            PureState(2, 2, np.array([1.0, 1.0, 0.0, 0.0], dtype=complex))

    def test_length_must_match_dims(self):
        with pytest.raises(NogoError):
            PureState(2, 3, np.zeros(5, dtype=complex))

    def test_as_matrix_shape(self):
        psi = bell_phi_plus()
        m = psi.as_matrix()
        assert m.shape == (2, 2)
        assert m[0, 0] == pytest.approx(RT2)
        assert m[1, 1] == pytest.approx(RT2)

    def test_density_matrix_invariants(self):
        with pytest.raises(NogoError):
            DensityMatrix(2, np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex))
        with pytest.raises(NogoError):
            DensityMatrix(2, np.array([[0.9, 0.0], [0.0, 0.2]], dtype=complex))
        with pytest.raises(NogoError):  # negative eigenvalue
            DensityMatrix(2, np.array([[0.75, 0.5], [0.5, 0.25]], dtype=complex))

    def test_unitary_invariant(self):
        with pytest.raises(NogoError):
            UnitaryMatrix(2, np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex))
        u = UnitaryMatrix(2, np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
        assert unitarity_defect(u.entries) <= 1e-15


class TestPartialTrace:
    def test_bell_state_gives_maximally_mixed(self):
        rho = partial_trace_A(bell_phi_plus())
        assert np.allclose(rho.entries, np.eye(2) / 2, atol=1e-14)

    def test_product_state_gives_pure_marginal(self):
        plus = np.array([RT2, RT2], dtype=complex)
        amp = np.kron(np.array([1.0, 0.0], dtype=complex), plus)
        rho = partial_trace_A(PureState(2, 2, amp))
        assert np.allclose(rho.entries, np.outer(plus, plus.conj()), atol=1e-14)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(5)
        amp = rng.normal(size=9) + 1j * rng.normal(size=9)
        amp /= np.linalg.norm(amp)
        psi = PureState(3, 3, amp)
        rho = partial_trace_A(psi)
        # definition-level summation: rho[j, j'] = sum_i psi[i,j] conj(psi[i,j'])
        m = amp.reshape(3, 3)
        oracle = np.zeros((3, 3), dtype=complex)
        for j in range(3):
            for jp in range(3):
                for i in range(3):
                    oracle[j, jp] += m[i, j] * np.conj(m[i, jp])
        assert np.max(np.abs(rho.entries - oracle)) < 1e-12

    def test_output_is_valid_density_matrix(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            amp = rng.normal(size=12) + 1j * rng.normal(size=12)
            amp /= np.linalg.norm(amp)
            rho = partial_trace_A(PureState(4, 3, amp))  # invariants run in ctor
            assert rho.dim == 3


class TestRandomPurification:
    def test_pure_input_gives_product_purification(self):
        rho = DensityMatrix(2, np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))
        psi = random_purification(rho, 1, np.random.default_rng(0))
        assert psi.dim_a == 1 and psi.dim_b == 2
        assert abs(abs(psi.amplitudes[0]) - 1.0) < 1e-12

    def test_maximally_mixed_gives_flat_schmidt_spectrum(self):
        rho = DensityMatrix(2, np.eye(2, dtype=complex) / 2)
        psi = random_purification(rho, 2, np.random.default_rng(1))
        s = np.linalg.svd(psi.as_matrix(), compute_uv=False)
        assert np.allclose(s, [RT2, RT2], atol=1e-10)

    def test_round_trip_recovers_rho(self):
        rng = np.random.default_rng(2)
        rho = random_density_matrix(4, rng, rank=3)
        psi = random_purification(rho, 4, rng)
        back = partial_trace_A(psi)
        assert np.max(np.abs(back.entries - rho.entries)) < 1e-10

    def test_insufficient_ancilla_rejected(self):
        rng = np.random.default_rng(3)
        rho = random_density_matrix(4, rng, rank=3)
        with pytest.raises(InsufficientAncillaError, match="insufficient ancilla"):
            random_purification(rho, 2, rng)

    def test_rank_validation(self):
        with pytest.raises(NogoError, match="rank"):
            random_density_matrix(3, np.random.default_rng(4), rank=5)


class TestFidelity:
    def test_identical_states(self):
        assert fidelity(bell_phi_plus(), bell_phi_plus()) == pytest.approx(1.0)

    def test_orthogonal_states(self):
        assert fidelity(bell_phi_plus(), bell_psi_plus()) == pytest.approx(0.0, abs=1e-15)

    def test_superposition_overlap(self):
        a = PureState(1, 2, np.array([RT2, RT2], dtype=complex))
        b = PureState(1, 2, np.array([1.0, 0.0], dtype=complex))
        assert fidelity(a, b) == pytest.approx(0.70710678, abs=1e-8)

    def test_dimension_mismatch(self):
        a = PureState(1, 2, np.array([1.0, 0.0], dtype=complex))
        b = PureState(2, 2, np.array([1.0, 0.0, 0.0, 0.0], dtype=complex))
        with pytest.raises(NogoError):
            fidelity(a, b)

    def test_global_phase_invariance(self):
        amp = bell_phi_plus().amplitudes * np.exp(1j * 0.7)
        assert fidelity(PureState(2, 2, amp), bell_phi_plus()) == pytest.approx(1.0)


class TestCheatingUnitary:
    def test_identical_states_give_identity_up_to_phase(self):
        u = cheating_unitary(bell_phi_plus(), bell_phi_plus())
        phase = u.entries[0, 0]
        assert abs(abs(phase) - 1.0) < 1e-10
        assert np.allclose(u.entries, phase * np.eye(2), atol=1e-9)

    def test_bell_pair_related_by_pauli_x(self):
        u = cheating_unitary(bell_phi_plus(), bell_psi_plus())
        x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        # fix the global phase against X before comparing
        k = np.argmax(np.abs(u.entries))
        phase = u.entries.flat[k] / x.flat[k]
        assert abs(abs(phase) - 1.0) < 1e-10
        assert np.allclose(u.entries, phase * x, atol=1e-9)

    def test_mismatched_marginals_rejected(self):
        zero_zero = PureState(2, 2, np.array([1, 0, 0, 0], dtype=complex))
        with pytest.raises(NotEquallyConcealingError, match="not equally concealing"):
            cheating_unitary(zero_zero, bell_phi_plus())

    def test_tolerance_gates_the_marginal_check(self):
        zero_zero = PureState(2, 2, np.array([1, 0, 0, 0], dtype=complex))
        # trace distance of the marginals is 0.5; a huge tol lets it through
        u = cheating_unitary(zero_zero, bell_phi_plus(), tol=0.9)
        assert unitarity_defect(u.entries) <= 1e-10

    def test_degenerate_flat_marginal(self):
        # I/d marginals put every Schmidt value in one degenerate block
        rng = np.random.default_rng(7)
        rho = DensityMatrix(4, np.eye(4, dtype=complex) / 4)
        psi0 = random_purification(rho, 4, rng)
        psi1 = random_purification(rho, 4, rng)
        u = cheating_unitary(psi0, psi1)
        assert fidelity(apply_on_A(u, psi0), psi1) >= 1.0 - 1e-9

    def test_random_shared_marginal_cases(self):
        rng = np.random.default_rng(8)
        for trial in range(50):
            dim = int(rng.integers(2, 5))
            rank = int(rng.integers(1, dim + 1))
            rho = random_density_matrix(dim, rng, rank=rank)
            psi0 = random_purification(rho, dim, rng)
            psi1 = random_purification(rho, dim, rng)
            u = cheating_unitary(psi0, psi1)
            assert unitarity_defect(u.entries) <= 1e-10
            assert fidelity(apply_on_A(u, psi0), psi1) >= 1.0 - 1e-9, trial

    def test_rectangular_systems(self):
        # ancilla strictly larger than the evidence side
        rng = np.random.default_rng(9)
        rho = random_density_matrix(3, rng, rank=2)
        psi0 = random_purification(rho, 5, rng)
        psi1 = random_purification(rho, 5, rng)
        u = cheating_unitary(psi0, psi1)
        assert u.dim == 5
        assert fidelity(apply_on_A(u, psi0), psi1) >= 1.0 - 1e-9

    def test_dimension_mismatch_rejected(self):
        a = bell_phi_plus()
        rng = np.random.default_rng(10)
        rho = random_density_matrix(3, rng, rank=2)
        b = random_purification(rho, 2, rng)
        with pytest.raises(NogoError):
            cheating_unitary(a, b)


class TestSupportFunctions:
    def test_haar_unitary_is_unitary(self):
        for seed in range(5):
            u = haar_unitary(6, np.random.default_rng(seed))
            assert unitarity_defect(u) <= 1e-12

    def test_trace_distance_extremes(self):
        rho0 = DensityMatrix(2, np.diag([1.0, 0.0]).astype(complex))
        rho1 = DensityMatrix(2, np.diag([0.0, 1.0]).astype(complex))
        assert trace_distance(rho0, rho1) == pytest.approx(1.0)
        assert trace_distance(rho0, rho0) == pytest.approx(0.0, abs=1e-15)

    def test_apply_on_A_preserves_norm(self):
        u = UnitaryMatrix(2, np.array([[0, 1], [1, 0]], dtype=complex))
        out = apply_on_A(u, bell_phi_plus())
        assert out.dim_a == 2 and out.dim_b == 2
        assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0)


@given(
    seed=st.integers(min_value=0, max_value=10_000),
    dim_a=st.integers(min_value=1, max_value=4),
    dim_b=st.integers(min_value=1, max_value=4),
)
@settings(max_examples=40, deadline=None)
def test_partial_trace_round_trip_property(seed, dim_a, dim_b):
    rng = np.random.default_rng(seed)
    n = dim_a * dim_b
    amp = rng.normal(size=n) + 1j * rng.normal(size=n)
    amp /= np.linalg.norm(amp)
    psi = PureState(dim_a, dim_b, amp)
    rho = partial_trace_A(psi)
    # purify back with enough ancilla and re-trace
    psi2 = random_purification(rho, dim_a, rng)
    rho2 = partial_trace_A(psi2)
    assert np.max(np.abs(rho2.entries - rho.entries)) < 1e-10


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_cheating_unitary_certificate_property(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 5))
    rho = random_density_matrix(dim, rng)
    psi0 = random_purification(rho, dim, rng)
    psi1 = random_purification(rho, dim, rng)
    u = cheating_unitary(psi0, psi1)
    assert unitarity_defect(u.entries) <= 1e-10
    assert fidelity(apply_on_A(u, psi0), psi1) >= 1.0 - 1e-9
