import math

import numpy as np
import pytest

from qdist import hilbert_sphere as hs
from qdist.dist_core import QuadratureSpec
from qdist.errors import DegenerateState, IndexTooLarge, InvalidState, PropagatorCaustic


def random_tangent(state, rng):
    dc = rng.normal(size=state.dim) + 1j * rng.normal(size=state.dim)
    return hs.tangent_projection(state, dc)


class TestAmplitudeState:
    def test_norm_enforced(self):
        with pytest.raises(InvalidState):
            hs.AmplitudeState([1.0, 1.0], [0, 1])

    def test_distinct_labels(self):
        with pytest.raises(InvalidState):
            hs.AmplitudeState.normalized([1.0, 1.0], [2, 2])

    def test_padded(self):
        s = hs.AmplitudeState.normalized([1.0, 1j], [0, 1]).padded(2)
        assert s.labels.tolist() == [0, 1, 2, 3]
        assert s.coeffs[2:].tolist() == [0, 0]

    def test_tangent_projection(self, rng):
        s = hs.AmplitudeState.random(4, rng)
        dc = random_tangent(s, rng)
        assert abs(np.real(np.vdot(s.coeffs, dc))) < 1e-14


class TestFreeParticle:
    def test_diagonal_overlap(self):
        basis = hs.FreeParticleCircle(time=0.37)
        x = np.linspace(0, 2 * np.pi, 7)
        np.testing.assert_allclose(hs.overlap_density(basis, 3, 3, x), 1 / (2 * np.pi), rtol=1e-15)

    def test_phase_at_quarter_turn(self):
        basis = hs.FreeParticleCircle(time=0.0)
        assert hs.overlap_density(basis, 1, 0, np.pi / 2) == pytest.approx(1j / (2 * np.pi), abs=1e-16)

    def test_time_phase(self):
        basis = hs.FreeParticleCircle(mass=2.0, time=0.8)
        x = 0.3
        expected = np.exp(1j * (x * (2 - -1) - 0.8 / 4 * (4 - 1))) / (2 * np.pi)
        assert hs.overlap_density(basis, 2, -1, x) == pytest.approx(expected, rel=1e-14)

    def test_two_mode_density(self):
        basis = hs.FreeParticleCircle()
        state = hs.AmplitudeState.normalized([1, 1], [0, 1])
        x = np.linspace(0, 2 * np.pi, 50)
        np.testing.assert_allclose(hs.probability(basis, state, x), (1 + np.cos(x)) / (2 * np.pi), atol=1e-15)

    def test_degenerate_guard(self):
        basis = hs.FreeParticleCircle()
        state = hs.AmplitudeState.normalized([1, 1], [0, 1])
        with pytest.raises(DegenerateState):
            hs.a_integral(basis, state, (0, 0, 0, 0))
        with pytest.raises(DegenerateState):
            hs.sphere_metric(basis, state)

    def test_metric_matches_definition(self, rng):
        basis = hs.FreeParticleCircle(time=0.6)
        state = hs.AmplitudeState(np.array([0.8, 0.6j * np.exp(0.3j)]), np.array([-1, 2]))
        met, fd = hs.sphere_metric(basis, state), hs.sphere_metric_fd(basis, state)
        np.testing.assert_allclose(met.g, fd.g, atol=1e-5)
        np.testing.assert_allclose(met.g_mixed, fd.g_mixed, atol=1e-5)


class TestOscillatorOverlaps:
    def test_ground_state_peak(self):
        basis = hs.HarmonicOscillator(time=0.7)
        assert hs.overlap_density(basis, 0, 0, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)

    def test_propagator_agrees(self):
        basis = hs.HarmonicOscillator(time=0.7)
        x = np.linspace(-2, 2, 9)
        for m, n in [(0, 0), (1, 0), (2, 3)]:
            np.testing.assert_allclose(hs.propagator_overlap(basis, m, n, x), hs.overlap_density(basis, m, n, x), atol=1e-6)

    def test_hermitian(self, rng):
        basis = hs.HarmonicOscillator(mass=1.3, omega=0.7, time=0.4)
        x = rng.normal(size=20)
        for m in range(6):
            for n in range(6):
                np.testing.assert_allclose(hs.overlap_density(basis, m, n, x),
                                           np.conj(hs.overlap_density(basis, n, m, x)), rtol=1e-14)

    def test_orthonormal(self):
        basis = hs.HarmonicOscillator(time=0.5)
        np.testing.assert_allclose(hs.orthonormality_matrix(basis, range(9)), np.eye(9), atol=1e-8)

    def test_index_limit(self):
        with pytest.raises(IndexTooLarge):
            hs.overlap_density(hs.HarmonicOscillator(), 31, 0, 0.0)

    def test_stationary_state(self):
        x = np.linspace(-4, 4, 101)
        state = hs.AmplitudeState(np.array([1j]), np.array([2]))
        p1 = hs.probability(hs.HarmonicOscillator(time=0.3), state, x)
        p2 = hs.probability(hs.HarmonicOscillator(time=0.9), state, x)
        assert np.max(np.abs(p1 - p2)) < 1e-9

    def test_caustic(self):
        basis = hs.HarmonicOscillator(time=np.pi)
        with pytest.raises(PropagatorCaustic):
            hs.propagator_overlap(basis, 0, 0, 0.0)
        with pytest.raises(PropagatorCaustic):
            hs.sphere_metric(basis, hs.AmplitudeState.normalized([1, 1j]), mode="diagonal")


class TestNormalization:
    @pytest.mark.parametrize("basis", [hs.HarmonicOscillator(time=0.4), hs.FreeParticleCircle(time=0.4)],
                             ids=["oscillator", "circle"])
    def test_random_states(self, basis, rng):
        for _ in range(10):
            state = hs.AmplitudeState.random(5, rng)
            assert hs.normalization(basis, state) == pytest.approx(1.0, abs=1e-8)

    def test_global_phase(self, rng):
        basis = hs.HarmonicOscillator(time=0.4)
        state = hs.AmplitudeState.random(3, rng)
        x = np.linspace(-3, 3, 40)
        rotated = state.with_phase(1.1)
        np.testing.assert_allclose(hs.probability(basis, state, x), hs.probability(basis, rotated, x), atol=1e-15)
        met, met_r = hs.sphere_metric(basis, state), hs.sphere_metric(basis, rotated)
        for _ in range(3):
            dc = random_tangent(state, rng)
            assert met_r.line_element(dc * np.exp(1.1j)) == pytest.approx(met.line_element(dc), abs=1e-9)


class TestSphereMetric:
    def test_single_mode(self):
        met = hs.sphere_metric(hs.HarmonicOscillator(time=0.2), hs.AmplitudeState(np.array([1.0]), np.array([0])))
        assert abs(met.g_mixed[0, 0]) < 1e-12

    def test_single_mode_a_integral(self):
        value, _ = hs.a_integral(hs.HarmonicOscillator(time=0.2), hs.AmplitudeState(np.array([1.0]), np.array([0])),
                                 (0, 0, 0, 0))
        assert value == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("coeffs", [[math.sqrt(0.7), math.sqrt(0.3)], [0.6, 0.48 + 0.36j, 0.4 * np.exp(2j) + 0.0j]],
                             ids=["two", "three"])
    def test_definition_consistency(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        state = hs.AmplitudeState.normalized(coeffs)
        basis = hs.HarmonicOscillator(time=0.4)
        met, fd = hs.sphere_metric(basis, state), hs.sphere_metric_fd(basis, state)
        np.testing.assert_allclose(met.g, fd.g, atol=1e-5)
        np.testing.assert_allclose(met.g_mixed, fd.g_mixed, atol=1e-5)

    def test_block_symmetries(self, rng):
        basis = hs.HarmonicOscillator(time=0.7)
        met = hs.sphere_metric(basis, hs.AmplitudeState.random(3, rng))
        np.testing.assert_allclose(met.g, met.g.T, atol=1e-8)
        np.testing.assert_allclose(met.g_mixed, met.g_mixed.conj().T, atol=1e-8)

    def test_line_element_real(self, rng):
        basis = hs.HarmonicOscillator(time=0.7)
        state = hs.AmplitudeState.random(3, rng)
        met = hs.sphere_metric(basis, state)
        for _ in range(20):
            assert abs(met.line_element(random_tangent(state, rng)).imag) < 1e-10

    def test_real_zero_is_degenerate(self):
        # real coefficients at t = 0 give a density with a simple zero
        with pytest.raises(DegenerateState):
            hs.sphere_metric(hs.HarmonicOscillator(time=0.0), hs.AmplitudeState.normalized([1.0, 1.0]))

    def test_adaptive_against_nodes(self):
        basis = hs.HarmonicOscillator(time=0.5)
        state = hs.AmplitudeState.normalized([math.sqrt(0.9), math.sqrt(0.1)])
        fixed, _ = hs.a_integral(basis, state, (0, 0, 0, 0))
        adaptive, _ = hs.a_integral(basis, state, (0, 0, 0, 0), QuadratureSpec("adaptive-interval", abs_tol=1e-12, rel_tol=1e-11))
        doubled, _ = hs.a_integral(basis, state, (0, 0, 0, 0), QuadratureSpec("gauss-hermite", node_count=400))
        assert fixed == pytest.approx(adaptive, abs=1e-7)
        assert fixed == pytest.approx(doubled, abs=1e-7)

    def test_truncation_stable(self, rng):
        assert hs.truncation_check(hs.HarmonicOscillator(time=0.3), hs.AmplitudeState.random(2, rng)) < 1e-8


class TestDiagonalMode:
    @pytest.mark.parametrize("t", [0.3, 0.9])
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_norm_integral(self, n, t):
        basis = hs.HarmonicOscillator(time=t)
        assert hs.diagonal_norm(basis, n) == pytest.approx(2 * np.pi * np.sin(t), rel=1e-6)

    def test_diagonal_density_drops_cross_terms(self):
        basis = hs.HarmonicOscillator(time=0.3)
        state = hs.AmplitudeState.normalized([1.0, 1.0j])
        x = np.linspace(-3, 3, 31)
        expected = 0.5 * (basis.eigenfunction(0, x) ** 2 + basis.eigenfunction(1, x) ** 2)
        np.testing.assert_allclose(hs.probability(basis, state, x, mode="diagonal"), expected, atol=1e-15)

    def test_metric_symmetric(self, rng):
        met = hs.sphere_metric(hs.HarmonicOscillator(time=0.9), hs.AmplitudeState.random(3, rng), mode="diagonal")
        assert met.g_mixed is None
        np.testing.assert_allclose(met.g, met.g.T, atol=1e-12)
