import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdist.dist_core import (
    ADAPTIVE,
    GAUSS_HERMITE,
    TRAPEZOID,
    Interval,
    Periodic,
    QuadratureSpec,
    RealLine,
    central_gradient,
    gaussian_family,
    hermite,
    hermite_function_table,
    hermite_table,
    ho_eigenstate_family,
    integrate,
)
from qdist.errors import DomainMismatch, IndexTooLarge, NonConvergent, OutOfDomain


class TestQuadratureSpec:
    def test_rejects_bad_tolerances(self):
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=-1.0)

    def test_rejects_small_node_count(self):
        with pytest.raises(ValueError):
            QuadratureSpec(scheme="gauss-hermite", node_count=1)

    def test_rejects_unknown_scheme(self):
        with pytest.raises(ValueError):
            QuadratureSpec(scheme="simpson")


class TestIntegrate:
    def test_standard_normal_mass(self):
        f = lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        for spec in (ADAPTIVE, GAUSS_HERMITE):
            res = integrate(f, RealLine(0.0, math.sqrt(2.0)), spec)
            assert res.value == pytest.approx(1.0, abs=1e-12)
            assert res.converged

    @pytest.mark.parametrize("k,l", [(0, 0), (3, 3), (1, 0), (2, -3)])
    def test_circle_orthogonality(self, k, l):
        f = lambda x: np.exp(1j * x * (k - l)) / (2 * math.pi)
        res = integrate(f, Periodic(), TRAPEZOID)
        assert abs(res.value - (1.0 if k == l else 0.0)) < 1e-14

    def test_oscillator_second_moment(self):
        fam = ho_eigenstate_family(0)
        res = integrate(lambda x: x * x * fam.density(x, (1.0, 1.0)), RealLine(0.0, 1.0), GAUSS_HERMITE)
        assert res.value == pytest.approx(0.5, rel=1e-12)

    def test_interval_against_mpmath(self):
        f = lambda x: np.sin(x) ** 2 * np.exp(-x)
        oracle = float(mpmath.quad(lambda t: mpmath.sin(t) ** 2 * mpmath.exp(-t), [0, 3]))
        assert integrate(f, Interval(0.0, 3.0)).value == pytest.approx(oracle, rel=1e-12)

    def test_vector_valued(self):
        res = integrate(lambda x: np.stack([np.ones_like(x), x]), Interval(0.0, 2.0))
        np.testing.assert_allclose(res.value, [2.0, 2.0], rtol=1e-12)

    def test_scheme_domain_mismatch(self):
        with pytest.raises(DomainMismatch):
            integrate(lambda x: x, Interval(0.0, 1.0), TRAPEZOID)
        with pytest.raises(DomainMismatch):
            integrate(lambda x: x, Periodic(), GAUSS_HERMITE)

    def test_flags_nonconvergence(self):
        spec = QuadratureSpec(max_subdivisions=2, abs_tol=1e-14, rel_tol=1e-14)
        f = lambda x: np.sin(200 * x) / np.sqrt(np.abs(x - 0.3) + 1e-9)
        with pytest.raises(NonConvergent):
            integrate(f, Interval(0.0, 1.0), spec)
        res = integrate(f, Interval(0.0, 1.0), spec, strict=False)
        assert not res.converged

    def test_error_estimate_within_tolerance(self):
        res = integrate(lambda x: np.exp(-x * x), RealLine(0.0, 1.0), GAUSS_HERMITE)
        assert res.error <= max(GAUSS_HERMITE.abs_tol, GAUSS_HERMITE.rel_tol * abs(res.value))


class TestHermite:
    EXPLICIT = [
        lambda u: np.ones_like(u),
        lambda u: 2 * u,
        lambda u: 4 * u**2 - 2,
        lambda u: 8 * u**3 - 12 * u,
        lambda u: 16 * u**4 - 48 * u**2 + 12,
    ]

    def test_matches_explicit_polynomials(self, rng):
        u = rng.uniform(-3, 3, size=10)
        H = hermite_table(4, u)
        for n, poly in enumerate(self.EXPLICIT):
            np.testing.assert_allclose(H[n], poly(u), rtol=1e-12)

    def test_matches_mpmath_high_order(self):
        for n in (10, 20, 30):
            for u in (-2.3, 0.7, 4.1):
                assert hermite(n, u) == pytest.approx(float(mpmath.hermite(n, u)), rel=1e-11)

    def test_index_limit(self):
        with pytest.raises(IndexTooLarge):
            hermite_table(31, 0.0)
        with pytest.raises(IndexTooLarge):
            ho_eigenstate_family(31)

    def test_hermite_functions_orthonormal(self):
        u, w = np.polynomial.hermite.hermgauss(60)
        phi = hermite_function_table(8, u)
        np.testing.assert_allclose((phi * w) @ phi.T, np.eye(9), atol=1e-13)


class TestGaussianFamily:
    fam = gaussian_family()

    def test_peak_value(self):
        th = np.array([1.7, 0.3])
        assert self.fam.log_density(0.3, th) == pytest.approx(-math.log(math.sqrt(2 * math.pi) * 1.7))

    def test_location_score(self):
        assert self.fam.grad_log_density(np.array(1.0), np.array([1.0, 0.0]))[1] == pytest.approx(1.0)

    def test_mass_off_center(self):
        assert self.fam.total_mass((2.5, -3.0)).value == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(OutOfDomain):
            self.fam.check_params((0.0, 1.0))

    @given(st.floats(0.2, 5.0), st.floats(-5.0, 5.0))
    def test_normalization(self, s, mu):
        assert abs(self.fam.total_mass((s, mu)).value - 1.0) < 1e-8


class TestOscillatorFamily:
    def test_ground_state_peak(self):
        fam = ho_eigenstate_family(0)
        assert fam.density(0.0, (1.0, 1.0)) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)

    def test_first_excited_node(self):
        assert ho_eigenstate_family(1).density(0.0, (1.0, 1.0)) == 0.0

    @pytest.mark.parametrize("n", range(6))
    def test_unit_mass(self, n):
        assert ho_eigenstate_family(n).total_mass((1.0, 1.0)).value == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(0, 5), st.floats(0.2, 5.0), st.floats(0.2, 5.0))
    def test_normalization(self, n, m, w):
        assert abs(ho_eigenstate_family(n).total_mass((m, w)).value - 1.0) < 1e-8

    def test_matches_mpmath_density(self):
        fam = ho_eigenstate_family(3)
        m, w, x = 1.3, 0.8, 0.45
        lam = mpmath.sqrt(mpmath.mpf(m) * w)
        oracle = lam / (2**3 * 6 * mpmath.sqrt(mpmath.pi)) * mpmath.exp(-(lam * x) ** 2) * mpmath.hermite(3, lam * x) ** 2
        assert fam.density(x, (m, w)) == pytest.approx(float(oracle), rel=1e-13)


class TestGradients:
    @pytest.mark.parametrize("family,theta", [
        (gaussian_family(), (1.3, 0.4)),
        (ho_eigenstate_family(0), (1.2, 0.7)),
        (ho_eigenstate_family(2), (0.9, 1.4)),
        (ho_eigenstate_family(3), (2.0, 0.5)),
    ])
    def test_score_matches_finite_differences(self, family, theta, rng):
        x = rng.uniform(-2, 2, size=25)
        # keep away from density zeros
        x = x[family.density(x, theta) > 1e-6]
        analytic = family.grad_log_density(x, np.array(theta))
        numeric = central_gradient(lambda th: family.log_density(x, th), np.array(theta), points=5)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-8)

    def test_hessian_matches_score_derivative(self, rng):
        fam = ho_eigenstate_family(2)
        th = np.array([1.1, 0.9])
        x = rng.uniform(-2, 2, size=15)
        numeric = central_gradient(lambda t: fam.grad_log_density(x, t), th)
        np.testing.assert_allclose(fam.hess_log_density(x, th), numeric, rtol=1e-6, atol=1e-6)
