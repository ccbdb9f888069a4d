"""Cross-checks of every closed-form result against an independent oracle.

Each row compares a closed-form value with an oracle (quadrature, shooting,
finite differences or an alternative derivation).  Rows of kind
``closed-form-vs-oracle`` audit published expressions; a mismatch there is
reported as NOTE or DISCREPANCY.  Rows of kind ``self-consistency`` compare
two routes inside this package; a mismatch there is a defect and makes the
audit exit non-zero.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import fisher_rao as fr
from . import geodesy as geo
from . import hilbert_sphere as hs
from . import ho_manifold as hm
from . import qinfo as qi
from .dist_core import RealLine, gaussian_family, hermite_table, ho_eigenstate_family, integrate

PASS, NOTE, DISCREPANCY = "PASS", "NOTE", "DISCREPANCY"
CLOSED_FORM, SELF = "closed-form-vs-oracle", "self-consistency"


@dataclass(frozen=True)
class AuditRow:
    check: str
    kind: str
    value: float
    oracle: float
    difference: float
    tolerance: float
    status: str
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _row(check, kind, value, oracle, tol, detail="", on_mismatch=DISCREPANCY, relative=True,
         difference: Optional[float] = None) -> AuditRow:
    value, oracle = float(value), float(oracle)
    if difference is None:
        difference = abs(value - oracle)
        if relative:
            difference /= max(abs(oracle), 1e-300)
    status = PASS if difference <= tol else on_mismatch
    return AuditRow(check, kind, value, oracle, float(difference), tol, status, detail)


def _maxdiff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------


def _gaussian_metric():
    g = fr.fr_metric(gaussian_family(), (1.0, 0.0)).components
    return _row("gaussian-metric-closed-form", CLOSED_FORM, 2.0, g[0, 0], 1e-8,
                "diag(2, 1)/sigma^2 at (1, 0) vs quadrature", relative=False,
                difference=_maxdiff(g, np.diag([2.0, 1.0])))


def _gradient_vs_hessian():
    fam = gaussian_family()
    a = fr.fr_metric(fam, (1.3, -0.4), "gradient").components
    b = fr.fr_metric(fam, (1.3, -0.4), "hessian").components
    return _row("gradient-vs-hessian-form", SELF, a[0, 0], b[0, 0], 1e-6,
                "normal family at (1.3, -0.4)", difference=_maxdiff(a, b) / np.max(np.abs(b)))


def _log_transform_metric():
    g = fr.generalized_metric(gaussian_family(), (1.0, 0.0), lambda p: 1.0 / p).components
    return _row("generalized-metric-log-transform", CLOSED_FORM, g[0, 0], 2.0, 1e-8,
                "F'(p) = 1/p reproduces diag(2, 1)", relative=False,
                difference=_maxdiff(g, np.diag([2.0, 1.0])))


def _zform_prefactor():
    sigma = 1.0
    published = fr.gaussian_zform_metric(sigma, lambda p: 1.0 / p, g22_prefactor=1 / (math.sqrt(2) * sigma))
    return _row("gaussian-zform-g22-prefactor", CLOSED_FORM, published.components[1, 1], 1.0, 1e-8,
                "g_22 with prefactor 1/(sqrt(2) sigma) vs Fisher-Rao 1/sigma^2; 2 sqrt(2)/sigma is required")


def _gaussian_distance():
    t1, t2 = (1.0, 0.0), (1.0, 2.0)
    closed = fr.gauss_distance_asinh(t1, t2)
    shot = geo.shoot_distance(geo.gaussian_fr_field(), t1, t2)
    return _row("gaussian-distance-norm", CLOSED_FORM, closed, shot.length, 1e-6,
                f"2 asinh(|dtheta| / 2 sqrt(s1 s2)) vs shooting, ratio {closed / shot.length:.10f}",
                on_mismatch=NOTE)


def _gaussian_shooting():
    t1, t2 = (1.0, 0.0), (1.0, 2.0)
    shot = geo.shoot_distance(geo.gaussian_fr_field(), t1, t2)
    return _row("gaussian-shooting-vs-hyperbolic", SELF, shot.length, fr.gauss_distance_exact(t1, t2), 1e-7,
                f"endpoint miss {shot.miss:.2e}")


# ---------------------------------------------------------------------------
# Oscillator
# ---------------------------------------------------------------------------


def _density_exponent():
    # printed form: lam / (sqrt(pi) 2^n n!) exp(-lam^2 x^2 / 2) H_n(lam x)^2 at lam = 1
    def printed(x):
        return np.exp(-0.5 * x * x) * hermite_table(0, x)[0] ** 2 / math.sqrt(math.pi)

    mass = integrate(printed, RealLine(0.0, math.sqrt(2.0))).value
    corrected = ho_eigenstate_family(0).total_mass((1.0, 1.0)).value
    return _row("oscillator-density-exponent", CLOSED_FORM, mass, corrected, 1e-8,
                "total mass with exponent -lam^2 x^2/2 vs -lam^2 x^2 (n = 0)", on_mismatch=NOTE)


def _oscillator_metric():
    worst, at = 0.0, (0, 0.0, 0.0)
    for n in range(4):
        q = fr.fr_metric(ho_eigenstate_family(n), (1.0, 1.0), "hessian").components
        c = hm.ho_metric_closed(n, 1.0, 1.0).components
        d = _maxdiff(q, c) / np.max(np.abs(q))
        if d > worst:
            worst, at = d, (n, c[0, 1], q[0, 1])
    return _row("oscillator-parameter-metric", CLOSED_FORM, at[1], at[2], 1e-6,
                f"closed form vs quadrature at m = omega = 1, worst n = {at[0]}; values are g_m_omega",
                difference=worst)


def _oscillator_rank_one():
    worst = 0.0
    for n in range(4):
        q = fr.fr_metric(ho_eigenstate_family(n), (1.7, 0.6), "hessian").components
        c = hm.eigenstate_fr_metric_closed(n, 1.7, 0.6).components
        worst = max(worst, _maxdiff(q, c) / np.max(np.abs(c)))
    return _row("oscillator-eigenstate-metric-rank-one", SELF, c[0, 1], q[0, 1], 1e-6,
                "(n^2+n+1)/2 (dm/m + domega/omega)^2 vs quadrature, n = 0..3; values are g_m_omega at n = 3",
                difference=worst)


def _eta_n2():
    return _row("oscillator-eta-n2", CLOSED_FORM, float(Fraction(-13, 8)), hm.eta(2), 1e-12,
                f"displayed -13/8 vs formula and completed square {hm.eta_exact(2)}", on_mismatch=NOTE)


def _eta_identity():
    bad = [n for n in range(21) if hm.eta_exact(n) != hm.eta_completed_square(n)]
    return _row("oscillator-eta-identity", CLOSED_FORM, len(bad), 0, 0.0,
                "rational identity eta = (4a^2 - b^2)/(4a), n = 0..20", relative=False)


def _uv_diagonal():
    worst = max(_maxdiff(hm.uv_metric(n, 1.7, 0.6), np.diag([float(hm.coefficient_a(n)), hm.eta(n)]))
                for n in range(7))
    return _row("oscillator-uv-diagonalization", CLOSED_FORM, 0.0, worst, 1e-10,
                "Jacobian congruence gives diag(a, eta), n = 0..6", relative=False, difference=worst)


# ---------------------------------------------------------------------------
# Amplitude sphere
# ---------------------------------------------------------------------------


def _free_orthonormality():
    basis = hs.FreeParticleCircle(time=0.3)
    G = hs.orthonormality_matrix(basis, np.arange(-4, 5))
    return _row("free-particle-overlap-orthonormality", CLOSED_FORM, 1.0, G[0, 0].real, 1e-8,
                "int I_kl dx = delta_kl on the circle, |k| <= 4", relative=False,
                difference=_maxdiff(G, np.eye(9)))


def _mode_norm():
    worst = 0.0
    for t in (0.3, 0.9):
        basis = hs.HarmonicOscillator(time=t)
        for n in range(3):
            worst = max(worst, abs(hs.diagonal_norm(basis, n) / hs.diagonal_norm_closed(basis) - 1))
    basis = hs.HarmonicOscillator(time=0.3)
    return _row("oscillator-mode-norm", CLOSED_FORM, hs.diagonal_norm_closed(basis), hs.diagonal_norm(basis, 0),
                1e-6, "2 pi sin(omega t)/lam^2 vs quadrature, n = 0..2, t in {0.3, 0.9}", difference=worst)


def _diagonal_probability():
    basis = hs.HarmonicOscillator(time=0.4)
    state = hs.AmplitudeState([math.sqrt(0.7), math.sqrt(0.3)], [0, 1])
    x = np.linspace(-4.0, 4.0, 801)
    gap = float(np.max(np.abs(hs.probability(basis, state, x) - hs.probability(basis, state, x, "diagonal"))))
    return _row("diagonal-vs-full-probability", CLOSED_FORM, 0.0, gap, 1e-8,
                "max |P_diagonal - P_full| over |x| <= 4, state (sqrt 0.7, sqrt 0.3), t = 0.4", relative=False,
                difference=gap)


def _sphere_fd():
    basis = hs.HarmonicOscillator(time=0.4)
    state = hs.AmplitudeState([math.sqrt(0.7), math.sqrt(0.3)], [0, 1])
    a, b = hs.sphere_metric(basis, state), hs.sphere_metric_fd(basis, state)
    d = max(_maxdiff(a.g, b.g), _maxdiff(a.g_mixed, b.g_mixed))
    return _row("sphere-metric-assembly-vs-finite-differences", SELF, a.g[0, 0].real, b.g[0, 0].real, 1e-5,
                "A-integral assembly vs Wirtinger finite differences", relative=False, difference=d)


def _propagator_overlap():
    basis = hs.HarmonicOscillator(time=0.7)
    x = np.linspace(-3, 3, 13)
    d = max(_maxdiff(hs.propagator_overlap(basis, m, n, x), basis.overlap(m, n, x))
            for m in range(3) for n in range(3))
    return _row("sphere-overlap-propagator-vs-eigenbasis", SELF, 1 / math.sqrt(math.pi),
                hs.propagator_overlap(basis, 0, 0, 0.0)[0].real, 1e-6,
                "Mehler-kernel sandwich vs eigenbasis reduction, t = 0.7", relative=False, difference=d)


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------


def _pure_states(rng):
    rho = qi.DensityMatrix.diag([1.0, 0.0])
    sigma = qi.DensityMatrix.diag([0.0, 1.0])
    value = qi.relative_entropy(rho, sigma)
    return AuditRow("pure-state-relative-entropy-infinite", CLOSED_FORM, value, math.inf, 0.0, 0.0,
                    PASS if value == math.inf else DISCREPANCY, "distinct pure states")


def _random_thermal(rng, dim=4):
    H = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return qi.ThermalModel.from_hamiltonian(0.5 * (H + H.conj().T), float(rng.uniform(0.3, 2.0)))


def _thermal_shortcut(rng):
    model = _random_thermal(rng)
    rho = qi.DensityMatrix.random(model.dim, rng)
    a, b = qi.thermal_relative_entropy(rho, model), qi.relative_entropy(rho, qi.gibbs_state(model))
    return _row("thermal-relative-entropy-shortcut", CLOSED_FORM, a, b, 1e-9,
                "beta Tr(rho H) - S[rho] - beta F vs direct trace formula", relative=False)


def _thermal_mixed(rng):
    sigma_model = _random_thermal(rng)
    rho_model = _random_thermal(rng)
    a = qi.thermal_pair_relative_entropy(rho_model, sigma_model)
    b = qi.relative_entropy(qi.gibbs_state(rho_model), qi.gibbs_state(sigma_model))
    return _row("thermal-mixed-hamiltonian-form", CLOSED_FORM, a, b, 1e-9,
                "two Gibbs states with distinct Hamiltonians vs direct trace formula", relative=False)


def _thermal_same(rng):
    model = qi.ThermalModel.from_hamiltonian(np.diag([0.0, 1.0, 2.0]), 0.7)
    a = qi.two_thermal_relative_entropy(model, 1.3)
    b = qi.relative_entropy(qi.gibbs_state(model.with_beta(1.3)), qi.gibbs_state(model))
    return _row("thermal-same-hamiltonian-form", CLOSED_FORM, a, b, 1e-10,
                "H = diag(0, 1, 2), beta = 0.7, b = 1.3", relative=False)


def _decomposition(rng):
    rho, sigma = qi.DensityMatrix.random(3, rng), qi.DensityMatrix.random(3, rng)
    a = qi.relative_entropy_decomposed(rho, sigma).total
    return _row("relative-entropy-decomposition", SELF, a, qi.relative_entropy(rho, sigma), 1e-10,
                "S[sigma] - S[rho] + Tr[(sigma - rho) ln sigma] vs direct", relative=False)


def _scalar_rel_entropy(rng):
    f = qi.FreeScalarField()
    return _row("scalar-field-relative-entropy", CLOSED_FORM, f.relative_entropy(1.0, 2.0),
                f.relative_entropy_from_states(1.0, 2.0), 1e-12,
                "bracket form vs entropy and energy differences, b = 1, beta = 2")


def _scalar_second_order(rng):
    f = qi.FreeScalarField()
    b, delta = 1.0, 1e-3
    lead = 6 * f.scale * delta**2 / b**5
    return _row("scalar-field-second-order", CLOSED_FORM, lead, f.relative_entropy(b, b + delta), 1e-2,
                "6 C delta^2 / b^5 vs exact at delta/b = 1e-3")


def _scalar_metric_coefficient(rng):
    f = qi.FreeScalarField()
    b = 1.3
    # one-sided second derivative at beta = b (first-order error), Richardson-extrapolated
    d2 = [2 * f.relative_entropy(b, b + h) / h**2 for h in (2e-4, 1e-4)]
    curvature = 2 * d2[1] - d2[0]
    return _row("scalar-field-metric-coefficient", CLOSED_FORM, f.line_element_beta(b), curvature / 2, 1e-7,
                "A / b^5 vs half the curvature of the relative entropy")


def _scalar_energy_metric(rng):
    f = qi.FreeScalarField(volume=2.0)
    E = 3.0
    b = f.beta_of_energy(E)
    dbdE = -0.25 * b / E
    return _row("scalar-field-energy-metric", CLOSED_FORM, f.line_element_energy(E),
                f.line_element_beta(b) * dbdE**2, 1e-12, "energy form vs pulled-back inverse-temperature form")


def _scalar_distance(rng):
    f = qi.FreeScalarField()
    return _row("scalar-field-distance", CLOSED_FORM, f.distance(1.0, 2.0), f.distance_numeric(1.0, 2.0)[0],
                1e-8, "closed form vs quadrature, E = 1 to 2")


def _scalar_consistency(rng):
    f = qi.FreeScalarField()
    beta = 0.8
    return _row("scalar-field-entropy-energy-relation", SELF, f.entropy(beta), 4 / 3 * beta * f.energy(beta),
                1e-12, "S = (4/3) beta E")


CHECKS: list[Callable] = [
    _gaussian_metric, _gradient_vs_hessian, _log_transform_metric, _zform_prefactor,
    _gaussian_distance, _gaussian_shooting,
    _density_exponent, _oscillator_metric, _oscillator_rank_one, _eta_n2, _eta_identity, _uv_diagonal,
    _free_orthonormality, _mode_norm, _diagonal_probability, _sphere_fd, _propagator_overlap,
]
RANDOM_CHECKS: list[Callable] = [
    _pure_states, _thermal_shortcut, _thermal_mixed, _thermal_same, _decomposition,
    _scalar_rel_entropy, _scalar_second_order, _scalar_metric_coefficient, _scalar_energy_metric,
    _scalar_distance, _scalar_consistency,
]


def run_audit(seed: int = 0) -> list[AuditRow]:
    rng = np.random.default_rng(seed)
    return [c() for c in CHECKS] + [c(rng) for c in RANDOM_CHECKS]


def exit_code(rows: list[AuditRow]) -> int:
    """1 if any self-consistency row failed, else 0."""
    return int(any(r.kind == SELF and r.status != PASS for r in rows))


def summary(rows: list[AuditRow]) -> dict:
    return {s: sum(r.status == s for r in rows) for s in (PASS, NOTE, DISCREPANCY)}
