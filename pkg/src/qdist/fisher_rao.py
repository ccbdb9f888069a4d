"""Fisher-Rao metric tensors on parameter manifolds.

The metric of a family ``p(x; theta)`` is computed by quadrature in either of
its two equivalent forms:

* gradient form ``k^2 int p d_a ln p d_b ln p dx``
* hessian form ``-k^2 int p d_a d_b ln p dx``

together with the metric induced by an arbitrary reparameterization ``F(p)``
of the density and the closed forms known for the normal family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dist_core import (
    GAUSS_HERMITE,
    ParametricFamily,
    QuadratureSpec,
    RealLine,
    central_gradient,
    integrate,
)
from .errors import OutOfDomain, QuadratureFailure, NonConvergent

SIGNATURE_TOL = 1e-10
P_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class MetricTensor:
    point: np.ndarray
    components: np.ndarray
    scale_k: float = 1.0
    error: float = 0.0

    def __post_init__(self):
        g = np.asarray(self.components, dtype=float)
        g = 0.5 * (g + g.T)
        object.__setattr__(self, "components", g)
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.components)

    @property
    def signature(self) -> tuple[int, int, int]:
        """``(n_plus, n_minus, n_zero)`` of the eigenvalues."""
        ev = self.eigenvalues
        tol = SIGNATURE_TOL * max(1.0, float(np.max(np.abs(ev))))
        return int(np.sum(ev > tol)), int(np.sum(ev < -tol)), int(np.sum(np.abs(ev) <= tol))

    def line_element(self, dtheta: Sequence[float]) -> float:
        v = np.asarray(dtheta, dtype=float)
        return float(v @ self.components @ v)

    def __repr__(self):
        return f"MetricTensor(point={self.point.tolist()}, components={self.components.tolist()})"


def _integrate_matrix(integrand, family: ParametricFamily, theta, spec):
    spec = family.spec_for(spec)
    try:
        res = integrate(integrand, family.support(theta), spec)
    except NonConvergent as exc:
        raise QuadratureFailure(str(exc)) from exc
    return np.real(res.value), res.error


def _hess_log(family: ParametricFamily, x, theta):
    if family.hess_log_density is not None:
        return family.hess_log_density(x, theta)
    return central_gradient(lambda th: family.grad_log_density(x, th), theta)


def fr_metric(
    family: ParametricFamily,
    theta: Sequence[float],
    form: str = "gradient",
    k: float = 1.0,
    spec: Optional[QuadratureSpec] = None,
) -> MetricTensor:
    """Fisher-Rao metric of ``family`` at ``theta`` scaled by ``k**2``.

    At density zeros the gradient-form integrand ``p * s_a * s_b`` is a 0 * inf
    product; such points take the hessian-form value there (finite for the
    oscillator families), or zero when that is not finite either.
    """
    theta = family.check_params(theta)
    if form not in ("gradient", "hessian"):
        raise ValueError("form must be 'gradient' or 'hessian'")

    def integrand(x):
        x = np.asarray(x, dtype=float)
        p = family.density(x, theta)
        if form == "gradient":
            s = family.grad_log_density(x, theta)
            with np.errstate(invalid="ignore", over="ignore"):
                out = p * s[:, None] * s[None, :]
            bad = ~np.isfinite(out)
            if np.any(bad):
                with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                    alt = -p * _hess_log(family, x, theta)
                out = np.where(bad, np.where(np.isfinite(alt), alt, 0.0), out)
            return out
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            out = -p * _hess_log(family, x, theta)
        return np.where(np.isfinite(out), out, 0.0)

    g, err = _integrate_matrix(integrand, family, theta, spec)
    return MetricTensor(theta, (k * k) * g, scale_k=k, error=k * k * err)


def generalized_metric(
    family: ParametricFamily,
    theta: Sequence[float],
    F_prime: Callable[[np.ndarray], np.ndarray],
    spec: Optional[QuadratureSpec] = None,
) -> MetricTensor:
    """Metric ``int p F'(p)^2 d_a p d_b p dx`` for a density transform ``F``.

    ``F_prime`` is evaluated on the density clamped below at 1e-300.
    ``F'(p) = k / p`` recovers the Fisher-Rao metric scaled by ``k**2``.
    """
    theta = family.check_params(theta)

    def integrand(x):
        x = np.asarray(x, dtype=float)
        p = family.density(x, theta)
        fp = np.broadcast_to(np.asarray(F_prime(np.maximum(p, P_FLOOR)), dtype=float), p.shape)
        s = family.grad_log_density(x, theta)
        with np.errstate(invalid="ignore", over="ignore"):
            w = p * (p * fp) ** 2
            out = w * s[:, None] * s[None, :]
        return np.where(np.isfinite(out), out, 0.0)

    g, err = _integrate_matrix(integrand, family, theta, spec)
    return MetricTensor(theta, g, error=err)


def gaussian_zform_metric(
    sigma: float,
    F_prime: Callable[[np.ndarray], np.ndarray],
    spec: Optional[QuadratureSpec] = None,
    g22_prefactor: Optional[float] = None,
) -> MetricTensor:
    """Normal-family metric for transform ``F`` written in ``z = (x - mu) / (sqrt(2) sigma)``.

    With ``p(z) = exp(-z^2) / (sqrt(2 pi) sigma)``::

        g_11 = (sqrt(2) / sigma)   int p^3 F'(p)^2 (1 - 4 z^2 + 4 z^4) dz
        g_22 = (2 sqrt(2) / sigma) int p^3 F'(p)^2 z^2 dz
        g_12 = 0

    ``g22_prefactor`` overrides the coefficient ``2 sqrt(2) / sigma`` in front
    of ``g_22`` (used to evaluate alternative published prefactors).
    The result does not depend on ``mu``.
    """
    if not sigma > 0:
        raise OutOfDomain("sigma must be positive")
    spec = spec or GAUSS_HERMITE
    c = 1.0 / (math.sqrt(2 * math.pi) * sigma)

    def integrand(z):
        p = c * np.exp(-z * z)
        fp = np.broadcast_to(np.asarray(F_prime(np.maximum(p, P_FLOOR)), dtype=float), p.shape)
        w = p * (p * fp) ** 2
        return np.stack([w * (1 - 4 * z**2 + 4 * z**4), w * z**2])

    res = integrate(integrand, RealLine(0.0, 1.0), spec)
    i11, i22 = np.real(res.value)
    pref22 = 2 * math.sqrt(2) / sigma if g22_prefactor is None else g22_prefactor
    g = np.array([[math.sqrt(2) / sigma * i11, 0.0], [0.0, pref22 * i22]])
    return MetricTensor(np.array([sigma, np.nan]), g, error=res.error)


# ---------------------------------------------------------------------------
# Stationarity of the density transform
# ---------------------------------------------------------------------------


def euler_lagrange_residual(
    F: Callable[[np.ndarray], np.ndarray],
    p_grid: Optional[np.ndarray] = None,
    step: float = 1e-2,
) -> float:
    """``max |d/dp (p F'(p))|`` over ``p_grid`` by finite differences.

    ``p F'(p)`` is the derivative of ``F`` with respect to ``s = ln p``, so
    ``d/dp (p F') = F_ss / p``.  ``F_ss`` is taken by a Richardson-extrapolated
    second central difference in ``s`` with steps ``step`` and ``step / 2``.
    Default grid: 1000 log-spaced points on ``[0.01, 1]``.
    """
    p = np.logspace(-2, 0, 1000) if p_grid is None else np.asarray(p_grid, dtype=float)
    if np.any(p <= 0):
        raise ValueError("p_grid must be positive")
    s = np.log(p)

    def d2(h):
        return (F(np.exp(s + h)) - 2 * F(np.exp(s)) + F(np.exp(s - h))) / (h * h)

    f_ss = (4 * d2(step / 2) - d2(step)) / 3
    return float(np.max(np.abs(f_ss / p)))


# ---------------------------------------------------------------------------
# Normal family closed forms
# ---------------------------------------------------------------------------


def _gauss_pair(theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (2,) or not theta[0] > 0:
        raise OutOfDomain(f"normal parameters must be (sigma > 0, mu), got {theta.tolist()}")
    return theta


def gauss_metric_closed(theta: Sequence[float], k: float = 1.0) -> MetricTensor:
    """``diag(2, 1) / sigma^2`` in ``(sigma, mu)`` order, times ``k**2``."""
    s, _ = _gauss_pair(theta)
    return MetricTensor(theta, k * k * np.diag([2.0, 1.0]) / s**2, scale_k=k)


def gauss_distance_asinh(theta1: Sequence[float], theta2: Sequence[float]) -> float:
    """``2 asinh(|Delta theta| / (2 sqrt(sigma_1 sigma_2)))`` with the Euclidean norm.

    This is the geodesic distance of ``(d sigma^2 + d mu^2) / sigma^2``; it is
    *not* the distance of the normal Fisher-Rao metric, which weights
    ``d sigma^2`` twice as much.  See :func:`gauss_distance_exact`.
    """
    a, b = _gauss_pair(theta1), _gauss_pair(theta2)
    return 2.0 * math.asinh(float(np.linalg.norm(b - a)) / (2.0 * math.sqrt(a[0] * b[0])))


def gauss_distance_exact(theta1: Sequence[float], theta2: Sequence[float]) -> float:
    """Fisher-Rao geodesic distance between two normal densities.

    ``(mu / sqrt(2), sigma)`` maps the metric to twice the Poincare half-plane
    metric, so ``d = sqrt(2) acosh(1 + ((dsigma)^2 + (dmu)^2 / 2) / (2 sigma_1 sigma_2))``.
    """
    a, b = _gauss_pair(theta1), _gauss_pair(theta2)
    q = ((b[0] - a[0]) ** 2 + 0.5 * (b[1] - a[1]) ** 2) / (2.0 * a[0] * b[0])
    return math.sqrt(2.0) * math.acosh(1.0 + q)
