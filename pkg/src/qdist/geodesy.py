"""Geodesics of metric fields given as black boxes.

Christoffel symbols come from central differences of the metric, geodesics
from classical RK4 in the affine parameter, and two-point distances from
Newton shooting on the initial velocity.  Lengths are the integral of
``sqrt|g(v, v)|`` along the sampled path (Simpson's rule).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import BlowUp, NoConvergence, SingularMetric

NULL_TOL = 1e-10


@dataclass(frozen=True)
class MetricField:
    """A metric ``theta -> g(theta)`` on a ``dim``-dimensional chart.

    If ``vectorized`` is set, ``eval`` also accepts a stack of points with
    shape ``(k, dim)`` and returns ``(k, dim, dim)``.  ``in_domain`` (optional)
    rejects points outside the chart; ``regularity_hint`` is a floor on
    ``|eigenvalues|`` below which the metric is treated as singular.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    regularity_hint: float = 0.0
    vectorized: bool = False
    in_domain: Optional[Callable[[np.ndarray], bool]] = None
    name: str = "metric"

    def __call__(self, theta) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(theta, dtype=float)), dtype=float)

    def batch(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        if self.vectorized:
            return np.asarray(self.eval(thetas), dtype=float)
        return np.stack([self(t) for t in thetas])

    def norm2(self, theta, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self(theta) @ v)


def flat_field(dim: int = 2, signature: Optional[Sequence[float]] = None) -> MetricField:
    diag = np.ones(dim) if signature is None else np.asarray(signature, dtype=float)
    g = np.diag(diag)

    def ev(t):
        t = np.asarray(t)
        return np.broadcast_to(g, t.shape[:-1] + g.shape).copy()

    return MetricField(dim=len(diag), eval=ev, vectorized=True, name="flat")


def poincare_half_plane() -> MetricField:
    """``diag(1, 1) / y^2`` with ``y`` the *first* coordinate."""

    def ev(t):
        t = np.asarray(t)
        y = t[..., 0]
        return np.eye(2) / (y * y)[..., None, None]

    return MetricField(dim=2, eval=ev, vectorized=True, in_domain=lambda t: t[0] > 0, name="poincare")


def gaussian_fr_field(k: float = 1.0) -> MetricField:
    """Normal-family Fisher-Rao metric ``k^2 diag(2, 1) / sigma^2`` in ``(sigma, mu)``."""

    def ev(t):
        t = np.asarray(t)
        s = t[..., 0]
        return (k * k) * np.diag([2.0, 1.0]) / (s * s)[..., None, None]

    return MetricField(dim=2, eval=ev, vectorized=True, in_domain=lambda t: t[0] > 0, name="gauss-fr")


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------


def christoffel(field: MetricField, theta, h=None) -> np.ndarray:
    """``Gamma[a, b, c]`` (upper index first) by central differences.

    Step per coordinate ``1e-5 * max(|theta_a|, 1)`` unless ``h`` is given.
    """
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    h = 1e-5 * np.maximum(np.abs(theta), 1.0) if h is None else np.broadcast_to(np.asarray(h, float), (d,))
    offsets = np.vstack([np.zeros(d), np.diag(h), -np.diag(h)])
    gs = field.batch(theta + offsets)
    g = gs[0]
    dg = (gs[1 : d + 1] - gs[d + 1 :]) / (2 * h)[:, None, None]  # dg[c, a, b] = d_c g_ab

    scale = max(float(np.max(np.abs(g))), 1e-300)
    if abs(np.linalg.det(g)) <= 1e-12 * scale**d:
        raise SingularMetric(f"metric is singular at {theta.tolist()}")
    if field.regularity_hint > 0 and np.min(np.abs(np.linalg.eigvalsh(g))) < field.regularity_hint:
        raise SingularMetric(f"metric eigenvalue below regularity floor at {theta.tolist()}")

    # lower[d, b, c] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    lower = 0.5 * (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
    gamma = np.linalg.solve(g, lower.reshape(d, d * d)).reshape(d, d, d)
    return 0.5 * (gamma + np.transpose(gamma, (0, 2, 1)))


def geodesic_acceleration(field: MetricField, theta, v) -> np.ndarray:
    gamma = christoffel(field, theta)
    return -np.einsum("abc,b,c->a", gamma, v, v)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Samples ``(s, theta(s), dtheta/ds)`` along a curve.

    Also used for non-geodesic curves (see :func:`straight_path`).
    """

    s: np.ndarray
    theta: np.ndarray
    velocity: np.ndarray
    length: float = float("nan")
    signature_class: str = "riemannian"
    speed2: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def endpoint(self) -> np.ndarray:
        return self.theta[-1]


def _speed2(field: MetricField, theta: np.ndarray, vel: np.ndarray) -> np.ndarray:
    g = field.batch(theta)
    return np.einsum("ka,kab,kb->k", vel, g, vel)


def _causal_class(q: np.ndarray) -> str:
    scale = max(1.0, float(np.max(np.abs(q))))
    if np.all(np.abs(q) < NULL_TOL * scale):
        return "null"
    if np.all(q > NULL_TOL * scale):
        return "spacelike"
    if np.all(q < -NULL_TOL * scale):
        return "timelike"
    return "mixed"


def _signature_class(field: MetricField, theta: np.ndarray, q: np.ndarray) -> str:
    ev = np.linalg.eigvalsh(field.batch(theta[[0, len(theta) // 2, -1]]))
    if np.all(ev > 0):
        return "riemannian"
    c = _causal_class(q)
    return {"spacelike": "lorentzian-spacelike", "timelike": "lorentzian-timelike"}.get(c, c)


def _finish(field: MetricField, s, th, vel) -> GeodesicPath:
    q = _speed2(field, th, vel)
    length = float(simpson(np.sqrt(np.abs(q)), x=s))
    return GeodesicPath(s, th, vel, length, _signature_class(field, th, q), q)


def integrate_geodesic(
    field: MetricField,
    theta0: Sequence[float],
    v0: Sequence[float],
    s_max: float = 1.0,
    steps: int = 200,
) -> GeodesicPath:
    """Integrate the geodesic equation from ``theta0`` with velocity ``v0``.

    Raises:
        BlowUp: the path leaves ``field.in_domain`` or stops being finite.
        SingularMetric: the metric degenerates along the way.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    steps += steps % 2  # Simpson wants an odd node count
    x = np.asarray(theta0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    h = s_max / steps
    th = np.empty((steps + 1, x.size))
    vel = np.empty_like(th)
    th[0], vel[0] = x, v

    def rhs(x, v):
        return v, geodesic_acceleration(field, x, v)

    for i in range(steps):
        k1x, k1v = rhs(x, v)
        k2x, k2v = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = rhs(x + h * k3x, v + h * k3v)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise BlowUp(f"geodesic became non-finite at s={h * (i + 1):.6g}")
        if field.in_domain is not None and not field.in_domain(x):
            raise BlowUp(f"geodesic left the chart at s={h * (i + 1):.6g}: {x.tolist()}")
        th[i + 1], vel[i + 1] = x, v

    s = np.linspace(0.0, s_max, steps + 1)
    return _finish(field, s, th, vel)


def straight_path(theta1, theta2, samples: int = 201) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinate straight line on ``s in [0, 1]``: ``(s, theta, velocity)``."""
    a = np.asarray(theta1, dtype=float)
    b = np.asarray(theta2, dtype=float)
    s = np.linspace(0.0, 1.0, samples)
    th = a + s[:, None] * (b - a)
    return s, th, np.broadcast_to(b - a, th.shape).copy()


def make_path(field: MetricField, s, theta, velocity) -> GeodesicPath:
    return _finish(field, np.asarray(s, float), np.asarray(theta, float), np.asarray(velocity, float))


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def geodesic_residual(field: MetricField, path: GeodesicPath) -> float:
    """Sup-norm of ``theta'' + Gamma(theta', theta')`` re-evaluated on the samples.

    ``theta''`` comes from a fourth-order five-point difference of the stored
    velocities, so the two nodes at each end are skipped.
    """
    s, v = path.s, path.velocity
    h = s[1] - s[0]
    acc = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    res = [acc[i] - geodesic_acceleration(field, path.theta[i + 2], v[i + 2]) for i in range(len(acc))]
    return float(np.max(np.abs(res)))


def speed_drift(path: GeodesicPath) -> float:
    """Maximum relative deviation of ``g(v, v)`` from its initial value."""
    q = path.speed2
    return float(np.max(np.abs(q - q[0])) / max(abs(q[0]), 1e-300))


# ---------------------------------------------------------------------------
# Boundary-value problem
# ---------------------------------------------------------------------------


class Shot(NamedTuple):
    length: float
    path: GeodesicPath
    miss: float
    iterations: int


def shoot_distance(
    field: MetricField,
    theta1: Sequence[float],
    theta2: Sequence[float],
    steps: int = 200,
    tol: float = 1e-8,
    max_iter: int = 40,
) -> Shot:
    """Geodesic distance between two points by Newton shooting.

    The initial velocity starts at ``theta2 - theta1`` (affine parameter on
    ``[0, 1]``) and is corrected with a finite-difference Jacobian of the
    endpoint map plus step halving.  The critical path found is returned; it is
    not certified to be globally minimizing.

    Raises:
        NoConvergence: endpoint miss stays above ``tol``; ``exc.miss`` has the
            best miss reached.  Often a sign of conjugate points.
    """
    a = np.asarray(theta1, dtype=float)
    b = np.asarray(theta2, dtype=float)
    v = b - a
    if np.allclose(v, 0.0, atol=0.0):
        path = make_path(field, *straight_path(a, b, 3))
        return Shot(0.0, path, 0.0, 0)

    def endpoint(v):
        return integrate_geodesic(field, a, v, 1.0, steps)

    path = endpoint(v)
    F = path.endpoint - b
    miss = float(np.linalg.norm(F))
    best = miss
    for it in range(1, max_iter + 1):
        if miss < tol:
            return Shot(path.length, path, miss, it - 1)
        eps = 1e-7 * max(1.0, float(np.linalg.norm(v)))
        J = np.empty((a.size, a.size))
        for j in range(a.size):
            dv = np.zeros_like(v)
            dv[j] = eps
            J[:, j] = (endpoint(v + dv).endpoint - endpoint(v - dv).endpoint) / (2 * eps)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular shooting Jacobian (conjugate point?)", best) from exc
        lam = 1.0
        while lam > 1e-4:
            try:
                trial = endpoint(v + lam * step)
            except BlowUp:
                lam *= 0.5
                continue
            F_new = trial.endpoint - b
            if np.linalg.norm(F_new) < miss or lam <= 1e-3:
                break
            lam *= 0.5
        else:
            raise NoConvergence("line search failed", best)
        v = v + lam * step
        path, F = trial, F_new
        miss = float(np.linalg.norm(F))
        best = min(best, miss)
    if miss < tol:
        return Shot(path.length, path, miss, max_iter)
    raise NoConvergence(f"endpoint miss {best:.3e} after {max_iter} iterations", best)


def indefinite_length(field: MetricField, path: GeodesicPath) -> tuple[float, str]:
    """``(integral of sqrt|g(v, v)|, causal class)`` along a sampled path.

    The class is ``spacelike`` / ``timelike`` when ``g(v, v)`` keeps one sign,
    ``null`` when it stays below 1e-10 in magnitude, ``mixed`` otherwise.
    """
    q = _speed2(field, path.theta, path.velocity)
    length = float(simpson(np.sqrt(np.abs(q)), x=path.s))
    return length, _causal_class(q)
