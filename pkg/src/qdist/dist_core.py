"""Parametric probability families and the quadrature they are integrated with.

Three support descriptors are understood by :func:`integrate`:

* :class:`RealLine` -- the whole real axis, carrying an envelope hint
  ``exp(-((x - center) / width)**2)`` used by Gauss-Hermite quadrature;
* :class:`Interval` -- a finite interval ``[lo, hi]``;
* :class:`Periodic` -- one period ``[lo, lo + length)`` of a periodic function.

Integrands are vectorized callables ``f(x) -> array`` whose *last* axis runs
along ``x``; leading axes (matrix components, mode indices) are integrated
simultaneously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import roots_hermite

from .constants import NATURAL, Constants
from .errors import DomainMismatch, IndexTooLarge, NonConvergent, OutOfDomain

N_MAX_HERMITE = 30


# ---------------------------------------------------------------------------
# Support descriptors and quadrature settings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealLine:
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("envelope width must be positive")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("interval must have hi > lo")


@dataclass(frozen=True)
class Periodic:
    lo: float = 0.0
    length: float = 2 * math.pi

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("period must be positive")


Domain = Union[RealLine, Interval, Periodic]

SCHEMES = ("adaptive-interval", "gauss-hermite", "periodic-trapezoid")


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "adaptive-interval"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    node_count: int = 200

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def with_nodes(self, node_count: int) -> "QuadratureSpec":
        return QuadratureSpec(self.scheme, self.abs_tol, self.rel_tol, self.max_subdivisions, node_count)


ADAPTIVE = QuadratureSpec()
GAUSS_HERMITE = QuadratureSpec(scheme="gauss-hermite", node_count=200)
TRAPEZOID = QuadratureSpec(scheme="periodic-trapezoid", node_count=512)


def default_spec(domain: Domain) -> QuadratureSpec:
    if isinstance(domain, Periodic):
        return TRAPEZOID
    return ADAPTIVE


class QuadResult(NamedTuple):
    value: Union[float, complex, np.ndarray]
    error: float
    converged: bool
    evaluations: int


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def hermite_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and *envelope-removed* weights ``w_i * exp(u_i**2)``.

    With these, ``sum(W * f(u))`` approximates ``int f(u) du`` for ``f`` that
    decays like ``exp(-u**2)``.
    """
    u, w = roots_hermite(n)
    with np.errstate(divide="ignore"):
        W = np.exp(np.log(w) + u * u)
    u.setflags(write=False)
    W.setflags(write=False)
    return u, W


def quadrature_nodes(domain: Domain, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``x`` and weights ``W`` with ``int f dx ~= sum(W * f(x))``.

    Only for the fixed-node schemes.
    """
    if spec.scheme == "gauss-hermite":
        if not isinstance(domain, RealLine):
            raise DomainMismatch("gauss-hermite needs a RealLine domain")
        u, W = hermite_rule(spec.node_count)
        return domain.center + domain.width * u, domain.width * W
    if spec.scheme == "periodic-trapezoid":
        if not isinstance(domain, Periodic):
            raise DomainMismatch("periodic-trapezoid needs a Periodic domain")
        n = spec.node_count
        x = domain.lo + domain.length * np.arange(n) / n
        return x, np.full(n, domain.length / n)
    raise DomainMismatch(f"{spec.scheme} has no fixed node set")


def _tolerance(spec: QuadratureSpec, value) -> float:
    return max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(value))))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    domain: Domain,
    spec: Optional[QuadratureSpec] = None,
    *,
    strict: bool = True,
) -> QuadResult:
    """Integrate ``f`` over ``domain``.

    ``f`` may be real or complex and may return extra leading axes; the last
    axis of ``f(x)`` must follow ``x``.  The error of fixed-node rules is
    estimated against the rule with half the nodes (trapezoid: every second
    node, Gauss-Hermite: ``n // 2`` nodes).

    Raises:
        NonConvergent: the error estimate exceeds
            ``max(abs_tol, rel_tol * |value|)`` and ``strict`` is set.
        DomainMismatch: the scheme cannot integrate over ``domain``.
    """
    spec = spec or default_spec(domain)

    if spec.scheme == "adaptive-interval":
        if isinstance(domain, RealLine):
            a, b = -np.inf, np.inf
        elif isinstance(domain, Interval):
            a, b = domain.lo, domain.hi
        else:
            a, b = domain.lo, domain.lo + domain.length

        def g(x):
            return np.asarray(f(np.asarray([x])))[..., 0]

        value, err, info = quad_vec(
            g, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions, full_output=True,
        )
        value = value if np.ndim(value) else value[()]
        ok = info.success or err <= _tolerance(spec, value)
        result = QuadResult(value, float(err), bool(ok), int(info.neval))
    else:
        x, W = quadrature_nodes(domain, spec)
        fx = np.asarray(f(x))
        value = fx @ W
        if spec.scheme == "periodic-trapezoid":
            coarse = fx[..., ::2] @ (2 * W[::2]) if spec.node_count % 2 == 0 else value
            n_eval = spec.node_count
        else:
            half = max(spec.node_count // 2, 2)
            xh, Wh = quadrature_nodes(domain, spec.with_nodes(half))
            coarse = np.asarray(f(xh)) @ Wh
            n_eval = spec.node_count + half
        err = float(np.max(np.abs(value - coarse)))
        if not np.all(np.isfinite(value)):
            raise NonConvergent("integrand produced non-finite values on the node set")
        value = value if np.ndim(value) else value[()]
        result = QuadResult(value, err, err <= _tolerance(spec, value), n_eval)

    if strict and not result.converged:
        raise NonConvergent(
            f"{spec.scheme}: error estimate {result.error:.3e} above tolerance "
            f"{_tolerance(spec, result.value):.3e}"
        )
    return result


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------


def fd_step(theta: np.ndarray, rel: float = 1e-5) -> np.ndarray:
    return rel * np.maximum(np.abs(theta), 1.0)


def central_gradient(fun: Callable[[np.ndarray], np.ndarray], theta, h=None, points: int = 5):
    """Central finite-difference derivative of ``fun`` along each coordinate.

    Returns an array with a new leading axis of length ``len(theta)``.
    ``points`` is 3 or 5 (stencil size).
    """
    theta = np.asarray(theta, dtype=float)
    h = fd_step(theta) if h is None else np.broadcast_to(np.asarray(h, dtype=float), theta.shape)
    out = []
    for a in range(theta.size):
        e = np.zeros_like(theta)
        e[a] = h[a]
        if points == 3:
            d = (fun(theta + e) - fun(theta - e)) / (2 * h[a])
        elif points == 5:
            d = (-fun(theta + 2 * e) + 8 * fun(theta + e) - 8 * fun(theta - e) + fun(theta - 2 * e)) / (12 * h[a])
        else:
            raise ValueError("points must be 3 or 5")
        out.append(np.asarray(d))
    return np.stack(out)


# ---------------------------------------------------------------------------
# Hermite polynomials
# ---------------------------------------------------------------------------


def hermite_table(n_max: int, u) -> np.ndarray:
    """Physicists' Hermite polynomials ``H_0 .. H_{n_max}`` at ``u``.

    Three-term recurrence ``H_{n+1} = 2u H_n - 2n H_{n-1}``; row ``n`` of the
    result holds ``H_n(u)``.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max > N_MAX_HERMITE:
        raise IndexTooLarge(f"Hermite index {n_max} exceeds N_max = {N_MAX_HERMITE}")
    u = np.asarray(u, dtype=float)
    H = np.empty((n_max + 1,) + u.shape)
    H[0] = 1.0
    if n_max >= 1:
        H[1] = 2.0 * u
    for k in range(1, n_max):
        H[k + 1] = 2.0 * u * H[k] - 2.0 * k * H[k - 1]
    return H


def hermite(n: int, u) -> np.ndarray:
    return hermite_table(n, u)[n]


def hermite_function_table(n_max: int, u) -> np.ndarray:
    """Polynomial parts ``phi_n(u) = H_n(u) / sqrt(2^n n! sqrt(pi))``.

    The normalized oscillator eigenfunction is
    ``psi_n(x) = sqrt(lam) * phi_n(lam x) * exp(-(lam x)**2 / 2)``.
    """
    H = hermite_table(n_max, u)
    n = np.arange(n_max + 1)
    log_norm = 0.5 * (n * math.log(2.0) + np.array([math.lgamma(k + 1) for k in n]) + 0.5 * math.log(math.pi))
    return H * np.exp(-log_norm).reshape((-1,) + (1,) * np.ndim(u))


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParametricFamily:
    """A density ``p(x; theta)`` on a continuous support.

    ``log_density(x, theta)`` returns ``ln p`` with the shape of ``x``;
    ``grad_log_density`` returns shape ``(d,) + x.shape`` and
    ``hess_log_density`` (optional) shape ``(d, d) + x.shape``.
    ``support(theta)`` gives the integration domain, which may depend on the
    parameters through the envelope hint of :class:`RealLine`.
    """

    name: str
    dim_params: int
    param_names: tuple[str, ...]
    param_domain: tuple[tuple[float, float], ...]
    log_density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_log_density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    support: Callable[[np.ndarray], Domain]
    hess_log_density: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    preferred_spec: Optional[QuadratureSpec] = field(default=None)

    def check_params(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim_params,):
            raise OutOfDomain(f"{self.name}: expected {self.dim_params} parameters, got shape {theta.shape}")
        for name, v, (lo, hi) in zip(self.param_names, theta, self.param_domain):
            if not (lo < v < hi):
                raise OutOfDomain(f"{self.name}: parameter {name}={v} outside ({lo}, {hi})")
        return theta

    def density(self, x, theta) -> np.ndarray:
        return np.exp(self.log_density(np.asarray(x, dtype=float), np.asarray(theta, dtype=float)))

    def spec_for(self, spec: Optional[QuadratureSpec]) -> QuadratureSpec:
        return spec or self.preferred_spec or ADAPTIVE

    def total_mass(self, theta, spec: Optional[QuadratureSpec] = None) -> QuadResult:
        theta = self.check_params(theta)
        return integrate(lambda x: self.density(x, theta), self.support(theta), self.spec_for(spec))


def gaussian_family() -> ParametricFamily:
    """Normal densities parameterized by ``(sigma, mu)`` -- scale first."""

    def log_density(x, th):
        s, mu = th
        return -0.5 * math.log(2 * math.pi) - np.log(s) - (x - mu) ** 2 / (2 * s * s)

    def grad(x, th):
        s, mu = th
        d = x - mu
        return np.stack([-1.0 / s + d * d / s**3, d / (s * s)])

    def hess(x, th):
        s, mu = th
        d = x - mu
        ss = 1.0 / (s * s) - 3.0 * d * d / s**4
        sm = -2.0 * d / s**3
        mm = np.broadcast_to(-1.0 / (s * s), np.shape(d))
        return np.array([[ss, sm], [sm, mm]])

    return ParametricFamily(
        name="gauss",
        dim_params=2,
        param_names=("sigma", "mu"),
        param_domain=((0.0, math.inf), (-math.inf, math.inf)),
        log_density=log_density,
        grad_log_density=grad,
        hess_log_density=hess,
        support=lambda th: RealLine(center=float(th[1]), width=math.sqrt(2.0) * float(th[0])),
        preferred_spec=GAUSS_HERMITE,
    )


def ho_eigenstate_family(n: int, constants: Constants = NATURAL, n_max: int = N_MAX_HERMITE) -> ParametricFamily:
    """Position density of the ``n``-th oscillator eigenstate over ``(m, omega)``.

    ``p_n(x) = lam / (2^n n! sqrt(pi)) * exp(-lam^2 x^2) * H_n(lam x)^2`` with
    ``lam^2 = m omega / hbar``; this is ``|psi_n|^2`` and integrates to one.
    """
    if n < 0:
        raise ValueError("eigenstate index must be >= 0")
    if n > n_max:
        raise IndexTooLarge(f"eigenstate index {n} exceeds N_max = {n_max}")
    hbar = constants.hbar
    log_norm = -0.5 * math.log(math.pi) - n * math.log(2.0) - math.lgamma(n + 1)

    def lam_of(th):
        m, w = th
        return math.sqrt(m * w / hbar)

    def _poly(u):
        H = hermite_table(max(n, 2), u)
        Hn = H[n]
        dH = 2 * n * H[n - 1] if n >= 1 else np.zeros_like(u)
        d2H = 4 * n * (n - 1) * H[n - 2] if n >= 2 else np.zeros_like(u)
        return Hn, dH, d2H

    def log_density(x, th):
        lam = lam_of(th)
        u = lam * np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return math.log(lam) + log_norm - u * u + 2.0 * np.log(np.abs(hermite(n, u)))

    # ln p as a function of L = ln(lam): f(L) = L - u^2 + 2 ln|H_n(u)| + const, du/dL = u.
    def _f1_f2(x, th):
        u = lam_of(th) * np.asarray(x, dtype=float)
        Hn, dH, d2H = _poly(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = dH / Hn
            r2 = d2H / Hn
        f1 = 1.0 - 2.0 * u * u + 2.0 * u * r1
        f2 = -4.0 * u * u + 2.0 * u * r1 + 2.0 * u * u * (r2 - r1 * r1)
        return f1, f2

    def grad(x, th):
        m, w = th
        f1, _ = _f1_f2(x, th)
        return np.stack([f1 / (2 * m), f1 / (2 * w)])

    def hess(x, th):
        m, w = th
        f1, f2 = _f1_f2(x, th)
        dL = (1 / (2 * m), 1 / (2 * w))
        d2L = (-1 / (2 * m * m), -1 / (2 * w * w))
        mm = f2 * dL[0] ** 2 + f1 * d2L[0]
        ww = f2 * dL[1] ** 2 + f1 * d2L[1]
        mw = f2 * dL[0] * dL[1]
        return np.array([[mm, mw], [mw, ww]])

    return ParametricFamily(
        name=f"ho:{n}",
        dim_params=2,
        param_names=("m", "omega"),
        param_domain=((0.0, math.inf), (0.0, math.inf)),
        log_density=log_density,
        grad_log_density=grad,
        hess_log_density=hess,
        support=lambda th: RealLine(center=0.0, width=1.0 / lam_of(th)),
        preferred_spec=GAUSS_HERMITE,
    )
