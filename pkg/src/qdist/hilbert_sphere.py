"""Fisher-Rao metric on the sphere of (truncated) quantum amplitudes.

A state ``Psi = sum_n c_n exp(-i t E_n / hbar) psi_n`` has position density
``P(x) = sum_{m,n} conj(c_m) c_n I_mn(x)`` with overlap densities
``I_mn``.  Treating ``c`` and ``conj(c)`` as independent (Wirtinger)
coordinates, the metric ``-int P d^2 ln P`` has the blocks

    g_mn     = sum_{k,p} conj(c_k) conj(c_p) A^{kp}_{mn}
    g_{m~n}  = -delta_mn + sum_{k,p} c_k conj(c_p) A^{mp}_{kn}
    A^{kp}_{mn} = int I_km I_pn / P dx

and the line element ``g_mn dc_m dc_n + conj(g_mn) dc*_m dc*_n + g_{m~n} dc*_m dc_n``.

Two systems are provided.  The free particle lives on a circle of
circumference ``2 pi`` with integer wave numbers (plane waves are not
normalizable on the line).  The oscillator uses Hermite eigenfunctions.

Every overlap density factors as ``I_kl(x) = envelope(x) * R_kl(x)`` with a
smooth, non-decaying ``R``; all integrals below are done on that split so
that ratios like ``I I / P`` never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad_vec
from scipy.optimize import minimize_scalar

from .constants import NATURAL, Constants
from .dist_core import (
    N_MAX_HERMITE,
    Periodic,
    QuadratureSpec,
    RealLine,
    hermite_function_table,
    hermite_rule,
    hermite_table,
    integrate,
)
from .errors import (
    DegenerateState,
    IndexTooLarge,
    InvalidState,
    NonConvergent,
    PropagatorCaustic,
    QuadratureFailure,
)

NORM_TOL = 1e-12
CAUSTIC_TOL = 1e-6
ZERO_REL = 1e-14
P_FLOOR = 1e-300

MODES = {"full": "full", "diagonal": "diagonal"}


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AmplitudeState:
    coeffs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        labels = np.asarray(self.labels, dtype=int).ravel()
        if c.size == 0 or c.shape != labels.shape:
            raise InvalidState("coefficients and labels must be non-empty and of equal length")
        if len(set(labels.tolist())) != labels.size:
            raise InvalidState("mode labels must be distinct")
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidState(f"sum |c_n|^2 = {norm!r}, expected 1")
        c.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def normalized(cls, coeffs, labels=None) -> "AmplitudeState":
        c = np.asarray(coeffs, dtype=complex).ravel()
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise InvalidState("zero vector has no direction")
        return cls(c / nrm, np.arange(c.size) if labels is None else labels)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, labels=None) -> "AmplitudeState":
        return cls.normalized(rng.normal(size=n) + 1j * rng.normal(size=n), labels)

    @property
    def dim(self) -> int:
        return self.coeffs.size

    def with_phase(self, alpha: float) -> "AmplitudeState":
        return AmplitudeState(self.coeffs * np.exp(1j * alpha), self.labels)

    def padded(self, extra: int) -> "AmplitudeState":
        """The same state embedded into ``extra`` more (empty) modes."""
        start = int(self.labels.max()) + 1
        labels = np.concatenate([self.labels, np.arange(start, start + extra)])
        return AmplitudeState(np.concatenate([self.coeffs, np.zeros(extra)]), labels)


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------


class EvolvedBasis:
    """Overlap densities ``I_kl(x, t)`` of an energy eigenbasis at fixed time.

    Subclasses provide ``envelope(x)``, ``reduced(labels, x)`` (the factor
    ``R`` with shape ``(N, N) + x.shape``), ``domain``, ``default_spec`` and
    ``nodes(spec)`` returning ``x`` and weights ``W`` with
    ``int envelope(x) f(x) dx ~= sum(W f(x))``.
    """

    system: str
    time: float
    domain: object
    default_spec: QuadratureSpec

    def check_labels(self, labels) -> np.ndarray:
        return np.asarray(labels, dtype=int)

    def overlap_matrix(self, labels, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        labels = self.check_labels(labels)
        out = self.envelope(flat) * self.reduced(labels, flat)
        return out.reshape(labels.shape * 2 + x.shape)

    def overlap(self, k: int, l: int, x):
        if k == l:
            return self.overlap_matrix([k], x)[0, 0]
        return self.overlap_matrix([k, l], x)[0, 1]

    def spec(self, spec: Optional[QuadratureSpec]) -> QuadratureSpec:
        return spec or self.default_spec

    def search_grid(self) -> np.ndarray:
        raise NotImplementedError


class FreeParticleCircle(EvolvedBasis):
    """Plane waves ``exp(ikx) / sqrt(2 pi)`` with integer ``k`` on ``[0, 2 pi)``.

    ``I_kl = exp[i x (k - l) - i (hbar t / 2m)(k^2 - l^2)] / (2 pi)``.
    """

    system = "free-particle-circle"

    def __init__(self, mass: float = 1.0, time: float = 0.0, constants: Constants = NATURAL,
                 node_count: int = 512):
        if not mass > 0:
            raise InvalidState("mass must be positive")
        self.mass = float(mass)
        self.time = float(time)
        self.hbar = constants.hbar
        self.domain = Periodic(0.0, 2 * math.pi)
        self.default_spec = QuadratureSpec(scheme="periodic-trapezoid", node_count=node_count)

    @property
    def params(self) -> dict:
        return {"mass": self.mass}

    def envelope(self, x):
        return np.full(np.shape(x), 1.0 / (2 * math.pi))

    def reduced(self, labels, x):
        k = labels[:, None].astype(float)
        l = labels[None, :].astype(float)
        phase = -self.hbar * self.time / (2 * self.mass) * (k * k - l * l)
        x = np.asarray(x, dtype=float)
        return np.exp(1j * ((k - l)[..., None] * x + phase[..., None]))

    def nodes(self, spec: QuadratureSpec):
        if spec.scheme != "periodic-trapezoid":
            raise QuadratureFailure("fixed-node evaluation on the circle uses the periodic trapezoid rule")
        n = spec.node_count
        return 2 * math.pi * np.arange(n) / n, np.full(n, 1.0 / n)

    def search_grid(self):
        return np.linspace(0.0, 2 * math.pi, 8193)

    def mode_energies(self, labels) -> np.ndarray:
        k = np.asarray(labels, dtype=float)
        return self.hbar**2 * k * k / (2 * self.mass)


class HarmonicOscillator(EvolvedBasis):
    """Oscillator eigenfunctions evolved for time ``t``.

    ``I_kl(x) = exp(i omega t (k - l)) psi_k(x) psi_l(x)``; envelope
    ``lam exp(-lam^2 x^2)`` and ``R_kl = exp(i omega t (k - l)) phi_k phi_l``
    with ``phi_n = H_n / sqrt(2^n n! sqrt(pi))`` at ``u = lam x``.
    """

    system = "harmonic-oscillator"

    def __init__(self, mass: float = 1.0, omega: float = 1.0, time: float = 0.0,
                 constants: Constants = NATURAL, node_count: int = 200):
        if not (mass > 0 and omega > 0):
            raise InvalidState("mass and omega must be positive")
        self.mass = float(mass)
        self.omega = float(omega)
        self.time = float(time)
        self.hbar = constants.hbar
        self.lam = math.sqrt(self.mass * self.omega / self.hbar)
        self.domain = RealLine(0.0, 1.0 / self.lam)
        self.default_spec = QuadratureSpec(scheme="gauss-hermite", node_count=node_count)

    @property
    def params(self) -> dict:
        return {"mass": self.mass, "omega": self.omega}

    @property
    def sin_wt(self) -> float:
        return math.sin(self.omega * self.time)

    def require_propagator(self):
        if abs(self.sin_wt) < CAUSTIC_TOL:
            raise PropagatorCaustic(f"sin(omega t) = {self.sin_wt:.3e}: propagator is singular")

    def check_labels(self, labels):
        labels = np.asarray(labels, dtype=int)
        if labels.size and (labels.min() < 0 or labels.max() > N_MAX_HERMITE):
            raise IndexTooLarge(f"oscillator modes must lie in [0, {N_MAX_HERMITE}]")
        return labels

    def envelope(self, x):
        u = self.lam * np.asarray(x, dtype=float)
        return self.lam * np.exp(-u * u)

    def phi(self, labels, x):
        labels = self.check_labels(labels)
        table = hermite_function_table(int(labels.max()), self.lam * np.asarray(x, dtype=float))
        return table[labels]

    def reduced(self, labels, x):
        phi = self.phi(labels, x)
        d = (labels[:, None] - labels[None, :]).astype(float)
        phase = np.exp(1j * self.omega * self.time * d)
        return phase[..., None] * phi[:, None, :] * phi[None, :, :]

    def eigenfunction(self, n: int, x):
        u = self.lam * np.asarray(x, dtype=float)
        return math.sqrt(self.lam) * self.phi([n], x)[0] * np.exp(-0.5 * u * u)

    def nodes(self, spec: QuadratureSpec):
        if spec.scheme != "gauss-hermite":
            raise QuadratureFailure("fixed-node evaluation for the oscillator uses Gauss-Hermite")
        u, W = hermite_rule(spec.node_count)
        w = W * np.exp(-u * u)
        return u / self.lam, w

    def search_grid(self):
        u_max = float(hermite_rule(self.default_spec.node_count)[0].max())
        return np.linspace(-u_max, u_max, 8001) / self.lam

    def mode_energies(self, labels) -> np.ndarray:
        return self.hbar * self.omega * (np.asarray(labels, dtype=float) + 0.5)


def _norm_mode(mode: str) -> str:
    try:
        return MODES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(MODES)}") from None


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def overlap_density(basis: EvolvedBasis, m: int, n: int, x):
    return basis.overlap(m, n, x)


def _bilinear_reduced(R, c, cbar):
    return np.einsum("m,n,mn...->...", cbar, c, R)


def probability_values(basis: EvolvedBasis, coeffs, labels, x, mode: str = "full") -> np.ndarray:
    """``sum conj(c_m) c_n I_mn(x)`` for arbitrary (unnormalized) coefficients.

    ``mode="diagonal"`` keeps only the ``m = n`` terms.
    """
    mode = _norm_mode(mode)
    c = np.asarray(coeffs, dtype=complex)
    x = np.asarray(x, dtype=float)
    R = basis.reduced(basis.check_labels(labels), x)
    if mode == "diagonal":
        idx = np.arange(c.size)
        val = np.einsum("n,n...->...", np.abs(c) ** 2, R[idx, idx])
    else:
        val = _bilinear_reduced(R, c, np.conj(c))
    return np.real(basis.envelope(x) * val)


def probability(basis: EvolvedBasis, state: AmplitudeState, x, mode: str = "full") -> np.ndarray:
    """Position density of ``state`` at time ``basis.time``.

    The full mode keeps every cross term ``m != n``; ``diagonal`` drops them.
    """
    return probability_values(basis, state.coeffs, state.labels, x, mode)


def normalization(basis: EvolvedBasis, state: AmplitudeState, spec: Optional[QuadratureSpec] = None,
                  mode: str = "full") -> float:
    spec = basis.spec(spec)
    res = integrate(lambda x: probability(basis, state, x, mode), basis.domain, spec)
    return float(np.real(res.value))


def orthonormality_matrix(basis: EvolvedBasis, labels, spec: Optional[QuadratureSpec] = None) -> np.ndarray:
    """``int I_mn dx`` for all mode pairs."""
    labels = basis.check_labels(labels)
    spec = basis.spec(spec)
    res = integrate(lambda x: basis.overlap_matrix(labels, x), basis.domain, spec)
    return np.asarray(res.value)


# ---------------------------------------------------------------------------
# A-integrals
# ---------------------------------------------------------------------------


def _reduced_q(basis, coeffs, labels, x, mode="full"):
    R = basis.reduced(labels, x)
    c = np.asarray(coeffs, dtype=complex)
    if mode == "diagonal":
        idx = np.arange(c.size)
        Q = np.einsum("n,n...->...", np.abs(c) ** 2, np.real(R[idx, idx]))
    else:
        Q = np.real(_bilinear_reduced(R, c, np.conj(c)))
    return R, Q


def density_zeros(basis: EvolvedBasis, coeffs, labels, mode="full") -> list[float]:
    """Positions where the reduced density falls below ``1e-14`` of its maximum."""
    grid = basis.search_grid()
    _, Q = _reduced_q(basis, coeffs, labels, grid, mode)
    qmax = float(np.max(Q))
    zeros = []
    cand = np.where((Q[1:-1] <= Q[:-2]) & (Q[1:-1] <= Q[2:]) & (Q[1:-1] < 1e-6 * qmax))[0] + 1
    for i in cand:
        f = lambda xx: float(_reduced_q(basis, coeffs, labels, np.array([xx]), mode)[1][0])
        r = minimize_scalar(f, bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                            options={"xatol": 1e-14 * max(1.0, abs(grid[i]))})
        xz = min((grid[i], r.x), key=f)
        if f(xz) <= ZERO_REL * qmax:
            zeros.append(float(xz))
    return zeros


def _guard(basis, state, mode, numer_fn):
    zeros = density_zeros(basis, state.coeffs, state.labels, mode)
    if not zeros:
        return
    xz = np.array(zeros)
    num = np.abs(numer_fn(xz))
    scale = max(float(np.max(np.abs(numer_fn(basis.search_grid()[::50])))), 1e-300)
    if np.max(num) > 1e-10 * scale:
        raise DegenerateState(
            f"density vanishes at x = {[round(z, 12) for z in zeros]} where the A-integrand "
            "numerator does not: integral diverges"
        )


def _a_from_nodes(R, Q, W):
    Qc = np.maximum(Q, P_FLOOR)
    return np.einsum("kmi,pni,i->kpmn", R, R, W / Qc)


def a_tensor(basis: EvolvedBasis, state: AmplitudeState, spec: Optional[QuadratureSpec] = None,
             check: bool = True) -> tuple[np.ndarray, float]:
    """All ``A^{kp}_{mn}`` as an array indexed ``[k, p, m, n]`` plus an error estimate.

    Raises:
        DegenerateState: the density has a real zero where some numerator
            ``I_km I_pn`` does not vanish.
    """
    labels = basis.check_labels(state.labels)
    spec = basis.spec(spec)
    if check:
        _guard(basis, state, "full",
               lambda x: np.einsum("kmi,pni->kpmni", *(2 * (basis.reduced(labels, x),))).reshape(-1, x.size))
    N = labels.size
    if spec.scheme == "adaptive-interval":
        def f(x):
            R, Q = _reduced_q(basis, state.coeffs, labels, x)
            env = basis.envelope(x)
            return (np.einsum("kmi,pni->kpmni", R, R) * (env / np.maximum(Q, P_FLOOR))).reshape(N**4, -1)
        try:
            res = integrate(f, basis.domain, spec)
        except NonConvergent as exc:
            raise QuadratureFailure(str(exc)) from exc
        return np.asarray(res.value).reshape(N, N, N, N), res.error

    x, W = basis.nodes(spec)
    R, Q = _reduced_q(basis, state.coeffs, labels, x)
    A = _a_from_nodes(R, Q, W)
    xh, Wh = basis.nodes(spec.with_nodes(max(spec.node_count // 2, 2)))
    Rh, Qh = _reduced_q(basis, state.coeffs, labels, xh)
    err = float(np.max(np.abs(A - _a_from_nodes(Rh, Qh, Wh))))
    if not np.all(np.isfinite(A)):
        raise QuadratureFailure("non-finite A-integral")
    return A, err


def a_integral(basis: EvolvedBasis, state: AmplitudeState, indices: Sequence[int],
               spec: Optional[QuadratureSpec] = None) -> tuple[complex, float]:
    """``A^{kp}_{mn} = int I_km I_pn / P dx`` for position indices ``(k, p, m, n)``."""
    k, p, m, n = indices
    labels = basis.check_labels(state.labels)
    spec = basis.spec(spec)
    _guard(basis, state, "full", lambda x: basis.reduced(labels, x)[k, m] * basis.reduced(labels, x)[p, n])

    def f(x):
        R, Q = _reduced_q(basis, state.coeffs, labels, x)
        return basis.envelope(x) * R[k, m] * R[p, n] / np.maximum(Q, P_FLOOR)

    if spec.scheme == "adaptive-interval":
        try:
            res = integrate(f, basis.domain, spec)
        except NonConvergent as exc:
            raise QuadratureFailure(str(exc)) from exc
        return complex(res.value), res.error
    A, err = a_tensor(basis, state, spec, check=False)
    return complex(A[k, p, m, n]), err


# ---------------------------------------------------------------------------
# Metric
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SphereMetric:
    """Holomorphic block ``g[m, n]`` and mixed block ``g_mixed[m, n]`` (``g_{m~n}``)."""

    g: np.ndarray
    g_mixed: Optional[np.ndarray]
    state: AmplitudeState
    mode: str = "full"
    error: float = 0.0

    def line_element(self, dc) -> complex:
        return line_element(self, dc)


def line_element(metric: SphereMetric, dc) -> complex:
    """``g_mn dc_m dc_n + conj(g_mn) dc*_m dc*_n + g_{m~n} dc*_m dc_n``."""
    dc = np.asarray(dc, dtype=complex)
    hol = dc @ metric.g @ dc
    out = hol + np.conj(hol)
    if metric.g_mixed is not None:
        out = out + np.conj(dc) @ metric.g_mixed @ dc
    return complex(out)


def sphere_metric(basis: EvolvedBasis, state: AmplitudeState, spec: Optional[QuadratureSpec] = None,
                  mode: str = "full") -> SphereMetric:
    """Metric blocks on the amplitude sphere at ``state``.

    ``mode="full"`` assembles both blocks from the A-integrals.
    ``mode="diagonal"`` (oscillator only) evaluates the variant built on the
    diagonal-only density ``sum |c_n|^2 |psi_n|^2``::

        g_mn = -delta_mn 4 pi sin(wt) / lam^2
               + 4 c_m c_n int |I_m|^2 |I_n|^2 / P_diag dx,
        |I_n|^2 = (2 pi sin(wt) / lam^2) |psi_n|^2

    and leaves ``g_mixed`` unset.
    """
    mode = _norm_mode(mode)
    if mode == "diagonal":
        return _diagonal_metric(basis, state, spec)
    A, err = a_tensor(basis, state, spec)
    c = state.coeffs
    cb = np.conj(c)
    g = np.einsum("k,p,kpmn->mn", cb, cb, A)
    g_mixed = -np.eye(c.size) + np.einsum("k,p,mpkn->mn", c, cb, A)
    return SphereMetric(g, g_mixed, state, "full", err)


def _diagonal_metric(basis, state, spec):
    if not isinstance(basis, HarmonicOscillator):
        raise ValueError("diagonal mode is defined for the oscillator only")
    basis.require_propagator()
    spec = basis.spec(spec)
    labels = basis.check_labels(state.labels)
    c = state.coeffs
    norm_I = diagonal_norm_closed(basis)
    _guard(basis, state, "diagonal",
           lambda x: (basis.phi(labels, x) ** 2).reshape(labels.size, -1))
    x, W = basis.nodes(spec)
    phi2 = basis.phi(labels, x) ** 2
    D = np.maximum(np.abs(c) ** 2 @ phi2, P_FLOOR)
    B = np.einsum("mi,ni,i->mn", phi2, phi2, W / D)
    g = -np.eye(c.size) * 2 * norm_I + 4 * np.outer(c, c) * norm_I**2 * B
    return SphereMetric(g, None, state, "diagonal")


def sphere_metric_fd(basis: EvolvedBasis, state: AmplitudeState, spec: Optional[QuadratureSpec] = None,
                     h: float = 1e-4) -> SphereMetric:
    """Both blocks from ``-int P d^2 ln P`` with Wirtinger derivatives by finite differences.

    The second derivatives of ``ln P`` with respect to the real coordinates
    ``(Re c, Im c)`` come from central differences of the density itself
    (evaluated off the unit sphere), then are combined as
    ``d/dc = (d/dx - i d/dy) / 2``, ``d/dc* = (d/dx + i d/dy) / 2``.
    """
    spec = basis.spec(spec)
    labels = basis.check_labels(state.labels)
    x, W = basis.nodes(spec)
    R = basis.reduced(labels, x)
    N = labels.size
    z0 = np.concatenate([state.coeffs.real, state.coeffs.imag])

    def lnQ(z):
        c = z[:N] + 1j * z[N:]
        return np.log(np.maximum(np.real(_bilinear_reduced(R, c, np.conj(c))), P_FLOOR))

    Q0 = np.exp(lnQ(z0))
    f0 = lnQ(z0)
    H = np.empty((2 * N, 2 * N, x.size))
    E = np.eye(2 * N) * h
    for i in range(2 * N):
        H[i, i] = (lnQ(z0 + E[i]) - 2 * f0 + lnQ(z0 - E[i])) / (h * h)
        for j in range(i + 1, 2 * N):
            H[i, j] = H[j, i] = (
                lnQ(z0 + E[i] + E[j]) - lnQ(z0 + E[i] - E[j]) - lnQ(z0 - E[i] + E[j]) + lnQ(z0 - E[i] - E[j])
            ) / (4 * h * h)
    Hxx, Hxy, Hyx, Hyy = H[:N, :N], H[:N, N:], H[N:, :N], H[N:, N:]
    d_cc = 0.25 * (Hxx - Hyy - 1j * (Hxy + Hyx))
    d_bc = 0.25 * (Hxx + Hyy + 1j * (Hyx - Hxy))
    g = -np.einsum("mni,i->mn", d_cc, W * Q0)
    g_mixed = -np.einsum("mni,i->mn", d_bc, W * Q0)
    return SphereMetric(g, g_mixed, state, "full")


def tangent_projection(state: AmplitudeState, dc) -> np.ndarray:
    """Remove the component of ``dc`` that violates ``sum Re(conj(c) dc) = 0``."""
    c = state.coeffs
    dc = np.asarray(dc, dtype=complex)
    return dc - np.real(np.vdot(c, dc)) * c


def truncation_check(basis: EvolvedBasis, state: AmplitudeState, extra: int = 2,
                     spec: Optional[QuadratureSpec] = None) -> float:
    """Largest change of the original metric block when ``extra`` empty modes are added."""
    base = sphere_metric(basis, state, spec)
    big = sphere_metric(basis, state.padded(extra), spec)
    N = state.dim
    return float(max(np.max(np.abs(big.g[:N, :N] - base.g)),
                     np.max(np.abs(big.g_mixed[:N, :N] - base.g_mixed))))


# ---------------------------------------------------------------------------
# Propagator routes (oscillator)
# ---------------------------------------------------------------------------


def _legendre_panels(lo, hi, panels, order):
    t, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * t).ravel()
    wy = (half[:, None] * w).ravel()
    return y, wy


def _y_nodes(basis: HarmonicOscillator, panels=32, order=64):
    L = 10.5 / basis.lam
    return _legendre_panels(-L, L, panels, order)


def propagator_amplitude(basis: HarmonicOscillator, n: int, x, panels: int = 32, order: int = 64) -> np.ndarray:
    """``int K(x, t; y, 0) psi_n(y) dy`` with the oscillator (Mehler) kernel.

    ``K = lam / sqrt(2 pi i sin wt) exp[i lam^2 (x^2 + y^2) cot(wt) / 2 - i lam^2 x y / sin wt]``;
    the ``y`` integral uses composite Gauss-Legendre on ``|lam y| <= 10.5``.
    """
    basis.require_propagator()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam, s = basis.lam, basis.sin_wt
    cot = math.cos(basis.omega * basis.time) / s
    y, wy = _y_nodes(basis, panels, order)
    psi = basis.eigenfunction(n, y)
    expo = 1j * lam**2 * 0.5 * (x[:, None] ** 2 + y[None, :] ** 2) * cot - 1j * lam**2 * x[:, None] * y[None, :] / s
    pref = lam / np.sqrt(2 * math.pi * 1j * s + 0j)
    return pref * (np.exp(expo) @ (wy * psi))


def propagator_overlap(basis: HarmonicOscillator, m: int, n: int, x, **kw) -> np.ndarray:
    """``I_mn`` from the propagator sandwich ``conj(int K psi_m) * int K psi_n``."""
    return np.conj(propagator_amplitude(basis, m, x, **kw)) * propagator_amplitude(basis, n, x, **kw)


def diagonal_amplitude(basis: HarmonicOscillator, n: int, x, panels: int = 32, order: int = 64) -> np.ndarray:
    """The unnormalized evolved amplitude ``I_n(x)`` of the diagonal convention.

    ``I_n = (lam^2/pi)^{1/4} / sqrt(2^n n!) exp[-i lam^2 x^2 e^{-iwt} / (2 sin wt)]
    * int H_n(lam y) exp[i lam^2 e^{iwt} (y - x e^{-iwt})^2 / (2 sin wt)] dy``

    evaluated by composite Gauss-Legendre in ``y``; both exponents are summed
    before exponentiating since individually they grow like ``exp(lam^2 x^2 / 2)``.
    """
    basis.require_propagator()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam, s, wt = basis.lam, basis.sin_wt, basis.omega * basis.time
    y, wy = _y_nodes(basis, panels, order)
    Hn = hermite_table(n, lam * y)[n]
    e_m, e_p = np.exp(-1j * wt), np.exp(1j * wt)
    expo = (-1j * lam**2 * x[:, None] ** 2 * e_m / (2 * s)
            + 1j * lam**2 * e_p / (2 * s) * (y[None, :] - x[:, None] * e_m) ** 2)
    norm = (lam**2 / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    return norm * (np.exp(expo) @ (wy * Hn))


def diagonal_norm(basis: HarmonicOscillator, n: int, node_count: int = 60) -> float:
    """``int |I_n|^2 dx`` by Gauss-Hermite after removing the envelope ``exp(-lam^2 x^2)``."""
    u, W = hermite_rule(node_count)
    vals = np.abs(diagonal_amplitude(basis, n, u / basis.lam)) ** 2
    return float(np.sum(W * vals) / basis.lam)


def diagonal_norm_closed(basis: HarmonicOscillator) -> float:
    """``2 pi sin(omega t) / lam^2``."""
    return 2 * math.pi * basis.sin_wt / basis.lam**2
