"""Closed-form geometry of the oscillator parameter plane ``{(m, omega) : m, omega > 0}``.

For eigenstate index ``n`` the line element is

    a dm^2/m^2 + a domega^2/omega^2 + b dm domega/(m omega),
    a = (1 - n^2 - n) / 2,   b = (1 - n^2 + 3n) / 2,

which the logarithmic coordinates

    U = ln[(omega/omega_0) (m/m_0)^(b / 2a)],   V = ln(m/m_0)

bring to the constant diagonal form ``a dU^2 + eta(n) dV^2`` with
``eta = a - b^2 / 4a``.  Coefficients are kept as exact fractions so that
signature classification never depends on rounding.

Note that this closed form is *not* the Fisher-Rao metric of the eigenstate
densities: those depend on ``(m, omega)`` only through ``m omega`` and have
the rank-one metric ``(n^2 + n + 1)/2 * (dm/m + domega/omega)^2``
(see :func:`eigenstate_fr_metric_closed`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .constants import NATURAL, Constants
from .errors import OutOfDomain
from .fisher_rao import MetricTensor
from .geodesy import MetricField


def coefficient_a(n: int) -> Fraction:
    return Fraction(1 - n * n - n, 2)


def coefficient_b(n: int) -> Fraction:
    return Fraction(1 - n * n + 3 * n, 2)


def eta_exact(n: int) -> Fraction:
    """``(1 - n^2 - 5n)(3 - 3n^2 + n) / (8 (1 - n^2 - n))`` as a fraction."""
    den = 1 - n * n - n
    if den == 0:
        raise ZeroDivisionError("1 - n^2 - n vanishes")
    return Fraction((1 - n * n - 5 * n) * (3 - 3 * n * n + n), 8 * den)


def eta_completed_square(n: int) -> Fraction:
    """``(4a^2 - b^2) / (4a)``: the ``dV^2`` coefficient after completing the square."""
    a, b = coefficient_a(n), coefficient_b(n)
    return (4 * a * a - b * b) / (4 * a)


def eta(n: int) -> float:
    value = eta_exact(n)
    if value != eta_completed_square(n):  # pragma: no cover - algebraic identity
        raise ArithmeticError(f"eta identity broken at n={n}")
    return float(value)


def default_scales(constants: Constants = NATURAL) -> tuple[float, float]:
    """``(m_0, omega_0)`` with ``m_0 omega_0 = c^3 / G`` and ``m_0 = 1``."""
    return 1.0, constants.c**3 / constants.G


@dataclass(frozen=True)
class OscillatorMetric:
    n: int
    a: Fraction
    b: Fraction
    eta: Fraction
    reference_scales: tuple[float, float]

    @classmethod
    def for_state(cls, n: int, scales: Optional[tuple[float, float]] = None,
                  constants: Constants = NATURAL) -> "OscillatorMetric":
        if n < 0:
            raise OutOfDomain("eigenstate index must be >= 0")
        return cls(n, coefficient_a(n), coefficient_b(n), eta_exact(n), scales or default_scales(constants))

    @property
    def signature_class(self) -> str:
        return classify(self.a, self.eta)


def classify(a, eta_value) -> str:
    if a > 0 and eta_value > 0:
        return "riemannian"
    if a < 0 and eta_value < 0:
        return "negative-definite"
    if a == 0 or eta_value == 0:
        return "degenerate"
    return "lorentzian"


def _check_point(m, w):
    if not (m > 0 and w > 0):
        raise OutOfDomain(f"mass and frequency must be positive, got m={m}, omega={w}")


def ho_metric_closed(n: int, m: float, w: float) -> MetricTensor:
    """``[[a/m^2, b/(2 m w)], [b/(2 m w), a/w^2]]``."""
    _check_point(m, w)
    if n < 0:
        raise OutOfDomain("eigenstate index must be >= 0")
    a, b = float(coefficient_a(n)), float(coefficient_b(n))
    g = np.array([[a / m**2, b / (2 * m * w)], [b / (2 * m * w), a / w**2]])
    return MetricTensor(np.array([m, w]), g)


def eigenstate_fr_metric_closed(n: int, m: float, w: float) -> MetricTensor:
    """Fisher-Rao metric of ``|psi_n|^2`` over ``(m, omega)``.

    The density is a scale family in ``lam = sqrt(m omega / hbar)`` whose
    log-scale Fisher information is ``2 (n^2 + n + 1)``; since
    ``d ln lam = (dm/m + domega/omega) / 2`` the metric is that quarter of it
    times ``(dm/m + domega/omega)^2``.
    """
    _check_point(m, w)
    if n < 0:
        raise OutOfDomain("eigenstate index must be >= 0")
    c = (n * n + n + 1) / 2.0
    g = c * np.array([[1 / m**2, 1 / (m * w)], [1 / (m * w), 1 / w**2]])
    return MetricTensor(np.array([m, w]), g)


def uv_transform(n: int, m: float, w: float, scales: Optional[tuple[float, float]] = None) -> tuple[float, float]:
    _check_point(m, w)
    m0, w0 = scales or default_scales()
    _check_point(m0, w0)
    r = float(coefficient_b(n) / (2 * coefficient_a(n)))
    return math.log(w / w0) + r * math.log(m / m0), math.log(m / m0)


def uv_inverse(n: int, U: float, V: float, scales: Optional[tuple[float, float]] = None) -> tuple[float, float]:
    m0, w0 = scales or default_scales()
    r = float(coefficient_b(n) / (2 * coefficient_a(n)))
    return m0 * math.exp(V), w0 * math.exp(U - r * V)


def uv_jacobian(n: int, m: float, w: float) -> np.ndarray:
    """``d(U, V) / d(m, omega)``; independent of the reference scales."""
    _check_point(m, w)
    r = float(coefficient_b(n) / (2 * coefficient_a(n)))
    return np.array([[r / m, 1 / w], [1 / m, 0.0]])


def uv_metric(n: int, m: float, w: float) -> np.ndarray:
    """The closed-form metric pushed to ``(U, V)``: ``J^-T g J^-1``."""
    Jinv = np.linalg.inv(uv_jacobian(n, m, w))
    return Jinv.T @ ho_metric_closed(n, m, w).components @ Jinv


class SignatureRow(NamedTuple):
    n: int
    a: float
    eta: float
    signature_class: str
    a_exact: Fraction
    eta_exact: Fraction


def signature_report(n_max: int) -> list[SignatureRow]:
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    rows = []
    for n in range(n_max + 1):
        a, e = coefficient_a(n), eta_exact(n)
        rows.append(SignatureRow(n, float(a), float(e), classify(a, e), a, e))
    return rows


def manifold_distance(
    n: int,
    p1: tuple[float, float],
    p2: tuple[float, float],
    scales: Optional[tuple[float, float]] = None,
) -> tuple[float, str]:
    """``(sqrt|a dU^2 + eta dV^2|, causal class)`` between two ``(m, omega)`` points.

    The ``(U, V)`` metric is constant, so straight lines are geodesics.
    """
    U1, V1 = uv_transform(n, *p1, scales=scales)
    U2, V2 = uv_transform(n, *p2, scales=scales)
    q = float(coefficient_a(n)) * (U2 - U1) ** 2 + float(eta_exact(n)) * (V2 - V1) ** 2
    scale = max(1.0, abs(q))
    if abs(q) < 1e-10 * scale:
        cls = "null"
    else:
        cls = "spacelike" if q > 0 else "timelike"
    return math.sqrt(abs(q)), cls


def ho_metric_field(n: int) -> MetricField:
    """Closed-form metric as a field on ``(m, omega)``."""
    a, b = float(coefficient_a(n)), float(coefficient_b(n))

    def ev(t):
        t = np.asarray(t, dtype=float)
        m, w = t[..., 0], t[..., 1]
        g = np.empty(t.shape[:-1] + (2, 2))
        g[..., 0, 0] = a / m**2
        g[..., 1, 1] = a / w**2
        g[..., 0, 1] = g[..., 1, 0] = b / (2 * m * w)
        return g

    return MetricField(dim=2, eval=ev, vectorized=True,
                       in_domain=lambda t: t[0] > 0 and t[1] > 0, name=f"ho-closed:{n}")


def uv_metric_field(n: int) -> MetricField:
    g = np.diag([float(coefficient_a(n)), float(eta_exact(n))])

    def ev(t):
        t = np.asarray(t)
        return np.broadcast_to(g, t.shape[:-1] + (2, 2)).copy()

    return MetricField(dim=2, eval=ev, vectorized=True, name=f"ho-uv:{n}")
