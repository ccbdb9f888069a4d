"""Density matrices, von Neumann and relative entropy, Gibbs states.

Entropies are in nats (natural logarithm) and are multiplied by ``k_B``
only where a :class:`~qdist.constants.Constants` record is passed.  Matrix
functions use the Hermitian eigendecomposition.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp

from .constants import NATURAL, Constants
from .errors import (
    DimensionMismatch,
    InvalidState,
    NonFiniteZ,
    OutOfDomain,
    SupportViolation,
)

TOL = 1e-12
SUPPORT_TOL = 1e-12
OSCILLATOR_CUTOFF = 1e-18

#: Value returned when the support of the first argument is not contained in the second.
INFINITE = math.inf


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    The eigendecomposition is computed once, on first use, under a lock.
    """

    matrix: np.ndarray
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise InvalidState(f"density matrix must be square and non-empty, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > TOL:
            raise InvalidState("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL:
            raise InvalidState(f"trace is {tr!r}, expected 1")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if np.min(self.eigenvalues) < -TOL:
            raise InvalidState("density matrix has a negative eigenvalue")

    def _eigh(self):
        with self._lock:
            if "eig" not in self._cache:
                w, v = np.linalg.eigh(self.matrix)
                self._cache["raw"] = w
                w = np.clip(w, 0.0, None)
                w.setflags(write=False)
                v.setflags(write=False)
                self._cache["eig"] = (w, v)
        return self._cache["eig"]

    @property
    def eigenvalues(self) -> np.ndarray:
        self._eigh()
        return self._cache["raw"]

    @property
    def spectrum(self) -> np.ndarray:
        """Eigenvalues clamped at zero, ascending."""
        return self._eigh()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigh()[1]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise InvalidState("zero vector")
        v = v / nrm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def diag(cls, probabilities) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probabilities, dtype=float)))

    @classmethod
    def from_spectrum(cls, probabilities, vectors) -> "DensityMatrix":
        v = np.asarray(vectors, dtype=complex)
        return cls((v * np.asarray(probabilities, dtype=float)) @ v.conj().T)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> "DensityMatrix":
        """Random state ``G G^dagger / Tr`` with a ``dim x rank`` complex Gaussian ``G``."""
        g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
        m = g @ g.conj().T
        return cls(m / np.trace(m).real)

    def unitary_conjugate(self, U) -> "DensityMatrix":
        U = np.asarray(U, dtype=complex)
        return DensityMatrix(U @ self.matrix @ U.conj().T)

    def support_projector(self) -> np.ndarray:
        w, v = self._eigh()
        keep = v[:, w > SUPPORT_TOL]
        return keep @ keep.conj().T

    def log_on_support(self) -> np.ndarray:
        """``log`` restricted to the support (zero on the kernel)."""
        w, v = self._eigh()
        logw = np.where(w > SUPPORT_TOL, np.log(np.where(w > SUPPORT_TOL, w, 1.0)), 0.0)
        return (v * logw) @ v.conj().T

    def expectation(self, operator) -> float:
        return float(np.real(np.trace(self.matrix @ np.asarray(operator))))

    def to_json(self) -> dict:
        return matrix_to_json(self.matrix)

    @classmethod
    def from_json(cls, data) -> "DensityMatrix":
        return cls(matrix_from_json(data))


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(data) -> np.ndarray:
    """Parse ``{"dim": D, "re": [[...]], "im": [[...]]}`` (``im`` optional)."""
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    try:
        dim = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidState(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise DimensionMismatch(f"matrix JSON declares dim={dim} but has shape {re.shape}")
    return re + 1j * im


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-sum l ln l`` over the spectrum, with ``0 ln 0 = 0``."""
    return float(-np.sum(_xlogx(rho.spectrum))) + 0.0


def _check_pair(rho, sigma):
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions differ: {rho.dim} vs {sigma.dim}")


def support_contained(rho: DensityMatrix, sigma: DensityMatrix) -> bool:
    """Whether ``supp(rho)`` lies inside ``supp(sigma)``."""
    _check_pair(rho, sigma)
    w, v = sigma._eigh()
    kernel = v[:, w <= SUPPORT_TOL]
    if kernel.shape[1] == 0:
        return True
    leak = float(np.real(np.trace(kernel.conj().T @ rho.matrix @ kernel)))
    return leak <= 1e-10


def _cross(rho, sigma):
    """``Tr(rho log sigma)`` with ``log sigma`` taken on its support."""
    return rho.expectation(sigma.log_on_support())


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``Tr[rho ln rho - rho ln sigma]``; :data:`INFINITE` when supports do not nest."""
    _check_pair(rho, sigma)
    if not support_contained(rho, sigma):
        return INFINITE
    return -von_neumann_entropy(rho) - _cross(rho, sigma)


@dataclass(frozen=True)
class EntropyDecomposition:
    entropy_sigma: float
    entropy_rho: float
    cross_term: float

    @property
    def total(self) -> float:
        return self.entropy_sigma - self.entropy_rho + self.cross_term


def relative_entropy_decomposed(rho: DensityMatrix, sigma: DensityMatrix) -> EntropyDecomposition:
    """``(S[sigma], S[rho], Tr[(sigma - rho) ln sigma])`` summing to the relative entropy.

    Raises:
        SupportViolation: ``supp(rho)`` is not inside ``supp(sigma)``.
    """
    _check_pair(rho, sigma)
    if not support_contained(rho, sigma):
        raise SupportViolation("support of rho is not contained in support of sigma")
    log_s = sigma.log_on_support()
    cross = sigma.expectation(log_s) - rho.expectation(log_s)
    return EntropyDecomposition(von_neumann_entropy(sigma), von_neumann_entropy(rho), cross)


# ---------------------------------------------------------------------------
# Thermal states
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ThermalModel:
    """Finite spectrum ``energies`` (with optional eigenvectors) at inverse temperature ``beta``.

    ``eigenvectors=None`` means the spectrum is diagonal in the standard basis.
    """

    energies: np.ndarray
    beta: float
    eigenvectors: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float).ravel()
        if e.size == 0 or not np.all(np.isfinite(e)):
            raise InvalidState("spectrum must be finite and non-empty")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise OutOfDomain(f"beta must be positive and finite, got {self.beta!r}")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "beta", float(self.beta))
        if self.eigenvectors is not None:
            v = np.asarray(self.eigenvectors, dtype=complex)
            if v.shape != (e.size, e.size):
                raise DimensionMismatch("eigenvector matrix does not match spectrum")
            object.__setattr__(self, "eigenvectors", v)
        if not math.isfinite(self.log_partition):
            raise NonFiniteZ("partition function is not finite")

    @classmethod
    def from_hamiltonian(cls, H, beta: float) -> "ThermalModel":
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatch("Hamiltonian must be square")
        if np.max(np.abs(H - H.conj().T)) > TOL * max(1.0, float(np.max(np.abs(H)))):
            raise InvalidState("Hamiltonian is not Hermitian")
        w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
        return cls(w, beta, v)

    @classmethod
    def from_spectrum(cls, energies, beta: float) -> "ThermalModel":
        return cls(energies, beta)

    @classmethod
    def oscillator(cls, quantum: float, beta: float, n_max: Optional[int] = None) -> "ThermalModel":
        """Spectrum ``quantum * (n + 1/2)``.

        Without ``n_max`` the ladder is cut where ``exp(-beta E_n)`` drops below
        ``1e-18`` of the geometric-series estimate of ``Z``.
        """
        if not quantum > 0:
            raise OutOfDomain("oscillator quantum must be positive")
        if n_max is None:
            x = beta * quantum
            # exp(-x n) < 1e-18 (1 - exp(-x))^-1
            n_max = int(math.ceil((-math.log(OSCILLATOR_CUTOFF) - math.log(-math.expm1(-x))) / x))
        return cls(quantum * (np.arange(n_max + 1) + 0.5), beta)

    def with_beta(self, beta: float) -> "ThermalModel":
        return ThermalModel(self.energies, beta, self.eigenvectors)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def log_partition(self) -> float:
        with np.errstate(over="ignore"):
            return float(logsumexp(-self.beta * self.energies))

    @property
    def partition_function(self) -> float:
        z = math.exp(self.log_partition) if self.log_partition < 709 else math.inf
        if not math.isfinite(z):
            raise NonFiniteZ("partition function overflows")
        return z

    @property
    def populations(self) -> np.ndarray:
        return np.exp(-self.beta * self.energies - self.log_partition)

    @property
    def energy(self) -> float:
        return float(self.populations @ self.energies)

    @property
    def entropy(self) -> float:
        """``ln Z + beta E`` (nats)."""
        return self.log_partition + self.beta * self.energy

    @property
    def free_energy(self) -> float:
        return -self.log_partition / self.beta

    @property
    def hamiltonian(self) -> np.ndarray:
        if self.eigenvectors is None:
            return np.diag(self.energies).astype(complex)
        v = self.eigenvectors
        return (v * self.energies) @ v.conj().T


def gibbs_state(model: ThermalModel) -> DensityMatrix:
    """``exp(-beta H) / Z``."""
    p = model.populations
    if model.eigenvectors is None:
        return DensityMatrix.diag(p / p.sum())
    return DensityMatrix.from_spectrum(p / p.sum(), model.eigenvectors)


def thermal_relative_entropy(rho: DensityMatrix, model: ThermalModel) -> float:
    """``beta Tr(rho H) - S[rho] - beta F(beta)`` against the Gibbs state of ``model``."""
    if rho.dim != model.dim:
        raise DimensionMismatch(f"dimensions differ: {rho.dim} vs {model.dim}")
    return model.beta * rho.expectation(model.hamiltonian) - von_neumann_entropy(rho) - model.beta * model.free_energy


def thermal_pair_relative_entropy(rho_model: ThermalModel, sigma_model: ThermalModel) -> float:
    """Relative entropy of two Gibbs states with possibly different Hamiltonians.

    ``S[sigma] - S[rho] - beta Tr(sigma H) + beta Tr(rho H)`` where ``rho`` is
    thermal for ``h`` at ``b`` and ``sigma`` thermal for ``H`` at ``beta``.
    """
    if rho_model.dim != sigma_model.dim:
        raise DimensionMismatch("Hamiltonians act on different dimensions")
    rho = gibbs_state(rho_model)
    beta = sigma_model.beta
    return (sigma_model.entropy - rho_model.entropy - beta * sigma_model.energy
            + beta * rho.expectation(sigma_model.hamiltonian))


def two_thermal_relative_entropy(model: ThermalModel, b: float) -> float:
    """Same-Hamiltonian case: ``S[sigma; beta] - S[rho; b] + beta E(b) - beta E(beta)``.

    ``rho`` is the Gibbs state at ``b``, ``sigma`` the one at ``model.beta``.
    """
    rho_model = model.with_beta(b)
    beta = model.beta
    return model.entropy - rho_model.entropy + beta * rho_model.energy - beta * model.energy


# ---------------------------------------------------------------------------
# Free scalar field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FreeScalarField:
    """Thermal free scalar field in volume ``V`` with the ground-state energy dropped.

    With ``C = 4 pi^5 V / (45 (hbar c)^3)``: entropy ``4 C k_B / beta^3``,
    energy ``3 C / beta^4``, so ``S = (4/3) k_B beta E``.
    """

    volume: float = 1.0
    constants: Constants = NATURAL

    def __post_init__(self):
        if not self.volume > 0:
            raise OutOfDomain("volume must be positive")

    @property
    def scale(self) -> float:
        """``C = 4 pi^5 V / (45 (hbar c)^3)``."""
        hc = self.constants.hbar * self.constants.c
        return 4 * math.pi**5 * self.volume / (45 * hc**3)

    @property
    def energy_scale(self) -> float:
        """``B = 4 pi^5 V / (15 (hbar c)^3)`` so that ``E = B / beta^4``."""
        return 3 * self.scale

    @property
    def metric_coefficient(self) -> float:
        """``A = 8 pi^5 V k_B / (15 (hbar c)^3)`` of ``dl^2 = A db^2 / b^5``."""
        return 6 * self.scale * self.constants.k_B

    @staticmethod
    def _beta(beta):
        if not beta > 0:
            raise OutOfDomain("inverse temperature must be positive")
        return float(beta)

    def entropy(self, beta: float) -> float:
        return 4 * self.scale * self.constants.k_B / self._beta(beta) ** 3

    def energy(self, beta: float) -> float:
        return self.energy_scale / self._beta(beta) ** 4

    def beta_of_energy(self, energy: float) -> float:
        if not energy > 0:
            raise OutOfDomain("energy must be positive")
        return (self.energy_scale / energy) ** 0.25

    def relative_entropy(self, b: float, beta: float) -> float:
        """``C k_B / beta^3 [1 - 4 (beta/b)^3 + 3 (beta/b)^4]`` (state at ``b`` against state at ``beta``)."""
        b, beta = self._beta(b), self._beta(beta)
        r = beta / b
        return self.scale * self.constants.k_B / beta**3 * (1 - 4 * r**3 + 3 * r**4)

    def relative_entropy_from_states(self, b: float, beta: float) -> float:
        """Same quantity via ``S(beta) - S(b) + beta E(b) - beta E(beta)``."""
        kB = self.constants.k_B
        return self.entropy(beta) - self.entropy(b) + kB * beta * (self.energy(b) - self.energy(beta))

    def line_element_beta(self, b: float) -> float:
        """Coefficient of ``db^2``: ``A / b^5``."""
        return self.metric_coefficient / self._beta(b) ** 5

    def line_element_energy(self, energy: float) -> float:
        """Coefficient of ``dE^2``: ``(k_B / 8) B^{1/4} E^{-5/4}``."""
        if not energy > 0:
            raise OutOfDomain("energy must be positive")
        return self.constants.k_B / 8 * self.energy_scale**0.25 * energy**-1.25

    def _energies(self, e1, e2):
        if not (e1 > 0 and e2 > 0):
            raise OutOfDomain("energies must be positive")
        return (e1, e2) if e1 <= e2 else (e2, e1)

    def distance(self, e1: float, e2: float) -> float:
        """``(1/3) sqrt(8 k_B) B^{1/8} (E_2^{3/8} - E_1^{3/8})`` with ``E_2 >= E_1``."""
        e1, e2 = self._energies(e1, e2)
        return (math.sqrt(8 * self.constants.k_B) / 3 * self.energy_scale**0.125
                * (e2**0.375 - e1**0.375))

    def distance_numeric(self, e1: float, e2: float) -> tuple[float, float]:
        """Quadrature of ``sqrt(dl^2/dE^2)`` over ``[E_1, E_2]``; returns ``(value, error)``."""
        e1, e2 = self._energies(e1, e2)
        if e1 == e2:
            return 0.0, 0.0
        # integrate in ln E: the integrand E^{3/8} is smooth there
        val, err = quad(lambda s: math.sqrt(self.line_element_energy(math.exp(s))) * math.exp(s),
                        math.log(e1), math.log(e2), epsabs=0.0, epsrel=1e-13, limit=200)
        return val, err
