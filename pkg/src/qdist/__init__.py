"""Distances between probability densities and quantum states.

Fisher-Rao metrics on parametric families and on the sphere of quantum
amplitudes, geodesic distances derived from them, and entropic
quasi-distances between density matrices and thermal states.
"""

from .constants import NATURAL, Constants
from .dist_core import (
    ADAPTIVE,
    GAUSS_HERMITE,
    TRAPEZOID,
    Interval,
    ParametricFamily,
    Periodic,
    QuadratureSpec,
    RealLine,
    gaussian_family,
    ho_eigenstate_family,
    integrate,
)
from .errors import NumericalError, QDistError, ValidationError
from .fisher_rao import MetricTensor, fr_metric, generalized_metric
from .geodesy import MetricField, integrate_geodesic, shoot_distance
from .hilbert_sphere import AmplitudeState, FreeParticleCircle, HarmonicOscillator, sphere_metric
from .ho_manifold import OscillatorMetric, signature_report
from .qinfo import (
    DensityMatrix,
    FreeScalarField,
    ThermalModel,
    gibbs_state,
    relative_entropy,
    von_neumann_entropy,
)

__version__ = "0.1.0"
