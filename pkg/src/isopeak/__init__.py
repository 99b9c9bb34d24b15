"""isopeak: peak statistics of isotropic Gaussian random fields.

Exact height distributions, height densities and expected counts of local
maxima for isotropic Gaussian fields on R^N and S^N (N = 1, 2, 3), with two
independent verification routes: a brute-force GOE eigenvalue-density
quadrature and Monte Carlo field simulation.
"""

__version__ = "0.1.0"

from . import curves, euclid, goe, montecarlo, special, sphere  # noqa: F401
from .errors import ConvergenceError, DomainError  # noqa: F401
from .euclid import EuclideanModel  # noqa: F401
from .goe import GoeQuery  # noqa: F401
from .montecarlo import CircleCovariance, EuclideanCovariance, SimResult  # noqa: F401
from .special import Cov2  # noqa: F401
from .sphere import SphereModel  # noqa: F401
