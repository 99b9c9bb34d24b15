"""Peak statistics of isotropic Gaussian fields on R^N (N = 1, 2, 3).

For a centered, unit-variance, C^2 isotropic field with covariance
rho(||t - s||^2), the local geometry at a point is controlled by
rho' = rho'(0) < 0 and rho'' = rho''(0) > 0 through the single shape parameter

    kappa = -rho' / sqrt(rho'').

This module provides, in closed form:

* ``expected_maxima`` -- the expected number of local maxima per unit-volume
  cube,
* ``height_density`` -- the density h(x) of the height of a local maximum,
* ``height_exceedance`` -- F(u) = int_u^inf h(x) dx, the peak-height p-value,
* ``expected_maxima_above`` -- F(u) * E{M}, the expected count above a level.

Validity of the closed forms is classified per model: "proved" for
kappa <= 1, "conjectured" for 1 < kappa^2 < {3, 2, 5/3} (N = 1, 2, 3) where
the expressions remain well defined but are unproven, and "invalid" beyond
that, where the dimension-specific square roots go imaginary and operations
refuse to evaluate.  kappa = 0 is accepted as the degenerate limit in which
the height density collapses to the standard normal density (counts still
require rho' < 0 strictly).

All functions are pure; density/exceedance accept scalars or arrays in x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import DomainError
from .special import Cov2, SQRT_2PI, bivariate_normal_cdf_x1zero

# Upper bounds on kappa^2 beyond which the formulas stop being meaningful
# (the N-specific radicands change sign there).
KAPPA_SQ_BOUND = {1: 3.0, 2: 2.0, 3: 5.0 / 3.0}

_N3_NORM = 144.0 / (29.0 * math.sqrt(6.0) - 36.0)


@dataclass(frozen=True)
class EuclideanModel:
    """Shape of an isotropic Gaussian field on R^dim.

    rho1 and rho2 are the first and second derivatives of the covariance in
    the squared-distance variable, evaluated at zero.  kappa is always derived
    from them, never stored.
    """

    dim: int
    rho1: float
    rho2: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not (math.isfinite(self.rho1) and math.isfinite(self.rho2)):
            raise DomainError("rho1 and rho2 must be finite")
        if self.rho2 <= 0.0:
            raise DomainError(f"rho2 must be positive, got {self.rho2}")
        if self.rho1 > 0.0:
            raise DomainError(f"rho1 must be <= 0 (0 only as the kappa=0 limit), got {self.rho1}")

    @classmethod
    def from_kappa(cls, dim: int, kappa: float) -> "EuclideanModel":
        """Synthesize rho1 = -kappa, rho2 = 1; height distribution depends on kappa only."""
        if not (kappa >= 0.0) or not math.isfinite(kappa):
            raise DomainError(f"kappa must be finite and >= 0, got {kappa}")
        return cls(dim, -kappa, 1.0)

    @property
    def kappa(self) -> float:
        return -self.rho1 / math.sqrt(self.rho2)

    @property
    def validity(self) -> str:
        k2 = self.kappa**2
        if k2 <= 1.0:
            return "proved"
        if k2 < KAPPA_SQ_BOUND[self.dim]:
            return "conjectured"
        return "invalid"

    def require_usable(self):
        if self.validity == "invalid":
            raise DomainError(
                f"kappa = {self.kappa:.6g} out of range: kappa^2 < "
                f"{KAPPA_SQ_BOUND[self.dim]:.6g} required for dim {self.dim}"
            )


def expected_maxima(model: EuclideanModel) -> float:
    """Expected number of local maxima per unit-volume cube."""
    model.require_usable()
    if model.rho1 == 0.0:
        raise DomainError("expected_maxima requires rho1 < 0 (diverges in the kappa=0 limit)")
    ratio = -model.rho2 / model.rho1
    if model.dim == 1:
        return math.sqrt(6.0) / (2.0 * math.pi) * math.sqrt(ratio)
    if model.dim == 2:
        return ratio / (math.sqrt(3.0) * math.pi)
    return (29.0 * math.sqrt(6.0) - 36.0) / (36.0 * math.pi**2) * ratio**1.5


def height_density(model: EuclideanModel, x) -> float | np.ndarray:
    """Density h(x) of the height of a local maximum; vectorized in x."""
    model.require_usable()
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise DomainError("height_density requires finite x")
    k = model.kappa
    k2 = k * k
    phi = np.exp(-0.5 * xs * xs) / SQRT_2PI

    if model.dim == 1:
        s3 = 3.0 - k2
        out = (
            math.sqrt(s3) / math.sqrt(6.0 * math.pi) * np.exp(-1.5 * xs * xs / s3)
            + 2.0 * k * xs * math.sqrt(math.pi) / math.sqrt(6.0) * phi
            * ndtr(k * xs / math.sqrt(s3))
        )
    elif model.dim == 2:
        s3 = 3.0 - k2
        s2 = 2.0 - k2
        out = (
            math.sqrt(3.0) * k2 * (xs * xs - 1.0) * phi * ndtr(k * xs / math.sqrt(s2))
            + k * xs * math.sqrt(3.0 * s2) / (2.0 * math.pi) * np.exp(-xs * xs / s2)
            + math.sqrt(6.0) / math.sqrt(math.pi * s3) * np.exp(-1.5 * xs * xs / s3)
            * ndtr(k * xs / math.sqrt(s3 * s2))
        )
    else:
        out = _height_density_n3(k, xs, phi)
    return out if np.ndim(x) else float(out)


def _height_density_n3(k, xs, phi):
    k2 = k * k
    q = 1.0 - k2
    s3 = 3.0 - k2
    s2 = 2.0 - k2
    s53 = 5.0 - 3.0 * k2
    t1 = (
        (k2 * (q**3 + 6.0 * q * q + 12.0 * q + 24.0) / (4.0 * s3 * s3) * xs * xs
         + (2.0 * q**3 + 3.0 * q * q + 6.0 * q) / (4.0 * s3) + 1.5)
        * np.exp(-k2 * xs * xs / (2.0 * s3)) / math.sqrt(2.0 * s3)
        * ndtr(2.0 * k * xs / math.sqrt(s3 * s53))
    )
    t2 = (
        (k2 * s2 / 4.0 * xs * xs - k2 * q / 2.0 - 1.0)
        * np.exp(-k2 * xs * xs / (2.0 * s2)) / math.sqrt(2.0 * s2)
        * ndtr(k * xs / math.sqrt(s2 * s53))
    )
    t3 = (
        (7.0 - k2 + q * (3.0 * q * q + 12.0 * q + 28.0) / (2.0 * s3))
        * k * xs * np.exp(-1.5 * k2 * xs * xs / s53)
        / (4.0 * math.sqrt(math.pi) * s3 * math.sqrt(s53))
    )
    if k > 0.0:
        arg = k * xs / math.sqrt(2.0)
        bvn = (
            bivariate_normal_cdf_x1zero(Cov2(1.5, -1.0, s3 / 2.0), arg)
            + bivariate_normal_cdf_x1zero(Cov2(1.5, -0.5, s2 / 2.0), arg)
        )
        t4 = math.sqrt(math.pi) * k * k2 / 4.0 * xs * (xs * xs - 3.0) * bvn
    else:
        t4 = 0.0
    return _N3_NORM * phi * (t1 + t2 + t3 + t4)


# Integration window: height-density tails are Gaussian-dominated, so mass
# outside +-(12 + 6/sqrt(N)) is below 1e-25 for every admissible kappa.
def _window(dim: int) -> float:
    return 12.0 + 6.0 / math.sqrt(dim)


def height_exceedance(model: EuclideanModel, u: float) -> float:
    """F(u) = P(peak height > u): integral of the height density above u."""
    model.require_usable()
    if math.isnan(u):
        raise DomainError("height_exceedance received NaN")
    hi = _window(model.dim)
    if u >= hi:
        return 0.0
    lo = max(u, -hi)
    val, _ = quad(
        lambda t: height_density(model, t), lo, hi, epsabs=1e-10, epsrel=1e-12, limit=300
    )
    return min(max(val, 0.0), 1.0)


def expected_maxima_above(model: EuclideanModel, u: float) -> float:
    """Expected count of local maxima above level u per unit-volume cube."""
    return height_exceedance(model, u) * expected_maxima(model)


def exceedance_curve(model: EuclideanModel, xs) -> np.ndarray:
    """F evaluated on a strictly increasing grid, by cumulative panel quadrature.

    One adaptive call anchors the tail beyond the last grid point; interior
    panels use fixed 16-node Gauss-Legendre, exact to machine precision at
    curve-sweep step sizes.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0.0):
        raise DomainError("exceedance_curve needs a strictly increasing 1-D grid")
    tail = height_exceedance(model, float(xs[-1]))
    nodes, weights = np.polynomial.legendre.leggauss(16)
    lo = xs[:-1]
    hi = xs[1:]
    mid = 0.5 * (hi + lo)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    panel_nodes = mid + half * nodes
    vals = height_density(model, panel_nodes.ravel()).reshape(panel_nodes.shape)
    panels = (vals * weights).sum(axis=1) * half[:, 0]
    out = np.empty_like(xs)
    out[-1] = tail
    out[:-1] = tail + np.cumsum(panels[::-1])[::-1]
    return out
