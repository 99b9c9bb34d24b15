"""Peak statistics of isotropic Gaussian fields on the unit sphere S^N (N = 1, 2, 3).

For a centered, unit-variance, C^2 isotropic field with covariance C(<t, s>)
in the ambient inner product, the peak statistics depend on

    C' = C'(1) > 0,   C'' = C''(1) > 0,
    kappa1 = C' / C'',   kappa2 = C'^2 / C''  (so kappa2 = C' * kappa1).

Expected counts are reported per geodesic ball of unit area.  The closed
forms are proved for kappa2 - kappa1 <= 1 and conjectured (still well
defined) for 1 < kappa2 - kappa1 < {3, 2, 5/3} for N = 1, 2, 3; beyond that
the radicands change sign and evaluation is refused.

The Euclidean formulas are the kappa1 -> 0 limit of these at kappa2 = kappa^2;
the test suite pins that correspondence numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import DomainError
from .special import Cov2, SQRT_2PI, bivariate_normal_cdf_x1zero

DELTA_BOUND = {1: 3.0, 2: 2.0, 3: 5.0 / 3.0}


@dataclass(frozen=True)
class SphereModel:
    """Shape of an isotropic Gaussian field on S^dim, from (C'(1), C''(1))."""

    dim: int
    c1: float
    c2: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise DomainError("c1 and c2 must be finite")
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise DomainError(f"need C'(1) > 0 and C''(1) > 0, got {self.c1}, {self.c2}")

    @classmethod
    def from_kappas(cls, dim: int, kappa1: float, kappa2: float) -> "SphereModel":
        """Synthesize C' = kappa2/kappa1, C'' = kappa2/kappa1^2 from the shape pair."""
        if not (kappa1 > 0.0 and kappa2 > 0.0):
            raise DomainError(f"kappa1 and kappa2 must be positive, got {kappa1}, {kappa2}")
        return cls(dim, kappa2 / kappa1, kappa2 / kappa1**2)

    @property
    def kappa1(self) -> float:
        return self.c1 / self.c2

    @property
    def kappa2(self) -> float:
        return self.c1**2 / self.c2

    @property
    def validity(self) -> str:
        d = self.kappa2 - self.kappa1
        if d <= 1.0:
            return "proved"
        if d < DELTA_BOUND[self.dim]:
            return "conjectured"
        return "invalid"

    def require_usable(self):
        if self.validity == "invalid":
            raise DomainError(
                f"kappa2 - kappa1 = {self.kappa2 - self.kappa1:.6g} out of range: "
                f"kappa2 - kappa1 < {DELTA_BOUND[self.dim]:.6g} required for dim {self.dim}"
            )


def expected_maxima(model: SphereModel) -> float:
    """Expected number of local maxima per unit-area geodesic ball."""
    model.require_usable()
    k1 = model.kappa1
    if model.dim == 1:
        return math.sqrt(3.0 + k1) / (2.0 * math.pi * math.sqrt(k1))
    if model.dim == 2:
        return 1.0 / (4.0 * math.pi) + 1.0 / (2.0 * math.pi * k1 * math.sqrt(3.0 + k1))
    return (
        (0.5 / math.sqrt(3.0 + k1)
         * (1.5 + (1.0 + k1) * (2.0 * k1 * k1 + 7.0 * k1 + 11.0) / (4.0 * (3.0 + k1)))
         + (k1 - 1.0) * (k1 + 2.0) / (4.0 * math.sqrt(2.0 + k1)))
        / (math.pi**2 * k1**1.5)
    )


def height_density(model: SphereModel, x) -> float | np.ndarray:
    """Density h(x) of the height of a local maximum; vectorized in x."""
    model.require_usable()
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise DomainError("height_density requires finite x")
    k1 = model.kappa1
    k2 = model.kappa2
    sk2 = math.sqrt(k2)
    e3 = 3.0 + k1 - k2
    e2 = 2.0 + k1 - k2
    phi = np.exp(-0.5 * xs * xs) / SQRT_2PI

    if model.dim == 1:
        out = (
            math.sqrt(e3) / SQRT_2PI * np.exp(-(3.0 + k1) * xs * xs / (2.0 * e3))
            + math.sqrt(2.0 * math.pi * k2) * xs * phi * ndtr(sk2 * xs / math.sqrt(e3))
        ) / math.sqrt(3.0 + k1)
    elif model.dim == 2:
        pref = 2.0 * math.sqrt(3.0 + k1) / (2.0 + k1 * math.sqrt(3.0 + k1))
        out = pref * (
            (k1 + k2 * (xs * xs - 1.0)) * phi * ndtr(sk2 * xs / math.sqrt(e2))
            + math.sqrt(k2 * e2) / (2.0 * math.pi) * xs
            * np.exp(-(2.0 + k1) * xs * xs / (2.0 * e2))
            + math.sqrt(2.0) / math.sqrt(math.pi * e3)
            * np.exp(-(3.0 + k1) * xs * xs / (2.0 * e3))
            * ndtr(sk2 * xs / math.sqrt(e2 * e3))
        )
    else:
        out = _height_density_n3(k1, k2, xs, phi)
    return out if np.ndim(x) else float(out)


def _height_density_n3(k1, k2, xs, phi):
    q = 1.0 + k1 - k2
    e3 = 3.0 + k1 - k2
    e2 = 2.0 + k1 - k2
    e53 = 5.0 + 3.0 * (k1 - k2)
    sk2 = math.sqrt(k2)
    denom = (
        0.5 / math.sqrt(2.0 * (3.0 + k1))
        * (1.5 + (1.0 + k1) * (2.0 * k1 * k1 + 7.0 * k1 + 11.0) / (4.0 * (3.0 + k1)))
        + (k1 - 1.0) * (k1 + 2.0) / (4.0 * math.sqrt(2.0 * (2.0 + k1)))
    )
    t1 = (
        (k2 * (q**3 + 6.0 * q * q + 12.0 * q + 24.0) / (4.0 * e3 * e3) * xs * xs
         + (2.0 * q**3 + 3.0 * q * q + 6.0 * q) / (4.0 * e3) + 1.5)
        / math.sqrt(2.0 * e3) * np.exp(-k2 * xs * xs / (2.0 * e3))
        * ndtr(2.0 * sk2 * xs / math.sqrt(e3 * e53))
    )
    t2 = (
        (k2 * e2 / 4.0 * xs * xs + (k1 - k2) * q / 2.0 - 1.0)
        / math.sqrt(2.0 * e2) * np.exp(-k2 * xs * xs / (2.0 * e2))
        * ndtr(sk2 * xs / math.sqrt(e2 * e53))
    )
    t3 = (
        (7.0 + k1 - k2 + (3.0 * q**3 + 12.0 * q * q + 28.0 * q) / (2.0 * e3))
        * sk2 * xs * np.exp(-1.5 * k2 * xs * xs / e53)
        / (4.0 * math.sqrt(math.pi) * e3 * math.sqrt(e53))
    )
    arg = sk2 * xs / math.sqrt(2.0)
    bvn = (
        bivariate_normal_cdf_x1zero(Cov2(1.5, -1.0, e3 / 2.0), arg)
        + bivariate_normal_cdf_x1zero(Cov2(1.5, -0.5, e2 / 2.0), arg)
    )
    t4 = (k2 * xs * xs + 3.0 * (k1 - k2)) * math.sqrt(math.pi * k2) / 4.0 * xs * bvn
    return phi / denom * (t1 + t2 + t3 + t4)


def _window(dim: int) -> float:
    return 12.0 + 6.0 / math.sqrt(dim)


def height_exceedance(model: SphereModel, u: float) -> float:
    """F(u) = P(peak height > u)."""
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


def expected_maxima_above(model: SphereModel, u: float) -> float:
    """Expected count of local maxima above level u per unit-area geodesic ball."""
    return height_exceedance(model, u) * expected_maxima(model)


def exceedance_curve(model: SphereModel, xs) -> np.ndarray:
    """F on a strictly increasing grid via cumulative panel quadrature."""
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
