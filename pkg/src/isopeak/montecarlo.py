"""Monte Carlo oracle: simulate isotropic Gaussian fields and count their peaks.

Euclidean fields use a mixture-of-squared-exponentials covariance

    rho(r^2) = sum_i w_i exp(-alpha_i r^2),   w_i > 0,  sum w_i = 1,

for which rho'(0) = -sum w_i alpha_i and rho''(0) = sum w_i alpha_i^2, so by
Cauchy-Schwarz the shape parameter kappa never exceeds 1 and every simulated
model lies in the proved regime.  Sampling is exact circulant synthesis on a
periodic grid: the covariance is periodized onto the torus, its FFT gives the
(nonnegative) circulant eigenvalues, and

    field = ifftn( sqrt(eigs) * fftn(white noise) )

is a draw with exactly that periodized covariance.  No boundary effects, and
per-volume peak rates compare directly against the closed forms.

Circle fields use random-phase Fourier synthesis of a spectrum {a_k},
f(theta) = sum_k sqrt(a_k) (xi_k cos k theta + eta_k sin k theta).  Written as
a function of the ambient inner product u = cos(angle), the covariance is a
Chebyshev series sum a_k T_k(u), whence C'(1) = sum a_k k^2 and
C''(1) = sum a_k k^2 (k^2 - 1) / 3.

Discrete local maxima (strictly above all 3^dim - 1 periodic neighbors) stand
in for critical points with fully negative-definite Hessian; the resolution
preconditions keep the surrogate's bias below Monte Carlo noise.  Replicates
draw independent substreams keyed by (seed, replicate index), so results do
not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .euclid import EuclideanModel
from .sphere import SphereModel

# Grid spacing must resolve the derivative scale sqrt(Var f_i) = sqrt(2 |rho'|):
# about five samples per unit of that scale.
_MAX_SPACING_FACTOR = 0.2

# Eigenvalues of the periodized covariance below -tol*max are a real PD
# failure; tiny negatives are FFT rounding and get clipped.
_EIG_TOL = 1e-12

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class EuclideanCovariance:
    """Mixture of squared exponentials in the squared-distance variable."""

    weights: tuple
    scales: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        a = np.asarray(self.scales, dtype=float)
        if w.ndim != 1 or w.shape != a.shape or w.size == 0:
            raise DomainError("weights and scales must be equal-length nonempty sequences")
        if np.any(w <= 0.0) or np.any(a <= 0.0):
            raise DomainError("weights and scales must be positive")
        if abs(w.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise DomainError(f"weights must sum to 1 (unit variance), got {w.sum()!r}")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "scales", tuple(float(v) for v in a))

    @property
    def rho1(self) -> float:
        return -sum(w * a for w, a in zip(self.weights, self.scales))

    @property
    def rho2(self) -> float:
        return sum(w * a * a for w, a in zip(self.weights, self.scales))

    @property
    def kappa(self) -> float:
        return -self.rho1 / math.sqrt(self.rho2)

    def model(self, dim: int) -> EuclideanModel:
        return EuclideanModel(dim, self.rho1, self.rho2)

    def value(self, r_squared):
        r2 = np.asarray(r_squared, dtype=float)
        out = np.zeros_like(r2)
        for w, a in zip(self.weights, self.scales):
            out += w * np.exp(-a * r2)
        return out


@dataclass(frozen=True)
class CircleCovariance:
    """Spectrum {a_k} on the circle: covariance sum a_k cos(k * angle)."""

    coeffs: tuple

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        if a.ndim != 1 or a.size < 3:
            raise DomainError("coeffs must be a 1-D sequence covering k = 0..K with K >= 2")
        if np.any(a < 0.0):
            raise DomainError("spectral coefficients must be nonnegative")
        if abs(a.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise DomainError(f"spectral coefficients must sum to 1, got {a.sum()!r}")
        if not np.any(a[2:] > 0.0):
            raise DomainError(
                "all spectral mass at k <= 1 gives a degenerate (zero-curvature) field"
            )
        object.__setattr__(self, "coeffs", tuple(float(v) for v in a))

    @property
    def c1(self) -> float:
        return sum(a * k * k for k, a in enumerate(self.coeffs))

    @property
    def c2(self) -> float:
        return sum(a * k * k * (k * k - 1.0) / 3.0 for k, a in enumerate(self.coeffs))

    def model(self) -> SphereModel:
        return SphereModel(1, self.c1, self.c2)


@dataclass
class SimResult:
    """Pooled peak statistics from a batch of replicates."""

    replicate_count: int
    region_volume: float
    maxima_heights: list = field(default_factory=list)
    maxima_count_per_replicate: list = field(default_factory=list)
    seed: int = 0

    def rate(self) -> float:
        return float(np.mean(self.maxima_count_per_replicate)) / self.region_volume

    def rate_standard_error(self) -> float:
        counts = np.asarray(self.maxima_count_per_replicate, dtype=float)
        return float(np.std(counts, ddof=1) / math.sqrt(len(counts))) / self.region_volume

    def exceedance_at(self, u: float) -> float:
        h = np.asarray(self.maxima_heights)
        return float(np.mean(h > u)) if h.size else math.nan

    def exceedance_with_error(self, u: float) -> tuple[float, float]:
        """Pooled exceedance proportion at u and its replicate-clustered SE."""
        above, total = [], []
        i = 0
        for c in self.maxima_count_per_replicate:
            chunk = np.asarray(self.maxima_heights[i : i + c])
            above.append(float((chunk > u).sum()))
            total.append(float(c))
            i += c
        above = np.asarray(above)
        total = np.asarray(total)
        p = above.sum() / total.sum()
        resid = above - p * total
        r = len(total)
        se = math.sqrt(float((resid**2).sum()) / (r - 1) / r) / float(total.mean())
        return float(p), se

    def heights_by_replicate(self):
        out = []
        i = 0
        for c in self.maxima_count_per_replicate:
            out.append(np.asarray(self.maxima_heights[i : i + c], dtype=float))
            i += c
        return out

    def to_json_dict(self) -> dict:
        return {
            "replicate_count": self.replicate_count,
            "region_volume": self.region_volume,
            "maxima_heights": [float(h) for h in self.maxima_heights],
            "maxima_count_per_replicate": [int(c) for c in self.maxima_count_per_replicate],
            "seed": int(self.seed),
        }


class LocalMaxima(NamedTuple):
    locations: np.ndarray  # (count, dim) integer grid indices
    heights: np.ndarray    # (count,)
    ties_excluded: int


def _replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate)]))


def _spectral_sqrt(spec: EuclideanCovariance, dim: int, n: int, side: float) -> np.ndarray:
    """sqrt of the circulant eigenvalues of the periodized covariance on the grid."""
    spacing = side / n
    max_spacing = _MAX_SPACING_FACTOR / math.sqrt(-2.0 * spec.rho1)
    if spacing > max_spacing * (1.0 + 1e-12):
        raise DomainError(
            f"grid spacing {spacing:.4g} too coarse for this covariance; "
            f"need <= {max_spacing:.4g} (at least ~5 points per derivative scale)"
        )
    axis = np.arange(n) * spacing
    # Periodize over the 3^dim nearest image copies; remoter images are far
    # below double-precision resolution at the side lengths the spacing
    # precondition implies.
    images = (axis[:, None] + np.array([-side, 0.0, side])) ** 2
    base = np.zeros((n,) * dim)
    for offsets in np.ndindex(*(3,) * dim):
        shifted = np.zeros((n,) * dim)
        for d, o in enumerate(offsets):
            shape = [1] * dim
            shape[d] = n
            shifted = shifted + images[:, o].reshape(shape)
        base += spec.value(shifted)
    eigs = np.fft.fftn(base).real
    floor = -_EIG_TOL * eigs.max()
    if eigs.min() < floor:
        raise DomainError(
            f"periodized covariance is not positive semidefinite on this grid "
            f"(min eigenvalue {eigs.min():.3e})"
        )
    return np.sqrt(np.clip(eigs, 0.0, None))


def simulate_field_euclidean(
    spec: EuclideanCovariance, dim: int, grid_points_per_side: int, side_length: float, seed: int
) -> np.ndarray:
    """One exact draw of the periodized stationary Gaussian field on a torus grid."""
    if dim not in (1, 2, 3):
        raise DomainError(f"dim must be 1, 2 or 3, got {dim!r}")
    if grid_points_per_side < 3:
        raise DomainError("need at least 3 grid points per side")
    sqrt_eigs = _spectral_sqrt(spec, dim, grid_points_per_side, side_length)
    return _draw_field(sqrt_eigs, _replicate_rng(seed, 0))


def _draw_field(sqrt_eigs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal(sqrt_eigs.shape)
    return np.fft.ifftn(sqrt_eigs * np.fft.fftn(noise)).real


def extract_local_maxima(fieldvals: np.ndarray) -> LocalMaxima:
    """Grid points strictly greater than all 3^dim - 1 periodic neighbors.

    Points that merely tie a neighbor are excluded and counted in
    `ties_excluded` (zero-probability for continuous fields, possible in
    floats).
    """
    f = np.asarray(fieldvals)
    if f.ndim not in (1, 2, 3):
        raise DomainError("field must be 1-, 2- or 3-dimensional")
    if min(f.shape) < 3:
        raise DomainError("need at least 3 points per side to define neighborhoods")
    strict = np.ones(f.shape, dtype=bool)
    weak = np.ones(f.shape, dtype=bool)
    for offsets in np.ndindex(*(3,) * f.ndim):
        shift = tuple(o - 1 for o in offsets)
        if all(s == 0 for s in shift):
            continue
        neighbor = np.roll(f, shift, axis=tuple(range(f.ndim)))
        strict &= f > neighbor
        weak &= f >= neighbor
    ties = int(weak.sum() - strict.sum())
    locs = np.argwhere(strict)
    return LocalMaxima(locs, f[strict], ties)


def estimate_peak_statistics(
    spec: EuclideanCovariance,
    dim: int,
    replicates: int,
    grid_points_per_side: int,
    side_length: float,
    seed: int,
) -> SimResult:
    """Simulate `replicates` fields and pool their discrete local maxima."""
    if replicates < 30:
        raise DomainError(f"need at least 30 replicates for stable errors, got {replicates}")
    sqrt_eigs = _spectral_sqrt(spec, dim, grid_points_per_side, side_length)
    result = SimResult(replicates, side_length**dim, seed=seed)
    for rep in range(replicates):
        fieldvals = _draw_field(sqrt_eigs, _replicate_rng(seed, rep))
        found = extract_local_maxima(fieldvals)
        result.maxima_count_per_replicate.append(int(found.heights.size))
        result.maxima_heights.extend(float(h) for h in np.sort(found.heights))
    return result


def simulate_circle_field(spec: CircleCovariance, grid_points: int, seed: int) -> np.ndarray:
    """One draw of the circle field on theta_j = 2 pi j / grid_points."""
    return _draw_circle(spec, grid_points, _replicate_rng(seed, 0))


def _draw_circle(spec: CircleCovariance, grid_points: int, rng: np.random.Generator) -> np.ndarray:
    kmax = len(spec.coeffs) - 1
    if grid_points < 4 * kmax + 8:
        raise DomainError(
            f"{grid_points} grid points cannot resolve spectral content up to k={kmax}"
        )
    theta = 2.0 * math.pi * np.arange(grid_points) / grid_points
    out = np.zeros(grid_points)
    for k, a in enumerate(spec.coeffs):
        if a == 0.0:
            continue
        xi, eta = rng.standard_normal(2)
        amp = math.sqrt(a)
        if k == 0:
            out += amp * xi
        else:
            out += amp * (xi * np.cos(k * theta) + eta * np.sin(k * theta))
    return out


def estimate_circle_statistics(
    spec: CircleCovariance, replicates: int, grid_points: int, seed: int
) -> SimResult:
    """Pooled peak statistics on the circle; region volume is the circumference."""
    if replicates < 30:
        raise DomainError(f"need at least 30 replicates for stable errors, got {replicates}")
    result = SimResult(replicates, 2.0 * math.pi, seed=seed)
    for rep in range(replicates):
        fieldvals = _draw_circle(spec, grid_points, _replicate_rng(seed, rep))
        found = extract_local_maxima(fieldvals)
        result.maxima_count_per_replicate.append(int(found.heights.size))
        result.maxima_heights.extend(float(h) for h in np.sort(found.heights))
    return result


def ks_block_bootstrap(result: SimResult, cdf_at_heights, n_bootstrap: int = 2000,
                       level: float = 0.99, seed: int = 7) -> dict:
    """KS distance of pooled peak heights from a theoretical CDF, with a
    replicate-level block bootstrap critical value.

    Heights within a replicate are weakly dependent, so the classical KS null
    distribution does not apply; resampling whole replicates does.
    `cdf_at_heights` maps a sorted height array to theoretical CDF values.
    """
    blocks = result.heights_by_replicate()
    pooled = np.sort(np.concatenate(blocks))
    stat = _ks_distance(pooled, np.asarray(cdf_at_heights(pooled)))

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2024]))
    n_rep = len(blocks)
    ecdf_sorted = pooled
    boot = np.empty(n_bootstrap)
    for i in range(n_bootstrap):
        pick = rng.integers(0, n_rep, size=n_rep)
        sample = np.sort(np.concatenate([blocks[j] for j in pick]))
        # Distance of the bootstrap ECDF from the pooled ECDF, evaluated at
        # the bootstrap sample points.
        pooled_cdf = np.searchsorted(ecdf_sorted, sample, side="right") / len(ecdf_sorted)
        boot[i] = _ks_distance(sample, pooled_cdf)
    critical = float(np.quantile(boot, level))
    return {"statistic": float(stat), "critical": critical, "pass": bool(stat <= critical)}


def _ks_distance(sorted_sample: np.ndarray, cdf_values: np.ndarray) -> float:
    n = len(sorted_sample)
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    return float(np.maximum(np.abs(grid_hi - cdf_values), np.abs(cdf_values - grid_lo)).max())
