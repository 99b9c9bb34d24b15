"""Gaussian Orthogonal Ensemble computations.

The ordered eigenvalues (l_1 <= ... <= l_n) of an n x n GOE matrix have joint
density

    (1/c_n) prod_i exp(-l_i^2/2) prod_{i<j} |l_i - l_j|    on the ordered chamber,

with the normalization constant c_n known in closed form from Selberg's
integral.  Everything downstream of this module reduces to the exponential
moment of the largest eigenvalue,

    E(n, a, b) = E{ exp[ l_{n+1}^2 / 2 - a (l_{n+1} - b)^2 ] }    (ensemble size n+1),

which this module evaluates two independent ways:

* ``goe_expectation_closed`` -- exact closed forms for n = 1, 2, 3 in terms of
  Phi and (for n = 3) two bivariate normal CDFs;
* ``goe_expectation_quadrature`` -- a brute-force oracle that integrates the
  eigenvalue density directly.

The oracle exploits the cumulative structure of the ordered chamber: after the
exp(l^2/2) factor cancels the top eigenvalue's Gaussian weight, the chamber
integral nests as

    E(n, a, b) = (1/c_{n+1}) int exp(-a (m - b)^2) I_n(m) dm,
    I_n(m) = int_{l_1 <= ... <= l_n <= m} prod exp(-l_i^2/2)
             prod_{i<j} (l_j - l_i) prod_k (m - l_k) dl,

where the innermost level is a polynomial-times-Gaussian integral done exactly
via incomplete-moment recursions, and the remaining levels use nested
Gauss-Legendre rules with the node count doubled until the estimate is within
tolerance.  exp(a (m-b)^2) decays fast enough that truncating the outer
variable costs less than 1e-15 relative at the radii used.

``goe_expectation_boundary`` evaluates the combination
(1 - k^2)^{-1/2} E(n, a = (1-k^2)^{-1}, b = k x / sqrt(2)), which stays finite
as k -> 1, through the substitution u = (m - k x/sqrt(2)) / sqrt(1 - k^2):

    (1/c_{n+1}) int exp(-u^2) I_n( sqrt(1-k^2) u + k x / sqrt(2) ) du.

All routines are deterministic and allocation-chunked; no global mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .errors import ConvergenceError, DomainError
from .special import SQRT_2PI, Cov2, bivariate_normal_cdf, std_normal_cdf

# Inner (plain-Gaussian-weighted) eigenvalues are cut at |l| = 10:
# exp(-50) ~ 2e-22 leaves truncation far below every tolerance in use.
_INNER_CUT = 10.0

# Node-count ladders; consecutive entries give the error estimate.
_LADDER = {1: (64, 128, 256, 512, 1024), 2: (64, 128, 256, 512), 3: (48, 96, 192, 320)}


def selberg_constant(n: int) -> float:
    """Normalization c_n = (1/n!) (2 sqrt 2)^n prod_{i=1}^n Gamma(1 + i/2)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 8:
        raise DomainError(f"selberg_constant supports integer n in [1, 8], got {n!r}")
    prod = 1.0
    for i in range(1, n + 1):
        prod *= math.gamma(1.0 + 0.5 * i)
    return (2.0 * math.sqrt(2.0)) ** n / math.factorial(n) * prod


def goe_eigen_density(n: int, lambdas) -> float:
    """Joint density of the ordered eigenvalues at the point `lambdas`.

    Returns 0 for unordered input (the ordering indicator), raises on a
    length mismatch.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 4:
        raise DomainError(f"goe_eigen_density supports n in 1..4, got {n!r}")
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (n,):
        raise DomainError(f"expected {n} eigenvalues, got shape {lam.shape}")
    if np.any(np.diff(lam) < 0.0):
        return 0.0
    val = math.exp(-0.5 * float(np.dot(lam, lam)))
    for i in range(n):
        for j in range(i + 1, n):
            val *= abs(lam[j] - lam[i])
    return val / selberg_constant(n)


@dataclass(frozen=True)
class GoeQuery:
    """Parameters (n, a, b) of the largest-eigenvalue exponential moment.

    `n` is the ensemble size minus one (the moment lives in the size-(n+1)
    ensemble).  Any a > 0 is admissible: after the exp(l^2/2) cancellation the
    top-eigenvalue integrand decays like exp(-a (l-b)^2), so the sub-1/2 range
    needed by the sphere formulas (a = 1/(1 + kappa_1) down to 1/2) converges
    like any other.
    """

    n: int
    a: float
    b: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n not in (1, 2, 3):
            raise DomainError(f"GoeQuery.n must be 1, 2 or 3, got {self.n!r}")
        if not (self.a > 0.0) or not math.isfinite(self.a):
            raise DomainError(f"GoeQuery.a must be positive and finite, got {self.a}")
        if not math.isfinite(self.b):
            raise DomainError(f"GoeQuery.b must be finite, got {self.b}")


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def goe_expectation_closed(q: GoeQuery) -> float:
    """Exact value of E{exp[l_max^2/2 - a (l_max - b)^2]} for ensemble size n+1."""
    a, b = q.a, q.b
    if q.n == 1:
        return (
            math.sqrt(4.0 * a + 2.0) / (4.0 * a) * math.exp(-a * b * b / (2.0 * a + 1.0))
            + b * math.sqrt(math.pi) / math.sqrt(2.0 * a)
            * std_normal_cdf(b * math.sqrt(2.0 * a) / math.sqrt(2.0 * a + 1.0))
        )
    if q.n == 2:
        return (
            (1.0 / a + 2.0 * b * b - 1.0) / math.sqrt(2.0 * a)
            * std_normal_cdf(b * math.sqrt(2.0 * a) / math.sqrt(a + 1.0))
            + b * math.sqrt(a + 1.0) / (SQRT_2PI * a) * math.exp(-a * b * b / (a + 1.0))
            + math.sqrt(2.0) / math.sqrt(2.0 * a + 1.0) * math.exp(-a * b * b / (2.0 * a + 1.0))
            * std_normal_cdf(math.sqrt(2.0) * a * b / math.sqrt((2.0 * a + 1.0) * (a + 1.0)))
        )
    # n == 3
    t1 = (
        ((24.0 * a**3 + 12.0 * a * a + 6.0 * a + 1.0) / (2.0 * a * (2.0 * a + 1.0) ** 2) * b * b
         + (6.0 * a * a + 3.0 * a + 2.0) / (4.0 * a * a * (2.0 * a + 1.0)) + 1.5)
        / math.sqrt(2.0 * (2.0 * a + 1.0)) * math.exp(-a * b * b / (2.0 * a + 1.0))
        * std_normal_cdf(2.0 * math.sqrt(2.0) * a * b / math.sqrt((2.0 * a + 1.0) * (2.0 * a + 3.0)))
    )
    t2 = (
        ((a + 1.0) / (2.0 * a) * b * b + (1.0 - a) / (2.0 * a * a) - 1.0)
        / math.sqrt(2.0 * (a + 1.0)) * math.exp(-a * b * b / (a + 1.0))
        * std_normal_cdf(math.sqrt(2.0) * a * b / math.sqrt((a + 1.0) * (2.0 * a + 3.0)))
    )
    t3 = (
        (6.0 * a + 1.0 + (28.0 * a * a + 12.0 * a + 3.0) / (2.0 * a * (2.0 * a + 1.0)))
        * b / (2.0 * SQRT_2PI * (2.0 * a + 1.0) * math.sqrt(2.0 * a + 3.0))
        * math.exp(-3.0 * a * b * b / (2.0 * a + 3.0))
    )
    sigma1 = Cov2(1.5, -0.5, (1.0 + a) / (2.0 * a))
    sigma2 = Cov2(1.5, -1.0, (1.0 + 2.0 * a) / (2.0 * a))
    t4 = (
        (b * b + 3.0 * (1.0 - a) / (2.0 * a)) * math.sqrt(math.pi) * b / math.sqrt(2.0 * a)
        * (bivariate_normal_cdf(sigma1, 0.0, b) + bivariate_normal_cdf(sigma2, 0.0, b))
    )
    return t1 + t2 + t3 + t4


# ---------------------------------------------------------------------------
# Quadrature engine
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _leggauss(p: int):
    x, w = np.polynomial.legendre.leggauss(p)
    return x, w


def _map_panel(p, lo, hi):
    """Gauss-Legendre nodes/weights mapped onto [lo, hi]; lo/hi broadcast."""
    x, w = _leggauss(p)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    return mid[..., None] + half[..., None] * x, half[..., None] * w


def _lower_moments(y, kmax):
    """M_k(y) = int_{-inf}^y t^k exp(-t^2/2) dt for k = 0..kmax (vectorized).

    M_0 = sqrt(2 pi) Phi(y), M_1 = -exp(-y^2/2),
    M_k = -y^{k-1} exp(-y^2/2) + (k-1) M_{k-2}.
    """
    e = np.exp(-0.5 * y * y)
    out = [SQRT_2PI * ndtr(y), -e]
    for k in range(2, kmax + 1):
        out.append(-(y ** (k - 1)) * e + (k - 1) * out[k - 2])
    return out


def _upper_moments(y, kmax):
    """int_y^inf t^k exp(-t^2/2) dt for k = 0..kmax (vectorized)."""
    e = np.exp(-0.5 * y * y)
    out = [SQRT_2PI * ndtr(-y), e]
    for k in range(2, kmax + 1):
        out.append((y ** (k - 1)) * e + (k - 1) * out[k - 2])
    return out


def _chamber_integral(n: int, m, p: int):
    """I_n(m): ordered-chamber integral below m with the (m - l_k) difference factors.

    Vectorized over an array of upper endpoints m; inner Gauss-Legendre levels
    use p nodes each.  The innermost eigenvalue is integrated exactly through
    the moment recursion, so n = 1 costs O(1), n = 2 one numeric level and
    n = 3 two.
    """
    m = np.asarray(m, dtype=float)
    if n == 1:
        M = _lower_moments(m, 1)
        return m * M[0] - M[1]
    if n == 2:
        lo = np.minimum(-_INNER_CUT, m - 4.0)
        y, w = _map_panel(p, lo, m)
        mm = m[..., None]
        M = _lower_moments(y, 2)
        inner = (y * mm) * M[0] - (y + mm) * M[1] + M[2]
        f = np.exp(-0.5 * y * y) * (mm - y) * inner
        return (f * w).sum(axis=-1)
    if n == 3:
        return _chamber_integral_3(m, p)
    raise DomainError(f"chamber integral implemented for n in 1..3, got {n}")


def _chamber_integral_3(m, p, block=8):
    m = np.asarray(m, dtype=float)
    flat = np.atleast_1d(m).ravel()
    out = np.empty_like(flat)
    # Chunk the outermost axis: the full (len(m), p, p) tensor at p ~ 320 would
    # need gigabytes.
    for s in range(0, flat.size, block):
        mb = flat[s : s + block]
        lo3 = np.minimum(-_INNER_CUT, mb - 4.0)
        l3, w3 = _map_panel(p, lo3, mb)                     # (B, p)
        lo2 = np.minimum(-_INNER_CUT, l3 - 4.0)
        l2, w2 = _map_panel(p, lo2, l3)                     # (B, p, p)
        mm = mb[:, None, None]
        l3e = l3[..., None]
        M = _lower_moments(l2, 3)
        e1 = l2 + l3e + mm
        e2 = l2 * l3e + l2 * mm + l3e * mm
        e3 = l2 * l3e * mm
        inner = e3 * M[0] - e2 * M[1] + e1 * M[2] - M[3]
        f = np.exp(-0.5 * l2 * l2) * (mm - l2) * (l3e - l2) * inner
        g = (f * w2).sum(axis=-1)                           # (B, p)
        g *= np.exp(-0.5 * l3 * l3) * (mb[:, None] - l3)
        out[s : s + block] = (g * w3).sum(axis=-1)
    return out.reshape(np.shape(m)) if np.ndim(m) else float(out[0])


def _outer_radius(a: float, b: float, tol: float) -> float:
    # exp(-a r^2) below tol * 1e-4 guarantees the truncated tail is invisible
    # next to the requested relative tolerance.
    r = math.sqrt(max(math.log(1.0 / (tol * 1e-4)), 1.0) / a)
    return abs(b) + max(10.0, r)


def _ladder_eval(evaluate, ladder, tol, what):
    prev = None
    est = math.inf
    for p in ladder:
        val = evaluate(p)
        if prev is not None:
            est = abs(val - prev) / max(abs(val), 1e-300)
            if est <= tol:
                return val
        prev = val
    raise ConvergenceError(
        f"{what} did not reach relative tolerance {tol:.1e}; achieved ~{est:.1e}",
        value=prev,
        error_estimate=est,
    )


def goe_expectation_quadrature(q: GoeQuery, tol: float = 1e-7) -> float:
    """Brute-force oracle for the largest-eigenvalue exponential moment.

    Deterministic nested Gauss-Legendre over the ordered chamber (n numeric
    levels after the exact innermost reduction), node count escalated until
    two consecutive refinements agree to `tol` relative.  Raises
    ConvergenceError (carrying the best value) if the ladder is exhausted.
    """
    if not (1e-10 <= tol <= 1e-2):
        raise DomainError(f"tol must lie in [1e-10, 1e-2], got {tol}")
    n, a, b = q.n, q.a, q.b
    radius = _outer_radius(a, b, tol)
    c = selberg_constant(n + 1)

    def evaluate(p):
        lam, w = _map_panel(p, -radius, radius)
        lam = lam.ravel()
        w = w.ravel()
        vals = _chamber_integral(n, lam, p)
        return float((np.exp(-a * (lam - b) ** 2) * vals * w).sum() / c)

    return _ladder_eval(evaluate, _LADDER[n], tol, f"GOE quadrature n={n}, a={a}, b={b}")


def goe_expectation_min_quadrature(q: GoeQuery, tol: float = 1e-7) -> float:
    """Like the oracle above but for the *smallest* eigenvalue's moment.

    Evaluates E{exp[l_min^2/2 - a (l_min - b)^2]} by integrating the chamber
    from the top down with upper incomplete moments.  Only n = 1, 2 are
    needed (it exists to check the spectrum-reflection symmetry numerically).
    """
    if q.n not in (1, 2):
        raise DomainError("smallest-eigenvalue oracle implemented for n = 1, 2 only")
    if not (1e-10 <= tol <= 1e-2):
        raise DomainError(f"tol must lie in [1e-10, 1e-2], got {tol}")
    n, a, b = q.n, q.a, q.b
    radius = _outer_radius(a, b, tol)
    c = selberg_constant(n + 1)

    def upper_chamber(y, p):
        """Integral over y <= l_2 (<= l_3) of the Gaussian weights and differences."""
        y = np.asarray(y, dtype=float)
        if n == 1:
            U = _upper_moments(y, 1)
            return U[1] - y * U[0]
        hi = np.maximum(_INNER_CUT, y + 4.0)
        l2, w2 = _map_panel(p, y, hi)
        yy = y[..., None]
        U = _upper_moments(l2, 2)
        # innermost: int_{l2}^inf exp(-t^2/2) (t - l2)(t - y) dt
        inner = U[2] - (l2 + yy) * U[1] + (l2 * yy) * U[0]
        f = np.exp(-0.5 * l2 * l2) * (l2 - yy) * inner
        return (f * w2).sum(axis=-1)

    def evaluate(p):
        lam, w = _map_panel(p, -radius, radius)
        lam = lam.ravel()
        w = w.ravel()
        vals = upper_chamber(lam, p)
        return float((np.exp(-a * (lam - b) ** 2) * vals * w).sum() / c)

    return _ladder_eval(
        evaluate, _LADDER[n], tol, f"GOE min-eigenvalue quadrature n={n}, a={a}, b={b}"
    )


def goe_scaled_expectation(n: int, scale: float, center: float, tol: float = 1e-8) -> float:
    """(1/c_{n+1}) int exp(-u^2) I_n(scale * u + center) du.

    The finite-at-the-boundary form of scale^{-1} E(n, a = scale^{-2},
    b = center) that remains valid at scale = 0.
    """
    if not isinstance(n, (int, np.integer)) or n not in (1, 2, 3):
        raise DomainError(f"n must be 1, 2 or 3, got {n!r}")
    if not (0.0 <= scale <= 1.0) or not math.isfinite(center):
        raise DomainError(f"need 0 <= scale <= 1 and finite center, got {scale}, {center}")
    c = selberg_constant(n + 1)

    def evaluate(p):
        u, w = _map_panel(p, -8.0, 8.0)
        u = u.ravel()
        w = w.ravel()
        vals = _chamber_integral(n, scale * u + center, p)
        return float((np.exp(-u * u) * vals * w).sum() / c)

    return _ladder_eval(evaluate, _LADDER[n], tol, f"boundary quadrature n={n}")


def goe_expectation_boundary(n: int, kappa_eff: float, x: float) -> float:
    """(1 - k^2)^{-1/2} E{exp[l_max^2/2 - (l_max - k x/sqrt 2)^2 / (1 - k^2)]}.

    Evaluated in the change-of-variables form that is continuous on
    kappa_eff in (0, 1], including exactly at the k = 1 boundary where the
    prefactor and the quadratic coefficient individually blow up.
    """
    if not (0.0 < kappa_eff <= 1.0):
        raise DomainError(f"kappa_eff must lie in (0, 1], got {kappa_eff}")
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    scale = math.sqrt(max(0.0, (1.0 - kappa_eff) * (1.0 + kappa_eff)))
    center = kappa_eff * x / math.sqrt(2.0)
    return goe_scaled_expectation(n, scale, center)


# ---------------------------------------------------------------------------
# Density normalization (test support)
# ---------------------------------------------------------------------------

def eigen_density_normalization(n: int, tol: float = 1e-8) -> float:
    """Quadrature of the ordered-eigenvalue density over its chamber (should be 1).

    Peels off the top eigenvalue: the remaining difference factors are exactly
    the chamber integral I_{n-1}, so the outer level is one-dimensional.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 4:
        raise DomainError(f"normalization check supports n in 1..4, got {n!r}")
    c = selberg_constant(n)
    if n == 1:
        def evaluate(p):
            t, w = _map_panel(p, -10.0, 10.0)
            return float((np.exp(-0.5 * t.ravel() ** 2) * w.ravel()).sum() / c)
        ladder = _LADDER[1]
    else:
        def evaluate(p):
            t, w = _map_panel(p, -10.0, 10.0)
            t = t.ravel()
            w = w.ravel()
            vals = _chamber_integral(n - 1, t, p)
            return float((np.exp(-0.5 * t * t) * vals * w).sum() / c)
        ladder = _LADDER[min(n - 1, 3)]
    return _ladder_eval(evaluate, ladder, tol, f"density normalization n={n}")


def chamber_product_quadrature(n: int, p: int = 64) -> float:
    """Raw tensor quadrature of the unnormalized eigenvalue product over the chamber.

    No analytic reductions at all: every eigenvalue is a numeric level, in gap
    coordinates (top value t, nonnegative gaps below it).  Slow and only for
    n <= 3; exists as an extra cross-check on both c_n and the reduced path.
    """
    if n not in (1, 2, 3):
        raise DomainError("raw chamber quadrature supports n in 1..3")
    t, wt = _map_panel(p, -9.0, 9.0)
    t = t.ravel()
    wt = wt.ravel()
    if n == 1:
        return float((np.exp(-0.5 * t * t) * wt).sum())
    g, wg = _map_panel(p, 0.0, 18.0)
    g = g.ravel()
    wg = wg.ravel()
    if n == 2:
        l1 = t[:, None] - g[None, :]
        f = np.exp(-0.5 * (t[:, None] ** 2 + l1**2)) * (t[:, None] - l1)
        return float((f * wg).sum(axis=-1) @ wt)
    total = 0.0
    for i, ti in enumerate(t):
        l2 = ti - g                                        # (p,)
        l1 = l2[:, None] - g[None, :]                      # (p, p)
        d12 = l2[:, None] - l1
        d13 = ti - l1
        d23 = ti - l2
        f = np.exp(-0.5 * (ti * ti + l2[:, None] ** 2 + l1 * l1)) * d12 * d13[:, :] * d23[:, None]
        total += wt[i] * float((f * wg).sum(axis=-1) @ wg)
    return total
