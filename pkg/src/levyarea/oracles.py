"""Independent reference computations used by tests and benchmarks: the
conditioned-area characteristic function, numerical Fourier inversion of it,
Kolmogorov-Smirnov distances, and Monte-Carlo moment summaries.

Everything here is deliberately separate from the sampling paths it checks.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .specfun import ConvergenceError

__all__ = [
    "char_fn",
    "inversion_cutoff",
    "density_by_inversion",
    "cdf_by_inversion",
    "ks_statistic",
    "McVariance",
    "mc_variance",
]

_SMALL_W = 1e-4  # below this |h xi / 2| the hyperbolic ratios use series


def char_fn(xi, a_sq: float, h: float):
    """Characteristic function of the conditioned area:
    (w/sinh w) * exp(-a^2/2 (w coth w - 1)) with w = h xi / 2.

    Real, even, positive; the removable singularity at xi=0 evaluates to 1.
    """
    if not h > 0.0:
        raise ValueError("h must be positive")
    if a_sq < 0.0:
        raise ValueError("a_sq must be nonnegative")
    w = 0.5 * h * np.asarray(xi, dtype=np.float64)
    aw = np.abs(w)
    small = aw < _SMALL_W
    ws = np.where(small, 1.0, w)  # safe operand for the hyperbolic branch
    with np.errstate(over="ignore"):
        ratio = np.where(small, 1.0 - w * w / 6.0 + 7.0 * w**4 / 360.0, ws / np.sinh(ws))
        wcoth = np.where(small, w * w / 3.0 - w**4 / 45.0, ws / np.tanh(ws) - 1.0)
    out = ratio * np.exp(-0.5 * a_sq * wcoth)
    if np.ndim(xi) == 0:
        return float(out)
    return out


def inversion_cutoff(h: float, tiny: float = 1e-14) -> float:
    """xi beyond which the a^2-free envelope w/sinh(w) stays below `tiny`.

    w/sinh(w) <= 2 w e^-w for w >= 1, so solving 2 w e^-w = tiny certifies
    the cutoff; the exp factor only shrinks the integrand further.
    """
    target = -math.log(tiny)
    w = target
    for _ in range(60):
        w = target + math.log(2.0 * w)
    return 2.0 * w / h


def density_by_inversion(x: float, a_sq: float, h: float) -> float:
    """Density at x from (1/pi) * int_0^cutoff char_fn(xi) cos(xi x) dxi."""
    cut = inversion_cutoff(h)
    val, err = quad(
        lambda xi: char_fn(xi, a_sq, h),
        0.0,
        cut,
        weight="cos",
        wvar=float(x),
        limit=600,
        epsabs=1e-12,
        epsrel=1e-10,
    )
    if err > 1e-7:
        raise ConvergenceError(f"density inversion quadrature error {err:.2e}")
    val /= math.pi
    if val < -1e-10:
        raise ConvergenceError(f"density inversion produced {val:.2e} < -1e-10")
    return max(val, 0.0)


def cdf_by_inversion(x: float, a_sq: float, h: float) -> float:
    """Distribution function by the Gil-Pelaez formula
    F(x) = 1/2 + (1/pi) int_0^inf char_fn(xi) sin(xi x)/xi dxi."""
    x = float(x)
    if x == 0.0:
        return 0.5
    cut = inversion_cutoff(h)

    def smooth(xi):
        t = xi * x
        if abs(t) < 1e-12:
            return char_fn(xi, a_sq, h) * x
        return char_fn(xi, a_sq, h) * math.sin(t) / xi

    lo, err_lo = quad(smooth, 0.0, min(1.0, cut), limit=400, epsabs=1e-12, epsrel=1e-10)
    hi, err_hi = 0.0, 0.0
    if cut > 1.0:
        hi, err_hi = quad(
            lambda xi: char_fn(xi, a_sq, h) / xi,
            1.0,
            cut,
            weight="sin",
            wvar=x,
            limit=600,
            epsabs=1e-12,
            epsrel=1e-10,
        )
    if err_lo + err_hi > 1e-7:
        raise ConvergenceError("cdf inversion quadrature did not converge")
    val = 0.5 + (lo + hi) / math.pi
    return min(max(val, 0.0), 1.0)


def ks_statistic(sample, reference) -> float:
    """Sup-norm distance between the empirical CDF of `sample` and either a
    CDF callable or a second sample's empirical CDF.

    Empirical CDFs are evaluated right-continuously; against a callable both
    one-sided gaps at each order statistic are taken.
    """
    a = np.sort(np.asarray(sample, dtype=np.float64))
    if a.size < 100:
        raise ValueError("need at least 100 observations")
    if callable(reference):
        n = a.size
        ref = np.array([reference(v) for v in a], dtype=np.float64)
        upper = np.max(np.arange(1, n + 1) / n - ref)
        lower = np.max(ref - np.arange(0, n) / n)
        return float(max(upper, lower, 0.0))
    b = np.sort(np.asarray(reference, dtype=np.float64))
    if b.size < 100:
        raise ValueError("need at least 100 observations")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


class McVariance(NamedTuple):
    mean: float
    variance: float
    stderr_of_variance: float


def mc_variance(sample) -> McVariance:
    """Sample mean, unbiased variance, and the fourth-moment standard error
    of the variance estimate."""
    x = np.asarray(sample, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 observations")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    m4 = float(np.mean(d**4))
    var = m2 * n / (n - 1)
    var_of_var = (m4 - (n - 3) / (n - 1) * m2 * m2) / n
    return McVariance(mean, var, math.sqrt(max(var_of_var, 0.0)))
