"""Scalar special functions for the density engines: log-gamma, digamma,
trigamma, the digamma inverse, Taylor coefficients of Gamma(1+z), and a
Bessel K0 oracle.

All functions are pure.  They accept scalars or numpy arrays and return a
matching shape; a Python float comes back for scalar input.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import gammaln as _gammaln
from scipy.special import k0 as _scipy_k0

__all__ = [
    "EULER_GAMMA",
    "GAMMA_TAYLOR_CAP",
    "ConvergenceError",
    "GammaTaylorCoeffs",
    "log_gamma",
    "digamma",
    "trigamma",
    "inverse_digamma",
    "gamma_taylor",
    "bessel_k0",
]

EULER_GAMMA = 0.5772156649015328606065120900824024310422
_EULER_GAMMA_STR = "0.5772156649015328606065120900824024310422"

#: zeta(2) .. zeta(64), 40 significant digits, generated once offline with
#: mpmath.zeta and embedded so nothing is evaluated at runtime.
_ZETA_STR = (
    "1.644934066848226436472415166646025189219",  # zeta(2)
    "1.202056903159594285399738161511449990765",  # zeta(3)
    "1.082323233711138191516003696541167902775",  # zeta(4)
    "1.036927755143369926331365486457034168057",  # zeta(5)
    "1.017343061984449139714517929790920527902",  # zeta(6)
    "1.008349277381922826839797549849796759600",  # zeta(7)
    "1.004077356197944339378685238508652465259",  # zeta(8)
    "1.002008392826082214417852769232412060486",  # zeta(9)
    "1.000994575127818085337145958900319017006",  # zeta(10)
    "1.000494188604119464558702282526469936469",  # zeta(11)
    "1.000246086553308048298637998047739670960",  # zeta(12)
    "1.000122713347578489146751836526357395714",  # zeta(13)
    "1.000061248135058704829258545105135333747",  # zeta(14)
    "1.000030588236307020493551728510645062588",  # zeta(15)
    "1.000015282259408651871732571487636722023",  # zeta(16)
    "1.000007637197637899762273600293563029213",  # zeta(17)
    "1.000003817293264999839856461644621939730",  # zeta(18)
    "1.000001908212716553938925656957795101353",  # zeta(19)
    "1.000000953962033872796113152038683449346",  # zeta(20)
    "1.000000476932986787806463116719604373046",  # zeta(21)
    "1.000000238450502727732990003648186752995",  # zeta(22)
    "1.000000119219925965311073067788718882326",  # zeta(23)
    "1.000000059608189051259479612440207935801",  # zeta(24)
    "1.000000029803503514652280186063705069366",  # zeta(25)
    "1.000000014901554828365041234658506630699",  # zeta(26)
    "1.000000007450711789835429491981004170604",  # zeta(27)
    "1.000000003725334024788457054819204018402",  # zeta(28)
    "1.000000001862659723513049006403909945417",  # zeta(29)
    "1.000000000931327432419668182871764735021",  # zeta(30)
    "1.000000000465662906503378407298923325122",  # zeta(31)
    "1.000000000232831183367650549200145597594",  # zeta(32)
    "1.000000000116415501727005197759297383546",  # zeta(33)
    "1.000000000058207720879027008892436859891",  # zeta(34)
    "1.000000000029103850444970996869294252278",  # zeta(35)
    "1.000000000014551921891041984235929632245",  # zeta(36)
    "1.000000000007275959835057481014520869012",  # zeta(37)
    "1.000000000003637979547378651190237236355",  # zeta(38)
    "1.000000000001818989650307065947584832100",  # zeta(39)
    "1.000000000000909494784026388928253311838",  # zeta(40)
    "1.000000000000454747378304215402679911202",  # zeta(41)
    "1.000000000000227373684582465251522682157",  # zeta(42)
    "1.000000000000113686840768022784934910483",  # zeta(43)
    "1.000000000000056843419876275856092771829",  # zeta(44)
    "1.000000000000028421709768893018554550737",  # zeta(45)
    "1.000000000000014210854828031606769834307",  # zeta(46)
    "1.000000000000007105427395210852712877354",  # zeta(47)
    "1.000000000000003552713691337113673298469",  # zeta(48)
    "1.000000000000001776356843579120327473349",  # zeta(49)
    "1.000000000000000888178421093081590309609",  # zeta(50)
    "1.000000000000000444089210314381336419777",  # zeta(51)
    "1.000000000000000222044605079804198399932",  # zeta(52)
    "1.000000000000000111022302514106613372055",  # zeta(53)
    "1.000000000000000055511151248454812437237",  # zeta(54)
    "1.000000000000000027755575621361241725816",  # zeta(55)
    "1.000000000000000013877787809725232762839",  # zeta(56)
    "1.000000000000000006938893904544153697446",  # zeta(57)
    "1.000000000000000003469446952165922624744",  # zeta(58)
    "1.000000000000000001734723476047576572049",  # zeta(59)
    "1.000000000000000000867361738011993372834",  # zeta(60)
    "1.000000000000000000433680869002065048750",  # zeta(61)
    "1.000000000000000000216840434499721978501",  # zeta(62)
    "1.000000000000000000108420217249424140630",  # zeta(63)
    "1.000000000000000000054210108624566454109",  # zeta(64)
)

#: ceiling on gamma_taylor's K_max; precision loss beyond this is unbounded
GAMMA_TAYLOR_CAP = 64

_SHIFT_POINT = 8.0  # recurrence target before the asymptotic series applies


class ConvergenceError(ArithmeticError):
    """An iterative numeric routine failed to converge."""


@dataclass(frozen=True)
class GammaTaylorCoeffs:
    """Taylor coefficients c_k of Gamma(1+z) at z=0, c_k = Gamma^(k)(1)/k!."""

    k_max: int
    coefficients: np.ndarray  # length k_max+1, float64


def _as_positive_array(x, name: str):
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and not np.all(arr > 0.0):
        raise ValueError(f"{name} is defined for x > 0 only")
    return arr


def _maybe_scalar(values: np.ndarray, like) -> float | np.ndarray:
    if np.ndim(like) == 0:
        return float(values)
    return values


def log_gamma(x):
    """log Gamma(x) for x > 0."""
    arr = _as_positive_array(x, "log_gamma")
    return _maybe_scalar(_gammaln(arr), x)


def digamma(x):
    """psi(x) = Gamma'(x)/Gamma(x) for x > 0.

    Upward recurrence shifts the argument above 8, then the de Moivre
    asymptotic series (Bernoulli terms through B16) applies.
    """
    arr = _as_positive_array(x, "digamma")
    xs = np.array(arr, dtype=np.float64, copy=True)
    xs = np.atleast_1d(xs)
    acc = np.zeros_like(xs)
    for _ in range(8):  # x + 8 >= 8 for any x > 0
        mask = xs < _SHIFT_POINT
        if not mask.any():
            break
        acc[mask] -= 1.0 / xs[mask]
        xs[mask] += 1.0
    r = 1.0 / xs
    r = r * r
    tail = -r * (
        1.0 / 12.0
        - r
        * (
            1.0 / 120.0
            - r
            * (
                1.0 / 252.0
                - r
                * (
                    1.0 / 240.0
                    - r
                    * (
                        1.0 / 132.0
                        - r * (691.0 / 32760.0 - r * (1.0 / 12.0 - r * (3617.0 / 8160.0)))
                    )
                )
            )
        )
    )
    out = acc + np.log(xs) - 0.5 / xs + tail
    return _maybe_scalar(out.reshape(np.shape(arr)), x)


def trigamma(x):
    """psi'(x) > 0 for x > 0; same recurrence-plus-series scheme as digamma."""
    arr = _as_positive_array(x, "trigamma")
    xs = np.array(arr, dtype=np.float64, copy=True)
    xs = np.atleast_1d(xs)
    acc = np.zeros_like(xs)
    for _ in range(8):
        mask = xs < _SHIFT_POINT
        if not mask.any():
            break
        acc[mask] += 1.0 / (xs[mask] * xs[mask])
        xs[mask] += 1.0
    r = 1.0 / xs
    r = r * r
    series = (
        1.0 / 6.0
        - r
        * (
            1.0 / 30.0
            - r
            * (
                1.0 / 42.0
                - r
                * (
                    1.0 / 30.0
                    - r
                    * (
                        5.0 / 66.0
                        - r * (691.0 / 2730.0 - r * (7.0 / 6.0 - r * (3617.0 / 510.0)))
                    )
                )
            )
        )
    )
    out = acc + 1.0 / xs + 0.5 * r + r / xs * series
    return _maybe_scalar(out.reshape(np.shape(arr)), x)


def inverse_digamma(y, tol: float = 1e-12, max_iter: int = 60):
    """Solve psi(x) = y for x > 0 by safeguarded Newton iteration.

    Initial guess: exp(y) + 0.5 for y >= -2.22, else -1/(y + gamma).  For
    y beyond ~709.8 the true inverse overflows float64 and inf is returned.
    """
    arr = np.asarray(y, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("inverse_digamma requires finite y")
    ys = np.atleast_1d(np.array(arr, dtype=np.float64, copy=True))
    with np.errstate(over="ignore", divide="ignore"):
        z = np.where(ys >= -2.22, np.exp(ys) + 0.5, -1.0 / (ys + EULER_GAMMA))
    active = np.isfinite(z)
    scale = np.maximum(1.0, np.abs(ys))
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        resid = digamma(za) - ys[active]
        done = np.abs(resid) <= tol * scale[active]
        step = resid / trigamma(za)
        znew = za - step
        # keep the iterate in the domain
        bad = znew <= 0.0
        znew[bad] = 0.5 * za[bad]
        znew[done] = za[done]
        z[active] = znew
        still = np.zeros_like(active)
        still[active] = ~done
        active = still
    else:
        if active.any():
            raise ConvergenceError(
                "inverse_digamma failed to converge for "
                f"{int(active.sum())} argument(s)"
            )
    return _maybe_scalar(z.reshape(np.shape(arr)), y)


def _gamma_taylor_mp(k_max: int) -> list:
    """Taylor coefficients of Gamma(1+z) as mpmath values.

    log Gamma(1+z) = -gamma z + sum_{k>=2} (-1)^k zeta(k) z^k / k, then the
    exponential is applied coefficient-wise.  Runs in 60-digit arithmetic so
    the downstream convolution powers keep full double accuracy.
    """
    if not 1 <= k_max <= GAMMA_TAYLOR_CAP:
        raise ValueError(f"K_max must be in 1..{GAMMA_TAYLOR_CAP}, got {k_max}")
    with mp.workdps(60):
        log_coeffs = [mp.mpf(0), -mp.mpf(_EULER_GAMMA_STR)]
        for k in range(2, k_max + 1):
            zk = mp.mpf(_ZETA_STR[k - 2])
            log_coeffs.append((-1) ** k * zk / k)
        coeffs = [mp.mpf(1)]
        for n in range(1, k_max + 1):
            s = mp.mpf(0)
            for j in range(1, n + 1):
                s += j * log_coeffs[j] * coeffs[n - j]
            coeffs.append(s / n)
        return coeffs


def gamma_taylor(k_max: int) -> GammaTaylorCoeffs:
    """Coefficients c_0..c_{k_max} of Gamma(1+z) about z=0."""
    coeffs = _gamma_taylor_mp(int(k_max))
    return GammaTaylorCoeffs(
        k_max=int(k_max),
        coefficients=np.array([float(c) for c in coeffs], dtype=np.float64),
    )


def bessel_k0(x):
    """Modified Bessel function K0(x), x > 0.  Test oracle only."""
    arr = _as_positive_array(x, "bessel_k0")
    return _maybe_scalar(_scipy_k0(arr), x)
