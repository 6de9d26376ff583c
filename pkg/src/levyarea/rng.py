"""Seedable counter-based uniform streams and elementary variates, with
exact metering of every uniform consumed.

All randomness in this package flows through :func:`sample_uniform` (or the
equivalent jitted kernels), so the uniform count recorded by a
:class:`CostMeter` is the per-sample complexity measure used by the
benchmarks.

Uniform cost per variate
------------------------
uniform      1
logistic     1
exponential  1
laplace      1
normal       1   (quantile transform)
poisson      result+1 for mean <= 100 (multiplicative algorithm),
             1 for mean > 100 (rounded-normal branch), 0 for mean == 0

The generator is counter based: draw ``i`` of stream ``j`` is a pure
function of ``(seed, j, i)``.  Streams therefore share no state and any
(seed, stream_index) pair reproduces the same sequence on any platform.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "RngStream",
    "CostMeter",
    "POISSON_SWITCH_MEAN",
    "sample_uniform",
    "sample_logistic",
    "sample_exponential",
    "sample_normal",
    "sample_laplace",
    "sample_poisson",
    "uniform_batch",
    "logistic_batch",
    "exponential_batch",
    "normal_batch",
    "laplace_batch",
    "poisson_batch",
]

_U64 = np.uint64
_MASK64 = (1 << 64) - 1
_GOLD = _U64(0x9E3779B97F4A7C15)
_SEED_SALT = 0xA0761D6478BD642F
# (k + 0.5) * 2**-53 maps the top 53 bits into the open interval (0, 1).
_INV_2POW53 = 1.1102230246251565e-16

#: Poisson means at or below this use the exact multiplicative algorithm,
#: above it the rounded-normal approximation.
POISSON_SWITCH_MEAN = 100.0


def _mix64_py(z: int) -> int:
    """64-bit finalizer (SplitMix64), plain-int version for key derivation."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _derive_key(seed: int, stream_index: int) -> int:
    """Per-stream key; distinct (seed, stream_index) give distinct key schedules."""
    k = _mix64_py((seed & _MASK64) ^ _SEED_SALT)
    return _mix64_py((k + (stream_index & _MASK64) * 0x9E3779B97F4A7C15) & _MASK64)


class RngStream:
    """A single-owner uniform stream identified by (seed, stream_index).

    The state visible to the kernels is a 2-vector [key, counter]; the key is
    a hash of (seed, stream_index) and the counter advances by one per
    uniform drawn.
    """

    __slots__ = ("seed", "stream_index", "_state")

    def __init__(self, seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise ValueError("stream_index must be nonnegative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        self._state = np.array(
            [_derive_key(self.seed, self.stream_index), 0], dtype=np.uint64
        )

    @property
    def counter(self) -> int:
        return int(self._state[1])

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"RngStream(seed={self.seed}, stream_index={self.stream_index}, "
            f"counter={self.counter})"
        )


class CostMeter:
    """Counts uniforms drawn; increments by exactly one per uniform."""

    __slots__ = ("_count",)

    def __init__(self):
        self._count = np.zeros(1, dtype=np.int64)

    @property
    def uniforms_drawn(self) -> int:
        return int(self._count[0])

    def __repr__(self) -> str:  # pragma: no cover
        return f"CostMeter(uniforms_drawn={self.uniforms_drawn})"


# ---------------------------------------------------------------------------
# jitted kernels; `state` is uint64[2] = [key, counter], `meter` is int64[1]
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def _k_uniform(state, meter):
    c = state[1]
    state[1] = c + _U64(1)
    meter[0] += 1
    r = _mix64(state[0] + c * _GOLD)
    return (np.float64(r >> _U64(11)) + 0.5) * _INV_2POW53


@njit(cache=True, inline="always")
def _logistic_of(u):
    # log(u) - log(1-u) rather than log(u/(1-u)): the pair (u, 1-u) then
    # maps to exactly negated outputs, and both tails stay accurate.
    return np.log(u) - np.log(1.0 - u)


@njit(cache=True, inline="always")
def _k_logistic(state, meter):
    return _logistic_of(_k_uniform(state, meter))


@njit(cache=True, nogil=True)
def _k_logistic_sum(n, state, meter):
    """Sum of n standard Logistic draws, consuming n uniforms in counter order."""
    key = state[0]
    base = state[1]
    s = 0.0
    for i in range(n):
        r = _mix64(key + (base + _U64(i)) * _GOLD)
        u = (np.float64(r >> _U64(11)) + 0.5) * _INV_2POW53
        s += _logistic_of(u)
    state[1] = base + _U64(n)
    meter[0] += n
    return s


@njit(cache=True, inline="always")
def _k_exponential(state, meter):
    return -np.log(_k_uniform(state, meter))


@njit(cache=True, inline="always")
def _laplace_of(u):
    if u < 0.5:
        return np.log(2.0 * u)
    return -np.log(2.0 * (1.0 - u))


@njit(cache=True, inline="always")
def _k_laplace(state, meter):
    return _laplace_of(_k_uniform(state, meter))


@njit(cache=True, nogil=True)
def _norm_quantile(p):
    """Standard normal quantile (Wichura's PPND16 rational approximations)."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (
            (
                (
                    (
                        (
                            (
                                (2.5090809287301226727e3 * r + 3.3430575583588128105e4)
                                * r
                                + 6.7265770927008700853e4
                            )
                            * r
                            + 4.5921953931549871457e4
                        )
                        * r
                        + 1.3731693765509461125e4
                    )
                    * r
                    + 1.9715909503065514427e3
                )
                * r
                + 1.3314166789178437745e2
            )
            * r
            + 3.3871328727963666080e0
        )
        den = (
            (
                (
                    (
                        (
                            (
                                (5.2264952788528545610e3 * r + 2.8729085735721942674e4)
                                * r
                                + 3.9307895800092710610e4
                            )
                            * r
                            + 2.1213794301586595867e4
                        )
                        * r
                        + 5.3941960214247511077e3
                    )
                    * r
                    + 6.8718700749205790830e2
                )
                * r
                + 4.2313330701600911252e1
            )
            * r
            + 1.0
        )
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (
            (
                (
                    (
                        (
                            (
                                (7.74545014278341407640e-4 * r + 2.27238449892691845833e-2)
                                * r
                                + 2.41780725177450611770e-1
                            )
                            * r
                            + 1.27045825245236838258e0
                        )
                        * r
                        + 3.64784832476320460504e0
                    )
                    * r
                    + 5.76949722146069140550e0
                )
                * r
                + 4.63033784615654529590e0
            )
            * r
            + 1.42343711074968357734e0
        )
        den = (
            (
                (
                    (
                        (
                            (
                                (1.05075007164441684324e-9 * r + 5.47593808499534494600e-4)
                                * r
                                + 1.51986665636164571966e-2
                            )
                            * r
                            + 1.48103976427480074590e-1
                        )
                        * r
                        + 6.89767334985100004550e-1
                    )
                    * r
                    + 1.67638483018380384940e0
                )
                * r
                + 2.05319162663775882187e0
            )
            * r
            + 1.0
        )
    else:
        r = r - 5.0
        num = (
            (
                (
                    (
                        (
                            (
                                (2.01033439929228813265e-7 * r + 2.71155556874348757815e-5)
                                * r
                                + 1.24266094738807843860e-3
                            )
                            * r
                            + 2.65321895265761230930e-2
                        )
                        * r
                        + 2.96560571828504891230e-1
                    )
                    * r
                    + 1.78482653991729133580e0
                )
                * r
                + 5.46378491116411436990e0
            )
            * r
            + 6.65790464350110377720e0
        )
        den = (
            (
                (
                    (
                        (
                            (
                                (2.04426310338993978564e-15 * r + 1.42151175831644588870e-7)
                                * r
                                + 1.84631831751005468180e-5
                            )
                            * r
                            + 7.86869131145613259100e-4
                        )
                        * r
                        + 1.48753612908506148525e-2
                    )
                    * r
                    + 1.36929880922735805310e-1
                )
                * r
                + 5.99832206555887937690e-1
            )
            * r
            + 1.0
        )
    val = num / den
    if q < 0.0:
        return -val
    return val


@njit(cache=True, inline="always")
def _k_normal(state, meter):
    return _norm_quantile(_k_uniform(state, meter))


@njit(cache=True, nogil=True)
def _k_poisson(mean, state, meter):
    """Poisson variate: multiplicative algorithm for mean <= 100, rounded
    normal above.  Returns int64."""
    if mean == 0.0:
        return np.int64(0)
    if mean <= POISSON_SWITCH_MEAN:
        limit = np.exp(-mean)
        k = np.int64(0)
        prod = _k_uniform(state, meter)
        while prod > limit:
            k += 1
            prod *= _k_uniform(state, meter)
        return k
    z = _norm_quantile(_k_uniform(state, meter))
    v = np.rint(mean + np.sqrt(mean) * z)
    if v < 0.0:
        v = 0.0
    return np.int64(v)


# ---------------------------------------------------------------------------
# batch fills (consume the stream exactly as repeated scalar calls would)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _k_fill_uniform(state, meter, out):
    for i in range(out.shape[0]):
        out[i] = _k_uniform(state, meter)


@njit(cache=True, nogil=True)
def _k_fill_logistic(state, meter, out):
    for i in range(out.shape[0]):
        out[i] = _k_logistic(state, meter)


@njit(cache=True, nogil=True)
def _k_fill_exponential(state, meter, out):
    for i in range(out.shape[0]):
        out[i] = _k_exponential(state, meter)


@njit(cache=True, nogil=True)
def _k_fill_normal(state, meter, out):
    for i in range(out.shape[0]):
        out[i] = _k_normal(state, meter)


@njit(cache=True, nogil=True)
def _k_fill_laplace(state, meter, out):
    for i in range(out.shape[0]):
        out[i] = _k_laplace(state, meter)


@njit(cache=True, nogil=True)
def _k_fill_poisson(mean, state, meter, out):
    for i in range(out.shape[0]):
        out[i] = _k_poisson(mean, state, meter)


# ---------------------------------------------------------------------------
# public scalar API
# ---------------------------------------------------------------------------


def sample_uniform(stream: RngStream, meter: CostMeter) -> float:
    """One uniform strictly inside (0, 1); increments the meter by 1."""
    return float(_k_uniform(stream._state, meter._count))


def sample_logistic(stream: RngStream, meter: CostMeter) -> float:
    """Standard Logistic variate log(U) - log(1-U); mean 0, variance pi^2/3."""
    return float(_k_logistic(stream._state, meter._count))


def sample_exponential(stream: RngStream, meter: CostMeter) -> float:
    """Unit-mean Exponential variate -log(U); always positive."""
    return float(_k_exponential(stream._state, meter._count))


def sample_normal(stream: RngStream, meter: CostMeter) -> float:
    """Standard Normal variate via the quantile transform; 1 uniform each."""
    return float(_k_normal(stream._state, meter._count))


def sample_laplace(stream: RngStream, meter: CostMeter) -> float:
    """Standard Laplace variate (mean 0, variance 2); 1 uniform each."""
    return float(_k_laplace(stream._state, meter._count))


def sample_poisson(mean: float, stream: RngStream, meter: CostMeter) -> int:
    """Poisson variate with the mean-100 algorithm switch."""
    mean = float(mean)
    if not mean >= 0.0:
        raise ValueError(f"Poisson mean must be nonnegative, got {mean}")
    return int(_k_poisson(mean, stream._state, meter._count))


# ---------------------------------------------------------------------------
# public batch API (identical stream consumption to repeated scalar calls)
# ---------------------------------------------------------------------------


def uniform_batch(stream: RngStream, meter: CostMeter, size: int) -> np.ndarray:
    out = np.empty(int(size), dtype=np.float64)
    _k_fill_uniform(stream._state, meter._count, out)
    return out


def logistic_batch(stream: RngStream, meter: CostMeter, size: int) -> np.ndarray:
    out = np.empty(int(size), dtype=np.float64)
    _k_fill_logistic(stream._state, meter._count, out)
    return out


def exponential_batch(stream: RngStream, meter: CostMeter, size: int) -> np.ndarray:
    out = np.empty(int(size), dtype=np.float64)
    _k_fill_exponential(stream._state, meter._count, out)
    return out


def normal_batch(stream: RngStream, meter: CostMeter, size: int) -> np.ndarray:
    out = np.empty(int(size), dtype=np.float64)
    _k_fill_normal(stream._state, meter._count, out)
    return out


def laplace_batch(stream: RngStream, meter: CostMeter, size: int) -> np.ndarray:
    out = np.empty(int(size), dtype=np.float64)
    _k_fill_laplace(stream._state, meter._count, out)
    return out


def poisson_batch(
    mean: float, stream: RngStream, meter: CostMeter, size: int
) -> np.ndarray:
    mean = float(mean)
    if not mean >= 0.0:
        raise ValueError(f"Poisson mean must be nonnegative, got {mean}")
    out = np.empty(int(size), dtype=np.int64)
    _k_fill_poisson(mean, stream._state, meter._count, out)
    return out
