"""Samplers for the chordal area of a two-dimensional Wiener process
conditioned on its increments, plus the closed-form error and variance
formulas they are tested against.

Five methods share one metered uniform stream:

* ``levy_fourier``    -- truncated Fourier-series expansion (4 Normals per
  order) with a Normal tail; the increment-coupled part of the tail is a
  Gaussian sum and is simulated exactly, the product part by a matched
  Normal.
* ``rw_laplace``      -- Poisson mix of Laplace variates per order plus a
  matched Normal tail.
* ``logistic``        -- dyadic series of Poisson-weighted Logistic sums.
* ``logistic_normal`` -- as ``logistic`` but any order whose Poisson count
  reaches the threshold replaces its Logistic sum by a variance-matched
  Normal (one uniform).
* ``exp_product``     -- as ``logistic`` but large accumulants are sampled
  through precomputed inverse-CDF tables of log-product-of-Exponential laws,
  two uniforms per decimal digit pair.

Draw order within one sample is fixed: the leading Logistic (or the
Fourier Normals), then orders n = 0..N in sequence (Poisson count first,
then the accumulant), then the tail Normal(s).  Metered uniform counts for
a sample cover exactly these draws; generating the conditioning increments
costs two further uniforms and is accounted separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np
from numba import njit

from . import rng
from .logprodexp import InverseCdfTable, _k_table_draw
from .rng import CostMeter, RngStream
from .specfun import trigamma

__all__ = [
    "ConfigurationError",
    "Method",
    "WienerIncrement",
    "MethodConfig",
    "LevyAreaSample",
    "DecimalDecomposition",
    "AreaBatch",
    "TABLE_P_VALUES",
    "sample_increments",
    "levy_fourier_sample",
    "rw_laplace_sample",
    "logistic_sample",
    "logistic_normal_sample",
    "exp_product_sample",
    "sample_area",
    "logistic_tail_sample",
    "decimal_decompose",
    "exact_truncation_mse",
    "tail_mse_bound",
    "conditional_variance",
    "sample_area_batch",
    "tail_orders_batch",
]

_TWO_PI = 2.0 * math.pi
_NO_THRESHOLD = np.int64(2**62)
_EXPPROD_FALLBACK = 1_000_000  # decimal split undefined at/above 10^6

#: table sizes the exponential-product method consumes
TABLE_P_VALUES = (100, 1000, 10_000, 100_000)


class ConfigurationError(ValueError):
    """A sampler was invoked without the tables or settings it needs."""


class Method(str, Enum):
    LEVY_FOURIER = "levy_fourier"
    RW_LAPLACE = "rw_laplace"
    LOGISTIC = "logistic"
    LOGISTIC_NORMAL = "logistic_normal"
    EXP_PRODUCT = "exp_product"


_METHOD_IDS = {
    Method.LEVY_FOURIER: 0,
    Method.RW_LAPLACE: 1,
    Method.LOGISTIC: 2,
    Method.LOGISTIC_NORMAL: 3,
    Method.EXP_PRODUCT: 4,
}


@dataclass(frozen=True)
class WienerIncrement:
    """One timestep of the driving Wiener paths; a_sq = (dW1^2 + dW2^2)/h."""

    h: float
    dW1: float
    dW2: float
    a_sq: float = field(init=False)

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError("h must be positive")
        object.__setattr__(
            self, "a_sq", (self.dW1 * self.dW1 + self.dW2 * self.dW2) / self.h
        )


@dataclass
class MethodConfig:
    """Sampler settings.  ``threshold=None`` disables Normal/table
    replacement entirely; ``tables`` maps P in {100, 1000, 10^4, 10^5} to
    loaded inverse-CDF tables and is required by ``exp_product`` only."""

    method: Method = Method.LOGISTIC
    N: int = 8
    threshold: int | None = 100
    tail: bool = True
    tables: Mapping[int, InverseCdfTable] | None = None


@dataclass(frozen=True)
class LevyAreaSample:
    value: float
    uniforms_used: int


@dataclass(frozen=True)
class DecimalDecomposition:
    """P = a1 + a2*10^2 + a3*10^3 + a4*10^4 + a5*10^5 with a1 in [0, 99]."""

    a1: int
    a2: int
    a3: int
    a4: int
    a5: int

    def reconstruct(self) -> int:
        return (
            self.a1
            + self.a2 * 100
            + self.a3 * 1000
            + self.a4 * 10_000
            + self.a5 * 100_000
        )


def decimal_decompose(P_n: int) -> DecimalDecomposition:
    """Split P_n into the digit groups used by the exponential-product
    replacement; defined for 100 <= P_n < 10^6."""
    P_n = int(P_n)
    if not 100 <= P_n < _EXPPROD_FALLBACK:
        raise ValueError(f"decimal decomposition needs 100 <= P_n < 1e6, got {P_n}")
    return DecimalDecomposition(
        a1=P_n % 100,
        a2=(P_n // 100) % 10,
        a3=(P_n // 1000) % 10,
        a4=(P_n // 10_000) % 10,
        a5=(P_n // 100_000) % 10,
    )


# ---------------------------------------------------------------------------
# closed-form error and variance formulas
# ---------------------------------------------------------------------------


def exact_truncation_mse(N: int, a_sq: float, h: float) -> float:
    """Mean-square error of the dyadic Logistic truncation at order N:
    (a^2 / (3 * 2^(N+1))) * (h/2)^2.  Exact."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if not h > 0.0:
        raise ValueError("h must be positive")
    return (a_sq / (3.0 * 2.0 ** (N + 1))) * (h / 2.0) ** 2


def tail_mse_bound(N: int, h: float) -> float:
    """Bound on the residual MSE after adding the matched Normal tail:
    (8/15) * 4^-(N+1) * (h/2)^2."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if not h > 0.0:
        raise ValueError("h must be positive")
    return (8.0 / 15.0) * 4.0 ** (-(N + 1)) * (h / 2.0) ** 2


def conditional_variance(a_sq: float, h: float) -> float:
    """Variance of the area given the increments: (1 + a^2) h^2 / 12."""
    if not h > 0.0:
        raise ValueError("h must be positive")
    return (1.0 + a_sq) * h * h / 12.0


def _tail_remainder(N: int) -> float:
    """sum_{k > N} 1/k^2, evaluated exactly as trigamma(N+1)."""
    return float(trigamma(float(N + 1)))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _k_levy_fourier(h, dw1, dw2, N, use_tail, tail_rem, state, meter):
    root = np.sqrt(2.0 / h)
    c1 = root * dw1
    c2 = root * dw2
    acc = 0.0
    for k in range(1, N + 1):
        u = rng._k_normal(state, meter)
        y = rng._k_normal(state, meter)
        v = rng._k_normal(state, meter)
        x = rng._k_normal(state, meter)
        acc += (u * (y - c2) - v * (x - c1)) / k
    val = (h / _TWO_PI) * acc
    if use_tail:
        g1 = rng._k_normal(state, meter)
        g2 = rng._k_normal(state, meter)
        z = rng._k_normal(state, meter)
        root_rem = np.sqrt(tail_rem)
        # increment-coupled tail: a Gaussian sum, simulated exactly
        val += (h / _TWO_PI) * root_rem * (c1 * g2 - c2 * g1)
        # product tail: matched Normal
        val += (h / (np.sqrt(2.0) * np.pi)) * root_rem * z
    return val


@njit(cache=True, nogil=True)
def _k_rw_laplace(h, a_sq, N, use_tail, tail_rem, state, meter):
    acc = rng._k_logistic(state, meter)
    for k in range(1, N + 1):
        pk = rng._k_poisson(a_sq, state, meter)
        s = 0.0
        for _ in range(pk):
            s += rng._k_laplace(state, meter)
        acc += s / k
    val = (h / _TWO_PI) * acc
    if use_tail:
        z = rng._k_normal(state, meter)
        val += (h / _TWO_PI) * np.sqrt(2.0 * a_sq * tail_rem) * z
    return val


@njit(cache=True, nogil=True)
def _k_expprod_accum(pn, t100, t1k, t10k, t100k, state, meter):
    s = rng._k_logistic_sum(pn % 100, state, meter)
    a2 = (pn // 100) % 10
    for _ in range(a2):
        s += _k_table_draw(t100, state, meter) - _k_table_draw(t100, state, meter)
    a3 = (pn // 1000) % 10
    for _ in range(a3):
        s += _k_table_draw(t1k, state, meter) - _k_table_draw(t1k, state, meter)
    a4 = (pn // 10_000) % 10
    for _ in range(a4):
        s += _k_table_draw(t10k, state, meter) - _k_table_draw(t10k, state, meter)
    a5 = (pn // 100_000) % 10
    for _ in range(a5):
        s += _k_table_draw(t100k, state, meter) - _k_table_draw(t100k, state, meter)
    return s


@njit(cache=True, nogil=True)
def _k_logistic_family(
    h, a_sq, N, threshold, use_tail, mode, t100, t1k, t10k, t100k, state, meter
):
    # mode 0: plain sums; 1: Normal replacement at/above threshold;
    # 2: exponential-product replacement at/above threshold
    acc = rng._k_logistic(state, meter)
    half_a2 = 0.5 * a_sq
    for n in range(N + 1):
        pow2 = 2.0**n
        pn = rng._k_poisson(half_a2 * pow2, state, meter)
        if mode == 0 or pn < threshold:
            s = rng._k_logistic_sum(pn, state, meter)
        elif mode == 1 or pn >= 1_000_000:
            s = np.sqrt(pn / 3.0) * np.pi * rng._k_normal(state, meter)
        else:
            s = _k_expprod_accum(pn, t100, t1k, t10k, t100k, state, meter)
        acc += s / pow2
    val = (h / _TWO_PI) * acc
    if use_tail:
        z = rng._k_normal(state, meter)
        val += np.sqrt(a_sq / (3.0 * 2.0 ** (N + 1))) * (h / 2.0) * z
    return val


@njit(cache=True, nogil=True)
def _k_logistic_tail_orders(h, a_sq, n_lo, n_hi, threshold, state, meter):
    # the discarded series tail, orders n_lo..n_hi inclusive; counts at or
    # above the threshold use the variance-matched Normal replacement
    acc = 0.0
    half_a2 = 0.5 * a_sq
    for n in range(n_lo, n_hi + 1):
        pow2 = 2.0**n
        pn = rng._k_poisson(half_a2 * pow2, state, meter)
        if pn < threshold:
            s = rng._k_logistic_sum(pn, state, meter)
        else:
            s = np.sqrt(pn / 3.0) * np.pi * rng._k_normal(state, meter)
        acc += s / pow2
    return (h / _TWO_PI) * acc


@njit(cache=True, nogil=True)
def _k_run_batch(
    method_id,
    h,
    N,
    threshold,
    use_tail,
    tail_rem,
    fixed,
    fdw1,
    fdw2,
    t100,
    t1k,
    t10k,
    t100k,
    key,
    counter0,
    values,
    dw1s,
    dw2s,
    unifs,
):
    state = np.empty(2, dtype=np.uint64)
    state[0] = key
    state[1] = counter0
    meter = np.zeros(1, dtype=np.int64)
    sqh = np.sqrt(h)
    for i in range(values.shape[0]):
        if fixed:
            dw1 = fdw1
            dw2 = fdw2
        else:
            dw1 = sqh * rng._k_normal(state, meter)
            dw2 = sqh * rng._k_normal(state, meter)
        a_sq = (dw1 * dw1 + dw2 * dw2) / h
        before = meter[0]
        if method_id == 0:
            v = _k_levy_fourier(h, dw1, dw2, N, use_tail, tail_rem, state, meter)
        elif method_id == 1:
            v = _k_rw_laplace(h, a_sq, N, use_tail, tail_rem, state, meter)
        else:
            v = _k_logistic_family(
                h,
                a_sq,
                N,
                threshold,
                use_tail,
                method_id - 2,
                t100,
                t1k,
                t10k,
                t100k,
                state,
                meter,
            )
        values[i] = v
        dw1s[i] = dw1
        dw2s[i] = dw2
        unifs[i] = meter[0] - before
    return meter[0]


@njit(cache=True, nogil=True)
def _k_run_tail_batch(h, a_sq, n_lo, n_hi, threshold, key, counter0, values, unifs):
    state = np.empty(2, dtype=np.uint64)
    state[0] = key
    state[1] = counter0
    meter = np.zeros(1, dtype=np.int64)
    for i in range(values.shape[0]):
        before = meter[0]
        values[i] = _k_logistic_tail_orders(h, a_sq, n_lo, n_hi, threshold, state, meter)
        unifs[i] = meter[0] - before
    return meter[0]


# ---------------------------------------------------------------------------
# public scalar samplers
# ---------------------------------------------------------------------------


def sample_increments(h: float, stream: RngStream, meter: CostMeter) -> WienerIncrement:
    """Two independent Normal(0, sqrt(h)) increments for one step."""
    if not h > 0.0:
        raise ValueError("h must be positive")
    root = math.sqrt(h)
    dw1 = root * rng.sample_normal(stream, meter)
    dw2 = root * rng.sample_normal(stream, meter)
    return WienerIncrement(h=h, dW1=dw1, dW2=dw2)


def _threshold_int(cfg: MethodConfig) -> np.int64:
    if cfg.threshold is None:
        return _NO_THRESHOLD
    t = int(cfg.threshold)
    if t < 1:
        raise ValueError("threshold must be at least 1")
    return np.int64(t)


_EMPTY = np.empty(0, dtype=np.float64)


def _table_arrays(cfg: MethodConfig):
    if cfg.tables is None:
        raise ConfigurationError("exp_product requires tables for P in " f"{TABLE_P_VALUES}")
    arrays = []
    for p in TABLE_P_VALUES:
        tab = cfg.tables.get(p)
        if tab is None:
            raise ConfigurationError(f"exp_product table for P={p} is missing")
        arrays.append(np.ascontiguousarray(tab.values, dtype=np.float64))
    return arrays


def levy_fourier_sample(
    inc: WienerIncrement, cfg: MethodConfig, stream: RngStream, meter: CostMeter
) -> LevyAreaSample:
    """Truncated Fourier expansion (4 Normals per order k <= N) plus the
    exact increment-coupled tail and the matched Normal product tail."""
    if cfg.N < 1:
        raise ValueError("levy_fourier needs N >= 1")
    before = meter.uniforms_drawn
    val = _k_levy_fourier(
        inc.h,
        inc.dW1,
        inc.dW2,
        int(cfg.N),
        bool(cfg.tail),
        _tail_remainder(cfg.N),
        stream._state,
        meter._count,
    )
    return LevyAreaSample(float(val), meter.uniforms_drawn - before)


def rw_laplace_sample(
    inc: WienerIncrement, cfg: MethodConfig, stream: RngStream, meter: CostMeter
) -> LevyAreaSample:
    """Poisson-mixed Laplace expansion; the tail Normal carries the exact
    remainder variance 2 a^2 sum_{k>N} 1/k^2 (scaled by h/2pi)."""
    if cfg.N < 1:
        raise ValueError("rw_laplace needs N >= 1")
    before = meter.uniforms_drawn
    val = _k_rw_laplace(
        inc.h,
        inc.a_sq,
        int(cfg.N),
        bool(cfg.tail),
        _tail_remainder(cfg.N),
        stream._state,
        meter._count,
    )
    return LevyAreaSample(float(val), meter.uniforms_drawn - before)


def _logistic_like(inc, cfg, stream, meter, mode: int) -> LevyAreaSample:
    if cfg.N < 0:
        raise ValueError("N must be nonnegative")
    if mode == 2:
        t100, t1k, t10k, t100k = _table_arrays(cfg)
    else:
        t100 = t1k = t10k = t100k = _EMPTY
    before = meter.uniforms_drawn
    val = _k_logistic_family(
        inc.h,
        inc.a_sq,
        int(cfg.N),
        _threshold_int(cfg),
        bool(cfg.tail),
        mode,
        t100,
        t1k,
        t10k,
        t100k,
        stream._state,
        meter._count,
    )
    return LevyAreaSample(float(val), meter.uniforms_drawn - before)


def logistic_sample(
    inc: WienerIncrement, cfg: MethodConfig, stream: RngStream, meter: CostMeter
) -> LevyAreaSample:
    """Dyadic Logistic expansion truncated at order N, optional exact-variance
    Normal tail."""
    return _logistic_like(inc, cfg, stream, meter, 0)


def logistic_normal_sample(
    inc: WienerIncrement, cfg: MethodConfig, stream: RngStream, meter: CostMeter
) -> LevyAreaSample:
    """Logistic expansion with sums of threshold-many or more Logistics
    replaced by sqrt(P_n/3) pi Z_n."""
    return _logistic_like(inc, cfg, stream, meter, 1)


def exp_product_sample(
    inc: WienerIncrement, cfg: MethodConfig, stream: RngStream, meter: CostMeter
) -> LevyAreaSample:
    """Logistic expansion with large accumulants drawn via decimal digits
    from the log-product-of-Exponentials tables (differences of pairs);
    counts at or above 10^6 fall back to the Normal replacement."""
    return _logistic_like(inc, cfg, stream, meter, 2)


_SAMPLERS = {
    Method.LEVY_FOURIER: levy_fourier_sample,
    Method.RW_LAPLACE: rw_laplace_sample,
    Method.LOGISTIC: logistic_sample,
    Method.LOGISTIC_NORMAL: logistic_normal_sample,
    Method.EXP_PRODUCT: exp_product_sample,
}


def sample_area(
    inc: WienerIncrement, cfg: MethodConfig, stream: RngStream, meter: CostMeter
) -> LevyAreaSample:
    """Dispatch on cfg.method."""
    return _SAMPLERS[Method(cfg.method)](inc, cfg, stream, meter)


def logistic_tail_sample(
    inc: WienerIncrement,
    N: int,
    stream: RngStream,
    meter: CostMeter,
    n_orders: int = 40,
    threshold: int = 100,
) -> LevyAreaSample:
    """Simulate only the discarded tail, orders N+1 .. N+n_orders, of the
    Logistic expansion.  Orders whose Poisson count reaches `threshold` use
    the variance-matched Normal replacement, which leaves the tail variance
    (a^2 / (3 2^(N+1))) (h/2)^2 exact while keeping high orders computable."""
    if N < 0 or n_orders < 1:
        raise ValueError("need N >= 0 and n_orders >= 1")
    before = meter.uniforms_drawn
    val = _k_logistic_tail_orders(
        inc.h,
        inc.a_sq,
        int(N + 1),
        int(N + n_orders),
        np.int64(threshold),
        stream._state,
        meter._count,
    )
    return LevyAreaSample(float(val), meter.uniforms_drawn - before)


# ---------------------------------------------------------------------------
# batch drivers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AreaBatch:
    """Per-sample results of one driver run on one stream."""

    h: float
    values: np.ndarray
    uniforms: np.ndarray
    dW1: np.ndarray
    dW2: np.ndarray

    @property
    def a_sq(self) -> np.ndarray:
        return (self.dW1 * self.dW1 + self.dW2 * self.dW2) / self.h


def sample_area_batch(
    cfg: MethodConfig,
    h: float,
    count: int,
    seed: int,
    stream_index: int = 0,
    increments: tuple[float, float] | None = None,
) -> AreaBatch:
    """Run `count` samples on the stream (seed, stream_index).

    ``increments=None`` draws fresh Normal(0, sqrt(h)) increments per sample
    (two uniforms each, not included in the per-sample uniform counts);
    otherwise the given (dW1, dW2) pair is used for every sample.
    """
    if not h > 0.0:
        raise ValueError("h must be positive")
    method = Method(cfg.method)
    if method in (Method.LEVY_FOURIER, Method.RW_LAPLACE) and cfg.N < 1:
        raise ValueError(f"{method.value} needs N >= 1")
    if cfg.N < 0:
        raise ValueError("N must be nonnegative")
    if method is Method.EXP_PRODUCT:
        t100, t1k, t10k, t100k = _table_arrays(cfg)
    else:
        t100 = t1k = t10k = t100k = _EMPTY
    count = int(count)
    values = np.empty(count, dtype=np.float64)
    dw1s = np.empty(count, dtype=np.float64)
    dw2s = np.empty(count, dtype=np.float64)
    unifs = np.empty(count, dtype=np.int64)
    fixed = increments is not None
    fdw1, fdw2 = (float(increments[0]), float(increments[1])) if fixed else (0.0, 0.0)
    stream = RngStream(seed, stream_index)
    _k_run_batch(
        np.int64(_METHOD_IDS[method]),
        float(h),
        int(cfg.N),
        _threshold_int(cfg),
        bool(cfg.tail),
        _tail_remainder(cfg.N),
        fixed,
        fdw1,
        fdw2,
        t100,
        t1k,
        t10k,
        t100k,
        stream._state[0],
        stream._state[1],
        values,
        dw1s,
        dw2s,
        unifs,
    )
    return AreaBatch(h=float(h), values=values, uniforms=unifs, dW1=dw1s, dW2=dw2s)


def tail_orders_batch(
    a_sq: float,
    h: float,
    N: int,
    count: int,
    seed: int,
    stream_index: int = 0,
    n_orders: int = 40,
    threshold: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch version of :func:`logistic_tail_sample` at fixed a_sq."""
    if N < 0 or n_orders < 1:
        raise ValueError("need N >= 0 and n_orders >= 1")
    if not h > 0.0:
        raise ValueError("h must be positive")
    count = int(count)
    values = np.empty(count, dtype=np.float64)
    unifs = np.empty(count, dtype=np.int64)
    stream = RngStream(seed, stream_index)
    _k_run_tail_batch(
        float(h),
        float(a_sq),
        int(N + 1),
        int(N + n_orders),
        np.int64(threshold),
        stream._state[0],
        stream._state[1],
        values,
        unifs,
    )
    return values, unifs
