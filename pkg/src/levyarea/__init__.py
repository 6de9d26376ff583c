"""Conditioned Levy-area simulation: metered variate streams, quantile
tables for log-products of Exponentials, five area samplers, and an
accuracy-versus-effort benchmark."""

from .area import (
    ConfigurationError,
    DecimalDecomposition,
    LevyAreaSample,
    Method,
    MethodConfig,
    WienerIncrement,
    conditional_variance,
    decimal_decompose,
    exact_truncation_mse,
    exp_product_sample,
    levy_fourier_sample,
    logistic_normal_sample,
    logistic_sample,
    logistic_tail_sample,
    rw_laplace_sample,
    sample_area,
    sample_increments,
    tail_mse_bound,
)
from .bench import BenchmarkRow, MomentAccumulator, run_benchmark, run_samples
from .logprodexp import (
    GridConfig,
    InverseCdfTable,
    TableFormatError,
    build_cdf,
    build_table,
    default_grid,
    density_asymptotic,
    density_large_x,
    density_series,
    read_table,
    sample_from_table,
    splice_and_invert,
    write_table,
)
from .oracles import cdf_by_inversion, char_fn, density_by_inversion, ks_statistic, mc_variance
from .rng import CostMeter, RngStream
from .specfun import (
    ConvergenceError,
    bessel_k0,
    digamma,
    gamma_taylor,
    inverse_digamma,
    log_gamma,
    trigamma,
)

__version__ = "0.1.0"
