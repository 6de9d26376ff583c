import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyarea import area, rng
from levyarea import logprodexp as lp
from levyarea.oracles import ks_statistic, mc_variance

TWO_PI = 2.0 * math.pi


def fresh(seed=0, index=0):
    return rng.RngStream(seed, index), rng.CostMeter()


class TestWienerIncrement:
    def test_a_sq_formula(self):
        inc = area.WienerIncrement(h=4.0, dW1=2.0, dW2=-2.0)
        assert inc.a_sq == 2.0

    def test_zero_iff_zero(self):
        assert area.WienerIncrement(h=1.0, dW1=0.0, dW2=0.0).a_sq == 0.0
        assert area.WienerIncrement(h=1.0, dW1=1e-8, dW2=0.0).a_sq > 0.0

    def test_h_must_be_positive(self):
        with pytest.raises(ValueError):
            area.WienerIncrement(h=0.0, dW1=1.0, dW2=1.0)

    def test_increment_moments(self):
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=1, tail=False)
        b = area.sample_area_batch(cfg, 4.0, 10**6, seed=5)
        assert abs(b.a_sq.mean() - 2.0) < 0.01 * 2.0
        assert abs(b.dW1.var() / 4.0 - 1.0) < 0.01
        corr = np.corrcoef(b.dW1, b.dW2)[0, 1]
        assert abs(corr) < 0.005

    def test_scalar_sample_increments_matches_batch(self):
        s, m = fresh(5)
        inc = area.sample_increments(4.0, s, m)
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=1, tail=False)
        b = area.sample_area_batch(cfg, 4.0, 1, seed=5)
        assert inc.dW1 == b.dW1[0]
        assert inc.dW2 == b.dW2[0]
        assert m.uniforms_drawn == 2


class TestClosedForms:
    def test_exact_truncation_mse_values(self):
        assert area.exact_truncation_mse(0, 2.0, 1.0) == pytest.approx(1.0 / 12.0)
        assert area.exact_truncation_mse(4, 2.0, 1.0) == pytest.approx(1.0 / 192.0)
        assert area.exact_truncation_mse(3, 0.0, 1.0) == 0.0

    @given(
        n=st.integers(0, 40),
        a_sq=st.floats(0.0, 50.0),
        h=st.floats(1e-3, 1e3),
    )
    @settings(max_examples=100, deadline=None)
    def test_truncation_mse_scalings(self, n, a_sq, h):
        base = area.exact_truncation_mse(n, a_sq, h)
        assert area.exact_truncation_mse(n + 1, a_sq, h) == pytest.approx(base / 2.0)
        assert area.exact_truncation_mse(n, a_sq, 2.0 * h) == pytest.approx(4.0 * base)

    def test_tail_bound_values(self):
        assert area.tail_mse_bound(0, 1.0) == pytest.approx(1.0 / 30.0)
        assert area.tail_mse_bound(1, 1.0) == pytest.approx(
            area.tail_mse_bound(0, 1.0) / 4.0
        )
        assert area.tail_mse_bound(3, 2.0) == pytest.approx(4.0 * area.tail_mse_bound(3, 1.0))

    def test_conditional_variance_values(self):
        assert area.conditional_variance(2.0, 1.0) == 0.25
        assert area.conditional_variance(0.0, 1.0) == pytest.approx(1.0 / 12.0)
        assert area.conditional_variance(2.0, 2.0) == 1.0

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            area.exact_truncation_mse(-1, 2.0, 1.0)
        with pytest.raises(ValueError):
            area.tail_mse_bound(0, 0.0)
        with pytest.raises(ValueError):
            area.conditional_variance(2.0, -1.0)


class TestDecimalDecompose:
    def test_worked_examples(self):
        assert area.decimal_decompose(3725) == area.DecimalDecomposition(25, 7, 3, 0, 0)
        assert area.decimal_decompose(100) == area.DecimalDecomposition(0, 1, 0, 0, 0)
        assert area.decimal_decompose(999_999) == area.DecimalDecomposition(99, 9, 9, 9, 9)

    @given(p=st.integers(100, 999_999))
    @settings(max_examples=300, deadline=None)
    def test_reconstruction_exact(self, p):
        d = area.decimal_decompose(p)
        assert d.reconstruct() == p
        assert 0 <= d.a1 <= 99
        for digit in (d.a2, d.a3, d.a4, d.a5):
            assert 0 <= digit <= 9

    @pytest.mark.parametrize("bad", [99, -5, 1_000_000])
    def test_range_enforced(self, bad):
        with pytest.raises(ValueError):
            area.decimal_decompose(bad)


class TestLevyFourier:
    def test_zero_increments_variance(self):
        inc = (0.0, 0.0)
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=8, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=11, increments=inc)
        assert abs(b.values.var() / (1.0 / 12.0) - 1.0) < 0.015

    def test_random_increments_variance(self):
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=8, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=12)
        assert abs(b.values.var() / 0.25 - 1.0) < 0.015

    def test_conditional_mean_zero(self):
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=4, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=13, increments=(1.0, -0.5))
        stderr = b.values.std() / math.sqrt(b.values.size)
        assert abs(b.values.mean()) < 3.0 * stderr

    def test_uniform_cost_is_deterministic(self):
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=8, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 100, seed=14)
        assert np.all(b.uniforms == 4 * 8 + 3)

    def test_requires_positive_n(self):
        s, m = fresh()
        inc = area.WienerIncrement(h=1.0, dW1=0.0, dW2=0.0)
        cfg = area.MethodConfig(method=area.Method.LEVY_FOURIER, N=0)
        with pytest.raises(ValueError):
            area.levy_fourier_sample(inc, cfg, s, m)


class TestRwLaplace:
    def test_zero_increments_is_scaled_logistic(self):
        # with a_sq = 0 every Poisson count is 0, so the output is exactly
        # (h/2pi) X for the first logistic drawn from the same stream
        s1, m1 = fresh(21)
        s2, m2 = fresh(21)
        inc = area.WienerIncrement(h=1.0, dW1=0.0, dW2=0.0)
        cfg = area.MethodConfig(method=area.Method.RW_LAPLACE, N=8, tail=True)
        out = area.rw_laplace_sample(inc, cfg, s1, m1)
        x = rng.sample_logistic(s2, m2)
        assert out.value == (1.0 / TWO_PI) * x

    def test_zero_increments_variance(self):
        cfg = area.MethodConfig(method=area.Method.RW_LAPLACE, N=8, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=22, increments=(0.0, 0.0))
        assert abs(b.values.var() / (1.0 / 12.0) - 1.0) < 0.015

    def test_random_increments_variance_n32(self):
        cfg = area.MethodConfig(method=area.Method.RW_LAPLACE, N=32, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=23)
        assert abs(b.values.var() / 0.25 - 1.0) < 0.015

    def test_poisson_draws_track_expectation(self):
        # E{P_k} = a_sq per order: cost ~ 1 (X) + N (Poisson overhead) +
        # 2 N a_sq (counts + Laplace draws) + 1 (tail)
        a_sq = 2.0
        n = 32
        cfg = area.MethodConfig(method=area.Method.RW_LAPLACE, N=n, tail=True)
        b = area.sample_area_batch(
            cfg, 1.0, 10**5, seed=24, increments=(1.0, 1.0)
        )
        expected = 2.0 + n * (2.0 * a_sq + 1.0)
        assert abs(b.uniforms.mean() / expected - 1.0) < 0.02


class TestLogistic:
    def test_zero_increments_exact(self):
        s1, m1 = fresh(31)
        s2, m2 = fresh(31)
        inc = area.WienerIncrement(h=1.0, dW1=0.0, dW2=0.0)
        cfg = area.MethodConfig(method=area.Method.LOGISTIC, N=12, tail=True)
        out = area.logistic_sample(inc, cfg, s1, m1)
        x = rng.sample_logistic(s2, m2)
        assert out.value == (1.0 / TWO_PI) * x

    def test_random_increments_variance(self):
        cfg = area.MethodConfig(method=area.Method.LOGISTIC, N=8, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 5 * 10**5, seed=32)
        assert abs(b.values.var() / 0.25 - 1.0) < 0.015

    def test_tail_emulation_variance(self):
        vals, _ = area.tail_orders_batch(2.0, 1.0, 0, 3 * 10**5, seed=33)
        assert abs(vals.var() / (1.0 / 12.0) - 1.0) < 0.015

    def test_with_tail_matches_conditional_variance(self):
        # variance additivity: truncation deficit is exactly restored
        inc = (1.0, 1.0)
        cfg = area.MethodConfig(method=area.Method.LOGISTIC, N=4, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=34, increments=inc)
        mv = mc_variance(b.values)
        cond = area.conditional_variance(2.0, 1.0)
        assert abs(mv.variance - cond) < 3.0 * mv.stderr_of_variance

    def test_order_cost_tracks_poisson_mean(self):
        # adding order n costs E{P_n} logistic draws plus E{P_n}+1 Poisson
        # uniforms; at a_sq=2, n=6: 2*64 + 1 = 129
        inc = (math.sqrt(2.0), 0.0)
        cfg5 = area.MethodConfig(method=area.Method.LOGISTIC, N=5, tail=False)
        cfg6 = area.MethodConfig(method=area.Method.LOGISTIC, N=6, tail=False)
        b5 = area.sample_area_batch(cfg5, 1.0, 10**5, seed=35, increments=inc)
        b6 = area.sample_area_batch(cfg6, 1.0, 10**5, seed=35, increments=inc)
        delta = b6.uniforms.mean() - b5.uniforms.mean()
        assert abs(delta / 129.0 - 1.0) < 0.05

    def test_mean_square_truncation_error(self):
        # simulate the discarded tail directly and compare to the closed form
        for n in (1, 3):
            vals, _ = area.tail_orders_batch(2.0, 1.0, n, 2 * 10**5, seed=36 + n)
            expected = area.exact_truncation_mse(n, 2.0, 1.0)
            assert abs(vals.var() / expected - 1.0) < 0.02


class TestLogisticNormal:
    def test_infinite_threshold_identical_to_logistic(self):
        cfg_a = area.MethodConfig(method=area.Method.LOGISTIC_NORMAL, N=6, threshold=None)
        cfg_b = area.MethodConfig(method=area.Method.LOGISTIC, N=6)
        a_b = area.sample_area_batch(cfg_a, 1.0, 2000, seed=41)
        b_b = area.sample_area_batch(cfg_b, 1.0, 2000, seed=41)
        np.testing.assert_array_equal(a_b.values, b_b.values)
        np.testing.assert_array_equal(a_b.uniforms, b_b.uniforms)

    def test_always_replace_preserves_variance(self):
        # threshold 1 forces the Normal branch at every order with P_n >= 1
        cfg = area.MethodConfig(
            method=area.Method.LOGISTIC_NORMAL, N=8, threshold=1, tail=True
        )
        b = area.sample_area_batch(cfg, 1.0, 10**6, seed=42)
        mv = mc_variance(b.values)
        assert abs(mv.variance - 0.25) < 3.0 * mv.stderr_of_variance

    @pytest.mark.parametrize("scale", [60.0, 200.0])
    def test_replaced_order_cost_independent_of_pn(self, scale):
        # with every order's Poisson mean far above the switch, each order
        # costs exactly 1 uniform for the Poisson decision plus 1 for the
        # Normal accumulant, however large P_n gets
        inc = (scale, scale)  # a_sq = 2 scale^2 >> 200: all means > 100
        n = 8
        cfg = area.MethodConfig(
            method=area.Method.LOGISTIC_NORMAL, N=n, threshold=100, tail=False
        )
        b = area.sample_area_batch(cfg, 1.0, 4000, seed=43, increments=inc)
        assert np.all(b.uniforms == 1 + 2 * (n + 1))

    def test_distribution_close_to_logistic(self):
        cfg_a = area.MethodConfig(method=area.Method.LOGISTIC_NORMAL, N=8, threshold=100)
        cfg_b = area.MethodConfig(method=area.Method.LOGISTIC, N=8)
        a_b = area.sample_area_batch(cfg_a, 1.0, 10**5, seed=44)
        b_b = area.sample_area_batch(cfg_b, 1.0, 10**5, seed=45)
        assert ks_statistic(a_b.values, b_b.values) < 0.01


class TestExpProduct:
    def test_requires_tables(self):
        s, m = fresh()
        inc = area.WienerIncrement(h=1.0, dW1=1.0, dW2=1.0)
        cfg = area.MethodConfig(method=area.Method.EXP_PRODUCT, N=4)
        with pytest.raises(area.ConfigurationError):
            area.exp_product_sample(inc, cfg, s, m)

    def test_partial_tables_rejected(self, tables):
        s, m = fresh()
        inc = area.WienerIncrement(h=1.0, dW1=1.0, dW2=1.0)
        partial = {100: tables[100]}
        cfg = area.MethodConfig(method=area.Method.EXP_PRODUCT, N=4, tables=partial)
        with pytest.raises(area.ConfigurationError):
            area.exp_product_sample(inc, cfg, s, m)

    def test_accumulant_metering_worked_example(self, tables):
        # P_n = 3725: 25 logistics + 2*(7+3) table draws = 45 uniforms
        s, m = fresh(51)
        arrays = [np.ascontiguousarray(tables[p].values) for p in area.TABLE_P_VALUES]
        before = m.uniforms_drawn
        area._k_expprod_accum(3725, *arrays, s._state, m._count)
        assert m.uniforms_drawn - before == 45

    def test_variance_matches_target(self, tables):
        cfg = area.MethodConfig(
            method=area.Method.EXP_PRODUCT, N=8, threshold=100, tail=True, tables=tables
        )
        b = area.sample_area_batch(cfg, 1.0, 5 * 10**5, seed=52)
        assert abs(b.values.var() / 0.25 - 1.0) < 0.02

    def test_distribution_close_to_logistic(self, tables):
        cfg_a = area.MethodConfig(
            method=area.Method.EXP_PRODUCT, N=8, threshold=100, tables=tables
        )
        cfg_b = area.MethodConfig(method=area.Method.LOGISTIC, N=8)
        a_b = area.sample_area_batch(cfg_a, 1.0, 10**5, seed=53)
        b_b = area.sample_area_batch(cfg_b, 1.0, 10**5, seed=54)
        assert ks_statistic(a_b.values, b_b.values) < 0.01

    def test_million_count_falls_back_to_normal_branch(self, tables):
        # order-0 Poisson mean of 1e6 straddles the decimal-split limit:
        # counts >= 1e6 must take the Normal replacement, smaller ones the
        # five-digit split, with bounded cost either way
        a = math.sqrt(1e6)
        cfg = area.MethodConfig(
            method=area.Method.EXP_PRODUCT, N=0, threshold=100, tail=False, tables=tables
        )
        b = area.sample_area_batch(cfg, 1.0, 2000, seed=57, increments=(a, a))
        assert np.all(np.isfinite(b.values))
        assert b.uniforms.max() < 2000  # never anywhere near P_n ~ 2e6 draws
        mv = mc_variance(b.values)
        cond = area.conditional_variance(2e6, 1.0)
        assert abs(mv.variance - cond) < 4.0 * mv.stderr_of_variance

    def test_cheaper_than_logistic_at_same_order(self, tables):
        cfg_e = area.MethodConfig(
            method=area.Method.EXP_PRODUCT, N=10, threshold=100, tables=tables
        )
        cfg_l = area.MethodConfig(method=area.Method.LOGISTIC, N=10)
        b_e = area.sample_area_batch(cfg_e, 1.0, 20_000, seed=55)
        b_l = area.sample_area_batch(cfg_l, 1.0, 20_000, seed=56)
        assert b_e.uniforms.mean() < b_l.uniforms.mean()


class TestConditionalSymmetry:
    @pytest.mark.parametrize(
        "method",
        [
            area.Method.LEVY_FOURIER,
            area.Method.RW_LAPLACE,
            area.Method.LOGISTIC,
            area.Method.LOGISTIC_NORMAL,
        ],
    )
    def test_skewness_vanishes(self, method):
        cfg = area.MethodConfig(method=method, N=6, tail=True)
        b = area.sample_area_batch(cfg, 1.0, 10**5, seed=61, increments=(1.0, 1.0))
        v = b.values
        skew = np.mean((v - v.mean()) ** 3) / v.std() ** 3
        assert abs(skew) < 0.05

    def test_skewness_exp_product(self, tables):
        cfg = area.MethodConfig(method=area.Method.EXP_PRODUCT, N=6, tables=tables)
        b = area.sample_area_batch(cfg, 1.0, 10**5, seed=62, increments=(1.0, 1.0))
        v = b.values
        skew = np.mean((v - v.mean()) ** 3) / v.std() ** 3
        assert abs(skew) < 0.05


class TestBatchScalarEquivalence:
    def test_fixed_increment_paths_identical(self):
        cfg = area.MethodConfig(method=area.Method.LOGISTIC, N=5, tail=True)
        batch = area.sample_area_batch(cfg, 1.0, 64, seed=71, increments=(0.7, -0.3))
        inc = area.WienerIncrement(h=1.0, dW1=0.7, dW2=-0.3)
        s, m = fresh(71)
        got = [area.logistic_sample(inc, cfg, s, m).value for _ in range(64)]
        np.testing.assert_array_equal(batch.values, np.array(got))

    def test_random_increment_paths_identical(self):
        cfg = area.MethodConfig(method=area.Method.RW_LAPLACE, N=3, tail=True)
        batch = area.sample_area_batch(cfg, 2.0, 32, seed=72)
        s, m = fresh(72)
        vals = []
        for _ in range(32):
            inc = area.sample_increments(2.0, s, m)
            vals.append(area.rw_laplace_sample(inc, cfg, s, m).value)
        np.testing.assert_array_equal(batch.values, np.array(vals))

    def test_uniforms_used_positive_every_method(self, tables):
        s, m = fresh(73)
        inc = area.WienerIncrement(h=1.0, dW1=0.5, dW2=0.5)
        for method, sampler in [
            (area.Method.LEVY_FOURIER, area.levy_fourier_sample),
            (area.Method.RW_LAPLACE, area.rw_laplace_sample),
            (area.Method.LOGISTIC, area.logistic_sample),
            (area.Method.LOGISTIC_NORMAL, area.logistic_normal_sample),
            (area.Method.EXP_PRODUCT, area.exp_product_sample),
        ]:
            cfg = area.MethodConfig(method=method, N=2, tables=tables)
            out = sampler(inc, cfg, s, m)
            assert out.uniforms_used > 0

    def test_dispatch_matches_named_sampler(self):
        inc = area.WienerIncrement(h=1.0, dW1=0.3, dW2=0.9)
        cfg = area.MethodConfig(method=area.Method.LOGISTIC, N=3)
        s1, m1 = fresh(74)
        s2, m2 = fresh(74)
        via_dispatch = area.sample_area(inc, cfg, s1, m1)
        direct = area.logistic_sample(inc, cfg, s2, m2)
        assert via_dispatch == direct
