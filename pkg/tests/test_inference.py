import math
import warnings

import numpy as np
import pytest
from scipy import stats

from frailtyorders.distributions import UniformMixing, Weibull, WeibullParams, gamma_frailty_mixing
from frailtyorders.inference import (
    BoundaryWarning,
    Sample,
    a_diagnostics,
    anderson_darling_statistic,
    anderson_darling_weibull,
    fit_frailty_a,
    fit_resilience_a,
    frailty_loglik,
    load_sample,
    qq_data,
    resilience_loglik,
    sample_frailty,
    sample_resilience,
    weibull_loglik,
    weibull_mle,
)
from frailtyorders.mixture import (
    FrailtyModel,
    ResilienceModel,
    gamma_frailty_closed_form,
    gamma_resilience_closed_form,
)
from frailtyorders.numerics import DomainError, numeric_derivative
from frailtyorders.scenarios import bundled_leukaemia

LEUK = bundled_leukaemia()


def _ad_oracle(x, params):
    x = np.sort(x)
    u = stats.weibull_min(params.shape, scale=params.scale).cdf(x)
    n = x.size
    i = np.arange(1, n + 1)
    return -n - np.mean((2 * i - 1) * (np.log(u) + np.log(1 - u[::-1])))


class TestSample:
    def test_rejects_bad_values(self):
        with pytest.raises(DomainError):
            Sample(())
        with pytest.raises(DomainError):
            Sample((1.0, -2.0))

    def test_sorted_copy(self):
        s = Sample((3.0, 1.0, 2.0))
        assert list(s.sorted) == [1.0, 2.0, 3.0]
        s.sorted[0] = 99.0
        assert s.sorted[0] == 1.0

    def test_load(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("# lifetimes\n1.5\n2, 3 # inline\n\n4\t5\n")
        s = load_sample(p)
        assert s.observations == (1.5, 2.0, 3.0, 4.0, 5.0) and s.label == "d"
        p.write_text("1\nabc\n")
        with pytest.raises(DomainError, match="d.csv:2"):
            load_sample(p)

    def test_bundled_data(self):
        assert LEUK.n == 43
        assert LEUK.sorted[0] == 7.0 and LEUK.sorted[-1] == 2509.0


class TestWeibullMLE:
    def test_matches_scipy_fit(self):
        shape, _, scale = stats.weibull_min.fit(LEUK.values, floc=0)
        fit = weibull_mle(LEUK)
        assert fit.params.scale == pytest.approx(scale, rel=1e-5)
        assert fit.params.shape == pytest.approx(shape, rel=1e-5)
        assert fit.loglik == pytest.approx(np.sum(stats.weibull_min(shape, scale=scale).logpdf(LEUK.values)),
                                           abs=1e-6)

    def test_stationary_point(self):
        fit = weibull_mle(LEUK)
        x, b, k = LEUK.values, fit.params.scale, fit.params.shape
        g_log_b = numeric_derivative(lambda u: weibull_loglik(x, math.exp(u), k), math.log(b))
        g_log_k = numeric_derivative(lambda u: weibull_loglik(x, b, math.exp(u)), math.log(k))
        assert math.hypot(g_log_b, g_log_k) <= 1e-4

    def test_intervals_contain_estimate_and_hit_chi2_level(self):
        fit = weibull_mle(LEUK)
        for name in ("scale", "shape"):
            lo, hi = fit.ci_95[name]
            assert lo < getattr(fit.params, name) < hi
        x = LEUK.values
        lo, hi = fit.ci_95["shape"]
        for k in (lo, hi):
            # profile over the scale at fixed shape has a closed form
            b = np.mean(x ** k) ** (1 / k)
            assert 2 * (fit.loglik - weibull_loglik(x, b, k)) == pytest.approx(3.841458820694124, abs=1e-5)

    def test_synthetic_recovery_against_grid_scan(self):
        x = stats.weibull_min(2.0, scale=5.0).rvs(2000, random_state=np.random.default_rng(11))
        fit = weibull_mle(Sample(tuple(x)))
        assert fit.params.scale == pytest.approx(5.0, rel=0.05)
        assert fit.params.shape == pytest.approx(2.0, rel=0.05)
        ks = np.linspace(1.5, 2.5, 2001)
        prof = [weibull_loglik(x, np.mean(x ** k) ** (1 / k), k) for k in ks]
        assert fit.params.shape == pytest.approx(ks[int(np.argmax(prof))], abs=1e-3)

    def test_needs_spread(self):
        with pytest.raises(DomainError):
            weibull_mle([2.0, 2.0, 2.0])


class TestAndersonDarling:
    def test_statistic_against_direct_formula(self):
        fit = weibull_mle(LEUK)
        ad = anderson_darling_weibull(LEUK, fit.params, n_boot=200)
        assert ad.statistic == pytest.approx(_ad_oracle(LEUK.values, fit.params), rel=1e-10)

    def test_ideal_positions_give_small_statistic(self):
        n = 50
        u = (np.arange(1, n + 1) - 0.5) / n
        stat = anderson_darling_statistic(np.log(u), np.log1p(-u))
        i = np.arange(1, n + 1)
        assert stat == pytest.approx(-n - np.mean((2 * i - 1) * (np.log(u) + np.log(1 - u[::-1]))), rel=1e-12)
        x = Weibull(WeibullParams(1.0, 2.0)).quantile(u)
        ad = anderson_darling_weibull(Sample(tuple(x)), WeibullParams(1.0, 2.0), n_boot=2000)
        assert ad.statistic < 0.1 < ad.critical_value

    def test_scale_equivariance(self):
        fit = weibull_mle(LEUK)
        a = anderson_darling_weibull(LEUK, fit.params, n_boot=100).statistic
        scaled = Sample(tuple(LEUK.values / 365.25))
        b = anderson_darling_weibull(scaled, WeibullParams(fit.params.scale / 365.25, fit.params.shape),
                                     n_boot=100).statistic
        assert a == pytest.approx(b, rel=1e-10)

    def test_seeded_bootstrap_is_deterministic(self):
        fit = weibull_mle(LEUK)
        r1 = anderson_darling_weibull(LEUK, fit.params, n_boot=500, seed=3)
        r2 = anderson_darling_weibull(LEUK, fit.params, n_boot=500, seed=3)
        assert r1 == r2
        assert 0 < r1.p_value <= 1

    def test_fixed_null_critical_value(self):
        # asymptotic 5% point of A^2 with known parameters is 2.492
        fit = weibull_mle(LEUK)
        ad = anderson_darling_weibull(LEUK, fit.params, n_boot=20_000)
        assert ad.critical_value == pytest.approx(2.492, abs=0.06)

    def test_refit_null_runs(self):
        fit = weibull_mle(LEUK)
        ad = anderson_darling_weibull(LEUK, fit.params, n_boot=40, null="refit")
        assert ad.null == "refit" and ad.critical_value < 1.5

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            anderson_darling_weibull(LEUK, WeibullParams(1, 1), null="other")


class TestQQ:
    def test_single_observation(self):
        assert qq_data(Sample((4.0,)), WeibullParams(2.0, 1.0)) == [(pytest.approx(2.0 * math.log(2)), 4.0)]

    def test_exponential_self_consistency(self):
        x = np.random.default_rng(5).exponential(3.0, 400)
        fit = weibull_mle(Sample(tuple(x)))
        pairs = np.array(qq_data(Sample(tuple(x)), fit.params))
        assert np.corrcoef(pairs.T)[0, 1] > 0.98
        mid = pairs[40:360]
        assert np.median(np.abs(mid[:, 1] - mid[:, 0]) / mid[:, 0]) < 0.1

    def test_leukaemia_correlation_against_scipy(self):
        fit = weibull_mle(LEUK)
        pairs = np.array(qq_data(LEUK, fit.params))
        u = (np.arange(1, 44) - 0.5) / 43
        theo = stats.weibull_min(fit.params.shape, scale=fit.params.scale).ppf(u)
        np.testing.assert_allclose(pairs[:, 0], theo, rtol=1e-10)
        oracle = stats.pearsonr(theo, LEUK.sorted)[0]
        assert np.corrcoef(pairs.T)[0, 1] == pytest.approx(oracle, rel=1e-12)
        assert oracle == pytest.approx(0.9787, abs=5e-5)


class TestMixingParameter:
    def test_loglik_uses_closed_form_density(self):
        params = WeibullParams(986.672, 1.24044)
        direct = np.sum(np.log(gamma_frailty_closed_form(params, 0.784).pdf(LEUK.values)))
        assert frailty_loglik(0.784, LEUK, params) == pytest.approx(direct, rel=1e-12)
        params = WeibullParams(232.9, 3.0721)
        x = Sample((50.0, 120.0, 300.0))
        direct = np.sum(np.log(gamma_resilience_closed_form(params, 4.0558).pdf(x.values)))
        assert resilience_loglik(4.0558, x, params) == pytest.approx(direct, rel=1e-12)

    def test_small_a_close_to_baseline(self):
        fit = weibull_mle(LEUK)
        base = fit.loglik
        gaps = [abs(frailty_loglik(a, LEUK, fit.params) - base) for a in (0.05, 0.01, 0.002)]
        assert gaps[0] < 0.05
        assert gaps[0] > gaps[1] > gaps[2]

    def test_frailty_recovery(self):
        params = WeibullParams(1.0, 1.5)
        x = sample_frailty(params, gamma_frailty_mixing(1.0), 5000, np.random.default_rng(2024))
        data = Sample(tuple(x))
        fit = fit_frailty_a(data, params)
        assert fit.a == pytest.approx(1.0, rel=0.15)
        grid = np.exp(np.linspace(math.log(0.5), math.log(2.0), 200))
        scan = grid[int(np.argmax([frailty_loglik(a, data, params) for a in grid]))]
        assert fit.a == pytest.approx(scan, rel=0.01)
        d = 0.02 * fit.a
        assert frailty_loglik(fit.a - d, data, params) < fit.loglik > frailty_loglik(fit.a + d, data, params)

    def test_resilience_recovery(self):
        params = WeibullParams(2.0, 2.0)
        x = sample_resilience(params, gamma_frailty_mixing(2.0), 5000, np.random.default_rng(99))
        data = Sample(tuple(x))
        fit = fit_resilience_a(data, params)
        assert fit.a == pytest.approx(2.0, rel=0.15)
        h = 1e-3 * fit.a
        left = numeric_derivative(lambda a: resilience_loglik(a, data, params), fit.a - 20 * h, h)
        right = numeric_derivative(lambda a: resilience_loglik(a, data, params), fit.a + 20 * h, h)
        assert left > 0 > right

    def test_boundary_warning(self):
        fit = weibull_mle(LEUK)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = fit_frailty_a(LEUK, fit.params)
        assert any(issubclass(w.category, BoundaryWarning) for w in caught)
        assert a_diagnostics("frailty", LEUK, fit.params, res.a)["at_boundary"]

    def test_samplers_follow_model(self):
        rng = np.random.default_rng(8)
        params = WeibullParams(1.0, 2.0)
        mix = UniformMixing(0.5, 2.0)
        x = sample_frailty(params, mix, 4000, rng)
        assert stats.kstest(x, FrailtyModel(Weibull(params), mix).cdf).pvalue > 0.01
        y = sample_resilience(params, mix, 4000, rng)
        assert stats.kstest(y, ResilienceModel(Weibull(params), mix).cdf).pvalue > 0.01
