"""Population laws, order-statistic mixtures, ranking calibration, censoring
construction, and asymptotic variance kernels.

Reference values: order-statistic and censoring numbers are hand-derived
from the stated closed forms; kernel values are cross-checked between the
exponential closed form and independent quadrature.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsskm import (
    AftModel,
    CalibrationError,
    CensoringLaw,
    InferenceWindowError,
    MixingMatrix,
    ParameterError,
    RngStream,
    WeibullModel,
    aft_rho_ceiling,
    aft_score_correlation,
    asymptotic_km_variance,
    asymptotic_rss_km_variance,
    calibrate_aft_concomitant,
    censoring_for_fraction,
    dell_clutter_sigma,
    estimate_mixing_matrix,
    mixture_survival,
    order_statistic_survival,
    population_survival,
)

AFT = AftModel()  # lognormal, log-sd = hypot(1.5, 0.4)
EXP = WeibullModel()  # unit exponential


class TestLifetimeLaws:
    def test_aft_log_sd(self):
        assert AFT.log_sd == pytest.approx(math.hypot(1.5, 0.4))

    def test_aft_median_is_one(self):
        assert AFT.quantile(0.5) == pytest.approx(1.0, abs=1e-12)
        assert population_survival(AFT, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_aft_mean_lifetime(self):
        s = AFT.log_sd
        assert AFT.mean_lifetime == pytest.approx(math.exp(s**2 / 2))

    def test_quantile_inverts_survival(self):
        for model in (AFT, WeibullModel(2.0, 3.0)):
            for level in (0.9, 0.5, 0.1):
                t = model.quantile(level)
                assert population_survival(model, t) == pytest.approx(level, abs=1e-12)

    def test_exponential_survival(self):
        assert population_survival(EXP, 1.0) == pytest.approx(math.exp(-1))
        assert EXP.mean_lifetime == pytest.approx(1.0)
        assert EXP.lifetime_variance == pytest.approx(1.0)

    def test_level_bounds_rejected(self):
        with pytest.raises(ParameterError):
            AFT.quantile(0.0)
        with pytest.raises(ParameterError):
            EXP.quantile(1.5)

    def test_invalid_weibull_params(self):
        with pytest.raises(ParameterError):
            WeibullModel(shape_nu=0.0)
        with pytest.raises(ParameterError):
            WeibullModel(sigma_z=-1.0)

    def test_uncalibrated_aft_scores_rejected(self):
        gen = np.random.default_rng(0)
        with pytest.raises(ParameterError, match="uncalibrated"):
            AFT.ranking_scores(np.ones(3), gen)

    def test_draw_matches_law(self):
        gen = np.random.default_rng(7)
        x = EXP.draw_lifetimes(gen, 200_000)
        assert np.mean(x > 1.0) == pytest.approx(math.exp(-1), abs=0.005)


class TestOrderStatistics:
    def test_max_of_two_exponentials(self):
        # P(max > 1) = 1 - (1 - e^-1)^2
        want = 1.0 - (1.0 - math.exp(-1)) ** 2
        got = order_statistic_survival(EXP.survival, 2, 2, 1.0)
        assert got == pytest.approx(want, abs=1e-14)

    def test_min_of_two_exponentials(self):
        assert order_statistic_survival(EXP.survival, 2, 1, 1.0) == pytest.approx(
            math.exp(-2), abs=1e-14)

    def test_accepts_plain_survival_value(self):
        assert order_statistic_survival(0.5, 2, 2, 0.0) == pytest.approx(0.75)

    def test_rank_out_of_range(self):
        with pytest.raises(ParameterError):
            order_statistic_survival(0.5, 3, 4, 1.0)

    @pytest.mark.parametrize("k", [1, 2, 5, 8, 12])
    def test_mcintyre_identity(self, k):
        # (1/k) sum_r S_[r](t) == S(t)
        grid = np.linspace(0.01, 5.0, 100)
        for t in grid:
            s = population_survival(AFT, t)
            avg = math.fsum(
                order_statistic_survival(s, k, r, t) for r in range(1, k + 1)
            ) / k
            assert abs(avg - s) <= 1e-12


class TestCensoring:
    def test_weibull_same_shape_scale(self):
        # theta2 = theta1 * ((1-p)/p)^(1/nu) = (0.7/0.3) = 7/3 at nu=1
        law = censoring_for_fraction(EXP, 0.3)
        assert law.kind == "weibull-scale"
        assert law.parameter == pytest.approx(7 / 3)

    def test_weibull_censored_fraction_is_exact(self):
        # P(C < X) = theta1^nu / (theta1^nu + theta2^nu) = p
        model = WeibullModel(2.0, 1.5)
        law = censoring_for_fraction(model, 0.3)
        gen = np.random.default_rng(5)
        x = model.draw_lifetimes(gen, 400_000)
        c = law.draw(gen, 400_000)
        assert np.mean(c < x) == pytest.approx(0.3, abs=0.005)

    def test_aft_exponential_rate(self):
        law = censoring_for_fraction(AFT, 0.3)
        assert law.kind == "exponential-rate"
        assert law.parameter == pytest.approx(
            -math.log(0.7) / AFT.mean_lifetime)

    def test_no_censoring(self):
        law = censoring_for_fraction(EXP, 0.0)
        assert law.kind == "none"
        assert np.all(np.isinf(law.draw(np.random.default_rng(0), 10)))
        assert law.survival(100.0) == 1.0

    def test_invalid_fraction(self):
        with pytest.raises(ParameterError):
            censoring_for_fraction(EXP, 1.0)

    def test_invalid_law(self):
        with pytest.raises(ParameterError):
            CensoringLaw("uniform", 1.0)
        with pytest.raises(ParameterError):
            CensoringLaw("exponential-rate", -1.0)


class TestRankingCalibration:
    def test_dell_clutter_value(self):
        # Var(X)=1, rho=0.9: sigma^2 = 1/0.81 - 1
        assert dell_clutter_sigma(1.0, 0.9) == pytest.approx(
            1 / 0.81 - 1, abs=1e-12)

    def test_dell_clutter_perfect_ranking(self):
        assert dell_clutter_sigma(2.0, 1.0) == 0.0

    def test_dell_clutter_errors(self):
        with pytest.raises(ParameterError):
            dell_clutter_sigma(-1.0, 0.5)
        with pytest.raises(ParameterError):
            dell_clutter_sigma(1.0, 0.0)

    def test_dell_clutter_achieves_target_correlation(self):
        rho = 0.6
        sigma = math.sqrt(dell_clutter_sigma(EXP.lifetime_variance, rho))
        gen = np.random.default_rng(2)
        x = EXP.draw_lifetimes(gen, 500_000)
        score = x + sigma * gen.standard_normal(x.size)
        assert np.corrcoef(score, x)[0, 1] == pytest.approx(rho, abs=0.01)

    def test_aft_ceiling_value(self):
        s = AFT.log_sd
        assert aft_rho_ceiling(AFT) == pytest.approx(
            s / math.sqrt(math.expm1(s**2)))
        assert aft_score_correlation(AFT, 0.0) == pytest.approx(
            aft_rho_ceiling(AFT), abs=1e-14)

    def test_calibration_round_trip_below_ceiling(self):
        for rho in (0.1, 0.3, 0.45):
            sigma = calibrate_aft_concomitant(AFT, rho)
            assert aft_score_correlation(AFT, sigma) == pytest.approx(
                rho, abs=1e-10)

    def test_targets_past_ceiling_share_one_level(self):
        sigmas = {calibrate_aft_concomitant(AFT, rho) for rho in (0.5, 0.7, 0.9)}
        assert len(sigmas) == 1
        (sigma,) = sigmas
        assert sigma > 0

    def test_strict_mode_reports_ceiling(self):
        with pytest.raises(CalibrationError, match="ceiling"):
            calibrate_aft_concomitant(AFT, 0.9, saturate=False)

    def test_score_correlation_decreases_in_noise(self):
        corrs = [aft_score_correlation(AFT, s) for s in (0.0, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(corrs, corrs[1:]))

    def test_monte_carlo_rank_agreement(self):
        # the calibrated proxy orders candidate sets like a rho-quality
        # ranker: Spearman correlation close to the heavy-tail-free target
        sigma = calibrate_aft_concomitant(AFT, 0.3)
        model = AftModel(sigma_u=sigma)
        gen_x, gen_p = np.random.default_rng(3), np.random.default_rng(4)
        x = model.draw_lifetimes(gen_x, 200_000)
        score = model.ranking_scores(x, gen_p)
        # corr on the log scale is the noiseless-analysis analogue
        got = np.corrcoef(score, np.log(x))[0, 1]
        want = AFT.log_sd / math.hypot(AFT.log_sd, sigma)
        assert got == pytest.approx(want, abs=0.01)


class TestMixingMatrix:
    def test_identity_constructor(self):
        m = MixingMatrix.identity(3)
        np.testing.assert_array_equal(m.w, np.eye(3))

    def test_rows_must_be_stochastic(self):
        with pytest.raises(ParameterError):
            MixingMatrix(2, np.array([[0.5, 0.4], [0.5, 0.5]]), 10)
        with pytest.raises(ParameterError):
            MixingMatrix(2, np.eye(3), 10)

    def test_perfect_ranking_estimates_identity(self):
        mix = estimate_mixing_matrix(EXP, 4, 50_000, RngStream(1))
        np.testing.assert_array_equal(mix.w, np.eye(4))

    def test_rows_and_columns_sum_to_one(self):
        noisy = WeibullModel(sigma_z=1.0)
        mix = estimate_mixing_matrix(noisy, 5, 100_000, RngStream(2))
        np.testing.assert_allclose(mix.w.sum(axis=1), 1.0, atol=1e-9)
        # each candidate set contributes a full permutation, so column
        # sums are 1 exactly by construction
        np.testing.assert_allclose(mix.w.sum(axis=0), 1.0, atol=1e-9)

    def test_pure_noise_is_uniform(self):
        noisy = WeibullModel(sigma_z=math.inf)
        mix = estimate_mixing_matrix(noisy, 4, 200_000, RngStream(3))
        se = mix.entry_se()
        assert np.all(np.abs(mix.w - 0.25) <= 4 * np.maximum(se, 1e-4))

    def test_mixture_recovers_population_average(self):
        # (1/k) sum_r sum_j w_rj S_[j] telescopes to S via column sums
        noisy = WeibullModel(sigma_z=0.8)
        k = 4
        mix = estimate_mixing_matrix(noisy, k, 100_000, RngStream(4))
        s = 0.37
        avg = sum(mixture_survival(mix, s, r) for r in range(1, k + 1)) / k
        assert avg == pytest.approx(s, abs=1e-9)


class TestAsymptoticKernels:
    def test_no_censoring_collapse(self):
        # V(t) = S(1-S) when K == 1
        t = EXP.quantile(0.5)
        none = CensoringLaw("none")
        closed = asymptotic_km_variance(EXP, none, t, method="closed")
        assert closed == pytest.approx(0.25, abs=1e-12)
        quad = asymptotic_km_variance(EXP, none, t, method="quadrature")
        assert quad == pytest.approx(closed, rel=1e-8)

    @pytest.mark.parametrize("p_cens", [0.1, 0.3, 0.5])
    @pytest.mark.parametrize("level", [0.75, 0.5, 0.25])
    def test_exponential_closed_form_matches_quadrature(self, p_cens, level):
        law = censoring_for_fraction(EXP, p_cens)
        t = EXP.quantile(level)
        closed = asymptotic_km_variance(EXP, law, t, method="closed")
        quad = asymptotic_km_variance(EXP, law, t, method="quadrature")
        # closed form: S^2 * lam*(e^{(lam+c)t} - 1)/(lam+c)
        lam, c = 1.0, 1.0 / law.parameter
        want = level**2 * lam * math.expm1((lam + c) * t) / (lam + c)
        assert closed == pytest.approx(want, rel=1e-12)
        assert quad == pytest.approx(closed, rel=1e-8)

    def test_rank_kernel_no_censoring_is_binomial(self):
        # per-rank, no censoring: V_r(t) = S_r(t)(1 - S_r(t))
        none = CensoringLaw("none")
        s2 = order_statistic_survival(EXP.survival, 2, 2, 1.0)
        got = asymptotic_km_variance(EXP, none, 1.0, rank=2, k=2)
        assert got == pytest.approx(s2 * (1 - s2), rel=1e-8)

    def test_rss_kernel_averages_ranks(self):
        law = censoring_for_fraction(EXP, 0.1)
        t = EXP.quantile(0.5)
        per_rank = [
            asymptotic_km_variance(EXP, law, t, rank=r, k=3) for r in (1, 2, 3)
        ]
        got = asymptotic_rss_km_variance(EXP, law, t, 3)
        assert got == pytest.approx(np.mean(per_rank), rel=1e-12)

    def test_perfect_rss_never_hurts(self):
        law = censoring_for_fraction(EXP, 0.3)
        t = EXP.quantile(0.5)
        v_srs = asymptotic_km_variance(EXP, law, t)
        for k in (2, 4, 6):
            assert asymptotic_rss_km_variance(EXP, law, t, k) < v_srs

    def test_outside_window_rejected(self):
        heavy = censoring_for_fraction(EXP, 0.5)
        with pytest.raises(InferenceWindowError):
            asymptotic_km_variance(EXP, heavy, 1e6)

    def test_rank_without_k_rejected(self):
        with pytest.raises(ParameterError):
            asymptotic_km_variance(EXP, CensoringLaw("none"), 1.0, rank=2)


@given(st.floats(min_value=0.05, max_value=0.95),
       st.integers(min_value=1, max_value=8))
@settings(max_examples=60, deadline=None)
def test_order_statistic_survival_monotone_in_rank(s, k):
    values = [order_statistic_survival(s, k, r, 0.0) for r in range(1, k + 1)]
    assert all(a <= b + 1e-14 for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 + 1e-14 for v in values)
