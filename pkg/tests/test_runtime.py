"""Tests for average execution time analytics and the dimension sweep."""

import math

import pytest
from scipy import special

from codedcomp.analysis.runtime import (
    RuntimeModel,
    Scheme,
    SweepBudget,
    TimeMethod,
    TimeResult,
    avg_time_brc_bound,
    avg_time_mds,
    avg_time_quadrature,
    avg_time_series,
    brc_conditional_bound,
    code_gains,
    execution_time_tail_bound,
    feasible_dimensions,
    gap_bound,
    mds_failure_prob,
    mds_time,
    optimal_rate,
    scheme_time,
    sweep_k,
)
from codedcomp.codes.channel import conditional_failure_profile, pe_from_conditionals
from codedcomp.errors import BudgetExhausted, InputError, NumericError

EXP = RuntimeModel.exponential(1.0)


@pytest.mark.unit
class TestRuntimeModel:
    def test_erasure_probability(self):
        assert EXP.erasure_prob(0.1, 4) == 1.0
        assert EXP.erasure_prob(0.5, 4) == pytest.approx(math.exp(-1.0))

    def test_exponential_has_unit_shape(self):
        with pytest.raises(InputError):
            RuntimeModel(mu=1.0, alpha=2.0)
        with pytest.raises(InputError):
            RuntimeModel.exponential(0.0)

    def test_weibull_with_unit_shape_is_exponential(self):
        assert RuntimeModel.weibull(1.0, 1.0).is_exponential


@pytest.mark.unit
class TestClosedForms:
    def test_single_worker(self):
        assert avg_time_mds(1, 1, 2.0).t_avg == pytest.approx(1.5)

    def test_mds_value(self):
        result = avg_time_mds(8, 6, 1.0)
        assert result.method is TimeMethod.CLOSED_FORM
        assert result.t_avg == pytest.approx(0.36964, abs=1e-5)

    def test_uncoded(self):
        assert scheme_time(Scheme.UNCODED, 8, 8, EXP)[0].t_avg == pytest.approx(0.4647, abs=1e-4)
        with pytest.raises(InputError):
            scheme_time(Scheme.UNCODED, 8, 7, EXP)

    def test_brc_conditional_bound(self):
        assert brc_conditional_bound(8, 7, 1) == pytest.approx(0.7089, abs=1e-4)
        assert brc_conditional_bound(4, 2, 2) == pytest.approx(0.625)
        assert brc_conditional_bound(8, 7, 2) == 1.0

    def test_brc_bound_dominates_mds(self):
        for k in range(1, 9):
            assert avg_time_brc_bound(8, k, 1.0).t_avg >= avg_time_mds(8, k, 1.0).t_avg

    def test_floor_is_enforced(self):
        with pytest.raises(NumericError):
            TimeResult(0.1, 4, TimeMethod.SERIES)

    def test_invalid_dimensions(self):
        with pytest.raises(InputError):
            avg_time_mds(4, 5, 1.0)


@pytest.mark.unit
class TestSeriesAndQuadrature:
    def test_exponential_quadrature_matches_closed_form(self):
        quad = avg_time_quadrature(8, 6, EXP, mds_failure_prob(8, 6), abs_tol=1e-10, tail_tol=1e-12)
        assert quad.method is TimeMethod.QUADRATURE
        assert quad.t_avg == pytest.approx(avg_time_mds(8, 6, 1.0).t_avg, abs=1e-8)

    def test_series_matches_quadrature_for_decoder_profile(self, rm31_map):
        profile = conditional_failure_profile(rm31_map)
        series = avg_time_series(8, 4, 1.0, profile)
        quad = avg_time_quadrature(
            8, 4, EXP, lambda eps: pe_from_conditionals(profile, eps), abs_tol=1e-10, tail_tol=1e-12
        )
        assert series.t_avg == pytest.approx(quad.t_avg, abs=1e-7)

    def test_profile_shape_checked(self, rm31_map):
        with pytest.raises(InputError):
            avg_time_series(8, 5, 1.0, conditional_failure_profile(rm31_map))

    def test_weibull_mds(self):
        result = mds_time(8, 7, RuntimeModel.weibull(1.0, 2.0))
        assert result.method is TimeMethod.QUADRATURE
        assert result.t_avg == pytest.approx(0.32609, abs=2e-4)

    @pytest.mark.parametrize("n,k,alpha", [(8, 7, 2.0), (8, 6, 2.0), (16, 14, 2.0), (8, 5, 0.5), (12, 9, 3.0)])
    def test_weibull_mds_matches_order_statistic(self, n, k, alpha):
        # E[W_(k:n)] for unit Weibull from the binomial expansion of F^(k-1)
        terms = [
            (-1) ** j * special.comb(k - 1, j, exact=True) / (n - k + j + 1) ** (1.0 + 1.0 / alpha)
            for j in range(k)
        ]
        mean_kth = k * special.comb(n, k, exact=True) * special.gamma(1.0 + 1.0 / alpha) * math.fsum(terms)
        result = mds_time(n, k, RuntimeModel.weibull(1.0, alpha))
        assert result.t_avg == pytest.approx((1.0 + mean_kth) / k, abs=1e-5)

    @pytest.mark.parametrize("n,k", [(8, 6), (16, 11), (32, 22)])
    def test_unit_shape_weibull_matches_closed_form(self, n, k):
        model = RuntimeModel.weibull(1.0, 1.0)
        quad = avg_time_quadrature(n, k, model, mds_failure_prob(n, k), abs_tol=1e-11, tail_tol=1e-12)
        assert quad.t_avg == pytest.approx(avg_time_mds(n, k, 1.0).t_avg, abs=1e-8)


@pytest.mark.unit
class TestAsymptotics:
    def test_optimal_rate(self):
        assert optimal_rate(1.0) == pytest.approx(0.6822, abs=1e-4)
        assert optimal_rate(2.0) > optimal_rate(1.0)

    def test_gap_bound(self):
        value = gap_bound(1024, 699, 1.0)
        assert value > 0
        assert execution_time_tail_bound(1024, 699, 1.0, 2 * value) == pytest.approx(0.5)
        assert execution_time_tail_bound(1024, 699, 1.0, value / 2) == 1.0

    def test_gap_bound_v_range(self):
        with pytest.raises(InputError):
            gap_bound(16, 12, 1.0, v=5)
        assert gap_bound(16, 12, 1.0, v=4) > 0

    def test_gains(self):
        g_cod, g_opt = code_gains(0.4, 0.5, 0.4)
        assert g_cod == pytest.approx(0.2)
        assert g_opt == pytest.approx(0.0)


@pytest.mark.unit
class TestSweep:
    @pytest.mark.parametrize("n,k_star,t_avg", [(8, 6, 0.370), (16, 11, 0.191), (32, 22, 0.0968)])
    def test_mds_optimum(self, n, k_star, t_avg):
        result = sweep_k(n, Scheme.MDS, EXP)
        assert result.k_star == k_star
        assert result.best.t_avg == pytest.approx(t_avg, abs=5e-4)
        assert len(result.curve) == n

    def test_rm_map_optimum(self):
        result = sweep_k(8, Scheme.RM_MAP, EXP)
        assert result.k_star == 7
        assert result.best.t_avg == pytest.approx(0.389, abs=1e-3)
        g_cod, g_opt = result.gains
        assert g_cod > 0 and g_opt >= 0

    def test_rm42_map(self):
        result, low, high = scheme_time(Scheme.RM_MAP, 16, 11, EXP)
        assert result.t_avg == pytest.approx(0.198, rel=0.01)
        assert low == high == result.t_avg

    def test_polar_optimum(self):
        result = sweep_k(8, Scheme.POLAR_SC, EXP, SweepBudget(eps_design=0.1))
        assert result.k_star == 7
        assert result.best.t_avg == pytest.approx(0.412, rel=0.02)

    def test_weibull_mds_optimum(self):
        result = sweep_k(8, Scheme.MDS, RuntimeModel.weibull(1.0, 2.0))
        assert result.k_star == 7

    def test_single_worker_sweep(self):
        result = sweep_k(1, Scheme.MDS, EXP)
        assert result.k_star == 1

    def test_brc_bound_dominates_ensemble(self):
        budget = SweepBudget(trials=300, chunk_size=100, seed=5)
        ensemble, low, high = scheme_time(Scheme.BRC_ENSEMBLE, 8, 4, EXP, budget)
        bound = scheme_time(Scheme.BRC_BOUND, 8, 4, EXP)[0]
        assert low <= ensemble.t_avg <= high
        assert bound.t_avg >= low

    def test_evaluation_budget(self):
        with pytest.raises(BudgetExhausted) as info:
            sweep_k(8, Scheme.MDS, EXP, SweepBudget(max_evaluations=3))
        assert [row.k for row in info.value.partial] == [1, 2, 3]

    def test_feasible_dimensions(self):
        assert feasible_dimensions(Scheme.RM_PROJECTIVE, 8) == [4, 7, 8]
        assert feasible_dimensions(Scheme.UNCODED, 8) == [8]
        with pytest.raises(InputError):
            feasible_dimensions(Scheme.POLAR_SC, 12)

    def test_projective_matches_map_on_rm32(self):
        proj = scheme_time(Scheme.RM_PROJECTIVE, 8, 7, EXP)[0]
        mapd = scheme_time(Scheme.RM_MAP, 8, 7, EXP)[0]
        assert proj.t_avg == pytest.approx(mapd.t_avg)

    @pytest.mark.slow
    def test_rm_map_sixteen(self):
        result = sweep_k(16, Scheme.RM_MAP, EXP)
        assert result.k_star == 11
        assert result.best.t_avg == pytest.approx(0.198, rel=0.01)



@pytest.mark.integration
class TestLargerLengths:
    @pytest.mark.parametrize(
        "n,k_star,t_avg", [(64, 44, 0.0488), (128, 88, 0.0245), (256, 175, 0.0123), (512, 350, 0.0061)]
    )
    def test_mds_optimum(self, n, k_star, t_avg):
        result = sweep_k(n, Scheme.MDS, EXP)
        assert result.k_star == k_star
        assert result.best.t_avg == pytest.approx(t_avg, abs=5e-4)

    @pytest.mark.parametrize(
        "n,t_avg", [(16, 0.2738), (32, 0.1581), (64, 0.0897), (128, 0.0503), (256, 0.0278), (512, 0.0153)]
    )
    def test_uncoded(self, n, t_avg):
        result = scheme_time(Scheme.UNCODED, n, n, EXP)[0]
        assert result.t_avg == pytest.approx(t_avg, abs=5e-4)

    def test_brc_gap_shrinks_at_fixed_rate(self):
        rate = optimal_rate(1.0)
        gaps = []
        for n in (64, 128, 256, 512):
            k = math.ceil(rate * n)
            gap = n * (avg_time_brc_bound(n, k, 1.0).t_avg - avg_time_mds(n, k, 1.0).t_avg)
            assert 0.0 <= gap <= gap_bound(n, k, 1.0, v=int(2 * math.log2(n)))
            gaps.append(gap)
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))

    @pytest.mark.slow
    @pytest.mark.parametrize("n,k_star,t_avg", [(16, 11, 0.217), (32, 24, 0.114), (64, 44, 0.0584)])
    def test_polar_optimum(self, n, k_star, t_avg):
        result = sweep_k(n, Scheme.POLAR_SC, EXP, SweepBudget(eps_design=0.1))
        assert result.k_star == k_star
        assert result.best.t_avg == pytest.approx(t_avg, rel=0.02)

    @pytest.mark.slow
    @pytest.mark.parametrize("n,k_star,t_avg", [(16, 15, 0.1683), (32, 29, 0.0856), (64, 57, 0.0432)])
    def test_weibull_mds_optimum(self, n, k_star, t_avg):
        result = sweep_k(n, Scheme.MDS, RuntimeModel.weibull(1.0, 2.0))
        assert result.k_star == k_star
        assert result.best.t_avg == pytest.approx(t_avg, abs=5e-4)

    @pytest.mark.slow
    def test_rm_map_thirty_two(self):
        budget = SweepBudget(enum_limit=2000, trials=2000, chunk_size=1000, certify=False)
        result = sweep_k(32, Scheme.RM_MAP, EXP, budget)
        assert result.k_star == 26
        assert result.best.t_avg == pytest.approx(0.104, rel=0.01)

    @pytest.mark.slow
    def test_rm_map_sixty_four(self):
        budget = SweepBudget(enum_limit=2000, trials=4000, chunk_size=1000, certify=False)
        result, low, high = scheme_time(Scheme.RM_MAP, 64, 42, EXP, budget)
        assert result.t_avg == pytest.approx(0.050, rel=0.01)
        assert low <= result.t_avg <= high


@pytest.mark.integration
class TestProjectiveParity:
    def test_rm42(self):
        proj = scheme_time(Scheme.RM_PROJECTIVE, 16, 11, EXP)[0].t_avg
        mapd = scheme_time(Scheme.RM_MAP, 16, 11, EXP)[0].t_avg
        assert mapd - 1e-12 <= proj <= mapd * 1.01

    @pytest.mark.slow
    @pytest.mark.parametrize("m,k,trials", [(5, 26, 3000), (6, 42, 1000)])
    def test_larger_codes(self, m, k, trials):
        # both decoders see the same erasure draws, so projective can only lose
        budget = SweepBudget(enum_limit=100, trials=trials, chunk_size=500, certify=False, seed=17)
        proj = scheme_time(Scheme.RM_PROJECTIVE, 2**m, k, EXP, budget)[0].t_avg
        mapd = scheme_time(Scheme.RM_MAP, 2**m, k, EXP, budget)[0].t_avg
        assert mapd - 1e-12 <= proj <= mapd * 1.02
