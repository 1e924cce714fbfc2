import numpy as np
import pytest
from scipy import stats

from regenmc import (
    NotDoeblin,
    estimate_perfect,
    oracle,
    perfect_plan,
    perfect_samples,
    perfect_samples_with_cost,
    run_median_perfect,
    stream,
)
from regenmc.errors import DomainError, EmptySampleList
from regenmc.rng import ROLE_PERFECT


class TestPreconditions:
    def test_partial_small_set_rejected(self, drift_bd):
        with pytest.raises(NotDoeblin):
            perfect_samples(drift_bd.model, 10)

    def test_draw_count_positive(self, two_state):
        with pytest.raises(DomainError):
            perfect_samples(two_state.model, 0)

    def test_empty_sample_list_rejected(self):
        with pytest.raises(EmptySampleList):
            estimate_perfect(np.array([], dtype=np.int64), np.array([0.0, 1.0]))


class TestSampleLaw:
    def test_deterministic_replay(self, two_state):
        a = perfect_samples(two_state.model, 500, rng=6)
        b = perfect_samples(two_state.model, 500, rng=6)
        np.testing.assert_array_equal(a, b)

    def test_cost_counts_chain_steps(self, two_state):
        samples, steps = perfect_samples_with_cost(two_state.model, 2000, rng=6)
        assert samples.shape == (2000,)
        # every draw consumes one whole tour, at least one step each
        assert steps >= 2000
        # mean tour length is 2; the realized cost concentrates near 4000
        assert abs(steps / 2000 - 2.0) < 0.2

    @pytest.mark.parametrize("zoo_name", ["two-state", "imh"])
    def test_matches_stationary_law(self, zoo_name, two_state, imh):
        zm = {"two-state": two_state, "imh": imh}[zoo_name]
        r = 20000
        draws = perfect_samples(zm.model, r, rng=stream(12, 0, ROLE_PERFECT))
        pi = oracle.stationary(zm.model.kernel)
        observed = np.bincount(draws, minlength=zm.model.n_states).astype(float)
        expected = r * pi
        # merge low-expectation states into a tail bin for chi-square
        keep = expected >= 5.0
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        if exp[-1] == 0.0:
            obs, exp = obs[:-1], exp[:-1]
        p = stats.chisquare(obs, exp).pvalue
        assert p > 1e-3, f"chi-square p-value {p:.3e} on {zm.name}"

    def test_draws_look_independent(self, imh):
        draws = perfect_samples(imh.model, 20000, rng=stream(12, 1, ROLE_PERFECT))
        x = draws[:-1].astype(float)
        y = draws[1:].astype(float)
        corr = np.corrcoef(x, y)[0, 1]
        assert abs(corr) <= 3.0 / np.sqrt(draws.shape[0] - 1)


class TestPerfectEstimator:
    def test_mean_of_samples(self, two_state):
        report = estimate_perfect(np.array([0, 1, 1, 1]), two_state.f)
        assert report.value == pytest.approx(0.75)
        assert report.samples_used == 4

    def test_mse_scales_inversely_with_draws(self, two_state):
        # i.i.d. stationary draws: r * MSE = stationary variance = 1/4
        r, reps = 100, 400
        errors = np.empty(reps)
        for i in range(reps):
            draws = perfect_samples(two_state.model, r, rng=stream(13, i, ROLE_PERFECT))
            errors[i] = estimate_perfect(draws, two_state.f).value - 0.5
        scaled = r * np.mean(errors**2)
        se = r * np.std(errors**2, ddof=1) / np.sqrt(reps)
        assert abs(scaled - 0.25) <= 3 * se


class TestPerfectPlanning:
    def test_plan_shape(self):
        plan = perfect_plan(0.25, 0.5, eps=0.1, alpha=0.05)
        assert plan.l == 7
        assert plan.l % 2 == 1
        # each of l runs needs sigma^2/(a* eps^2) draws, one tour apiece
        assert plan.r == int(np.ceil(0.25 / (plan.a_star * 0.01)))
        assert plan.expected_cost == pytest.approx(plan.l * plan.r / 0.5)
        assert plan.expected_samples == plan.l * plan.r

    def test_run_median_hits_target(self, two_state):
        plan = perfect_plan(0.25, 0.5, eps=0.1, alpha=0.05)
        result = run_median_perfect(plan, two_state.model, two_state.f, master_seed=2)
        assert abs(result.median - 0.5) <= 0.1
        assert len(result.runs) == plan.l

    def test_realized_cost_near_plan(self, two_state):
        plan = perfect_plan(0.25, 0.5, eps=0.1, alpha=0.05)
        costs = []
        for i in range(20):
            _, steps = perfect_samples_with_cost(
                two_state.model, plan.r * plan.l, rng=stream(14, i, ROLE_PERFECT)
            )
            costs.append(steps)
        mean_cost = float(np.mean(costs))
        assert abs(mean_cost - plan.expected_cost) / plan.expected_cost < 0.05
