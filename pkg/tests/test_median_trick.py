import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenmc import (
    A_STAR,
    chernoff_failure,
    make_plan,
    run_median,
    smallest_odd_replicates,
)
from regenmc.errors import DomainError
from regenmc.median_trick import c1_constant, c2_constant, cost_constant


class TestChernoff:
    def test_pinned_value_at_seven_runs(self):
        # 0.5 * (4 a (1-a))^(l/2) at the tuned per-run level
        assert chernoff_failure(A_STAR, 7) == pytest.approx(
            0.024300053625299634, rel=1e-14
        )

    def test_decreases_geometrically(self):
        values = [chernoff_failure(A_STAR, l) for l in (1, 3, 5, 7, 9)]
        assert all(a > b for a, b in zip(values, values[1:]))
        # common ratio 4a(1-a) between consecutive odd counts
        ratio = 4 * A_STAR * (1 - A_STAR)
        assert values[2] / values[1] == pytest.approx(ratio, rel=1e-12)

    def test_even_and_degenerate_inputs_rejected(self):
        with pytest.raises(DomainError):
            chernoff_failure(A_STAR, 4)
        for level in (0.0, 1.0, -0.1):
            with pytest.raises(DomainError):
                chernoff_failure(level, 3)


class TestReplicateCount:
    def test_standard_setting_needs_seven(self):
        assert smallest_odd_replicates(0.05) == 7

    def test_boundary_alpha_is_inclusive(self):
        boundary = chernoff_failure(A_STAR, 7)
        assert smallest_odd_replicates(boundary) == 7
        assert smallest_odd_replicates(boundary * (1 - 1e-12)) == 9

    def test_single_run_suffices_for_weak_alpha(self):
        # one run at level a* already fails with probability ~0.325
        assert smallest_odd_replicates(0.4) == 1

    def test_alpha_domain(self):
        for alpha in (0.5, 0.0, 1.0):
            with pytest.raises(DomainError):
                smallest_odd_replicates(alpha)

    def test_always_odd(self):
        for alpha in (0.3, 0.1, 0.05, 0.01, 1e-4, 1e-8):
            assert smallest_odd_replicates(alpha) % 2 == 1


class TestConstants:
    def test_pinned_constants(self):
        assert c1_constant() == pytest.approx(8.354916868577158, rel=1e-14)
        assert c2_constant() == pytest.approx(2.3147156576656394, rel=1e-14)
        assert cost_constant() == pytest.approx(19.33925689419032, rel=1e-14)

    def test_cost_constant_is_product(self):
        assert cost_constant() == pytest.approx(c1_constant() * c2_constant(), rel=1e-14)


class TestMakePlan:
    def test_standard_worked_example(self):
        plan = make_plan(0.75, 3.0, eps=0.1, alpha=0.05)
        assert plan.n == 630
        assert plan.l == 7
        assert plan.expected_cost == pytest.approx(7 * (630 + 3.0))

    def test_halving_eps_roughly_quadruples_budget(self):
        n_coarse = make_plan(0.75, 3.0, eps=0.1, alpha=0.05).n
        n_fine = make_plan(0.75, 3.0, eps=0.05, alpha=0.05).n
        assert n_fine / n_coarse == pytest.approx(4.0, abs=0.02)

    def test_budget_is_sufficient_for_per_run_level(self):
        # each run must individually miss by more than eps with
        # probability at most a*, certified by the sequential MSE bound
        plan = make_plan(0.75, 3.0, eps=0.1, alpha=0.05)
        mse = plan.sigma_as_bound / plan.n * (1 + plan.c0_bound / plan.n)
        assert mse / 0.1**2 <= plan.a_star + 1e-12

    @settings(max_examples=60, deadline=None)
    @given(
        sigma_as_sq=st.floats(min_value=1e-3, max_value=30.0),
        c0=st.floats(min_value=1.0, max_value=50.0),
        eps=st.floats(min_value=0.01, max_value=1.0),
        alpha=st.floats(min_value=1e-6, max_value=0.4),
    )
    def test_plan_invariants(self, sigma_as_sq, c0, eps, alpha):
        plan = make_plan(sigma_as_sq, c0, eps=eps, alpha=alpha)
        assert plan.l % 2 == 1
        assert chernoff_failure(plan.a_star, plan.l) <= alpha
        assert plan.expected_cost == pytest.approx(plan.l * (plan.n + c0), rel=1e-12)
        mse = sigma_as_sq / plan.n * (1 + c0 / plan.n)
        assert mse / eps**2 <= plan.a_star + 1e-9


class TestRunMedian:
    def test_median_of_run_values(self, two_state):
        plan = make_plan(0.75, 3.0, eps=0.3, alpha=0.3)
        result = run_median(plan, two_state.model, two_state.f, master_seed=5)
        values = sorted(run.value for run in result.runs)
        assert len(values) == plan.l
        assert result.median == values[len(values) // 2]
        assert result.total_steps == sum(run.samples_used for run in result.runs)

    def test_jobs_do_not_change_bytes(self, two_state):
        plan = make_plan(0.75, 3.0, eps=0.3, alpha=0.3)
        serial = run_median(plan, two_state.model, two_state.f, master_seed=5, jobs=1)
        pooled = run_median(plan, two_state.model, two_state.f, master_seed=5, jobs=2)
        assert serial.median == pooled.median
        assert serial.total_steps == pooled.total_steps
        assert [r.value for r in serial.runs] == [r.value for r in pooled.runs]

    def test_replicate_offset_gives_fresh_runs(self, two_state):
        plan = make_plan(0.75, 3.0, eps=0.3, alpha=0.3)
        a = run_median(plan, two_state.model, two_state.f, master_seed=5)
        b = run_median(plan, two_state.model, two_state.f, master_seed=5,
                       replicate_offset=plan.l)
        assert [r.value for r in a.runs] != [r.value for r in b.runs]

    def test_median_concentrates(self, two_state):
        # at eps = 0.2, alpha = 0.2 the guarantee is |median - 1/2| <= 0.2
        # with probability >= 0.8; a handful of meta-replicates at a fixed
        # seed must all land inside (checked: they do, by a wide margin)
        plan = make_plan(0.75, 3.0, eps=0.2, alpha=0.2)
        for meta in range(5):
            result = run_median(plan, two_state.model, two_state.f, master_seed=60,
                                replicate_offset=meta * plan.l)
            assert abs(result.median - 0.5) <= 0.2
