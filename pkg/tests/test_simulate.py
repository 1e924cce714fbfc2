import numpy as np
import pytest
from scipy import stats

from regenmc import (
    SimulationMode,
    Tour,
    Tours,
    TourLengthOverflow,
    available_backends,
    burn_to_regeneration,
    retrospective_regen_prob,
    simulate_tours,
    simulate_trajectory,
    simulate_until,
    state_values,
    stream,
)
from regenmc.errors import DomainError
from regenmc.rng import ROLE_TOURS

MODES = (SimulationMode.EXPLICIT, SimulationMode.MYKLAND)


class TestToursContainer:
    def test_fields_and_totals(self):
        tours = Tours(np.array([1.0, 3.0]), np.array([1, 3]), np.array([0, 1]))
        assert len(tours) == 2
        assert tours.total_steps == 4
        assert list(tours)[1] == Tour(block_sum=3.0, length=3, last_state=1)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(DomainError):
            Tours(np.array([1.0]), np.array([1, 2]), np.array([0, 0]))

    def test_rejects_nonpositive_tour_length(self):
        with pytest.raises(DomainError):
            Tours(np.array([1.0]), np.array([0]), np.array([0]))


class TestStateValues:
    def test_callable_and_table_agree(self, two_state):
        by_call = state_values(two_state.model, lambda x: x * 2.0)
        by_table = state_values(two_state.model, np.array([0.0, 2.0]))
        np.testing.assert_allclose(by_call, by_table, atol=0.0)

    def test_short_table_rejected(self, drift_bd):
        with pytest.raises(DomainError):
            state_values(drift_bd.model, np.array([1.0, 2.0]))


class TestDeterminism:
    def test_same_seed_replays(self, all_models):
        for zm in all_models:
            for mode in MODES:
                a = simulate_tours(zm.model, zm.f, 200, mode=mode, rng=11)
                b = simulate_tours(zm.model, zm.f, 200, mode=mode, rng=11)
                np.testing.assert_array_equal(a.block_sums, b.block_sums)
                np.testing.assert_array_equal(a.lengths, b.lengths)
                np.testing.assert_array_equal(a.last_states, b.last_states)

    def test_streams_differ_across_replicates(self, two_state):
        a = simulate_tours(two_state.model, two_state.f, 200, rng=stream(4, 0, ROLE_TOURS))
        b = simulate_tours(two_state.model, two_state.f, 200, rng=stream(4, 1, ROLE_TOURS))
        assert not np.array_equal(a.lengths, b.lengths)

    def test_backends_bit_identical(self, all_models):
        backends = available_backends()
        if len(backends) < 2:
            pytest.skip("only one backend built")
        for zm in all_models:
            for mode in MODES:
                ref = simulate_tours(zm.model, zm.f, 500, mode=mode, rng=7,
                                     backend=backends[0])
                for other in backends[1:]:
                    got = simulate_tours(zm.model, zm.f, 500, mode=mode, rng=7,
                                         backend=other)
                    np.testing.assert_array_equal(ref.block_sums, got.block_sums)
                    np.testing.assert_array_equal(ref.lengths, got.lengths)
                    np.testing.assert_array_equal(ref.last_states, got.last_states)

    def test_trajectory_backends_bit_identical(self, all_models):
        backends = available_backends()
        if len(backends) < 2:
            pytest.skip("only one backend built")
        for zm in all_models:
            ref = simulate_trajectory(zm.model, 2000, rng=7, backend=backends[0])
            for other in backends[1:]:
                got = simulate_trajectory(zm.model, 2000, rng=7, backend=other)
                np.testing.assert_array_equal(ref, got)


class TestTourLaw:
    def test_geometric_mean_length(self, two_state):
        # full-space regeneration at rate beta makes tour lengths
        # geometric(beta): mean 2 and variance 2 at beta = 0.5
        tours = simulate_tours(two_state.model, two_state.f, 40000, rng=3)
        lengths = tours.lengths
        se_mean = lengths.std(ddof=1) / np.sqrt(lengths.shape[0])
        assert abs(lengths.mean() - 2.0) <= 3 * se_mean
        var = lengths.var(ddof=1)
        se_var = np.sqrt(
            (np.mean((lengths - lengths.mean()) ** 4) - var**2) / lengths.shape[0]
        )
        assert abs(var - 2.0) <= 3 * se_var

    def test_tour_invariants(self, all_models):
        for zm in all_models:
            J = np.flatnonzero(zm.model.small_set.J)
            for mode in MODES:
                tours = simulate_tours(zm.model, zm.f, 2000, mode=mode, rng=5)
                assert (tours.lengths >= 1).all()
                assert np.isin(tours.last_states, J).all()
                sup = np.abs(state_values(zm.model, zm.f)).max()
                assert (np.abs(tours.block_sums) <= tours.lengths * sup + 1e-9).all()

    def test_modes_agree_in_law(self, two_state):
        explicit = simulate_tours(two_state.model, two_state.f, 20000,
                                  mode=SimulationMode.EXPLICIT, rng=1)
        retro = simulate_tours(two_state.model, two_state.f, 20000,
                               mode=SimulationMode.MYKLAND, rng=2)
        for a, b in ((explicit.lengths, retro.lengths),
                     (explicit.block_sums, retro.block_sums)):
            p = stats.ks_2samp(a, b, method="asymp").pvalue
            assert p > 1e-3, f"two-sample KS p-value {p:.3e}"


class TestStopping:
    def test_budget_crossing_semantics(self, all_models):
        for zm in all_models:
            tours, n_tours, total = simulate_until(zm.model, zm.f, 500, rng=9)
            assert n_tours == len(tours)
            assert total == tours.total_steps
            assert total > 500
            assert total - int(tours.lengths[-1]) <= 500

    def test_zero_budget_still_one_tour(self, two_state):
        tours, n_tours, total = simulate_until(two_state.model, two_state.f, 0, rng=9)
        assert n_tours == 1
        assert total >= 1


class TestSteppers:
    def test_retrospective_regen_probability(self, two_state, drift_bd):
        # P(regen | move 0 -> 0) = beta*nu(0)/P(0,0): two-state(0.5) gives
        # 0.25/0.75 = 1/3; the birth-death chain gives 0.1/0.7 = 1/7
        assert retrospective_regen_prob(two_state.model, 0, 0) == pytest.approx(1 / 3)
        assert retrospective_regen_prob(drift_bd.model, 0, 0) == pytest.approx(1 / 7)

    def test_retrospective_prob_off_small_set_is_zero(self, drift_bd):
        assert retrospective_regen_prob(drift_bd.model, 3, 2) == 0.0

    def test_retrospective_prob_in_unit_interval(self, all_models):
        rng = np.random.default_rng(0)
        for zm in all_models:
            P = zm.model.kernel.P
            for _ in range(50):
                x = int(rng.integers(zm.model.n_states))
                choices = np.flatnonzero(P[x] > 0)
                y = int(rng.choice(choices))
                p = retrospective_regen_prob(zm.model, x, y)
                assert 0.0 <= p <= 1.0

    def test_burn_in_reaches_tour_boundary(self, drift_bd):
        steps, fresh = burn_to_regeneration(drift_bd.model, 17, rng=4)
        assert steps >= 1
        # regeneration measure concentrates at state 0
        assert fresh == 0


class TestTourCap:
    def test_overflow_raises(self, drift_bd):
        with pytest.raises(TourLengthOverflow):
            simulate_tours(drift_bd.model, drift_bd.f, 500, rng=0, tour_cap=2)

    def test_generous_cap_is_silent(self, two_state):
        tours = simulate_tours(two_state.model, two_state.f, 100, rng=0, tour_cap=10**6)
        assert len(tours) == 100
