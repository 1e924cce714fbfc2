import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenmc import (
    EmptyTourList,
    EstimatorKind,
    InsufficientTrajectory,
    Tour,
    Tours,
    estimate_fixed,
    estimate_reg,
    estimate_reg_seq,
    estimate_unbiased,
    simulate_until,
)
from regenmc.errors import DomainError, NonpositiveM, StoppingRuleViolated


def tours_of(*pairs):
    xi = np.array([p[0] for p in pairs], dtype=float)
    tau = np.array([p[1] for p in pairs], dtype=np.int64)
    return Tours(xi, tau, np.zeros(len(pairs), dtype=np.int64))


class TestRatioEstimator:
    def test_single_tour(self):
        report = estimate_reg(tours_of((3.0, 2)))
        assert report.value == pytest.approx(1.5)
        assert report.kind is EstimatorKind.REG
        assert report.tours_used == 1
        assert report.samples_used == 2

    def test_is_length_weighted_mean(self):
        report = estimate_reg(tours_of((1.0, 1), (6.0, 3)))
        assert report.value == pytest.approx(7.0 / 4.0)

    def test_accepts_tour_records(self):
        records = [Tour(block_sum=2.0, length=2, last_state=0)]
        assert estimate_reg(records).value == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(EmptyTourList):
            estimate_reg(tours_of())


class TestKnownMeanEstimator:
    def test_worked_example(self):
        report = estimate_unbiased(tours_of((1.0, 1), (3.0, 3)), m=2.0)
        assert report.value == pytest.approx(1.0)
        assert report.kind is EstimatorKind.UNBIASED

    def test_nonpositive_m_rejected(self):
        for m in (0.0, -1.0):
            with pytest.raises(NonpositiveM):
                estimate_unbiased(tours_of((1.0, 1)), m=m)

    def test_unbiasedness_is_structural(self):
        # the estimator is linear in the block sums with weights 1/(r m),
        # so shifting every block sum by c shifts the value by c/m
        base = tours_of((1.0, 2), (3.0, 1), (0.5, 4))
        shifted = Tours(base.block_sums + 0.7, base.lengths, base.last_states)
        a = estimate_unbiased(base, m=2.0).value
        b = estimate_unbiased(shifted, m=2.0).value
        assert b - a == pytest.approx(0.7 / 2.0)


class TestFixedWindowEstimator:
    def test_small_trajectory(self):
        traj = np.array([0, 1, 0, 1])
        report = estimate_fixed(traj, np.array([0.0, 1.0]))
        assert report.value == pytest.approx(0.5)
        assert report.tours_used == 0
        assert report.samples_used == 4

    def test_window_and_start(self):
        traj = np.array([5, 0, 0, 2])
        f = np.arange(6, dtype=float)
        assert estimate_fixed(traj, f, start=1).value == pytest.approx(2.0 / 3.0)
        assert estimate_fixed(traj, f, start=1, window=2).value == pytest.approx(0.0)

    def test_callable_f(self):
        traj = np.array([0, 1, 2])
        assert estimate_fixed(traj, lambda x: x**2).value == pytest.approx(5.0 / 3.0)

    def test_empty_window_rejected(self):
        with pytest.raises(DomainError):
            estimate_fixed(np.array([], dtype=int), np.array([0.0]))
        with pytest.raises(InsufficientTrajectory):
            estimate_fixed(np.array([0, 1]), np.array([0.0, 1.0]), start=1, window=2)


class TestSequentialEstimator:
    def test_value_is_ratio_at_stopping_time(self):
        tours = tours_of((1.0, 2), (2.0, 3))
        report = estimate_reg_seq(tours, budget=4)
        assert report.value == pytest.approx(3.0 / 5.0)
        assert report.samples_used == 5

    def test_rejects_budget_not_crossed(self):
        with pytest.raises(StoppingRuleViolated):
            estimate_reg_seq(tours_of((1.0, 2), (2.0, 3)), budget=5)

    def test_rejects_overshooting_before_final_tour(self):
        # the budget was already crossed by the first tour; passing a
        # second one means the caller did not stop when required
        with pytest.raises(StoppingRuleViolated):
            estimate_reg_seq(tours_of((1.0, 4), (2.0, 3)), budget=2)

    def test_accepts_simulate_until_output(self, two_state):
        tours, _, total = simulate_until(two_state.model, two_state.f, 100, rng=8)
        report = estimate_reg_seq(tours, 100)
        assert report.samples_used == total
        assert 0.0 <= report.value <= 1.0

    def test_negative_budget_rejected(self):
        with pytest.raises(DomainError):
            estimate_reg_seq(tours_of((1.0, 1)), budget=-1)


class TestEquivariance:
    @settings(max_examples=50, deadline=None)
    @given(
        data=st.lists(
            st.tuples(
                st.floats(min_value=-5, max_value=5),
                st.integers(min_value=1, max_value=9),
            ),
            min_size=1,
            max_size=20,
        ),
        shift=st.floats(min_value=-3, max_value=3),
        scale=st.floats(min_value=-4, max_value=4),
    )
    def test_affine_equivariance_of_ratio(self, data, shift, scale):
        base = tours_of(*data)
        # applying f -> scale*f + shift maps each block sum to
        # scale*xi + shift*tau
        mapped = Tours(
            scale * base.block_sums + shift * base.lengths.astype(float),
            base.lengths,
            base.last_states,
        )
        a = estimate_reg(base).value
        b = estimate_reg(mapped).value
        assert b == pytest.approx(scale * a + shift, rel=1e-9, abs=1e-9)

    def test_all_estimators_shift_consistently(self, two_state):
        tours, _, total = simulate_until(two_state.model, two_state.f, 200, rng=3)
        shift = 0.37
        shifted = Tours(
            tours.block_sums + shift * tours.lengths.astype(float),
            tours.lengths,
            tours.last_states,
        )
        assert estimate_reg(shifted).value == pytest.approx(
            estimate_reg(tours).value + shift, rel=1e-12
        )
        assert estimate_reg_seq(shifted, 200).value == pytest.approx(
            estimate_reg_seq(tours, 200).value + shift, rel=1e-12
        )
        assert estimate_unbiased(shifted, m=2.0).value == pytest.approx(
            estimate_unbiased(tours, m=2.0).value + shift * total / (len(tours) * 2.0),
            rel=1e-12,
        )
