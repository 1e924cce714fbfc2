"""Point estimators of the stationary mean built from trajectories or tours.

Four estimators are provided here (the perfect-sample mean lives in
`regenmc.perfect`):

* `estimate_fixed`   - plain window average over a trajectory;
* `estimate_reg`     - ratio of summed block sums to summed tour lengths
  over a fixed number of complete tours;
* `estimate_unbiased`- block-sum average divided by the (exactly known)
  mean tour length; unbiased across replicates;
* `estimate_reg_seq` - the ratio estimator at the budget-crossing stopping
  time, i.e. over the tours returned by `simulate_until`.

All are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DomainError,
    EmptyTourList,
    InsufficientTrajectory,
    NonpositiveM,
    StoppingRuleViolated,
)
from .simulate import Tours


class EstimatorKind(Enum):
    """Which estimator produced a report (values double as CLI names)."""

    FIXED = "fixed"
    REG = "reg"
    UNBIASED = "unbiased"
    REG_SEQ = "reg-seq"
    PERFECT = "perfect"


@dataclass(frozen=True)
class EstimateReport:
    """A point estimate plus the resources it consumed.

    ``samples_used`` counts chain steps for trajectory- and tour-based
    estimators and i.i.d. draws for the perfect-sample mean;
    ``tours_used`` is 0 for the fixed-window estimator.  ``mse_bound`` is
    filled in only when the caller supplied the moments needed to compute
    one.
    """

    kind: EstimatorKind
    value: float
    tours_used: int
    samples_used: int
    estimand: str = "stationary mean of f"
    mse_bound: float | None = None

    def __post_init__(self):
        if self.samples_used < 1:
            raise DomainError(f"samples_used must be >= 1, got {self.samples_used!r}")
        if self.tours_used < 0:
            raise DomainError(f"tours_used must be >= 0, got {self.tours_used!r}")


def _tour_arrays(tours) -> tuple[np.ndarray, np.ndarray]:
    """Accept a `Tours` batch or any iterable of `Tour` records."""
    if isinstance(tours, Tours):
        return tours.block_sums, tours.lengths
    items = list(tours)
    block_sums = np.array([t.block_sum for t in items], dtype=np.float64)
    lengths = np.array([t.length for t in items], dtype=np.int64)
    return block_sums, lengths


def _trajectory_values(traj: np.ndarray, f) -> np.ndarray:
    if callable(f):
        hi = int(traj.max()) + 1
        table = np.array([float(f(x)) for x in range(hi)], dtype=np.float64)
    else:
        table = np.asarray(f, dtype=np.float64)
        if table.ndim != 1:
            raise DomainError("f must be one-dimensional when given as a table")
        if int(traj.max()) >= table.shape[0]:
            raise DomainError(
                f"trajectory visits state {int(traj.max())} but f has only "
                f"{table.shape[0]} entries"
            )
    return table[traj]


def estimate_fixed(trajectory, f, start: int = 0, window: int | None = None) -> EstimateReport:
    """Average of f over `window` consecutive states beginning at `start`.

    `trajectory` is a sequence of state indices (as produced by
    `simulate_trajectory`); `f` is a callable on states or a value table.
    """
    traj = np.asarray(trajectory, dtype=np.int64)
    if traj.ndim != 1:
        raise DomainError("trajectory must be one-dimensional")
    if start < 0:
        raise DomainError(f"start must be nonnegative, got {start!r}")
    if window is None:
        window = traj.size - start
    if window < 1:
        raise DomainError(f"window must be at least 1, got {window!r}")
    if start + window > traj.size:
        raise InsufficientTrajectory(
            f"trajectory has {traj.size} states, need {start + window}"
        )
    seg = traj[start : start + window]
    value = float(_trajectory_values(seg, f).mean())
    return EstimateReport(
        kind=EstimatorKind.FIXED, value=value, tours_used=0, samples_used=int(window)
    )


def estimate_reg(tours) -> EstimateReport:
    """Ratio estimator over a fixed number of complete tours:
    (sum of block sums) / (sum of tour lengths)."""
    block_sums, lengths = _tour_arrays(tours)
    r = int(lengths.shape[0])
    if r == 0:
        raise EmptyTourList("ratio estimator needs at least one tour")
    total = int(lengths.sum())
    value = float(block_sums.sum()) / total
    return EstimateReport(
        kind=EstimatorKind.REG, value=value, tours_used=r, samples_used=total
    )


def estimate_unbiased(tours, m: float) -> EstimateReport:
    """Block-sum average divided by the exact mean tour length m.

    Unbiased for the stationary mean when m is exact (full-space small
    sets give m = 1/beta in closed form; otherwise use the oracle).
    """
    if not (isinstance(m, (int, float)) and math.isfinite(m)) or m <= 0.0:
        raise NonpositiveM(f"mean tour length must be a positive real, got {m!r}")
    block_sums, lengths = _tour_arrays(tours)
    r = int(lengths.shape[0])
    if r == 0:
        raise EmptyTourList("unbiased estimator needs at least one tour")
    value = float(block_sums.sum()) / (r * float(m))
    return EstimateReport(
        kind=EstimatorKind.UNBIASED,
        value=value,
        tours_used=r,
        samples_used=int(lengths.sum()),
    )


def estimate_reg_seq(tours, budget: int) -> EstimateReport:
    """Ratio estimator at the budget-crossing stopping time.

    `tours` must be exactly the output of `simulate_until(model, f, budget)`:
    the cumulative length strictly exceeds `budget` only at the final tour.
    This is validated, not assumed - the error guarantees downstream of the
    stopping rule are void for any other tour list.
    """
    budget = int(budget)
    if budget < 0:
        raise DomainError(f"budget must be nonnegative, got {budget!r}")
    block_sums, lengths = _tour_arrays(tours)
    r = int(lengths.shape[0])
    if r == 0:
        raise EmptyTourList("sequential estimator needs at least one tour")
    total = int(lengths.sum())
    if total <= budget:
        raise StoppingRuleViolated(
            f"total length {total} has not crossed the budget {budget}"
        )
    if total - int(lengths[-1]) > budget:
        raise StoppingRuleViolated(
            f"budget {budget} was already crossed before the final tour "
            f"(length without it: {total - int(lengths[-1])})"
        )
    value = float(block_sums.sum()) / total
    return EstimateReport(
        kind=EstimatorKind.REG_SEQ, value=value, tours_used=r, samples_used=total
    )
