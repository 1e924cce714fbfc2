"""Median-of-means planning and execution for target accuracy (eps, alpha).

The planner sizes a single run so its failure probability is at most a
fixed level ``a_star`` (via the sequential-estimator MSE bound and
Chebyshev), then repeats the run an odd number of times ``l`` and takes the
median.  The median is wrong only if at least half the runs fail, and a
Chernoff bound drives that probability below ``alpha`` geometrically in
``l``.

Constants derived from ``a_star``:

* ``C1 = 1/a_star``                       (per-run budget multiplier)
* ``C2 = 2 / ln(1/(4 a_star (1-a_star)))``  (replicate multiplier)
* ``C1*C2 ~ 19.34``                       (overall cost constant)

``a_star = 0.11969`` nearly minimizes ``C1*C2``; it is a default, not a
law - every entry point accepts an override.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .estimators import EstimateReport, estimate_reg_seq
from .kernel import SplitModel
from .rng import ROLE_TOURS, stream
from .simulate import (
    DEFAULT_TOUR_CAP,
    SimulationMode,
    as_mode,
    simulate_until,
    state_values,
)

A_STAR = 0.11969


def chernoff_failure(a: float, l: int) -> float:
    """Probability that a median of l runs fails when each fails w.p. a:
    at most (1/2) * (4 a (1-a))^(l/2), for odd l."""
    if not (0.0 < a < 1.0):
        raise DomainError(f"per-run failure level must lie in (0, 1), got {a!r}")
    if not (isinstance(l, (int, np.integer)) and l >= 1):
        raise DomainError(f"replicate count must be a positive integer, got {l!r}")
    if l % 2 == 0:
        raise DomainError(f"replicate count must be odd, got {l}")
    return 0.5 * (4.0 * a * (1.0 - a)) ** (l / 2.0)


def c1_constant(a_star: float = A_STAR) -> float:
    """Per-run budget multiplier 1/a_star."""
    if not (0.0 < a_star < 0.5):
        raise DomainError(f"a_star must lie in (0, 1/2), got {a_star!r}")
    return 1.0 / a_star


def c2_constant(a_star: float = A_STAR) -> float:
    """Replicate multiplier: smallest c with chernoff_failure(a, c*ln(1/(2 alpha)))
    <= alpha asymptotically; equals 2/ln(1/(4 a (1-a)))."""
    if not (0.0 < a_star < 0.5):
        raise DomainError(f"a_star must lie in (0, 1/2), got {a_star!r}")
    return 2.0 / math.log(1.0 / (4.0 * a_star * (1.0 - a_star)))


def cost_constant(a_star: float = A_STAR) -> float:
    """Overall cost multiplier C1*C2 (~19.34 at the default a_star)."""
    return c1_constant(a_star) * c2_constant(a_star)


@dataclass(frozen=True)
class Plan:
    """A sized median-of-means experiment for the sequential estimator.

    ``n`` is the per-run step budget, ``l`` the (odd) number of runs;
    ``expected_cost = l * (n + c0_bound)`` counts expected chain steps.
    ``l_asymptotic`` and ``asymptotic_cost`` carry the closed-form
    approximations for comparison; the integer fields are exact.
    """

    n: int
    l: int
    a_star: float
    expected_cost: float
    target_eps: float
    target_alpha: float
    sigma_as_bound: float
    c0_bound: float
    c1: float
    c2: float
    l_asymptotic: float
    asymptotic_cost: float

    def __post_init__(self):
        if self.l % 2 == 0 or self.l < 1:
            raise DomainError(f"replicate count must be a positive odd integer, got {self.l}")
        if self.n < 1:
            raise DomainError(f"per-run budget must be >= 1, got {self.n}")
        if chernoff_failure(self.a_star, self.l) > self.target_alpha:
            raise DomainError(
                f"plan is inconsistent: {self.l} runs at level {self.a_star} "
                f"miss alpha = {self.target_alpha}"
            )
        required = self.c1 * self.sigma_as_bound / self.target_eps**2 + self.c0_bound
        if self.n + 1e-9 < required:
            raise DomainError(
                f"plan is inconsistent: budget {self.n} is below the "
                f"sufficient size {required:.6g}"
            )


def smallest_odd_replicates(alpha: float, a_star: float = A_STAR) -> int:
    """Smallest odd l with chernoff_failure(a_star, l) <= alpha (boundary
    inclusive), found by direct search."""
    if not (0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 1/2), got {alpha!r}")
    if not (0.0 < a_star < 0.5):
        raise DomainError(f"a_star must lie in (0, 1/2), got {a_star!r}")
    l = 1
    while chernoff_failure(a_star, l) > alpha:
        l += 2
    return l


def make_plan(
    sigma_as_bound: float,
    c0_bound: float,
    eps: float,
    alpha: float,
    *,
    a_star: float = A_STAR,
) -> Plan:
    """Size (n, l) so the median of l budget-n sequential runs lands within
    eps of the target with probability at least 1 - alpha.

    ``sigma_as_bound`` and ``c0_bound`` must be valid upper bounds on the
    time-average variance and on sigma_tau_sq + m; the guarantee is only as
    good as they are.
    """
    if sigma_as_bound < 0.0 or c0_bound < 0.0:
        raise DomainError("variance and overshoot bounds must be nonnegative")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if not (0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 1/2), got {alpha!r}")
    c1 = c1_constant(a_star)
    c2 = c2_constant(a_star)
    n = max(1, math.ceil(c1 * sigma_as_bound / eps**2 + c0_bound))
    l = smallest_odd_replicates(alpha, a_star)
    log_term = math.log(1.0 / (2.0 * alpha))
    return Plan(
        n=n,
        l=l,
        a_star=a_star,
        expected_cost=l * (n + c0_bound),
        target_eps=float(eps),
        target_alpha=float(alpha),
        sigma_as_bound=float(sigma_as_bound),
        c0_bound=float(c0_bound),
        c1=c1,
        c2=c2,
        l_asymptotic=c2 * log_term,
        asymptotic_cost=c1 * c2 * sigma_as_bound / eps**2 * log_term,
    )


class MedianResult(NamedTuple):
    median: float
    runs: list[EstimateReport]
    total_steps: int


def _reg_seq_replicate(args) -> EstimateReport:
    model, fvals, n, mode_value, master_seed, replicate, backend, tour_cap = args
    rng = stream(master_seed, replicate, ROLE_TOURS)
    tours, _, _ = simulate_until(
        model, fvals, n, mode=mode_value, rng=rng, backend=backend, tour_cap=tour_cap
    )
    return estimate_reg_seq(tours, n)


def run_median(
    plan: Plan,
    model: SplitModel,
    f,
    master_seed: int,
    *,
    mode=SimulationMode.EXPLICIT,
    jobs: int = 1,
    replicate_offset: int = 0,
    backend=None,
    tour_cap: int = DEFAULT_TOUR_CAP,
) -> MedianResult:
    """Run the planned l sequential estimates and return their median.

    Replicate i draws from the stream keyed by
    ``(master_seed, replicate_offset + i, tours role)``, so the result is
    deterministic in ``master_seed`` and independent of ``jobs``; the run
    list is ordered by replicate index.
    """
    fvals = state_values(model, f)
    mode_value = as_mode(mode).value
    tasks = [
        (model, fvals, plan.n, mode_value, int(master_seed), replicate_offset + i,
         backend, tour_cap)
        for i in range(plan.l)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_reg_seq_replicate, tasks))
    else:
        runs = [_reg_seq_replicate(t) for t in tasks]
    values = [run.value for run in runs]
    return MedianResult(
        median=float(np.median(values)),
        runs=runs,
        total_steps=sum(run.samples_used for run in runs),
    )
