"""Exact draws from the stationary law of full-space-minorized chains.

When the small set is the whole state space, the state occupied at the
step where a regeneration fires is distributed *exactly* according to the
stationary distribution, and the draws across tours are i.i.d.  The sample
mean of f over those draws then enjoys plain i.i.d. bounds:
MSE = Var_pi(f)/r and a Chebyshev tail.

This property is specific to full-space small sets; for a general small
set the pre-regeneration states are biased, so `perfect_samples` refuses
to run (`NotDoeblin`).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySampleList, NotDoeblin
from .estimators import EstimateReport, EstimatorKind
from .kernel import SplitModel
from .median_trick import (
    A_STAR,
    MedianResult,
    c1_constant,
    c2_constant,
    smallest_odd_replicates,
)
from .rng import ROLE_PERFECT, stream
from .simulate import DEFAULT_TOUR_CAP, SimulationMode, as_mode, simulate_tours


def perfect_samples_with_cost(
    model: SplitModel,
    r: int,
    rng=0,
    *,
    mode=SimulationMode.EXPLICIT,
    backend=None,
    tour_cap: int = DEFAULT_TOUR_CAP,
) -> tuple[np.ndarray, int]:
    """Like `perfect_samples`, additionally returning the chain steps spent.

    Each draw costs one full tour; the second element is the total number
    of transitions the underlying chain performed to produce the r draws.
    """
    if not model.is_doeblin:
        raise NotDoeblin(
            "exact stationary draws need the small set to cover every state; "
            "pre-regeneration states of a partial small set are biased"
        )
    if r < 1:
        raise DomainError(f"sample count must be >= 1, got {r!r}")
    gen = rng if isinstance(rng, np.random.Generator) else stream(int(rng), 0, ROLE_PERFECT)
    tours = simulate_tours(
        model,
        np.zeros(model.n_states),
        int(r),
        mode=mode,
        rng=gen,
        backend=backend,
        tour_cap=tour_cap,
    )
    return tours.last_states.copy(), tours.total_steps


def perfect_samples(
    model: SplitModel,
    r: int,
    rng=0,
    *,
    mode=SimulationMode.EXPLICIT,
    backend=None,
    tour_cap: int = DEFAULT_TOUR_CAP,
) -> np.ndarray:
    """r i.i.d. draws from the stationary distribution: the states at which
    the first r regenerations fire.

    Requires a full-space small set; an integer ``rng`` is treated as a
    master seed for the dedicated perfect-sampling stream role.
    """
    samples, _ = perfect_samples_with_cost(
        model, r, rng, mode=mode, backend=backend, tour_cap=tour_cap
    )
    return samples


def estimate_perfect(samples, f, *, sigma_sq: float | None = None) -> EstimateReport:
    """Sample mean of f over exact stationary draws.

    When the stationary variance of f is supplied, the report carries the
    i.i.d. MSE bound ``sigma_sq / r``.  ``samples_used`` counts draws (each
    draw consumed one tour of the underlying chain).
    """
    states = np.asarray(samples, dtype=np.int64)
    if states.ndim != 1:
        raise DomainError("samples must be a one-dimensional state sequence")
    r = int(states.size)
    if r == 0:
        raise EmptySampleList("perfect-sample mean needs at least one draw")
    if callable(f):
        table = np.array(
            [float(f(x)) for x in range(int(states.max()) + 1)], dtype=np.float64
        )
    else:
        table = np.asarray(f, dtype=np.float64)
        if int(states.max()) >= table.shape[0]:
            raise DomainError("f table is shorter than the sampled state range")
    mse_bound = None
    if sigma_sq is not None:
        if sigma_sq < 0.0:
            raise DomainError(f"sigma_sq must be nonnegative, got {sigma_sq!r}")
        mse_bound = float(sigma_sq) / r
    return EstimateReport(
        kind=EstimatorKind.PERFECT,
        value=float(table[states].mean()),
        tours_used=r,
        samples_used=r,
        mse_bound=mse_bound,
    )


@dataclass(frozen=True)
class PerfectPlan:
    """Median-of-means sizing for the perfect-sample mean.

    ``r`` draws per run and ``l`` runs; each draw costs one tour, i.e.
    ``1/beta`` chain steps in expectation, so
    ``expected_cost = l * r / beta`` chain steps.
    """

    r: int
    l: int
    a_star: float
    beta: float
    expected_cost: float
    expected_samples: int
    target_eps: float
    target_alpha: float
    sigma_sq_bound: float
    asymptotic_cost: float

    def __post_init__(self):
        if self.l % 2 == 0 or self.l < 1:
            raise DomainError(f"replicate count must be a positive odd integer, got {self.l}")
        if self.r < 1:
            raise DomainError(f"per-run draw count must be >= 1, got {self.r}")


def perfect_plan(
    sigma_sq_bound: float,
    beta: float,
    eps: float,
    alpha: float,
    *,
    a_star: float = A_STAR,
) -> PerfectPlan:
    """Size (r, l) so the median of l perfect-sample means lands within eps
    with probability at least 1 - alpha, given Var_pi(f) <= sigma_sq_bound."""
    if sigma_sq_bound < 0.0:
        raise DomainError("variance bound must be nonnegative")
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    c1 = c1_constant(a_star)
    c2 = c2_constant(a_star)
    r = max(1, math.ceil(c1 * sigma_sq_bound / eps**2))
    l = smallest_odd_replicates(alpha, a_star)
    log_term = math.log(1.0 / (2.0 * alpha))
    return PerfectPlan(
        r=r,
        l=l,
        a_star=a_star,
        beta=float(beta),
        expected_cost=l * r / beta,
        expected_samples=l * r,
        target_eps=float(eps),
        target_alpha=float(alpha),
        sigma_sq_bound=float(sigma_sq_bound),
        asymptotic_cost=c1 * c2 * sigma_sq_bound / (beta * eps**2) * log_term,
    )


def _perfect_replicate(args) -> tuple[EstimateReport, int]:
    """One run: r draws and their mean; returns (report, chain steps spent)."""
    model, table, r, mode_value, master_seed, replicate, backend, tour_cap = args
    rng = stream(master_seed, replicate, ROLE_PERFECT)
    samples, steps = perfect_samples_with_cost(
        model, r, rng, mode=mode_value, backend=backend, tour_cap=tour_cap
    )
    report = EstimateReport(
        kind=EstimatorKind.PERFECT,
        value=float(table[samples].mean()),
        tours_used=r,
        samples_used=r,
    )
    return report, steps


def run_median_perfect(
    plan: PerfectPlan,
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
    """Median of l independent perfect-sample means, deterministic in the
    master seed and independent of ``jobs``."""
    if not model.is_doeblin:
        raise NotDoeblin("median of perfect-sample means needs a full-space small set")
    if callable(f):
        table = np.array([float(f(x)) for x in range(model.n_states)], dtype=np.float64)
    else:
        table = np.asarray(f, dtype=np.float64)
        if table.shape != (model.n_states,):
            raise DomainError(f"f must have shape ({model.n_states},)")
    mode_value = as_mode(mode).value
    tasks = [
        (model, table, plan.r, mode_value, int(master_seed), replicate_offset + i,
         backend, tour_cap)
        for i in range(plan.l)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_perfect_replicate, tasks))
    else:
        outcomes = [_perfect_replicate(t) for t in tasks]
    runs = [report for report, _ in outcomes]
    values = [run.value for run in runs]
    return MedianResult(
        median=float(np.median(values)),
        runs=runs,
        total_steps=sum(steps for _, steps in outcomes),
    )
