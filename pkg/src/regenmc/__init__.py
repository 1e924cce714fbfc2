"""Regenerative Monte Carlo on finite-state Markov chains.

Simulation of split chains over a small set, estimators built from
independent tours, nonasymptotic error bounds, median-of-means planning,
and exact finite-state oracles to verify all of it.

Quick start::

    from regenmc import zoo, simulate_tours, estimate_reg, evaluate_bounds, oracle

    zm = zoo.two_state_example(0.5)
    tours = simulate_tours(zm.model, zm.f, 1000, rng=42)
    print(estimate_reg(tours).value)
    print(evaluate_bounds(oracle.tour_moments_exact(zm.model, zm.f), 0.1, r=1000))
"""

__version__ = "0.1.0"

from . import oracle, verify, zoo
from .bounds import (
    BoundReport,
    DoeblinMoments,
    DriftBoundSet,
    DriftParams,
    TourMoments,
    clt_sample_size,
    doeblin_moments,
    doeblin_variance_bound,
    doeblin_variance_bound_loose,
    drift_bounds,
    evaluate_bounds,
    klm_asymptotic_size,
    klm_exponential_tail,
    klm_sample_size,
    m_lower_bound,
    normal_quantile,
    optimal_delta,
    reg_tail_bound,
    regseq_bounds,
    unbiased_bounds,
)
from .errors import (
    DomainError,
    DriftNotSatisfied,
    EmptySampleList,
    EmptyTourList,
    InsufficientTrajectory,
    InvalidStochasticMatrix,
    MinorizationViolated,
    NotDoeblin,
    NotIrreducible,
    Periodic,
    RegenError,
    TourLengthOverflow,
    VNotBoundedBelowByOne,
)
from .estimators import (
    EstimateReport,
    EstimatorKind,
    estimate_fixed,
    estimate_reg,
    estimate_reg_seq,
    estimate_unbiased,
)
from .kernel import (
    FiniteKernel,
    SmallSetSpec,
    SplitModel,
    build_split_model,
    load_kernel_file,
)
from .median_trick import (
    A_STAR,
    MedianResult,
    Plan,
    chernoff_failure,
    make_plan,
    run_median,
    smallest_odd_replicates,
)
from .perfect import (
    PerfectPlan,
    estimate_perfect,
    perfect_plan,
    perfect_samples,
    perfect_samples_with_cost,
    run_median_perfect,
)
from .rng import stream
from .simulate import (
    SimulationMode,
    Tour,
    Tours,
    available_backends,
    burn_to_regeneration,
    default_backend,
    retrospective_regen_prob,
    simulate_tours,
    simulate_trajectory,
    simulate_until,
    state_values,
    step_explicit,
    step_mykland,
)

__all__ = [
    "__version__",
    # subpackages kept as namespaces
    "oracle",
    "verify",
    "zoo",
    # kernels and split models
    "FiniteKernel",
    "SmallSetSpec",
    "SplitModel",
    "build_split_model",
    "load_kernel_file",
    # simulation
    "SimulationMode",
    "Tour",
    "Tours",
    "available_backends",
    "default_backend",
    "simulate_tours",
    "simulate_until",
    "simulate_trajectory",
    "step_explicit",
    "step_mykland",
    "retrospective_regen_prob",
    "burn_to_regeneration",
    "state_values",
    "stream",
    # estimators
    "EstimatorKind",
    "EstimateReport",
    "estimate_fixed",
    "estimate_reg",
    "estimate_unbiased",
    "estimate_reg_seq",
    # bounds
    "TourMoments",
    "DoeblinMoments",
    "DriftParams",
    "DriftBoundSet",
    "BoundReport",
    "reg_tail_bound",
    "optimal_delta",
    "unbiased_bounds",
    "regseq_bounds",
    "doeblin_moments",
    "doeblin_variance_bound",
    "doeblin_variance_bound_loose",
    "m_lower_bound",
    "drift_bounds",
    "klm_exponential_tail",
    "klm_sample_size",
    "klm_asymptotic_size",
    "clt_sample_size",
    "normal_quantile",
    "evaluate_bounds",
    # planning
    "A_STAR",
    "Plan",
    "MedianResult",
    "chernoff_failure",
    "smallest_odd_replicates",
    "make_plan",
    "run_median",
    # perfect sampling
    "PerfectPlan",
    "perfect_samples",
    "perfect_samples_with_cost",
    "estimate_perfect",
    "perfect_plan",
    "run_median_perfect",
    # errors
    "RegenError",
    "DomainError",
    "InvalidStochasticMatrix",
    "MinorizationViolated",
    "TourLengthOverflow",
    "InsufficientTrajectory",
    "EmptyTourList",
    "EmptySampleList",
    "NotIrreducible",
    "Periodic",
    "VNotBoundedBelowByOne",
    "DriftNotSatisfied",
    "NotDoeblin",
]
