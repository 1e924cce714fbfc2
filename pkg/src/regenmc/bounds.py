"""Nonasymptotic error bounds for regenerative estimators.

Conventions used throughout (all per unit of mean tour length m):

* ``sigma_as_sq``  - time-average (CLT) variance of f,
* ``sigma_tau_sq`` - Var(tau) / m for the tour length tau,
* ``sigma_unb_sq`` - Var(block sum of f) / m,
* ``C0``           - sigma_tau_sq + m, the overshoot allowance of the
  budget-crossing stopping rule: E[total steps] <= n + C0.

Probability bounds are returned uncapped (they can exceed 1); planners work
with the uncapped values, and `BoundReport` carries both forms for display.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import DomainError, NegativeBoundComponent


@dataclass(frozen=True)
class TourMoments:
    """Moments of one regeneration tour, normalized by the mean length m.

    ``C0`` is derived as ``sigma_tau_sq + m`` exactly; passing an
    inconsistent value raises.
    """

    m: float
    sigma_tau_sq: float
    sigma_as_sq: float
    sigma_unb_sq: float
    rho_f1: float
    C0: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.m <= 0.0:
            raise DomainError(f"mean tour length must be positive, got {self.m!r}")
        if self.sigma_tau_sq < -1e-12 or self.sigma_as_sq < -1e-12:
            raise DomainError("variances must be nonnegative")
        derived = self.sigma_tau_sq + self.m
        if self.C0 is None:
            object.__setattr__(self, "C0", derived)
        elif self.C0 != derived:
            raise DomainError(
                f"C0 must equal sigma_tau_sq + m = {derived!r}, got {self.C0!r}"
            )

    @property
    def e_tau_sq(self) -> float:
        """Second moment of the tour length, m * sigma_tau_sq + m^2."""
        return self.m * self.sigma_tau_sq + self.m * self.m


@dataclass(frozen=True)
class DoeblinMoments:
    """Tour-length moments when the small set is the whole space.

    The tour length is then geometric(beta): m = 1/beta,
    sigma_tau_sq = (1-beta)/beta, C0 = 2/beta - 1.
    """

    m: float
    sigma_tau_sq: float
    C0: float


@dataclass(frozen=True)
class DriftParams:
    """Inputs to the drift-condition bounds.

    ``lam``/``K``: geometric drift coefficients (PV <= lam*V off the small
    set, PV <= K on it); ``beta``: minorization constant; ``pi_V`` and
    ``pi_sqrtV``: stationary integrals of V and sqrt(V); ``f_norm``: the
    sup of |f - pi(f)| / sqrt(V).
    """

    lam: float
    K: float
    beta: float
    pi_V: float
    pi_sqrtV: float
    f_norm: float

    def __post_init__(self):
        if not (0.0 < self.lam < 1.0):
            raise DomainError(f"lambda must lie in (0, 1), got {self.lam!r}")
        if self.K < 1.0:
            raise DomainError(f"K must be >= 1 (V >= 1 forces PV >= 1), got {self.K!r}")
        if not (0.0 < self.beta <= 1.0):
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        if self.pi_V < 1.0:
            raise DomainError(f"pi(V) must be >= 1 when V >= 1, got {self.pi_V!r}")
        if self.pi_sqrtV < 1.0:
            raise DomainError(f"pi(sqrt V) must be >= 1, got {self.pi_sqrtV!r}")
        if self.pi_sqrtV > math.sqrt(self.pi_V) * (1.0 + 1e-12):
            raise DomainError(
                "pi(sqrt V) cannot exceed sqrt(pi V) "
                f"(Jensen): {self.pi_sqrtV!r} > sqrt({self.pi_V!r})"
            )
        if self.f_norm < 0.0:
            raise DomainError("f_norm must be nonnegative")


@dataclass(frozen=True)
class DriftBoundSet:
    """Bounds derived from a drift condition."""

    sigma_as_bound: float
    c0_bound: float
    sigma_tau_bound: float
    m_lower: float


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound, for display and CSV output.

    ``value`` is uncapped; ``value_capped`` is min(value, 1) for
    probability-kind bounds and equals ``value`` otherwise.
    """

    name: str
    kind: str  # "probability" | "mse" | "count" | "variance" | "moment"
    value: float
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in {"probability", "mse", "count", "variance", "moment"}:
            raise DomainError(f"unknown bound kind {self.kind!r}")

    @property
    def value_capped(self) -> float:
        if self.kind == "probability":
            return min(self.value, 1.0)
        return self.value


# ----------------------------------------------------------------------
# Fixed-tour-count ratio estimator
# ----------------------------------------------------------------------


def reg_tail_bound(
    r: int, m: float, sigma_as_sq: float, sigma_tau_sq: float, eps: float, delta: float
) -> float:
    """Tail bound for the ratio estimator over r complete tours.

    Splits the deviation event at a denominator shortfall of relative size
    ``delta`` and applies Chebyshev to both pieces:

        P(|est - theta| > eps)
            <= (1/(r m)) * [ sigma_as_sq / (eps^2 (1-delta)^2)
                             + sigma_tau_sq / delta^2 ].

    Uncapped; may exceed 1 for small r.
    """
    _require_positive(r=r, m=m, eps=eps)
    _require_nonnegative(sigma_as_sq=sigma_as_sq, sigma_tau_sq=sigma_tau_sq)
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return (
        sigma_as_sq / (eps**2 * (1.0 - delta) ** 2) + sigma_tau_sq / delta**2
    ) / (r * m)


def optimal_delta(sigma_as_sq: float, sigma_tau_sq: float, eps: float) -> float:
    """The split point minimizing `reg_tail_bound` over delta.

    Minimizing A/(1-d)^2 + B/d^2 with A = sigma_as_sq/eps^2, B = sigma_tau_sq
    gives d* = B^{1/3} / (A^{1/3} + B^{1/3}), i.e.

        d* = sigma_tau^{2/3} / (sigma_as^{2/3} eps^{-2/3} + sigma_tau^{2/3}).

    Returns 0 when sigma_tau_sq == 0 (the degenerate-denominator edge, where
    the bound itself needs delta -> 0).
    """
    _require_positive(eps=eps)
    _require_nonnegative(sigma_as_sq=sigma_as_sq, sigma_tau_sq=sigma_tau_sq)
    if sigma_as_sq == 0.0 and sigma_tau_sq == 0.0:
        raise DomainError("at least one of the variances must be positive")
    a = (sigma_as_sq / eps**2) ** (1.0 / 3.0)
    b = sigma_tau_sq ** (1.0 / 3.0)
    return b / (a + b)


# ----------------------------------------------------------------------
# Known-m unbiased estimator and budget-crossing sequential estimator
# ----------------------------------------------------------------------


def unbiased_bounds(
    r: int, m: float, sigma_unb_sq: float, eps: float
) -> tuple[float, float]:
    """(MSE, tail) for the known-m estimator over r tours.

    MSE = sigma_unb_sq / (r m); the tail bound is Chebyshev at level eps.
    """
    _require_positive(r=r, m=m, eps=eps)
    _require_nonnegative(sigma_unb_sq=sigma_unb_sq)
    mse = sigma_unb_sq / (r * m)
    return mse, mse / eps**2


def regseq_bounds(
    n: int, sigma_as_sq: float, C0: float, eps: float
) -> tuple[float, float, float]:
    """(MSE, tail, expected total steps) for the budget-n sequential estimator.

    MSE <= (sigma_as_sq / n) * (1 + C0 / n); tail = MSE / eps^2; the chain
    runs for at most n + C0 steps in expectation (the overshoot past n is
    controlled by the mean-forward-recurrence bound E tau^2 / m).
    """
    _require_positive(n=n, eps=eps)
    _require_nonnegative(sigma_as_sq=sigma_as_sq, C0=C0)
    mse = (sigma_as_sq / n) * (1.0 + C0 / n)
    return mse, mse / eps**2, n + C0


# ----------------------------------------------------------------------
# Full-space small sets (Doeblin chains)
# ----------------------------------------------------------------------


def doeblin_moments(beta: float) -> DoeblinMoments:
    """Geometric tour-length moments when every state regenerates at rate beta."""
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    m = 1.0 / beta
    sigma_tau_sq = (1.0 - beta) / beta
    return DoeblinMoments(m=m, sigma_tau_sq=sigma_tau_sq, C0=sigma_tau_sq + m)


def doeblin_variance_bound(sigma_sq: float, beta: float, reversible: bool) -> float:
    """Bound sigma_as_sq by the stationary variance under full-space minorization.

    reversible=True:  sigma_sq * (2 - beta) / beta       (sharp for the
    two-state worked example, where it holds with equality);
    reversible=False: sigma_sq * (1 + 2 sqrt(1-beta) / (1 - sqrt(1-beta))).
    """
    _require_nonnegative(sigma_sq=sigma_sq)
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if reversible:
        return sigma_sq * (2.0 - beta) / beta
    root = math.sqrt(1.0 - beta)
    if root == 1.0:  # beta == 0 excluded by the domain check
        raise DomainError("beta must be positive")
    return sigma_sq * (1.0 + 2.0 * root / (1.0 - root))


def doeblin_variance_bound_loose(sigma_sq: float, beta: float) -> float:
    """Weaker closed form 4 sigma_sq / beta dominating the general bound."""
    _require_nonnegative(sigma_sq=sigma_sq)
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    return 4.0 * sigma_sq / beta


def m_lower_bound(beta: float) -> float:
    """Mean tour length is at least 1/beta (equality iff pi(J) = 1)."""
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    return 1.0 / beta


# ----------------------------------------------------------------------
# Drift-condition bounds
# ----------------------------------------------------------------------


def drift_bounds(p: DriftParams) -> DriftBoundSet:
    """Computable bounds from a geometric drift condition.

    With s = sqrt(lam), sK = sqrt(K):

        sigma_as_sq <= f_norm^2 * [ (1+s)/(1-s) * pi_V
                        + 2 (sK - s - beta (2 - s)) / (beta (1-s)) * pi_sqrtV ]
        C0          <= s/(1-s) * pi_sqrtV + (sK - s - beta)/(beta (1-s)) - 1
        sigma_tau_sq <= C0_bound - 1      (since m >= 1)
        m           >= 1/beta.

    A negative middle coefficient (sK - s - beta(2-s) < 0) signals
    inconsistent parameters; a NegativeBoundComponent warning is emitted and
    the formula is still evaluated as written.
    """
    s = math.sqrt(p.lam)
    sK = math.sqrt(p.K)
    coeff = sK - s - p.beta * (2.0 - s)
    if coeff < 0.0:
        warnings.warn(
            f"drift bound component sqrt(K) - sqrt(lam) - beta(2 - sqrt(lam)) "
            f"= {coeff:.6g} is negative; parameters are inconsistent",
            NegativeBoundComponent,
            stacklevel=2,
        )
    sigma_as_bound = p.f_norm**2 * (
        (1.0 + s) / (1.0 - s) * p.pi_V
        + 2.0 * coeff / (p.beta * (1.0 - s)) * p.pi_sqrtV
    )
    c0_bound = (
        s / (1.0 - s) * p.pi_sqrtV + (sK - s - p.beta) / (p.beta * (1.0 - s)) - 1.0
    )
    return DriftBoundSet(
        sigma_as_bound=sigma_as_bound,
        c0_bound=c0_bound,
        sigma_tau_bound=c0_bound - 1.0,
        m_lower=m_lower_bound(p.beta),
    )


# ----------------------------------------------------------------------
# Comparators: sup-norm exponential inequality and the CLT heuristic
# ----------------------------------------------------------------------


def klm_exponential_tail(n: int, f_sup: float, beta: float, eps: float) -> float:
    """Sup-norm exponential tail for a length-n time average under Doeblin mixing.

        P(|avg - theta| > eps) <= 2 exp{ -((n-1)/2) (2 beta eps / f_sup
                                           - 3/(n-1))^2 }

    valid (nonvacuous) only once 2 beta eps / f_sup > 3/(n-1); returns the
    vacuous constant 2.0 otherwise.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n!r}")
    _require_positive(f_sup=f_sup, eps=eps)
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    z = 2.0 * beta * eps / f_sup - 3.0 / (n - 1)
    if z <= 0.0:
        return 2.0
    return 2.0 * math.exp(-0.5 * (n - 1) * z * z)


def klm_sample_size(f_sup: float, beta: float, eps: float, alpha: float) -> int:
    """Smallest n with `klm_exponential_tail` <= alpha (doubling + bisection)."""
    _require_positive(f_sup=f_sup, eps=eps)
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    hi = 2
    while klm_exponential_tail(hi, f_sup, beta, eps) > alpha:
        hi *= 2
        if hi > 2**62:
            raise DomainError("no attainable sample size (eps too small?)")
    lo = max(2, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if klm_exponential_tail(mid, f_sup, beta, eps) <= alpha:
            hi = mid
        else:
            lo = mid + 1
    return hi


def klm_asymptotic_size(sigma_sq: float, beta: float, eps: float, alpha: float) -> float:
    """Leading-order size 2 sigma_sq/(beta^2 eps^2) * ln(2/alpha) of the
    exponential-inequality requirement, in its variance form (f_sup^2 >= 4
    sigma_sq for centered bounded f)."""
    _require_positive(eps=eps)
    _require_nonnegative(sigma_sq=sigma_sq)
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return 2.0 * sigma_sq / (beta**2 * eps**2) * math.log(2.0 / alpha)


def clt_sample_size(sigma_as_sq: float, eps: float, alpha: float) -> float:
    """Sample size suggested by the central limit heuristic (not a guarantee):

        n ~ (sigma_as_sq / eps^2) * z^2,   z = Phi^{-1}(1 - alpha/2).

    Returned as a real number; callers round as they see fit.
    """
    _require_positive(eps=eps)
    _require_nonnegative(sigma_as_sq=sigma_as_sq)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    z = normal_quantile(1.0 - alpha / 2.0)
    return sigma_as_sq / eps**2 * z * z


# Coefficients of the rational approximation to the standard normal quantile
# (P. Acklam's minimax fit; absolute error < 1.2e-9 over (0,1)).  One Newton
# step against the exact CDF (math.erfc) then drives the error below 1e-14,
# comfortably inside the documented 1e-8 accuracy, with no dependency beyond
# the standard library.
_ACKLAM_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_ACKLAM_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_ACKLAM_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_ACKLAM_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF, accurate to well below 1e-8."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low, p_high = 0.02425, 1.0 - 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    # One Newton refinement: Phi(x) - p has derivative phi(x).
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    x -= err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x


# ----------------------------------------------------------------------
# Aggregation for display
# ----------------------------------------------------------------------


def evaluate_bounds(
    moments: TourMoments,
    eps: float,
    *,
    r: int | None = None,
    n: int | None = None,
    delta: float | None = None,
) -> list[BoundReport]:
    """Evaluate every applicable bound for the given tour moments."""
    reports: list[BoundReport] = []
    if delta is None:
        delta = optimal_delta(moments.sigma_as_sq, moments.sigma_tau_sq, eps)
    if r is not None:
        if 0.0 < delta < 1.0:
            reports.append(
                BoundReport(
                    "reg_tail",
                    "probability",
                    reg_tail_bound(
                        r, moments.m, moments.sigma_as_sq, moments.sigma_tau_sq, eps, delta
                    ),
                    {"r": r, "eps": eps, "delta": delta},
                )
            )
        mse_u, tail_u = unbiased_bounds(r, moments.m, moments.sigma_unb_sq, eps)
        reports.append(BoundReport("unbiased_mse", "mse", mse_u, {"r": r}))
        reports.append(
            BoundReport("unbiased_tail", "probability", tail_u, {"r": r, "eps": eps})
        )
    if n is not None:
        mse_s, tail_s, expected_T = regseq_bounds(
            n, moments.sigma_as_sq, moments.C0, eps
        )
        reports.append(BoundReport("regseq_mse", "mse", mse_s, {"n": n}))
        reports.append(
            BoundReport("regseq_tail", "probability", tail_s, {"n": n, "eps": eps})
        )
        reports.append(BoundReport("regseq_expected_steps", "count", expected_T, {"n": n}))
    return reports


def _require_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value!r}")


def _require_nonnegative(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if value < 0:
            raise DomainError(f"{name} must be nonnegative, got {value!r}")
