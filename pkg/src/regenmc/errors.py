"""Exception and warning types raised across the package."""

from __future__ import annotations


class RegenError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RegenError, ValueError):
    """A scalar parameter is outside its documented domain."""


class InvalidStochasticMatrix(RegenError):
    """A matrix fails row-stochasticity (shape, negativity, or row sums)."""


class MinorizationViolated(RegenError):
    """P(x, .) >= beta * nu(.) fails on the small set.

    Carries the worst offending pair and its deficit max(beta*nu[y] - P[x,y]).
    """

    def __init__(self, state: int, target: int, deficit: float):
        self.state = int(state)
        self.target = int(target)
        self.deficit = float(deficit)
        super().__init__(
            f"minorization fails at (x={self.state}, y={self.target}): "
            f"beta*nu[y] exceeds P[x,y] by {self.deficit:.3e}"
        )


class DensityRatioUndefined(RegenError):
    """The retrospective regeneration ratio hit P[prev, next] = 0.

    Unreachable when `next` was actually sampled from P[prev, .]; kept as an
    internal assertion for misuse of the step function.
    """


class TourLengthOverflow(RegenError):
    """A single tour exceeded the configured length cap."""


class InsufficientTrajectory(RegenError):
    """The trajectory is shorter than the requested averaging window."""


class EmptyTourList(RegenError):
    """An estimator was handed zero tours."""


class EmptySampleList(RegenError):
    """An estimator was handed zero samples."""


class NonpositiveM(RegenError):
    """The known mean tour length must be positive."""


class StoppingRuleViolated(RegenError):
    """Tour list is inconsistent with the budget-crossing stopping rule."""


class NotIrreducible(RegenError):
    """The kernel's transition graph is not strongly connected."""


class Periodic(RegenError):
    """The kernel is periodic; the requested quantity needs aperiodicity."""


class SingularSystem(RegenError):
    """A linear system that should be nonsingular failed to solve."""


class VNotBoundedBelowByOne(RegenError):
    """A drift function must satisfy V(x) >= 1 everywhere."""


class DriftNotSatisfied(RegenError):
    """No valid geometric-drift coefficient lambda < 1 exists off the small set."""

    def __init__(self, lambda_hat: float, message: str | None = None):
        self.lambda_hat = float(lambda_hat)
        super().__init__(
            message
            or f"drift condition fails: tightest lambda is {self.lambda_hat:g} >= 1"
        )


class UnsupportedTarget(RegenError):
    """The sampler construction cannot handle this target/proposal pair."""


class NotDoeblin(RegenError):
    """The operation needs a full-space small set (J = whole state space)."""


class NegativeBoundComponent(UserWarning):
    """A drift-based bound component went negative: parameters inconsistent."""


class StatedRangeWarning(UserWarning):
    """A parameter is outside the range the construction was designed for."""
