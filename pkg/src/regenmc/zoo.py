"""Ready-made split models with known ground truth.

Three families, addressable by name (used by the CLI):

* ``two-state``  - symmetric two-state chain with a full-space small set;
  every tour quantity has a closed form, making it the workhorse of the
  statistical validation suites.
* ``imh``        - finite independence Metropolis-Hastings sampler; the
  proposal/target density ratio gives a full-space minorization, and the
  kernel is reversible by construction.
* ``drift-bd``   - reflecting birth-death chain with a geometric drift
  function and a singleton small set at the bottom; exercises the
  drift-condition bounds with hand-checkable coefficients.

``file:<path>`` loads a kernel plus split spec from a plain-text file.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, DriftNotSatisfied, StatedRangeWarning, UnsupportedTarget
from .kernel import FiniteKernel, SmallSetSpec, SplitModel, build_split_model, load_kernel_file
from .oracle import drift_inputs_exact

ZOO_NAMES = ("two-state", "imh", "drift-bd")


@dataclass(frozen=True)
class ZooModel:
    """A split model bundled with its canonical test function.

    ``V`` is the drift function when the family has one, else None.
    """

    name: str
    model: SplitModel
    f: np.ndarray
    description: str
    V: np.ndarray | None = None


def two_state_example(beta: float = 0.5) -> ZooModel:
    """Symmetric two-state chain: stay with probability 1 - beta/2, flip
    otherwise; full-space small set with the uniform regeneration measure.

    The residual kernel is the identity (the chain holds still between
    regenerations), tours are geometric(beta), and with f(x) = x:

        theta = 1/2,  sigma_sq = 1/4,
        sigma_as_sq  = (2 - beta)/beta * sigma_sq,
        sigma_unb_sq = (3 - 2 beta)/beta * sigma_sq.

    Designed for beta <= 1/2 (regeneration at least as rare as movement);
    larger values still build but carry a StatedRangeWarning.
    """
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if beta > 0.5:
        warnings.warn(
            f"two-state family is designed for beta <= 0.5, got {beta:g}; "
            "closed forms still hold but the regime is unusual",
            StatedRangeWarning,
            stacklevel=2,
        )
    half = beta / 2.0
    P = np.array([[1.0 - half, half], [half, 1.0 - half]])
    spec = SmallSetSpec(J=np.ones(2, dtype=bool), beta=beta, nu=np.array([0.5, 0.5]))
    model = build_split_model(FiniteKernel(P), spec)
    return ZooModel(
        name="two-state",
        model=model,
        f=np.array([0.0, 1.0]),
        description=f"symmetric two-state chain, beta={beta:g}, f(x)=x",
    )


def independence_mh(target=None, proposal=None) -> ZooModel:
    """Finite independence Metropolis-Hastings sampler.

    Proposals are drawn from a fixed distribution q regardless of the
    current state and accepted with probability
    min(1, target(y) q(x) / (target(x) q(y))).  The resulting kernel is
    reversible with stationary law = target, and satisfies the full-space
    minorization P(x, .) >= beta * target(.) with
    beta = min_x q(x)/target(x).

    Defaults: 10 states, target proportional to 0.6^x, uniform proposal;
    f = indicator of the target's mode.
    """
    if target is None:
        target = 0.6 ** np.arange(10, dtype=np.float64)
    if proposal is None:
        proposal = np.ones(np.asarray(target).shape[0], dtype=np.float64)
    pi = np.asarray(target, dtype=np.float64)
    q = np.asarray(proposal, dtype=np.float64)
    if pi.ndim != 1 or pi.shape != q.shape:
        raise UnsupportedTarget("target and proposal must be equal-length vectors")
    if pi.shape[0] < 2:
        raise UnsupportedTarget("need at least two states")
    if pi.min() <= 0.0:
        raise UnsupportedTarget(
            "target must be strictly positive everywhere (zero-mass states "
            "break the stationary-law and minorization guarantees)"
        )
    if q.min() <= 0.0:
        raise UnsupportedTarget("proposal must be strictly positive on the support")
    pi = pi / pi.sum()
    q = q / q.sum()
    S = pi.shape[0]

    # off-diagonal: propose y, accept with the detailed-balance ratio;
    # K(x, y) = min(q(y), pi(y) q(x) / pi(x))
    K = np.minimum(q[None, :], pi[None, :] * (q / pi)[:, None])
    np.fill_diagonal(K, 0.0)
    np.fill_diagonal(K, 1.0 - K.sum(axis=1))

    beta = float((q / pi).min())
    spec = SmallSetSpec(J=np.ones(S, dtype=bool), beta=beta, nu=pi)
    model = build_split_model(FiniteKernel(K), spec)
    f = np.zeros(S)
    f[int(np.argmax(pi))] = 1.0
    return ZooModel(
        name="imh",
        model=model,
        f=f,
        description=(
            f"independence Metropolis-Hastings on {S} states, beta={beta:g}, "
            "f = mode indicator"
        ),
    )


def drift_chain(size: int = 30, up: float = 0.3, v: float = 2.0, beta: float = 0.1) -> ZooModel:
    """Reflecting birth-death chain with geometric drift toward state 0.

    From any interior state, step up with probability ``up`` and down
    otherwise; the boundary states hold in place instead of leaving the
    space.  The small set is the singleton {0} with regeneration measure
    concentrated at 0 (valid whenever beta <= P(0,0) = 1 - up).

    The drift function V(x) = v**x certifies geometric ergodicity: the
    tightest contraction coefficient off the small set is
    ``up*v + (1-up)/v`` (attained at interior states), so the construction
    requires it below 1 and raises DriftNotSatisfied otherwise.  The
    canonical test function is f(x) = x / sqrt(V(x)), which has finite
    drift norm by construction.
    """
    if not (isinstance(size, (int, np.integer)) and size >= 3):
        raise DomainError(f"size must be an integer >= 3, got {size!r}")
    if not (0.0 < up < 1.0):
        raise DomainError(f"up must lie in (0, 1), got {up!r}")
    if v < 1.0:
        raise DomainError(f"v must be >= 1 (V = v**x must stay >= 1), got {v!r}")
    if not (0.0 < beta <= 1.0 - up):
        raise DomainError(
            f"beta must lie in (0, 1 - up] = (0, {1.0 - up:g}] so the "
            f"regeneration measure at 0 is minorized, got {beta!r}"
        )
    S = int(size)
    P = np.zeros((S, S))
    P[0, 0] = 1.0 - up
    P[0, 1] = up
    for x in range(1, S - 1):
        P[x, x - 1] = 1.0 - up
        P[x, x + 1] = up
    P[S - 1, S - 2] = 1.0 - up
    P[S - 1, S - 1] = up

    nu = np.zeros(S)
    nu[0] = 1.0
    spec = SmallSetSpec.from_indices([0], beta, nu)
    model = build_split_model(FiniteKernel(P), spec)

    V = np.power(float(v), np.arange(S, dtype=np.float64))
    inputs = drift_inputs_exact(model, V)
    if inputs.lambda_hat >= 1.0:
        raise DriftNotSatisfied(inputs.lambda_hat)
    f = np.arange(S, dtype=np.float64) / np.sqrt(V)
    return ZooModel(
        name="drift-bd",
        model=model,
        f=f,
        description=(
            f"reflecting birth-death chain on {S} states, up={up:g}, "
            f"V(x)={v:g}**x, small set {{0}}, beta={beta:g}, f(x)=x/sqrt(V)"
        ),
        V=V,
    )


def from_file(path) -> ZooModel:
    """Load a kernel file carrying a complete split spec; f(x) = x."""
    kernel, spec = load_kernel_file(path)
    if spec is None:
        raise DomainError(
            f"{path}: kernel file must include the J:/beta:/nu: trailer lines "
            "to be usable as a split model"
        )
    model = build_split_model(kernel, spec)
    return ZooModel(
        name=f"file:{path}",
        model=model,
        f=np.arange(kernel.n_states, dtype=np.float64),
        description=f"kernel loaded from {path}, f(x)=x",
    )


def by_name(name: str, **kwargs) -> ZooModel:
    """Build a zoo model from its CLI name.

    ``two-state`` takes ``beta``; ``drift-bd`` takes ``size``/``up``/``v``/
    ``beta``; ``imh`` takes ``target``/``proposal``; ``file:<path>`` takes
    no parameters.
    """
    if name.startswith("file:"):
        if kwargs:
            raise DomainError("file models take no construction parameters")
        return from_file(name[len("file:") :])
    builders = {
        "two-state": two_state_example,
        "imh": independence_mh,
        "drift-bd": drift_chain,
    }
    if name not in builders:
        raise DomainError(
            f"unknown model {name!r}; expected one of {', '.join(ZOO_NAMES)} "
            "or file:<path>"
        )
    return builders[name](**kwargs)


def standard_zoo() -> list[ZooModel]:
    """The default verification fleet: one representative per family."""
    return [two_state_example(0.5), independence_mh(), drift_chain()]
