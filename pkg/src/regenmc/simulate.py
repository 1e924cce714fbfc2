"""Simulation of regenerative tours and plain trajectories.

Two interchangeable backends produce bit-identical output: a compiled
extension (`regenmc._tour_kernel`) and a pure-Python fallback
(`regenmc._pysim`).  The compiled one is used when importable; set the
environment variable ``REGENMC_BACKEND`` to ``python`` or ``compiled`` to
force a choice, or pass ``backend=`` per call.

A *tour* is a maximal segment between regenerations of the split chain.
The first tour starts from a fresh draw of the regeneration measure, so
tours are independent and identically distributed.  `simulate_tours`
collects a fixed number of them; `simulate_until` stops at the first tour
whose end strictly exceeds a step budget.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from . import _pysim
from .errors import DensityRatioUndefined, DomainError, TourLengthOverflow
from .kernel import FiniteKernel, SplitModel
from .rng import ROLE_TOURS, ROLE_TRAJECTORY, stream

try:
    from . import _tour_kernel as _compiled
except ImportError:  # extension not built; fall back to pure Python
    _compiled = None

BACKEND_ENV = "REGENMC_BACKEND"
DEFAULT_TOUR_CAP = 10**9


class SimulationMode(Enum):
    """How regenerations are identified while stepping the split chain.

    EXPLICIT flips the regeneration coin *before* moving: inside the small
    set, with probability beta the next state is drawn from the
    regeneration measure, otherwise from the residual kernel.  MYKLAND
    draws the next state from the original kernel and flags the step as a
    regeneration retrospectively with probability
    ``beta * nu(next) / P(current, next)``.  Both produce the same law for
    the tours.
    """

    EXPLICIT = "explicit"
    MYKLAND = "mykland"


_MODE_CODE = {
    SimulationMode.EXPLICIT: _pysim._EXPLICIT,
    SimulationMode.MYKLAND: _pysim._RETRO,
}


def as_mode(mode) -> SimulationMode:
    if isinstance(mode, SimulationMode):
        return mode
    try:
        return SimulationMode(str(mode).strip().lower())
    except ValueError:
        valid = ", ".join(m.value for m in SimulationMode)
        raise DomainError(f"unknown simulation mode {mode!r}; expected one of: {valid}") from None


# ----------------------------------------------------------------------
# backend selection
# ----------------------------------------------------------------------


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _compiled is not None else ("python",)


def _check_backend(name) -> str:
    low = str(name).strip().lower()
    if low not in ("python", "compiled"):
        raise DomainError(f"unknown backend {name!r}; expected 'python' or 'compiled'")
    if low == "compiled" and _compiled is None:
        raise DomainError("compiled backend requested but the extension is not available")
    return low


def default_backend() -> str:
    env = os.environ.get(BACKEND_ENV)
    if env:
        return _check_backend(env)
    return "compiled" if _compiled is not None else "python"


def _resolve_backend(backend) -> str:
    return default_backend() if backend is None else _check_backend(backend)


# ----------------------------------------------------------------------
# inputs
# ----------------------------------------------------------------------


def state_values(model, f) -> np.ndarray:
    """Normalize a test function to a float vector over states.

    `f` may be a callable on state indices or an array of length S.
    """
    kernel = model.kernel if isinstance(model, SplitModel) else model
    S = kernel.n_states
    if callable(f):
        vals = np.array([float(f(x)) for x in range(S)], dtype=np.float64)
    else:
        vals = np.ascontiguousarray(f, dtype=np.float64)
        if vals.shape != (S,):
            raise DomainError(f"f must have shape ({S},), got {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise DomainError("f must be finite on every state")
    return vals


def _as_generator(rng, role: int) -> np.random.Generator:
    """Accept a Generator as-is, or treat an integer as a master seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(int(rng), 0, role)


# ----------------------------------------------------------------------
# tour containers
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Tour:
    """One completed tour: the sum of f over it, its length, and the state
    occupied when the regeneration fired."""

    block_sum: float
    length: int
    last_state: int


class Tours:
    """A batch of completed tours stored as parallel arrays."""

    __slots__ = ("block_sums", "lengths", "last_states")

    def __init__(self, block_sums, lengths, last_states):
        bs = np.asarray(block_sums, dtype=np.float64)
        ln = np.asarray(lengths, dtype=np.int64)
        st = np.asarray(last_states, dtype=np.int64)
        if bs.ndim != 1 or bs.shape != ln.shape or bs.shape != st.shape:
            raise DomainError("tour arrays must be one-dimensional and equally long")
        if ln.size and int(ln.min()) < 1:
            raise DomainError("tour lengths must be positive")
        self.block_sums = bs
        self.lengths = ln
        self.last_states = st

    def __len__(self) -> int:
        return int(self.block_sums.shape[0])

    def __iter__(self) -> Iterator[Tour]:
        for b, l, s in zip(self.block_sums, self.lengths, self.last_states):
            yield Tour(float(b), int(l), int(s))

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Tours(self.block_sums[idx], self.lengths[idx], self.last_states[idx])
        i = int(idx)
        return Tour(float(self.block_sums[i]), int(self.lengths[i]), int(self.last_states[i]))

    def __repr__(self) -> str:
        return f"Tours(n={len(self)}, total_steps={self.total_steps})"

    @property
    def n_tours(self) -> int:
        return len(self)

    @property
    def total_steps(self) -> int:
        return int(self.lengths.sum())


# ----------------------------------------------------------------------
# bulk simulation
# ----------------------------------------------------------------------


def _run_compiled(model: SplitModel, fvals, code, gen, count, budget, tour_cap):
    return _compiled.run_tours(
        gen,
        model.cum_nu,
        model.cum_p,
        model.cum_q,
        np.ascontiguousarray(model.P),
        np.ascontiguousarray(model.nu),
        np.ascontiguousarray(model.in_J).view(np.uint8),
        model.beta,
        fvals,
        code,
        count,
        budget,
        tour_cap,
    )


def simulate_tours(
    model: SplitModel,
    f,
    count: int,
    *,
    mode=SimulationMode.EXPLICIT,
    rng=0,
    tour_cap: int = DEFAULT_TOUR_CAP,
    backend=None,
) -> Tours:
    """Simulate exactly `count` i.i.d. tours starting from a fresh draw of
    the regeneration measure."""
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    fvals = state_values(model, f)
    gen = _as_generator(rng, ROLE_TOURS)
    code = _MODE_CODE[as_mode(mode)]
    name = _resolve_backend(backend)
    if name == "compiled":
        xi, tau, last = _run_compiled(model, fvals, code, gen, count, -1, int(tour_cap))
    else:
        xi, tau, last = _pysim.run_tours(
            model, fvals, code, gen, count=count, budget=-1, tour_cap=int(tour_cap)
        )
    return Tours(xi, tau, last)


def simulate_until(
    model: SplitModel,
    f,
    budget: int,
    *,
    mode=SimulationMode.EXPLICIT,
    rng=0,
    tour_cap: int = DEFAULT_TOUR_CAP,
    backend=None,
) -> tuple[Tours, int, int]:
    """Simulate whole tours until the cumulative length first exceeds
    `budget`; the crossing tour is completed and kept.

    Returns ``(tours, n_tours, total_steps)`` where ``n_tours`` is the
    number of completed tours (the stopping count) and
    ``total_steps > budget`` is the realized chain length.
    """
    budget = int(budget)
    if budget < 0:
        raise DomainError(f"budget must be nonnegative, got {budget}")
    fvals = state_values(model, f)
    gen = _as_generator(rng, ROLE_TOURS)
    code = _MODE_CODE[as_mode(mode)]
    name = _resolve_backend(backend)
    if name == "compiled":
        xi, tau, last = _run_compiled(model, fvals, code, gen, 0, budget, int(tour_cap))
    else:
        xi, tau, last = _pysim.run_tours(
            model, fvals, code, gen, count=0, budget=budget, tour_cap=int(tour_cap)
        )
    tours = Tours(xi, tau, last)
    return tours, len(tours), tours.total_steps


def simulate_trajectory(
    model,
    steps: int,
    *,
    rng=0,
    init=None,
    backend=None,
) -> np.ndarray:
    """Simulate `steps` states of the plain (unsplit) chain.

    `model` may be a `SplitModel` or a bare `FiniteKernel`.  `init` is a
    state index or a probability vector; a `SplitModel` defaults to its
    regeneration measure, a bare kernel requires `init`.
    """
    if isinstance(model, SplitModel):
        kernel = model.kernel
        cum_p = model.cum_p
        default_dist = model.nu
    elif isinstance(model, FiniteKernel):
        kernel = model
        cum_p = np.cumsum(kernel.P, axis=1)
        default_dist = None
    else:
        raise DomainError("model must be a SplitModel or FiniteKernel")
    S = kernel.n_states
    steps = int(steps)
    if steps < 0:
        raise DomainError(f"steps must be nonnegative, got {steps}")

    init_state = -1
    dist = None
    if init is None:
        if default_dist is None:
            raise DomainError("init is required when simulating from a bare kernel")
        dist = default_dist
    elif np.ndim(init) == 0:
        init_state = int(init)
        if not 0 <= init_state < S:
            raise DomainError(f"init state {init_state} out of range [0, {S})")
    else:
        dist = np.asarray(init, dtype=np.float64)
        if dist.shape != (S,):
            raise DomainError(f"init distribution must have shape ({S},)")
        if dist.min() < 0 or abs(float(dist.sum()) - 1.0) > 1e-12:
            raise DomainError("init distribution must be a probability vector")

    cum_init = None if dist is None else np.ascontiguousarray(np.cumsum(dist))
    gen = _as_generator(rng, ROLE_TRAJECTORY)
    name = _resolve_backend(backend)
    if name == "compiled":
        return _compiled.run_trajectory(
            gen, np.ascontiguousarray(cum_p), steps, cum_init, init_state
        )
    rows = [row.tolist() for row in cum_p]
    ci = None if cum_init is None else cum_init.tolist()
    return _pysim.run_trajectory(rows, S, steps, gen, cum_init=ci, init_state=init_state)


# ----------------------------------------------------------------------
# single steps (for inspection and burn-in; these draw scalar uniforms
# straight from the generator, so their streams are not interchangeable
# with the block-buffered bulk runs)
# ----------------------------------------------------------------------


def _pick_row(cum_row: np.ndarray, u: float) -> int:
    i = int(np.searchsorted(cum_row, u, side="right"))
    return i if i < cum_row.shape[0] else cum_row.shape[0] - 1


def step_explicit(model: SplitModel, x: int, rng: np.random.Generator) -> tuple[int, bool]:
    """One split-chain transition with the regeneration coin flipped first.

    Returns ``(next_state, regenerated)``; on regeneration the next state
    is a fresh draw from the regeneration measure.
    """
    x = int(x)
    if model.in_J[x]:
        if rng.random() < model.beta:
            return _pick_row(model.cum_nu, rng.random()), True
        return _pick_row(model.cum_q[x], rng.random()), False
    return _pick_row(model.cum_q[x], rng.random()), False


def step_mykland(model: SplitModel, x: int, rng: np.random.Generator) -> tuple[int, bool]:
    """One transition of the original kernel with the regeneration flag
    filled in retrospectively from the realized move."""
    x = int(x)
    y = _pick_row(model.cum_p[x], rng.random())
    if model.in_J[x]:
        accept = model.beta * model.nu[y] / model.P[x, y]
        return y, bool(rng.random() < accept)
    return y, False


def retrospective_regen_prob(model: SplitModel, prev_state: int, next_state: int) -> float:
    """Conditional probability that a realized move ``prev -> next`` is
    flagged as a regeneration under the retrospective rule."""
    x, y = int(prev_state), int(next_state)
    S = model.n_states
    if not (0 <= x < S and 0 <= y < S):
        raise DomainError("state index out of range")
    if not model.in_J[x]:
        return 0.0
    p = float(model.P[x, y])
    if p <= 0.0:
        raise DensityRatioUndefined(
            f"transition {x} -> {y} has probability 0; the retrospective "
            "regeneration probability conditions on it occurring"
        )
    return float(model.beta) * float(model.nu[y]) / p


def burn_to_regeneration(
    model: SplitModel,
    start: int,
    *,
    mode=SimulationMode.EXPLICIT,
    rng=0,
    cap: int = DEFAULT_TOUR_CAP,
) -> tuple[int, int]:
    """Step from `start` until the first regeneration.

    Returns ``(steps_taken, fresh_state)`` where the fresh state is the
    post-regeneration draw from the regeneration measure, so a subsequent
    run of whole tours begins on an exact tour boundary.
    """
    gen = _as_generator(rng, ROLE_TOURS)
    stepper = step_explicit if as_mode(mode) is SimulationMode.EXPLICIT else step_mykland
    x = int(start)
    if not 0 <= x < model.n_states:
        raise DomainError(f"start state {x} out of range [0, {model.n_states})")
    steps = 0
    while True:
        y, regen = stepper(model, x, gen)
        steps += 1
        if regen:
            # under either rule, conditional on the flag the move came
            # from the regeneration measure, so y starts the new tour
            return steps, y
        if steps >= cap:
            raise TourLengthOverflow(f"no regeneration within {cap} steps from state {start}")
        x = y
