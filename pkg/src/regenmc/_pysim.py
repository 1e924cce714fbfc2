"""Pure-Python tour-simulation backend.

This module and the compiled `_tour_kernel` implement the *same* sampling
contract and must stay in lockstep:

* uniforms are drawn from the generator in blocks of `BLOCK` and consumed
  in order; unused tail uniforms are discarded when a call returns;
* discrete rows are sampled by inverse CDF: the index of the first
  cumulative entry strictly greater than u, clipped to S-1;
* explicit-split steps draw (coin, next-state) inside the small set and
  (next-state) outside it; retrospective steps draw (next-state) always and
  (coin) inside the small set;
* block sums of f accumulate with compensated (Kahan) summation.

Because both backends perform identical float operations on identical
uniform streams, their outputs are bit-for-bit equal; tests assert this.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .errors import TourLengthOverflow

BLOCK = 1024

_EXPLICIT = 0
_RETRO = 1


class _Uniforms:
    """Block-buffered uniform stream (consumption order is part of the API)."""

    __slots__ = ("rng", "buf", "pos")

    def __init__(self, rng):
        self.rng = rng
        self.buf = rng.random(BLOCK).tolist()
        self.pos = 0

    def take(self) -> float:
        if self.pos == BLOCK:
            self.buf = self.rng.random(BLOCK).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def _pick(cum_row, u: float, S: int) -> int:
    i = bisect_right(cum_row, u)
    return i if i < S else S - 1


def run_tours(model, fvals, mode: int, rng, *, count: int = 0, budget: int = -1,
              tour_cap: int = 10**9):
    """Simulate complete tours; stop after `count` tours or once the
    cumulative length exceeds `budget` (whichever criterion is active).

    Returns (xi, tau, last_state) as numpy arrays.  The first tour starts
    from a fresh draw X0 ~ nu.
    """
    tables = model._list_tables()
    cum_p = tables["cum_p"]
    cum_q = tables["cum_q"]
    cum_nu = tables["cum_nu"]
    p = tables["p"]
    nu = tables["nu"]
    in_j = tables["in_j"]
    beta = model.beta
    S = model.n_states
    fv = [float(v) for v in fvals]
    by_budget = budget >= 0

    us = _Uniforms(rng)
    x = _pick(cum_nu, us.take(), S)

    xi_out: list[float] = []
    tau_out: list[int] = []
    last_out: list[int] = []

    xi = 0.0
    comp = 0.0
    tau = 0
    total = 0
    while True:
        # fold the current state into the running tour
        value = fv[x] - comp
        t = xi + value
        comp = (t - xi) - value
        xi = t
        tau += 1
        if tau > tour_cap:
            raise TourLengthOverflow(
                f"tour exceeded cap of {tour_cap} steps without regenerating"
            )

        # one transition of the split chain
        if mode == _RETRO:
            y = _pick(cum_p[x], us.take(), S)
            if in_j[x]:
                regen = us.take() < beta * nu[y] / p[x][y]
            else:
                regen = False
        else:
            if in_j[x]:
                if us.take() < beta:
                    regen = True
                    y = _pick(cum_nu, us.take(), S)
                else:
                    regen = False
                    y = _pick(cum_q[x], us.take(), S)
            else:
                regen = False
                y = _pick(cum_q[x], us.take(), S)

        if regen:
            xi_out.append(xi)
            tau_out.append(tau)
            last_out.append(x)
            total += tau
            xi = 0.0
            comp = 0.0
            tau = 0
            if by_budget:
                if total > budget:
                    break
            elif len(tau_out) == count:
                break
        x = y

    return (
        np.array(xi_out, dtype=np.float64),
        np.array(tau_out, dtype=np.int64),
        np.array(last_out, dtype=np.int64),
    )


def run_trajectory(cum_p_rows, S: int, steps: int, rng, *, cum_init=None,
                   init_state: int = -1):
    """Simulate a plain P-chain path of the given length.

    The initial state is drawn from `cum_init` when given, else is
    `init_state`.  Returns an int64 array of length `steps`.
    """
    us = _Uniforms(rng)
    if cum_init is not None:
        x = _pick(cum_init, us.take(), S)
    else:
        x = init_state
    out = np.empty(steps, dtype=np.int64)
    for i in range(steps):
        out[i] = x
        x = _pick(cum_p_rows[x], us.take(), S)
    return out
