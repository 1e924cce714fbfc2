# cython: language_level=3
"""Compiled tour-simulation backend.

Mirrors `_pysim` operation for operation: same block-buffered uniform
stream (blocks of 1024, tail discarded per call), same inverse-CDF row
sampling (first cumulative entry strictly greater than u, clipped), same
compensated accumulation of the block sums.  Outputs are bit-for-bit equal
to the pure-Python backend for identical generators.
"""

import numpy as np

from .errors import TourLengthOverflow

DEF BLOCK = 1024


cdef inline Py_ssize_t _pick(const double* cum, Py_ssize_t S, double u) noexcept:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = S
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    if lo < S:
        return lo
    return S - 1


def run_tours(object rng,
              double[::1] cum_nu,
              double[:, ::1] cum_p,
              double[:, ::1] cum_q,
              double[:, ::1] p,
              double[::1] nu,
              unsigned char[::1] in_j,
              double beta,
              double[::1] fvals,
              int mode,
              long long count,
              long long budget,
              long long tour_cap):
    """Simulate complete tours; `budget >= 0` selects the budget-crossing
    stopping rule, otherwise exactly `count` tours are produced."""
    cdef Py_ssize_t S = cum_nu.shape[0]
    cdef bint retro = mode == 1
    cdef bint by_budget = budget >= 0

    cdef object buf_obj = rng.random(BLOCK)
    cdef double[::1] buf = buf_obj
    cdef Py_ssize_t pos = 0

    cdef double u
    if pos == BLOCK:
        buf_obj = rng.random(BLOCK)
        buf = buf_obj
        pos = 0
    u = buf[pos]
    pos += 1
    cdef Py_ssize_t x = _pick(&cum_nu[0], S, u)
    cdef Py_ssize_t y = 0

    xi_out = []
    tau_out = []
    last_out = []

    cdef double xi = 0.0
    cdef double comp = 0.0
    cdef double value, t
    cdef long long tau = 0
    cdef long long total = 0
    cdef long long emitted = 0
    cdef bint regen

    while True:
        value = fvals[x] - comp
        t = xi + value
        comp = (t - xi) - value
        xi = t
        tau += 1
        if tau > tour_cap:
            raise TourLengthOverflow(
                f"tour exceeded cap of {tour_cap} steps without regenerating"
            )

        if retro:
            if pos == BLOCK:
                buf_obj = rng.random(BLOCK)
                buf = buf_obj
                pos = 0
            u = buf[pos]
            pos += 1
            y = _pick(&cum_p[x, 0], S, u)
            if in_j[x]:
                if pos == BLOCK:
                    buf_obj = rng.random(BLOCK)
                    buf = buf_obj
                    pos = 0
                u = buf[pos]
                pos += 1
                regen = u < beta * nu[y] / p[x, y]
            else:
                regen = False
        else:
            if in_j[x]:
                if pos == BLOCK:
                    buf_obj = rng.random(BLOCK)
                    buf = buf_obj
                    pos = 0
                u = buf[pos]
                pos += 1
                if u < beta:
                    regen = True
                    if pos == BLOCK:
                        buf_obj = rng.random(BLOCK)
                        buf = buf_obj
                        pos = 0
                    u = buf[pos]
                    pos += 1
                    y = _pick(&cum_nu[0], S, u)
                else:
                    regen = False
                    if pos == BLOCK:
                        buf_obj = rng.random(BLOCK)
                        buf = buf_obj
                        pos = 0
                    u = buf[pos]
                    pos += 1
                    y = _pick(&cum_q[x, 0], S, u)
            else:
                regen = False
                if pos == BLOCK:
                    buf_obj = rng.random(BLOCK)
                    buf = buf_obj
                    pos = 0
                u = buf[pos]
                pos += 1
                y = _pick(&cum_q[x, 0], S, u)

        if regen:
            xi_out.append(xi)
            tau_out.append(tau)
            last_out.append(x)
            total += tau
            xi = 0.0
            comp = 0.0
            tau = 0
            emitted += 1
            if by_budget:
                if total > budget:
                    break
            elif emitted == count:
                break
        x = y

    return (
        np.array(xi_out, dtype=np.float64),
        np.array(tau_out, dtype=np.int64),
        np.array(last_out, dtype=np.int64),
    )


def run_trajectory(object rng,
                   double[:, ::1] cum_p,
                   long long steps,
                   object cum_init,
                   long long init_state):
    """Simulate a plain P-chain path of the given length."""
    cdef Py_ssize_t S = cum_p.shape[0]
    cdef object buf_obj = rng.random(BLOCK)
    cdef double[::1] buf = buf_obj
    cdef Py_ssize_t pos = 0
    cdef double u
    cdef Py_ssize_t x
    cdef double[::1] ci

    if cum_init is not None:
        ci = cum_init
        if pos == BLOCK:
            buf_obj = rng.random(BLOCK)
            buf = buf_obj
            pos = 0
        u = buf[pos]
        pos += 1
        x = _pick(&ci[0], S, u)
    else:
        x = init_state

    out = np.empty(steps, dtype=np.int64)
    cdef long long[::1] ov = out
    cdef long long i
    for i in range(steps):
        ov[i] = x
        if pos == BLOCK:
            buf_obj = rng.random(BLOCK)
            buf = buf_obj
            pos = 0
        u = buf[pos]
        pos += 1
        x = _pick(&cum_p[x, 0], S, u)
    return out
