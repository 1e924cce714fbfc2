"""Exact reference quantities for finite chains via dense linear algebra.

Everything here is deterministic and RNG-free.  Two independent routes to
the asymptotic variance are provided on purpose:

* `asymptotic_variance_exact` solves the one-step-difference (Poisson)
  equation ``(I - P) g = f - pi(f)`` against the stationary law, and
* `tour_moments_exact` integrates the centered block sum over a single
  regeneration tour via first-passage linear systems and divides by the
  mean tour length.

Agreement of the two routes (to ~1e-9) is the package's central self-check:
they share no code path beyond the stationary distribution.

State spaces are capped at 2000 states: all solves are dense and O(S^3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .bounds import TourMoments
from .errors import (
    DomainError,
    NotIrreducible,
    Periodic,
    SingularSystem,
    VNotBoundedBelowByOne,
)
from .kernel import FiniteKernel, SplitModel

STATE_CAP = 2000


def _check_size(S: int) -> None:
    if S > STATE_CAP:
        raise DomainError(
            f"exact computations are capped at {STATE_CAP} states, got {S}"
        )


def _state_values(f, S: int) -> np.ndarray:
    """Normalize a function-on-states to a float64 vector of length S."""
    if callable(f):
        return np.array([float(f(x)) for x in range(S)], dtype=np.float64)
    vec = np.asarray(f, dtype=np.float64)
    if vec.shape != (S,):
        raise DomainError(f"f must have shape ({S},), got {vec.shape}")
    return vec


def is_irreducible(kernel: FiniteKernel) -> bool:
    """True when the support graph of P is strongly connected."""
    adj = csr_matrix(kernel.P > 0.0)
    n, _ = connected_components(adj, directed=True, connection="strong")
    return n == 1


def period(kernel: FiniteKernel) -> int:
    """Period of an irreducible kernel (gcd of cycle lengths).

    Computed via BFS levels from state 0: for every edge (u, v) with
    P[u, v] > 0, the value level[u] + 1 - level[v] is a multiple of the
    period, and their gcd over all edges equals it.
    """
    if not is_irreducible(kernel):
        raise NotIrreducible("period is defined here for irreducible kernels only")
    P = kernel.P
    S = kernel.n_states
    level = np.full(S, -1, dtype=np.int64)
    level[0] = 0
    queue = [0]
    edges_from = [np.flatnonzero(P[x] > 0.0) for x in range(S)]
    while queue:
        u = queue.pop()
        for v in edges_from[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    g = 0
    for u in range(S):
        for v in edges_from[u]:
            g = int(np.gcd(g, level[u] + 1 - level[v]))
    return abs(g)


def stationary(kernel: FiniteKernel, *, rtol: float = 1e-10) -> np.ndarray:
    """Stationary distribution pi solving pi P = pi, sum(pi) = 1.

    Requires irreducibility (checked by reachability).  The solve replaces
    one balance equation by the normalization constraint; the result is
    validated to residual norm ``rtol``.
    """
    _check_size(kernel.n_states)
    if not is_irreducible(kernel):
        raise NotIrreducible("kernel's support graph is not strongly connected")
    P = kernel.P
    S = kernel.n_states
    A = (np.eye(S) - P).T
    A[-1, :] = 1.0
    b = np.zeros(S)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"stationary solve failed: {exc}") from exc
    residual = float(np.abs(pi @ P - pi).max())
    if residual > rtol or pi.min() < -rtol:
        raise SingularSystem(
            f"stationary solution residual {residual:.3e} exceeds {rtol:g}"
        )
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_variance(kernel: FiniteKernel, f) -> float:
    """Var_pi f(X) = pi(f^2) - (pi f)^2."""
    pi = stationary(kernel)
    fv = _state_values(f, kernel.n_states)
    theta = float(pi @ fv)
    return float(pi @ (fv - theta) ** 2)


def asymptotic_variance_exact(kernel: FiniteKernel, f) -> float:
    """Time-average (CLT) variance via the one-step-difference equation.

    Solves ``(I - P + 1 pi) g = fbar`` (the fundamental-matrix form, which
    pins ``pi(g) = 0`` automatically) and returns ``pi(2 fbar g - fbar^2)``.
    Requires aperiodicity in addition to irreducibility.
    """
    _check_size(kernel.n_states)
    pi = stationary(kernel)
    if period(kernel) != 1:
        raise Periodic("time-average variance needs an aperiodic kernel")
    fv = _state_values(f, kernel.n_states)
    fbar = fv - float(pi @ fv)
    A = np.eye(kernel.n_states) - kernel.P + np.outer(np.ones_like(pi), pi)
    try:
        g = np.linalg.solve(A, fbar)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"variance solve failed: {exc}") from exc
    return float(pi @ (2.0 * fbar * g - fbar**2))


# ----------------------------------------------------------------------
# Tour moments through first-passage systems
# ----------------------------------------------------------------------


def _tour_systems(model: SplitModel):
    """Return (R, solve) where R is the pre-regeneration operator and
    solve(rhs) solves (I - R) h = rhs."""
    R = model.residual_operator()
    A = np.eye(model.n_states) - R
    lu = None
    try:
        import scipy.linalg as sla

        lu = sla.lu_factor(A)

        def solve(rhs: np.ndarray) -> np.ndarray:
            return sla.lu_solve(lu, rhs)

    except Exception as exc:  # pragma: no cover - dense LU should not fail
        raise SingularSystem(f"tour system factorization failed: {exc}") from exc
    return R, solve


def _block_first_moment(R, solve, nu, g):
    """E over one tour of sum g(X_i), started from nu, plus the per-state table."""
    h = solve(g)
    return float(nu @ h), h


def _block_cross_moment(R, solve, nu, a, b, ha=None, hb=None):
    """E over one tour of (sum a(X_i)) * (sum b(X_i)), started from nu."""
    if ha is None:
        ha = solve(a)
    if hb is None:
        hb = solve(b)
    rhs = a * b + a * (R @ hb) + b * (R @ ha)
    h = solve(rhs)
    return float(nu @ h)


def tour_moments_exact(model: SplitModel, f) -> TourMoments:
    """Exact tour moments for a split model and target function.

    Solves first-passage systems against the sub-stochastic operator
    ``R(x, .) = P(x, .) - beta 1[x in J] nu(.)`` for the moments of the tour
    length ``tau`` and block sums over one tour, then normalizes by the mean
    tour length m.  The occupation identity ``m = 1/(beta pi(J))`` is
    asserted to 1e-10 as an internal cross-check.
    """
    _check_size(model.n_states)
    S = model.n_states
    fv = _state_values(f, S)
    pi = stationary(model.kernel)
    theta = float(pi @ fv)
    fbar = fv - theta
    nu = model.nu
    ones = np.ones(S)

    R, solve = _tour_systems(model)

    m, h_tau = _block_first_moment(R, solve, nu, ones)
    m_occupation = 1.0 / (model.beta * float(pi @ model.in_J))
    if abs(m - m_occupation) > 1e-10 * max(1.0, abs(m)):
        raise SingularSystem(
            f"mean tour length disagrees with occupation identity: "
            f"{m!r} vs {m_occupation!r}"
        )

    e_tau_sq = _block_cross_moment(R, solve, nu, ones, ones, ha=h_tau, hb=h_tau)
    var_tau = e_tau_sq - m * m
    sigma_tau_sq = var_tau / m

    _, h_fbar = _block_first_moment(R, solve, nu, fbar)
    e_fbar_sq = _block_cross_moment(R, solve, nu, fbar, fbar, ha=h_fbar, hb=h_fbar)
    sigma_as_sq = e_fbar_sq / m

    e_f, h_f = _block_first_moment(R, solve, nu, fv)
    e_f_sq = _block_cross_moment(R, solve, nu, fv, fv, ha=h_f, hb=h_f)
    sigma_unb_sq = (e_f_sq - e_f * e_f) / m

    e_cross = _block_cross_moment(R, solve, nu, fbar, ones, ha=h_fbar, hb=h_tau)
    e_fbar = float(nu @ h_fbar)
    rho_f1 = (e_cross - e_fbar * m) / m

    return TourMoments(
        m=m,
        sigma_tau_sq=sigma_tau_sq,
        sigma_as_sq=sigma_as_sq,
        sigma_unb_sq=sigma_unb_sq,
        rho_f1=rho_f1,
    )


def block_mean_exact(model: SplitModel, g) -> float:
    """E of sum g(X_i) over one tour started from nu (occupation identity LHS)."""
    _check_size(model.n_states)
    gv = _state_values(g, model.n_states)
    R, solve = _tour_systems(model)
    val, _ = _block_first_moment(R, solve, model.nu, gv)
    return val


def block_second_moment_exact(model: SplitModel, g) -> float:
    """E[(sum g(X_i))^2] over one tour started from nu (first-passage route).

    Divide by the mean tour length to compare against
    `block_square_series`, the independent stationary-series route.
    """
    _check_size(model.n_states)
    gv = _state_values(g, model.n_states)
    R, solve = _tour_systems(model)
    return _block_cross_moment(R, solve, model.nu, gv, gv)


def block_square_series(model: SplitModel, g) -> float:
    """Second route to E[(sum g)^2]/m: stationary autocovariance series.

    Evaluates ``pi(g^2) + 2 sum_{i>=1} E_pi[g(X_0) g(X_i) 1{no regeneration
    in the first i steps}]`` where the truncated expectation reduces to
    powers of the pre-regeneration operator; the series is summed in closed
    form through ``(I - R)^{-1}``.  Used as an independent cross-check of
    the first-passage route.
    """
    _check_size(model.n_states)
    S = model.n_states
    gv = _state_values(g, S)
    pi = stationary(model.kernel)
    R, solve = _tour_systems(model)
    # sum_{i>=1} R^i g = R (I - R)^{-1} g
    tail = R @ solve(gv)
    return float(pi @ (gv * gv) + 2.0 * (pi * gv) @ tail)


@dataclass(frozen=True)
class DriftInputs:
    """Exact stationary moments of a drift function and tightest coefficients.

    ``lambda_hat`` is the largest one-step contraction ratio ``PV/V`` off the
    small set (0.0 when the small set covers everything); ``K_hat`` is the
    largest ``PV`` on it.
    """

    pi_V: float
    pi_sqrtV: float
    lambda_hat: float
    K_hat: float


def drift_inputs_exact(model: SplitModel, V) -> DriftInputs:
    """Stationary integrals of V and sqrt(V), plus tightest (lambda, K).

    Raises VNotBoundedBelowByOne unless ``V >= 1`` everywhere.  A returned
    ``lambda_hat >= 1`` means the drift condition fails for this V (the
    caller decides whether to error or warn).
    """
    _check_size(model.n_states)
    S = model.n_states
    Vv = _state_values(V, S)
    if Vv.min() < 1.0:
        x = int(np.argmin(Vv))
        raise VNotBoundedBelowByOne(f"V({x}) = {Vv[x]!r} < 1")
    pi = stationary(model.kernel)
    PV = model.P @ Vv
    outside = ~model.in_J
    lambda_hat = float((PV[outside] / Vv[outside]).max()) if outside.any() else 0.0
    K_hat = float(PV[model.in_J].max())
    return DriftInputs(
        pi_V=float(pi @ Vv),
        pi_sqrtV=float(pi @ np.sqrt(Vv)),
        lambda_hat=lambda_hat,
        K_hat=K_hat,
    )
