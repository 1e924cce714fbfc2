"""Finite transition kernels, small sets, and split models.

A transition kernel ``P`` on states ``{0, ..., S-1}`` together with a small
set ``J``, a constant ``beta`` in ``(0, 1]`` and a probability vector ``nu``
satisfying the minorization ``P(x, .) >= beta * nu(.)`` for every ``x`` in
``J`` admits the residual decomposition

    P(x, .) = beta * nu(.) + (1 - beta) * Q(x, .)        for x in J,
    Q(x, .) = P(x, .)                                    for x not in J.

`build_split_model` validates the inputs, forms ``Q``, and returns a
`SplitModel` that the simulation kernels consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    InvalidStochasticMatrix,
    MinorizationViolated,
)

_ROW_SUM_ATOL = 1e-12
_RESIDUAL_ATOL = 1e-10


def _as_prob_vector(v, size: int, what: str, atol: float = _ROW_SUM_ATOL) -> np.ndarray:
    vec = np.asarray(v, dtype=np.float64)
    if vec.shape != (size,):
        raise InvalidStochasticMatrix(f"{what} must have shape ({size},), got {vec.shape}")
    if vec.min(initial=0.0) < -atol:
        raise InvalidStochasticMatrix(f"{what} has a negative entry: {vec.min():.3e}")
    if abs(float(vec.sum()) - 1.0) > atol:
        raise InvalidStochasticMatrix(f"{what} sums to {vec.sum()!r}, not 1 within {atol:g}")
    return vec


@dataclass(frozen=True)
class FiniteKernel:
    """Row-stochastic transition matrix on a finite state space.

    Parameters
    ----------
    P : array, shape (S, S)
        ``P[x, y]`` is the one-step probability of moving from x to y.
        Rows must sum to 1 within 1e-12 and entries must lie in [0, 1].
    labels : optional sequence of state names, length S.
    """

    P: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidStochasticMatrix(f"kernel must be square, got shape {P.shape}")
        if P.shape[0] < 1:
            raise InvalidStochasticMatrix("kernel needs at least one state")
        if P.min() < -_ROW_SUM_ATOL or P.max() > 1.0 + _ROW_SUM_ATOL:
            raise InvalidStochasticMatrix("kernel entries must lie in [0, 1]")
        bad = np.abs(P.sum(axis=1) - 1.0) > _ROW_SUM_ATOL
        if bad.any():
            x = int(np.argmax(bad))
            raise InvalidStochasticMatrix(
                f"row {x} sums to {P[x].sum()!r}, not 1 within {_ROW_SUM_ATOL:g}"
            )
        object.__setattr__(self, "P", P)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != P.shape[0]:
                raise DomainError("labels length must match the number of states")
            object.__setattr__(self, "labels", labels)

    @property
    def n_states(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class SmallSetSpec:
    """Small set J with minorization constant beta and measure nu.

    ``J`` may be given as a boolean membership mask of length S or as a
    collection of state indices.  ``nu`` must be a probability vector of
    length S.  The minorization itself is checked against a concrete kernel
    in `build_split_model`, since it involves both objects.
    """

    J: np.ndarray
    beta: float
    nu: np.ndarray

    def __post_init__(self):
        nu = _as_prob_vector(self.nu, np.asarray(self.nu).shape[0], "nu")
        size = nu.shape[0]
        J = np.asarray(self.J)
        if J.dtype != np.bool_:
            mask = np.zeros(size, dtype=bool)
            idx = np.asarray(J, dtype=np.int64).ravel()
            if idx.size and (idx.min() < 0 or idx.max() >= size):
                raise DomainError("small-set index out of range")
            mask[idx] = True
            J = mask
        if J.shape != (size,):
            raise DomainError(f"membership mask must have shape ({size},), got {J.shape}")
        if not J.any():
            raise DomainError("small set must be nonempty")
        if not (0.0 < float(self.beta) <= 1.0):
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        object.__setattr__(self, "J", J.copy())
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "nu", nu)

    @classmethod
    def from_indices(cls, indices, beta: float, nu) -> "SmallSetSpec":
        nu = np.asarray(nu, dtype=np.float64)
        mask = np.zeros(nu.shape[0], dtype=bool)
        mask[np.asarray(list(indices), dtype=np.int64)] = True
        return cls(J=mask, beta=beta, nu=nu)

    @property
    def is_doeblin(self) -> bool:
        """True when J is the whole state space."""
        return bool(self.J.all())


class SplitModel:
    """Validated split representation of a kernel over a small set.

    Instances are produced by `build_split_model` and treated as immutable.
    They carry the residual kernel ``Q`` plus cumulative-probability tables
    used by the simulation backends.  Rows of ``Q`` indexed by small-set
    states are unused (and flagged) when ``beta == 1``.
    """

    __slots__ = (
        "kernel",
        "small_set",
        "Q",
        "q_row_unused",
        "cum_p",
        "cum_q",
        "cum_nu",
        "_lists",
    )

    def __init__(
        self,
        kernel: FiniteKernel,
        small_set: SmallSetSpec,
        Q: np.ndarray,
        q_row_unused: np.ndarray,
    ):
        self.kernel = kernel
        self.small_set = small_set
        self.Q = Q
        self.q_row_unused = q_row_unused
        self.cum_p = np.cumsum(kernel.P, axis=1)
        self.cum_q = np.cumsum(np.clip(Q, 0.0, None), axis=1)
        self.cum_nu = np.cumsum(small_set.nu)
        self._lists = None

    # -- convenience views -------------------------------------------------
    @property
    def n_states(self) -> int:
        return self.kernel.n_states

    @property
    def P(self) -> np.ndarray:
        return self.kernel.P

    @property
    def beta(self) -> float:
        return self.small_set.beta

    @property
    def nu(self) -> np.ndarray:
        return self.small_set.nu

    @property
    def in_J(self) -> np.ndarray:
        return self.small_set.J

    @property
    def is_doeblin(self) -> bool:
        return self.small_set.is_doeblin

    def residual_operator(self) -> np.ndarray:
        """Sub-stochastic pre-regeneration operator.

        Row x gives the sub-probability of continuing the current tour into
        each state: ``(1 - beta*1[x in J]) * Q(x, .)``, which equals
        ``P(x, .) - beta*1[x in J] * nu(.)``.
        """
        out = self.P.copy()
        out[self.in_J] -= self.beta * self.nu
        return np.clip(out, 0.0, None)

    # -- cached pure-Python tables (used by the fallback backend) ----------
    def _list_tables(self):
        if self._lists is None:
            self._lists = {
                "cum_p": [row.tolist() for row in self.cum_p],
                "cum_q": [row.tolist() for row in self.cum_q],
                "cum_nu": self.cum_nu.tolist(),
                "p": [row.tolist() for row in self.P],
                "nu": self.nu.tolist(),
                "in_j": self.in_J.tolist(),
            }
        return self._lists

    def __getstate__(self):
        return (self.kernel, self.small_set, self.Q, self.q_row_unused)

    def __setstate__(self, state):
        self.__init__(*state)

    def __repr__(self):
        return (
            f"SplitModel(S={self.n_states}, beta={self.beta:g}, "
            f"|J|={int(self.in_J.sum())}, doeblin={self.is_doeblin})"
        )


def build_split_model(
    kernel: FiniteKernel, small_set: SmallSetSpec, *, atol: float = _ROW_SUM_ATOL
) -> SplitModel:
    """Validate the minorization and construct the residual kernel Q.

    Raises
    ------
    MinorizationViolated
        if ``beta * nu[y] > P[x, y] + atol`` for some x in J; the error
        reports the worst offending pair and its deficit.
    InvalidStochasticMatrix
        if a computed residual row fails to be a probability vector within
        1e-10.
    """
    P = kernel.P
    S = kernel.n_states
    if small_set.nu.shape[0] != S:
        raise DomainError("nu length must match the number of states")
    if small_set.J.shape[0] != S:
        raise DomainError("membership mask length must match the number of states")
    beta, nu, J = small_set.beta, small_set.nu, small_set.J

    deficit = beta * nu[None, :] - P[J, :]
    if deficit.size and deficit.max() > atol:
        flat = int(np.argmax(deficit))
        rows = np.flatnonzero(J)
        x = int(rows[flat // S])
        y = int(flat % S)
        raise MinorizationViolated(x, y, float(deficit.max()))

    Q = P.copy()
    q_row_unused = np.zeros(S, dtype=bool)
    if beta < 1.0:
        resid = (P[J, :] - beta * nu[None, :]) / (1.0 - beta)
        if resid.size and resid.min() < -_RESIDUAL_ATOL:
            raise InvalidStochasticMatrix(
                f"residual row has negative entry {resid.min():.3e}"
            )
        resid = np.clip(resid, 0.0, None)
        sums = resid.sum(axis=1)
        if resid.size and np.abs(sums - 1.0).max() > _RESIDUAL_ATOL:
            raise InvalidStochasticMatrix(
                f"residual row sums deviate from 1 by {np.abs(sums - 1.0).max():.3e}"
            )
        Q[J, :] = resid
        # reconstruction check: beta*nu + (1-beta)*Q == P on J
        recon = beta * nu[None, :] + (1.0 - beta) * Q[J, :]
        err = np.abs(recon - P[J, :]).max() if recon.size else 0.0
        if err > _RESIDUAL_ATOL:
            raise InvalidStochasticMatrix(
                f"residual reconstruction off by {err:.3e} (> {_RESIDUAL_ATOL:g})"
            )
    else:
        # beta == 1: the minorization forces P(x, .) == nu on J and the
        # residual never gets sampled.  Zero the rows and flag them.
        Q[J, :] = 0.0
        q_row_unused[J] = True

    return SplitModel(kernel, small_set, Q, q_row_unused)


# ----------------------------------------------------------------------
# Plain-text kernel files
#
#   # optional comments anywhere
#   S
#   p00 p01 ... p0,S-1        (S rows)
#   ...
#   J: 0 3 7                  (optional: small-set state indices)
#   beta: 0.5                 (optional)
#   nu: n0 n1 ... n_{S-1}     (optional)
#
# Tokens are whitespace-separated; '#' starts a comment to end of line.
# ----------------------------------------------------------------------


def load_kernel_file(path) -> tuple[FiniteKernel, SmallSetSpec | None]:
    """Parse a plain-text kernel file.

    Returns the kernel and, when all of ``J:``/``beta:``/``nu:`` are present,
    the accompanying `SmallSetSpec` (otherwise None).
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = fh.readlines()

    lines: list[str] = []
    for line in raw_lines:
        body = line.split("#", 1)[0].strip()
        if body:
            lines.append(body)
    if not lines:
        raise DomainError(f"{path}: empty kernel file")

    try:
        S = int(lines[0])
    except ValueError as exc:
        raise DomainError(f"{path}: first line must be the state count") from exc
    if S < 1:
        raise DomainError(f"{path}: state count must be positive")
    if len(lines) < 1 + S:
        raise DomainError(f"{path}: expected {S} matrix rows, found {len(lines) - 1}")

    rows = []
    for i, line in enumerate(lines[1 : 1 + S]):
        vals = [float(tok) for tok in line.split()]
        if len(vals) != S:
            raise DomainError(f"{path}: row {i} has {len(vals)} entries, expected {S}")
        rows.append(vals)
    kernel = FiniteKernel(np.array(rows, dtype=np.float64))

    extras: dict[str, str] = {}
    for line in lines[1 + S :]:
        if ":" not in line:
            raise DomainError(f"{path}: unrecognized trailer line {line!r}")
        key, _, rest = line.partition(":")
        extras[key.strip().lower()] = rest.strip()

    unknown = set(extras) - {"j", "beta", "nu"}
    if unknown:
        raise DomainError(f"{path}: unknown trailer keys {sorted(unknown)}")
    if not extras:
        return kernel, None
    if set(extras) != {"j", "beta", "nu"}:
        missing = {"j", "beta", "nu"} - set(extras)
        raise DomainError(f"{path}: incomplete split spec, missing {sorted(missing)}")

    indices = [int(tok) for tok in extras["j"].split()]
    nu = np.array([float(tok) for tok in extras["nu"].split()], dtype=np.float64)
    if nu.shape[0] != S:
        raise DomainError(f"{path}: nu must have {S} entries")
    spec = SmallSetSpec.from_indices(indices, float(extras["beta"]), nu)
    return kernel, spec
