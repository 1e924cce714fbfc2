"""Deterministic multi-stream random numbers.

Every simulation routine in this package consumes a `numpy.random.Generator`
owned by the caller.  Streams are derived from a counter-based Philox engine
keyed on the triple ``(master_seed, replicate_index, stream_role)``, so

* the same triple always reproduces the same bit stream, on any host,
* distinct replicates (and distinct roles inside one replicate) get
  statistically independent streams without any coordination, and
* replicate-level parallelism cannot change results: stream identity depends
  only on the triple, never on scheduling.
"""

from __future__ import annotations

import numpy as np

# Stream roles.  A replicate that needs several independent streams should
# use one role per purpose rather than sharing a generator.
ROLE_TOURS = 0  # split-chain tour simulation
ROLE_TRAJECTORY = 1  # plain trajectory simulation (fixed-window estimator)
ROLE_PERFECT = 2  # perfect-sample draws
ROLE_AUX = 3  # anything else (fault injection, scratch checks)


def stream(
    master_seed: int, replicate: int = 0, role: int = ROLE_TOURS
) -> np.random.Generator:
    """Return the Generator keyed by ``(master_seed, replicate, role)``."""
    if master_seed < 0 or replicate < 0 or role < 0:
        raise ValueError("seed components must be nonnegative integers")
    seq = np.random.SeedSequence((int(master_seed), int(replicate), int(role)))
    return np.random.Generator(np.random.Philox(seq))
