"""Deterministic derivation of random streams.

Every random draw in the package comes from a PCG64 generator whose seed is
derived here.  The derivation rules are part of the reproducibility contract:

* A sampler run with seed ``s`` consumes one child stream per level,
  ``level_rng(s, level)``, seeded from ``SeedSequence([s, level])``.  Levels
  are therefore decoupled: two runs that agree on a level's stream agree on
  that level's draws no matter how other levels are processed.
* Replicated runs (verification, benchmarks) derive one 64-bit sampler seed
  per replicate with ``replicate_seed(master, block, index)``; ``block``
  namespaces independent experiment arms so equal-indexed replicates of
  different arms are still independent.

Identical inputs give identical streams on every platform numpy supports.
"""

from __future__ import annotations

import numpy as np

from .config import U64_MAX
from .errors import BadArgs


def check_seed(seed: int) -> int:
    """Validate a user-facing 64-bit seed and return it as a Python int."""
    seed = int(seed)
    if not (0 <= seed <= U64_MAX):
        raise BadArgs(f"seed {seed} outside the unsigned 64-bit range")
    return seed


def level_rng(seed: int, level: int) -> np.random.Generator:
    """Child generator for one sampling level of a run."""
    seed = check_seed(seed)
    if level < 0:
        raise BadArgs(f"level must be >= 0, got {level}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, level])))


def replicate_seed(master_seed: int, block: int, index: int) -> int:
    """Sampler seed for replicate ``index`` of experiment arm ``block``."""
    master_seed = check_seed(master_seed)
    if block < 0 or index < 0:
        raise BadArgs("block and index must be >= 0")
    seq = np.random.SeedSequence([master_seed, block, index])
    return int(seq.generate_state(1, np.uint64)[0])
