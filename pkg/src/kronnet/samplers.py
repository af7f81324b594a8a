"""Network samplers: dense per-cell, full sweep, pruned sweep, and grouped.

All strategies draw the same model:

* Level 0 realizes the grid of side**untied_levels cells whose probabilities
  come from the dense untied product matrix.
* Each tied level replaces every realized cell with a side x side block of
  candidate children; child (dr, dc) survives with probability
  ``theta[dr, dc]``, and children of unrealized cells never survive.
* The cells realized at the last level are the network's edges (optionally
  filtered by the directed / self-loop mode, which never alters sampling).

They differ only in which random variables they touch:

* ``naive``: every cell of the final untied grid directly (plain model).
* ``ci``: every candidate cell at every level, dead parents included.
* ``dcsd``: only children of realized cells; dead subtrees are pruned.
* ``gp``: like dcsd, but each tied level draws one binomial count per
  distinct seed value and places that many children uniformly, instead of
  per-cell Bernoullis.

Randomness is consumed per level from ``rng.level_rng(seed, level)`` in a
documented order (cells row-major; pruned candidates parent-major with
blocks row-major; groups by descending value, count then placement), which
makes every run reproducible and lets the full-sweep sampler match the
Bayesian-network ancestral sampler draw for draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ._kernels import expand_active, masked_grid_select
from .config import DEFAULT_DENSE_CAP, I64_MAX, ModelConfig, validate_config
from .errors import BadArgs, CapExceeded, Overflow
from .groups import (
    DEFAULT_GROUP_CAP,
    grid_groups,
    theta_value_classes,
    unrank_grid_cell,
)
from .kron import ci_rv_count, index_digits, kronecker_power
from .randvar import binomial_draw, choose_without_replacement
from .rng import check_seed, level_rng

# Dense level-0 grids are precomputed up to this many entries; larger untied
# stages are sampled row by row with identical draws and O(side) memory.
_LEVEL0_DENSE_MAX = 1 << 22


class Strategy(str, Enum):
    """Sampling strategies exposed by the CLI and the verification harness."""

    NAIVE = "naive"
    CI = "ci"
    DCSD = "dcsd"
    GP = "gp"


@dataclass(frozen=True)
class LevelTrace:
    """Accounting for one sampling level."""

    level: int
    rvs_examined: int
    rvs_active: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise BadArgs(f"level must be >= 0, got {self.level}")
        if not (0 <= self.rvs_active <= self.rvs_examined):
            raise BadArgs(
                f"need 0 <= rvs_active <= rvs_examined, got "
                f"active={self.rvs_active} examined={self.rvs_examined}"
            )


@dataclass(frozen=True)
class SampleTrace:
    """Per-level RV accounting for one run."""

    seed: int
    strategy: Strategy
    per_level: tuple[LevelTrace, ...]

    def __post_init__(self) -> None:
        for pos, entry in enumerate(self.per_level):
            if entry.level != pos:
                raise BadArgs("per_level records must be consecutive from level 0")

    @property
    def total_examined(self) -> int:
        return sum(entry.rvs_examined for entry in self.per_level)

    @property
    def total_active(self) -> int:
        return sum(entry.rvs_active for entry in self.per_level)

    @property
    def final_active(self) -> int:
        return self.per_level[-1].rvs_active


def _check_sorted_cells(rows: np.ndarray, cols: np.ndarray) -> None:
    if rows.shape != cols.shape or rows.ndim != 1:
        raise BadArgs("rows and cols must be 1-d arrays of equal length")
    if rows.size > 1:
        r0, r1 = rows[:-1], rows[1:]
        c0, c1 = cols[:-1], cols[1:]
        ok = (r1 > r0) | ((r1 == r0) & (c1 > c0))
        if not bool(ok.all()):
            raise BadArgs("cells must be strictly increasing in (row, col) order")


@dataclass(frozen=True, eq=False)
class LevelState:
    """Realized cells of one level, sorted row-major and duplicate-free."""

    level: int
    side: int
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        cols = np.ascontiguousarray(self.cols, dtype=np.int64)
        _check_sorted_cells(rows, cols)
        if rows.size and (rows[0] < 0 or rows[-1] >= self.side or cols.min() < 0 or cols.max() >= self.side):
            raise BadArgs(f"cell indices outside [0, {self.side})")
        rows.setflags(write=False)
        cols.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def count(self) -> int:
        return int(self.rows.size)


@dataclass(frozen=True, eq=False)
class SampledNetwork:
    """A sampled network: node count plus sorted duplicate-free edge list."""

    n_nodes: int
    edges: np.ndarray
    directed: bool = True

    def __post_init__(self) -> None:
        edges = np.ascontiguousarray(self.edges, dtype=np.int64)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise BadArgs(f"edges must have shape (m, 2), got {edges.shape}")
        _check_sorted_cells(edges[:, 0], edges[:, 1])
        if edges.size and (edges.min() < 0 or edges.max() >= self.n_nodes):
            raise BadArgs(f"edge endpoints outside [0, {self.n_nodes})")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])


def _normalize_override(override: Iterable[int], side: int) -> np.ndarray:
    idx = sorted({int(v) for v in override})
    arr = np.asarray(idx, dtype=np.int64).reshape(-1)
    if arr.size and (arr[0] < 0 or arr[-1] >= side * side):
        raise BadArgs(f"override cell index outside [0, {side * side})")
    return arr


def finalize_edges(cfg: ModelConfig, rows: np.ndarray, cols: np.ndarray) -> SampledNetwork:
    """Apply the edge-mode filter to final-level cells and build the network.

    Sampling itself always works on the full grid; undirected mode keeps only
    cells with row < col, and loop-free directed mode drops the diagonal.
    """
    if not cfg.directed:
        keep = rows < cols
        rows, cols = rows[keep], cols[keep]
    elif not cfg.self_loops:
        keep = rows != cols
        rows, cols = rows[keep], cols[keep]
    edges = (
        np.column_stack([rows, cols])
        if rows.size
        else np.empty((0, 2), dtype=np.int64)
    )
    return SampledNetwork(n_nodes=cfg.n_nodes, edges=edges, directed=cfg.directed)


class ModelSampler:
    """Reusable sampling engine for one configuration.

    Precomputes the dense untied-stage probabilities (when small enough),
    the seed-value classes, and lazily the whole-grid probability groups, so
    repeated runs (verification, benchmarks) avoid redundant setup.
    """

    def __init__(
        self,
        cfg: ModelConfig,
        *,
        dense_cap: int = DEFAULT_DENSE_CAP,
        group_cap: int = DEFAULT_GROUP_CAP,
    ) -> None:
        self.cfg = validate_config(cfg)
        if cfg.n_nodes > I64_MAX:
            raise Overflow(
                f"{cfg.n_nodes} nodes exceed signed 64-bit index arithmetic"
            )
        if dense_cap < 1 or group_cap < 1:
            raise BadArgs("caps must be positive")
        self.dense_cap = int(dense_cap)
        self.group_cap = int(group_cap)
        self.b = cfg.b
        self.side0 = cfg.b**cfg.untied_levels
        self.theta_flat = cfg.theta.flat
        self._classes = theta_value_classes(cfg.theta)
        self._class_pos = [
            np.asarray(cls.positions, dtype=np.int64) for cls in self._classes
        ]
        self._level0_probs: np.ndarray | None = None
        if self.side0 * self.side0 <= min(self.dense_cap, _LEVEL0_DENSE_MAX):
            self._level0_probs = kronecker_power(
                cfg.theta, cfg.untied_levels, dense_cap=self.dense_cap
            ).flat
        self._full_probs: np.ndarray | None = None
        self._grid_tables = None

    # -- shared level-0 handling ------------------------------------------

    def _level0_dense(self) -> np.ndarray:
        """Dense untied-stage probabilities; respects the entry cap."""
        if self._level0_probs is None:
            self._level0_probs = kronecker_power(
                self.cfg.theta, self.cfg.untied_levels, dense_cap=self.dense_cap
            ).flat
        return self._level0_probs

    def _untied_row_probs(self, row: int) -> np.ndarray:
        ent = self.cfg.theta.entries
        digits = index_digits(row, self.b, self.cfg.untied_levels)
        probs = ent[digits[0], :]
        for d in digits[1:]:
            probs = np.kron(probs, ent[d, :])
        return probs

    def _level0_cells(
        self, seed: int, override: Iterable[int] | None
    ) -> tuple[np.ndarray, np.ndarray, int]:
        """Realize level 0 sparsely; returns (rows, cols, examined)."""
        side0 = self.side0
        examined = side0 * side0
        if override is not None:
            idx = _normalize_override(override, side0)
            return idx // side0, idx % side0, examined
        stream = level_rng(seed, 0)
        if self._level0_probs is not None:
            idx = np.flatnonzero(stream.random(examined) < self._level0_probs)
            return idx // side0, idx % side0, examined
        # Row-streamed path: identical draws, memory O(side0).
        rows_acc: list[np.ndarray] = []
        cols_acc: list[np.ndarray] = []
        for r in range(side0):
            hits = np.flatnonzero(stream.random(side0) < self._untied_row_probs(r))
            if hits.size:
                rows_acc.append(np.full(hits.size, r, dtype=np.int64))
                cols_acc.append(hits.astype(np.int64))
        if rows_acc:
            return np.concatenate(rows_acc), np.concatenate(cols_acc), examined
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), examined

    # -- strategies --------------------------------------------------------

    def _run_naive(self, seed: int, states: list | None):
        cfg = self.cfg
        n = cfg.n_nodes
        cells = n * n
        if cells > self.dense_cap:
            raise CapExceeded(
                f"naive sampling needs {cells} dense cells, above the cap "
                f"{self.dense_cap}; use the dcsd or gp strategy instead"
            )
        if self._full_probs is None:
            self._full_probs = kronecker_power(
                cfg.theta, cfg.levels, dense_cap=self.dense_cap
            ).flat
        idx = np.flatnonzero(level_rng(seed, 0).random(cells) < self._full_probs)
        rows, cols = idx // n, idx % n
        if states is not None:
            states.append(LevelState(level=0, side=n, rows=rows, cols=cols))
        trace = [(0, cells, int(idx.size))]
        return rows, cols, trace

    def _run_ci(self, seed: int, override, states: list | None):
        cfg = self.cfg
        total = ci_rv_count(cfg)
        if total > self.dense_cap:
            raise CapExceeded(
                f"full sweep examines {total} RVs, above the cap "
                f"{self.dense_cap}; use the dcsd or gp strategy instead"
            )
        side = self.side0
        probs0 = self._level0_dense()
        if override is not None:
            active = np.zeros(side * side, dtype=bool)
            active[_normalize_override(override, side)] = True
        else:
            active = level_rng(seed, 0).random(side * side) < probs0
        trace = [(0, side * side, int(active.sum()))]
        if states is not None:
            idx = np.flatnonzero(active)
            states.append(
                LevelState(level=0, side=side, rows=idx // side, cols=idx % side)
            )
        for lam in range(1, cfg.tied_levels + 1):
            parent_side = side
            side *= self.b
            uniforms = level_rng(seed, lam).random(side * side)
            active = masked_grid_select(
                active, uniforms, self.theta_flat, self.b, parent_side
            )
            trace.append((lam, side * side, int(active.sum())))
            if states is not None:
                idx = np.flatnonzero(active)
                states.append(
                    LevelState(level=lam, side=side, rows=idx // side, cols=idx % side)
                )
        idx = np.flatnonzero(active)
        return idx // side, idx % side, trace

    def _run_dcsd(self, seed: int, override, states: list | None):
        cfg = self.cfg
        rows, cols, examined0 = self._level0_cells(seed, override)
        trace = [(0, examined0, int(rows.size))]
        side = self.side0
        bb = self.b * self.b
        if states is not None:
            states.append(LevelState(level=0, side=side, rows=rows, cols=cols))
        for lam in range(1, cfg.tied_levels + 1):
            n_prev = int(rows.size)
            uniforms = level_rng(seed, lam).random(n_prev * bb)
            rows, cols = expand_active(rows, cols, uniforms, self.theta_flat, self.b)
            order = np.lexsort((cols, rows))
            rows, cols = rows[order], cols[order]
            side *= self.b
            trace.append((lam, n_prev * bb, int(rows.size)))
            if states is not None:
                states.append(LevelState(level=lam, side=side, rows=rows, cols=cols))
        return rows, cols, trace

    def _run_gp(self, seed: int, override, states: list | None):
        cfg = self.cfg
        rows, cols, examined0 = self._level0_cells(seed, override)
        trace = [(0, examined0, int(rows.size))]
        side = self.side0
        b = self.b
        bb = b * b
        if states is not None:
            states.append(LevelState(level=0, side=side, rows=rows, cols=cols))
        for lam in range(1, cfg.tied_levels + 1):
            stream = level_rng(seed, lam)
            n_prev = int(rows.size)
            parts_r: list[np.ndarray] = []
            parts_c: list[np.ndarray] = []
            for cls, positions in zip(self._classes, self._class_pos):
                m = positions.size
                total = n_prev * int(m)
                if total == 0 or cls.value == 0.0:
                    continue
                count = binomial_draw(total, cls.value, stream)
                if count == 0:
                    continue
                if cls.value == 1.0:
                    ranks = np.arange(total, dtype=np.int64)
                else:
                    ranks = np.asarray(
                        choose_without_replacement(total, count, stream),
                        dtype=np.int64,
                    )
                parent_idx = ranks // m
                offsets = positions[ranks % m]
                parts_r.append(rows[parent_idx] * b + offsets // b)
                parts_c.append(cols[parent_idx] * b + offsets % b)
            if parts_r:
                rows = np.concatenate(parts_r)
                cols = np.concatenate(parts_c)
                order = np.lexsort((cols, rows))
                rows, cols = rows[order], cols[order]
            else:
                rows = np.empty(0, dtype=np.int64)
                cols = np.empty(0, dtype=np.int64)
            side *= b
            trace.append((lam, n_prev * bb, int(rows.size)))
            if states is not None:
                states.append(LevelState(level=lam, side=side, rows=rows, cols=cols))
        return rows, cols, trace

    def _run_grid_gp(self, seed: int, states: list | None):
        cfg = self.cfg
        if self._grid_tables is None:
            self._grid_tables = grid_groups(cfg, group_cap=self.group_cap)
        classes, groups = self._grid_tables
        stream = level_rng(seed, 0)
        cells: list[tuple[int, int]] = []
        for group in groups:
            if group.prob == 0.0 or group.size == 0:
                continue
            count = binomial_draw(group.size, group.prob, stream)
            if count == 0:
                continue
            if group.prob == 1.0:
                ranks: Sequence[int] = range(group.size)
            else:
                ranks = choose_without_replacement(group.size, count, stream)
            for rank in ranks:
                cells.append(
                    unrank_grid_cell(group, classes, cfg.levels, self.b, rank)
                )
        cells.sort()
        if cells:
            arr = np.asarray(cells, dtype=np.int64)
            rows, cols = arr[:, 0], arr[:, 1]
        else:
            rows = np.empty(0, dtype=np.int64)
            cols = np.empty(0, dtype=np.int64)
        if states is not None:
            states.append(LevelState(level=0, side=cfg.n_nodes, rows=rows, cols=cols))
        examined = (self.b * self.b) ** cfg.levels
        trace = [(0, examined, int(rows.size))]
        return rows, cols, trace

    # -- assembly -----------------------------------------------------------

    def _finish(self, strategy: Strategy, seed: int, rows, cols, trace_entries):
        net = finalize_edges(self.cfg, rows, cols)
        trace = SampleTrace(
            seed=seed,
            strategy=strategy,
            per_level=tuple(LevelTrace(*entry) for entry in trace_entries),
        )
        return net, trace

    def run(
        self,
        strategy: Strategy | str,
        seed: int,
        *,
        level0_override: Iterable[int] | None = None,
        keep_states: bool = False,
    ):
        """Sample once; returns the network and its RV-accounting trace.

        ``level0_override`` is a test-only hook replacing the realized level-0
        cells (given as flat indices) while leaving deeper levels' streams
        untouched; it is rejected for the naive strategy, which has no levels.
        With ``keep_states`` the per-level realized cells are returned as a
        third element, a tuple of :class:`LevelState`.
        """
        strategy = Strategy(strategy)
        seed = check_seed(seed)
        states: list | None = [] if keep_states else None
        if strategy is Strategy.NAIVE:
            if level0_override is not None:
                raise BadArgs("level0_override does not apply to the naive strategy")
            rows, cols, trace = self._run_naive(seed, states)
        elif strategy is Strategy.CI:
            rows, cols, trace = self._run_ci(seed, level0_override, states)
        elif strategy is Strategy.DCSD:
            rows, cols, trace = self._run_dcsd(seed, level0_override, states)
        else:
            rows, cols, trace = self._run_gp(seed, level0_override, states)
        net, sample_trace = self._finish(strategy, seed, rows, cols, trace)
        if keep_states:
            return net, sample_trace, tuple(states)
        return net, sample_trace

    def run_grid_gp(self, seed: int, *, keep_states: bool = False):
        """Sample the plain untied model by whole-grid probability groups."""
        seed = check_seed(seed)
        states: list | None = [] if keep_states else None
        rows, cols, trace = self._run_grid_gp(seed, states)
        net, sample_trace = self._finish(Strategy.GP, seed, rows, cols, trace)
        if keep_states:
            return net, sample_trace, tuple(states)
        return net, sample_trace


def sample_kpgm_naive(
    cfg: ModelConfig, seed: int, *, dense_cap: int = DEFAULT_DENSE_CAP
) -> tuple[SampledNetwork, SampleTrace]:
    """Per-cell Bernoulli over the dense untied probability grid."""
    return ModelSampler(cfg, dense_cap=dense_cap).run(Strategy.NAIVE, seed)


def sample_mkpgm_ci(
    cfg: ModelConfig,
    seed: int,
    *,
    dense_cap: int = DEFAULT_DENSE_CAP,
    level0_override: Iterable[int] | None = None,
) -> tuple[SampledNetwork, SampleTrace]:
    """Full sweep: every candidate RV at every level is examined."""
    return ModelSampler(cfg, dense_cap=dense_cap).run(
        Strategy.CI, seed, level0_override=level0_override
    )


def sample_mkpgm_dcsd(
    cfg: ModelConfig,
    seed: int,
    *,
    level0_override: Iterable[int] | None = None,
) -> tuple[SampledNetwork, SampleTrace]:
    """Pruned sweep: only children of realized cells are examined."""
    return ModelSampler(cfg).run(Strategy.DCSD, seed, level0_override=level0_override)


def sample_mkpgm_gp(
    cfg: ModelConfig,
    seed: int,
    *,
    level0_override: Iterable[int] | None = None,
) -> tuple[SampledNetwork, SampleTrace]:
    """Grouped sampling: per tied level, one binomial count per seed value."""
    return ModelSampler(cfg).run(Strategy.GP, seed, level0_override=level0_override)


def sample_kpgm_gp(
    cfg: ModelConfig, seed: int, *, group_cap: int = DEFAULT_GROUP_CAP
) -> tuple[SampledNetwork, SampleTrace]:
    """Whole-grid grouped sampling of the plain untied model."""
    return ModelSampler(cfg, group_cap=group_cap).run_grid_gp(seed)


def sample(
    cfg: ModelConfig,
    strategy: Strategy | str,
    seed: int,
    *,
    dense_cap: int = DEFAULT_DENSE_CAP,
    group_cap: int = DEFAULT_GROUP_CAP,
) -> tuple[SampledNetwork, SampleTrace]:
    """Dispatch on strategy name; the entry point used by the CLI."""
    return ModelSampler(cfg, dense_cap=dense_cap, group_cap=group_cap).run(
        strategy, seed
    )
