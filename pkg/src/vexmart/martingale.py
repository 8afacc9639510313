"""Adapted sequences, conditional expectation, Doob maximal and conditional
square functions, and stopping times on atom filtrations.

Conventions: the maximal and square functions use f_{-1} = f_0 (so the 0-th
increment vanishes); the shifted stop used by the BMO module uses f_{-1} = 0,
the only choice under which ||f - f^{tau-1}|| controls f on {tau = 0}.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ResourceError, ValidationError
from .space import FilteredSpace, as_leaf_values

INF = math.inf
ENUMERATION_CAP = 10**6
TOWER_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Martingale:
    """Adapted sequence, one leaf-indexed function per filtration level."""

    space: FilteredSpace
    levels: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "levels",
            tuple(tuple(float(x) for x in lv) for lv in self.levels),
        )

    @cached_property
    def arrays(self) -> np.ndarray:
        """(N+1, n_leaves) matrix of level values, read-only."""
        return _readonly(np.array(self.levels, dtype=float))

    @property
    def terminal(self) -> np.ndarray:
        return self.arrays[-1]

    def scaled(self, c: float) -> "Martingale":
        return Martingale(
            self.space, tuple(tuple(c * x for x in lv) for lv in self.levels)
        )


def make_martingale(
    space: FilteredSpace,
    levels: Sequence[Sequence[float]],
    check: bool = True,
) -> Martingale:
    """Validated constructor: per-level measurability and the tower
    property E(f_{n+1} | F_n) = f_n within an absolute tolerance."""
    arr = np.asarray(levels, dtype=float)
    if arr.shape != (space.depth + 1, space.n_leaves):
        raise ValidationError(
            f"expected {space.depth + 1} levels of {space.n_leaves} values, "
            f"got shape {arr.shape}"
        )
    if check:
        tol = TOWER_TOL * max(1.0, float(np.abs(arr).max()))
        for n in range(space.depth + 1):
            proj = space.block_average(arr[n], n)
            if np.max(np.abs(proj - arr[n])) > tol:
                raise ValidationError(
                    f"level {n} is not measurable with respect to its partition"
                )
        for n in range(space.depth):
            back = space.block_average(arr[n + 1], n)
            if np.max(np.abs(back - arr[n])) > tol:
                raise ValidationError(
                    f"tower property fails between levels {n} and {n + 1}"
                )
    return Martingale(space, tuple(tuple(row) for row in arr))


def cond_expect(
    space: FilteredSpace, f: Sequence[float], level: int
) -> np.ndarray:
    """E(f | F_level): probability-weighted average on each block."""
    if not 0 <= level <= space.depth:
        raise ValidationError(f"level {level} outside 0..{space.depth}")
    return space.block_average(as_leaf_values(space, f), level)


def martingale_from_terminal(
    space: FilteredSpace, f_inf: Sequence[float]
) -> Martingale:
    """The martingale f_n = E(f_inf | F_n)."""
    v = as_leaf_values(space, f_inf)
    levels = tuple(
        tuple(space.block_average(v, n)) for n in range(space.depth + 1)
    )
    return Martingale(space, levels)


def maximal(f: Martingale, upto: int | None = None) -> np.ndarray:
    """Doob maximal function: pointwise max of |f_n| over n <= upto."""
    m = f.space.depth if upto is None else upto
    return np.abs(f.arrays[: m + 1]).max(axis=0)


def cond_square(f: Martingale, upto: int | None = None) -> np.ndarray:
    """Conditional square function s_m(f): square root of the cumulative
    conditioned squared increments (the 0-th increment is zero since
    f_{-1} = f_0)."""
    m = f.space.depth if upto is None else upto
    acc = np.zeros(f.space.n_leaves)
    for n in range(1, m + 1):
        df = f.arrays[n] - f.arrays[n - 1]
        acc += f.space.block_average(df * df, n - 1)
    return np.sqrt(acc)


@dataclass(frozen=True)
class StoppingTime:
    """Per-leaf stop level in {0, ..., N} or math.inf ('never stop')."""

    stop_level: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "stop_level", tuple(float(t) for t in self.stop_level)
        )

    @cached_property
    def vals(self) -> np.ndarray:
        return _readonly(np.array(self.stop_level, dtype=float))

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.vals)


def validate_stopping_time(
    space: FilteredSpace, stop_level: Sequence[float]
) -> StoppingTime:
    """Accepts iff {tau = n} is a union of level-n blocks for every n."""
    vals = [float(t) for t in stop_level]
    if len(vals) != space.n_leaves:
        raise ValidationError(
            f"expected {space.n_leaves} stop levels, got {len(vals)}"
        )
    for t in vals:
        if not (math.isinf(t) or (t == int(t) and 0 <= t <= space.depth)):
            raise ValidationError(
                f"stop level {t} outside {{0..{space.depth}}} and infinity"
            )
    for n in range(space.depth + 1):
        for b, block in enumerate(space.levels[n]):
            hits = [leaf for leaf in block if vals[leaf] == n]
            if hits and len(hits) != len(block):
                raise ValidationError(
                    f"{{tau = {n}}} splits level-{n} block {b} {block}: "
                    "not measurable"
                )
    return StoppingTime(tuple(vals))


def stop(f: Martingale, tau: StoppingTime, shift: str = "none") -> Martingale:
    """Stopped martingale f^tau, or the shifted variant f^{tau-1} used by
    the BMO norm (shift="minus-one", value 0 where tau = 0).

    The shifted sequence is adapted but generally fails the tower property,
    since tau - 1 is not a stopping time; no validation is applied.
    """
    if shift not in ("none", "minus-one"):
        raise ValidationError(f"unknown shift mode {shift!r}")
    space = f.space
    t = tau.vals if shift == "none" else tau.vals - 1.0
    levels = []
    for n in range(space.depth + 1):
        idx = np.minimum(float(n), t)
        row = np.where(
            idx < 0,
            0.0,
            np.take_along_axis(
                f.arrays,
                np.maximum(idx, 0.0).astype(np.intp)[None, :],
                axis=0,
            )[0],
        )
        levels.append(tuple(row))
    return Martingale(space, tuple(levels))


def _count_node(space: FilteredSpace, level: int, block_pos: int, memo) -> int:
    key = (level, block_pos)
    if key in memo:
        return memo[key]
    if level == space.depth:
        memo[key] = 2  # stop at N, or never
        return 2
    total = 1
    for child in space.children[level][block_pos]:
        total *= _count_node(space, level + 1, child, memo)
    memo[key] = 1 + total
    return 1 + total


def count_stopping_times(space: FilteredSpace) -> int:
    """Number of stopping times of the filtration (antichains of the tree,
    counting 'never stop' continuations)."""
    memo: dict = {}
    total = 1
    for b in range(len(space.levels[0])):
        total *= _count_node(space, 0, b, memo)
    return total


def _node_matrix(space: FilteredSpace, level: int, block_pos: int) -> np.ndarray:
    """All stop assignments for the leaves of one block, rows in a fixed
    deterministic order: stop-here first, then the cartesian product of the
    children's assignments."""
    block = space.levels[level][block_pos]
    if level == space.depth:
        return np.array([[float(level)], [INF]])
    parts = [
        _node_matrix(space, level + 1, child)
        for child in space.children[level][block_pos]
    ]
    combo = parts[0]
    for part in parts[1:]:
        m, k = combo.shape[0], part.shape[0]
        combo = np.hstack(
            [np.repeat(combo, k, axis=0), np.tile(part, (m, 1))]
        )
    # children are visited in child order; reorder columns to leaf order
    child_leaves: list[int] = []
    for child in space.children[level][block_pos]:
        child_leaves.extend(space.levels[level + 1][child])
    order = np.argsort(np.argsort(child_leaves))
    combo = combo[:, np.argsort(child_leaves)]
    del order
    stop_row = np.full((1, len(block)), float(level))
    # combo columns are now in ascending leaf order; block is ascending too
    if tuple(sorted(block)) != tuple(sorted(child_leaves)):
        raise ValidationError("filtration children do not cover their block")
    return np.vstack([stop_row, combo])


def enumerate_stopping_matrix(
    space: FilteredSpace, cap: int = ENUMERATION_CAP
) -> np.ndarray:
    """All stopping times as a (count, n_leaves) matrix of stop levels
    (inf for 'never'), deterministic order.  Internal fast path."""
    count = count_stopping_times(space)
    if count > cap:
        raise ResourceError(
            f"{count} stopping times exceed cap {cap}; use sampling mode"
        )
    combo = None
    col_leaves: list[int] = []
    for b, block in enumerate(space.levels[0]):
        part = _node_matrix(space, 0, b)
        col_leaves.extend(sorted(block))
        if combo is None:
            combo = part
        else:
            m, k = combo.shape[0], part.shape[0]
            combo = np.hstack(
                [np.repeat(combo, k, axis=0), np.tile(part, (m, 1))]
            )
    assert combo is not None
    out = np.empty_like(combo)
    out[:, np.array(col_leaves, dtype=np.intp)] = combo
    return out


def enumerate_stopping_times(
    space: FilteredSpace, cap: int = ENUMERATION_CAP
) -> tuple[StoppingTime, ...]:
    """Exhaustive enumeration by recursive stop/continue labeling of the
    filtration tree."""
    matrix = enumerate_stopping_matrix(space, cap)
    return tuple(StoppingTime(tuple(row)) for row in matrix)


def sample_stopping_times(
    space: FilteredSpace, count: int, seed: int = 0
) -> tuple[StoppingTime, ...]:
    """Seeded random stopping times; always includes tau = 0 and
    tau = infinity first."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    rng = random.Random(f"vexmart-stopping:{seed}")
    out = [
        StoppingTime((0.0,) * space.n_leaves),
        StoppingTime((INF,) * space.n_leaves),
    ][:count]
    while len(out) < count:
        vals = [0.0] * space.n_leaves

        def descend(level: int, block_pos: int) -> None:
            at_bottom = level == space.depth
            if rng.random() < 0.5:
                for leaf in space.levels[level][block_pos]:
                    vals[leaf] = float(level)
                return
            if at_bottom:
                for leaf in space.levels[level][block_pos]:
                    vals[leaf] = INF
                return
            for child in space.children[level][block_pos]:
                descend(level + 1, child)

        for b in range(len(space.levels[0])):
            descend(0, b)
        out.append(StoppingTime(tuple(vals)))
    return tuple(out)


def stopped_terminal_diffs(
    f: Martingale, tau_matrix: np.ndarray, shift: str = "minus-one"
) -> np.ndarray:
    """(f - f^{tau-1})_N (or unshifted f - f^tau) per leaf, for a whole
    matrix of stopping times at once."""
    t = tau_matrix if shift == "none" else tau_matrix - 1.0
    n = float(f.space.depth)
    idx = np.minimum(t, n)
    gather = np.where(
        idx < 0,
        0.0,
        f.arrays[np.maximum(idx, 0.0).astype(np.intp), np.arange(f.space.n_leaves)],
    )
    return f.terminal[None, :] - gather
