"""Trajectory drivers: single runs, verification, batches, and shared grids.

`run_single` advances one grid until the first row equal to 1 plus one
confirmation row.  Batches either stack independent grids (optionally across
a process pool, sized by the COLLATZ_CA_THREADS environment variable) or
place several inputs on one shared grid, where non-interference is enforced
by a guard gap between adjacent active regions and violations abort with a
collision error rather than ever computing entangled rows.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .digits import apply_map, oracle_trajectory
from .grid import (
    DEFAULT_TICK_CAP,
    Grid,
    cells_value,
    extract_row,
    frontier_row_cells,
    frontier_top_cells,
    init_grid,
    initial_row,
    row_cells,
    run_until_rows_stable,
    step_frontier,
)
from .rules import CAVariant

DEFAULT_MAX_ROWS = 100_000
GUARD_GAP = 2
MODES = ("frontier", "synchronous")


@dataclass
class RunConfig:
    variant: CAVariant
    max_rows: int = DEFAULT_MAX_ROWS
    tick_cap: int = DEFAULT_TICK_CAP
    mode: str = "frontier"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.max_rows < 1 or self.tick_cap < 1:
            raise ValueError("caps must be positive")


@dataclass
class TrajectoryRecord:
    input: int
    variant: CAVariant
    iterates: list[int]
    reached_one: bool
    ca_steps_to_one: int | None
    ticks_used: int

    @property
    def rows_computed(self) -> int:
        return len(self.iterates)


class CollisionError(RuntimeError):
    """Two shared-grid active regions came within the guard gap."""

    def __init__(self, row: int, left_input: int, right_input: int, columns: tuple[int, int]):
        self.row = row
        self.left_input = left_input
        self.right_input = right_input
        self.columns = columns
        super().__init__(
            f"row {row}: runs of {left_input} and {right_input} collide "
            f"around columns {columns[0]}..{columns[1]}"
        )


@dataclass
class BatchConfig:
    inputs: list[int]
    mode: str = "stacked"
    spacings: list[int] | None = None  # None = auto; else one gap per adjacent pair
    guard_gap: int = GUARD_GAP

    def __post_init__(self):
        if self.mode not in ("stacked", "shared"):
            raise ValueError("batch mode must be 'stacked' or 'shared'")
        if self.spacings is not None and len(self.spacings) != max(len(self.inputs) - 1, 0):
            raise ValueError("need exactly one spacing per adjacent input pair")
        if self.guard_gap < 1:
            raise ValueError("guard gap must be positive")


def run_grid(n: int, cfg: RunConfig) -> tuple[Grid, TrajectoryRecord]:
    """Run one input to the stop condition and return the grid with its record."""
    g = init_grid(n, cfg.variant)
    iterates = [extract_row(g, 0)]
    first_one = 0 if iterates[0] == 1 else None
    while len(iterates) < cfg.max_rows:
        if first_one is not None and len(iterates) >= first_one + 2:
            break
        i = len(iterates)
        if cfg.mode == "frontier":
            step_frontier(g)
        else:
            remaining = cfg.tick_cap - g.ticks
            if remaining <= 0:
                raise RuntimeError(f"tick cap {cfg.tick_cap} exhausted at row {i}")
            run_until_rows_stable(g, i, remaining)
        v = extract_row(g, i)
        iterates.append(v)
        if first_one is None and v == 1:
            first_one = i
    return g, TrajectoryRecord(
        input=n,
        variant=cfg.variant,
        iterates=iterates,
        reached_one=first_one is not None,
        ca_steps_to_one=first_one,
        ticks_used=g.ticks,
    )


def run_single(n: int, cfg: RunConfig) -> TrajectoryRecord:
    return run_grid(n, cfg)[1]


@dataclass
class VerifyReport:
    n: int
    variant: CAVariant
    matched: bool
    rows_checked: int
    # (row index, grid value, oracle value) at the first disagreement
    first_divergence: tuple[int, int | None, int | None] | None


def verify_against_oracle(n: int, variant: CAVariant, cfg: RunConfig | None = None) -> VerifyReport:
    """Row-by-row comparison of the automaton against the map oracle.

    The oracle runs from the value the grid actually stores in row 0 (the
    base-4 and base-2 automata strip trailing zero digits at initialization,
    which is the halvings those digits represent).
    """
    if cfg is None:
        cfg = RunConfig(variant=variant)
    elif cfg.variant is not variant:
        cfg = replace(cfg, variant=variant)
    record = run_single(n, cfg)
    oracle = oracle_trajectory(variant.map_variant, record.iterates[0])
    rows = min(len(oracle.iterates), len(record.iterates))
    for i in range(rows):
        if record.iterates[i] != oracle.iterates[i]:
            return VerifyReport(n, variant, False, i + 1, (i, record.iterates[i], oracle.iterates[i]))
    if oracle.reached_one and len(record.iterates) < len(oracle.iterates):
        i = len(record.iterates)
        return VerifyReport(n, variant, False, rows, (i, None, oracle.iterates[i]))
    matched = record.reached_one == oracle.reached_one
    return VerifyReport(n, variant, matched, rows, None)


@dataclass
class Classification:
    kind: str  # "convergent" or "undetermined"
    cycle_witness: int | None = None


def classify_trajectory(n: int, variant: CAVariant, max_steps: int = 1_000_000) -> Classification:
    """Tortoise-and-hare over the map: 1 wins, any other cycle is a witness."""
    if n < 1:
        raise ValueError("n must be positive")
    mv = variant.map_variant
    tortoise = hare = n
    for _ in range(max_steps):
        if tortoise == 1 or hare == 1:
            return Classification("convergent")
        tortoise = apply_map(mv, tortoise)
        hare = apply_map(mv, hare)
        if hare == 1:
            return Classification("convergent")
        hare = apply_map(mv, hare)
        if tortoise == hare and tortoise != 1:
            return Classification("undetermined", cycle_witness=tortoise)
    return Classification("undetermined")


# --- stacked batches ---------------------------------------------------------


def worker_count() -> int:
    """COLLATZ_CA_THREADS: unset -> 1 (sequential), 0 -> all cores, k -> k."""
    raw = os.environ.get("COLLATZ_CA_THREADS")
    if raw is None or raw == "":
        return 1
    k = int(raw)
    if k < 0:
        raise ValueError("COLLATZ_CA_THREADS must be nonnegative")
    return k if k else (os.cpu_count() or 1)


def _stacked_worker(args: tuple[int, RunConfig]) -> TrajectoryRecord:
    n, cfg = args
    return run_single(n, cfg)


def run_batch_stacked(batch: BatchConfig, cfg: RunConfig) -> list[TrajectoryRecord]:
    """Independent grids per input, fanned across a process pool when asked."""
    workers = worker_count()
    if workers <= 1 or len(batch.inputs) < 2:
        return [run_single(n, cfg) for n in batch.inputs]
    chunk = max(1, len(batch.inputs) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_stacked_worker, ((n, cfg) for n in batch.inputs), chunksize=chunk))


# --- shared grids ------------------------------------------------------------


@dataclass
class _SharedRun:
    input: int
    bottom: dict[int, int]
    top: dict[int, int] | None
    values: list[int] = field(default_factory=list)
    first_one: int | None = None


def _check_gaps(runs: list[_SharedRun], row: int, guard: int) -> None:
    for run in runs:
        if not run.bottom:
            raise RuntimeError(f"run of input {run.input} vanished at row {row}")
    for r in range(len(runs) - 1):
        right, left = runs[r], runs[r + 1]  # columns grow leftward
        hi_right = max(right.bottom)
        lo_left = min(left.bottom)
        if lo_left - hi_right - 1 < guard:
            raise CollisionError(row, left.input, right.input, (hi_right, lo_left))


def _shared_attempt(
    inputs: list[int], spacings: list[int], cfg: RunConfig, guard: int
) -> list[TrajectoryRecord]:
    variant = cfg.variant
    runs: list[_SharedRun] = []
    k = 0
    for idx, n in enumerate(inputs):
        if idx > 0:
            k += spacings[idx - 1]
        row0 = initial_row(n, variant, k)
        cells = row_cells(row0, variant)
        top = frontier_top_cells(cells) if variant is CAVariant.CA1 else None
        runs.append(_SharedRun(input=n, bottom=cells, top=top))
        runs[-1].values.append(row0.value())
        if runs[-1].values[0] == 1:
            runs[-1].first_one = 0
        k += len(row0) - 1  # next input is placed relative to this one's top digit
    _check_gaps(runs, 0, guard)
    row = 0
    while row < cfg.max_rows:
        done = all(r.first_one is not None for r in runs)
        if done and row >= max(r.first_one for r in runs) + 1:
            break
        row += 1
        for r in runs:
            r.bottom = frontier_row_cells(variant, r.bottom, r.top)
            if variant is CAVariant.CA1:
                r.top = frontier_top_cells(r.bottom)
            v = cells_value(r.bottom, variant)
            r.values.append(v)
            if r.first_one is None and v == 1:
                r.first_one = row
        _check_gaps(runs, row, guard)
    records = []
    for r in runs:
        stop = r.first_one + 2 if r.first_one is not None else len(r.values)
        records.append(
            TrajectoryRecord(
                input=r.input,
                variant=variant,
                iterates=r.values[:stop],
                reached_one=r.first_one is not None,
                ca_steps_to_one=r.first_one,
                ticks_used=row,
            )
        )
    return records


def _auto_spacing(inputs: list[int], cfg: RunConfig, guard: int) -> int:
    """Upper bound on leftward drift: at most one net column per computed row."""
    worst = 0
    for n in inputs:
        rep = oracle_trajectory(cfg.variant.map_variant, n, cap=cfg.max_rows)
        if rep.steps_to_one is None:
            raise RuntimeError(f"cannot estimate spacing: {n} did not reach 1")
        worst = max(worst, rep.steps_to_one)
    return worst + 2 * guard + 2


def run_shared_grid(batch: BatchConfig, cfg: RunConfig) -> list[TrajectoryRecord]:
    """All inputs on one grid, spaced so their active regions stay apart.

    Explicit spacings are tried once and a collision propagates; automatic
    spacing starts from a drift bound and doubles it on collision, up to
    three retries.
    """
    if not batch.inputs:
        return []
    if any(n < 1 for n in batch.inputs):
        raise ValueError("inputs must be positive")
    if batch.spacings is not None:
        return _shared_attempt(batch.inputs, batch.spacings, cfg, batch.guard_gap)
    eps = _auto_spacing(batch.inputs, cfg, batch.guard_gap)
    attempts = 4
    for attempt in range(attempts):
        try:
            return _shared_attempt(
                batch.inputs, [eps] * (len(batch.inputs) - 1), cfg, batch.guard_gap
            )
        except CollisionError:
            if attempt == attempts - 1:
                raise
            eps *= 2
    raise AssertionError("unreachable")


def run_batch(batch: BatchConfig, cfg: RunConfig) -> list[TrajectoryRecord]:
    if batch.mode == "stacked":
        return run_batch_stacked(batch, cfg)
    return run_shared_grid(batch, cfg)
