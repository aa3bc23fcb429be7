"""Sparse grids and the two execution engines for the digit automata.

A grid is a list of rows, one per trajectory iterate, each row a sparse
mapping from column index to cell state.  Columns grow to the left: column
j+1 is immediately left of column j.  Row 0 is placed from the input and its
digit cells never change; every later row is derived from the row above it by
the local transition rules.

Two engines advance a grid:

* synchronous stepping is the reference model: conceptually every cell is
  re-evaluated against the pre-tick states each tick.  The implementation is
  event-driven (only cells whose neighborhood changed are re-evaluated), which
  is tick-for-tick identical to the naive sweep because transitions are
  deterministic functions of the neighborhood.
* frontier stepping finalizes one full row per step in dependency order,
  touching each cell once.  It is the default engine.

`row_oracle` mirrors one row-placement step with plain integer arithmetic and
is the ground truth the engines are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .digits import DigitString, odd_part, to_digits
from .rules import (
    ATTR_ODD,
    CAVariant,
    Cell,
    EVEN,
    ODD_NORMAL,
    ODD_SPECIAL,
    TableVariant,
    format_cell,
    transition_ca1_bottom,
    transition_ca1_top,
    transition_ca2,
    transition_ca3,
)

# Cells just outside a row's active window may be evaluated (they must come
# out default); anything non-default there is a rule or window bug.
GROWTH_MARGIN = 2

DEFAULT_TICK_CAP = 10_000_000


class WindowViolationError(RuntimeError):
    """A non-default state was produced outside the row's active window."""


class NonContiguousRowError(RuntimeError):
    """A row's non-default cells do not form one contiguous run."""


@dataclass
class StepStats:
    tick: int
    cells_changed: int
    rows_stable: int


@dataclass
class Grid:
    variant: CAVariant
    origin: int
    bottom: list[dict[int, int]]
    top: list[dict[int, int]] | None  # parity layer, base-3 automaton only
    row0_lo: int
    row0_hi: int
    check_windows: bool = False
    ticks: int = 0
    _dirty: set | None = None
    _tops_swept: int = -1

    @property
    def rows(self) -> int:
        return len(self.bottom)

    def active_window(self, i: int) -> tuple[int, int]:
        """Inclusive column bounds that can hold non-default cells in row i.

        The base-3 automaton keeps its left edge and extends right one column
        per odd row; the other two keep their right edge and drift left, by at
        most one (base 4) or two (base 2) columns per row.
        """
        if self.variant is CAVariant.CA1:
            return (self.row0_lo - i - GROWTH_MARGIN, self.row0_hi + GROWTH_MARGIN)
        if self.variant is CAVariant.CA2:
            return (self.row0_lo - GROWTH_MARGIN, self.row0_hi + i + GROWTH_MARGIN)
        return (self.row0_lo - GROWTH_MARGIN, self.row0_hi + 2 * i + GROWTH_MARGIN)

    def get_cell(self, i: int, j: int, layer: int = 0) -> Cell:
        rows = self.bottom if layer == 0 else self.top
        if rows is None or i < 0 or i >= len(rows):
            return None
        return rows[i].get(j)


def init_grid(
    n: int, variant: CAVariant, origin_column: int = 0, check_windows: bool = False
) -> Grid:
    """Place the digits of n as row 0.

    The base-2 automaton stores the odd part of n (trailing zero bits are one
    halving each, already done); the base-4 automaton likewise drops trailing
    zero digits, so its row 0 holds n with every factor of four divided out.
    Parity attributes tag the value actually stored in the row.
    """
    if n < 1:
        raise ValueError("grid input must be a positive integer")
    row0 = initial_row(n, variant, origin_column)
    g = Grid(
        variant=variant,
        origin=origin_column,
        bottom=[row_cells(row0, variant)],
        top=[{}] if variant is CAVariant.CA1 else None,
        row0_lo=origin_column,
        row0_hi=origin_column + len(row0) - 1,
        check_windows=check_windows,
    )
    return g


def initial_row(n: int, variant: CAVariant, origin_column: int = 0) -> DigitString:
    if variant is CAVariant.CA1:
        return to_digits(n, 3, origin_column)
    if variant is CAVariant.CA2:
        m = n
        while m % 4 == 0:
            m //= 4
        return to_digits(m, 4, origin_column)
    return to_digits(odd_part(n), 2, origin_column)


def row_cells(row: DigitString, variant: CAVariant) -> dict[int, int]:
    """Sparse cell states for one row, including explicit zero digits."""
    if variant is CAVariant.CA2:
        attr = ATTR_ODD if row.value() & 1 else 0
        return {row.offset + p: d | attr for p, d in enumerate(row.digits)}
    return {row.offset + p: d for p, d in enumerate(row.digits)}


def ca1_top_states(row: DigitString) -> dict[int, int]:
    """Fixpoint of the parity sweep over one base-3 row.

    The state above a digit is the parity of the digit sum from the most
    significant digit through that column; an odd total leaves the append
    marker one column right of the units digit.
    """
    out: dict[int, int] = {}
    p = 0
    for pos in range(len(row.digits) - 1, -1, -1):
        p = (p + row.digits[pos]) & 1
        out[row.offset + pos] = ODD_NORMAL if p else EVEN
    if p:
        out[row.offset - 1] = ODD_SPECIAL
    return out


# --- arithmetic row oracle --------------------------------------------------


def row_oracle(x: DigitString, variant: CAVariant) -> DigitString:
    """The row the automaton must produce below x, by integer arithmetic.

    Placement mirrors the carries: a stripped odd step lands k columns left of
    x's units when k trailing zero digits were removed, a base-4 halving lands
    one column left, and a base-3 halving keeps the dividend's width (so
    leading zero digits survive) and shifts right one column on odd rows,
    where the dividend gains an appended 1.
    """
    val = x.value()
    if val < 1:
        raise ValueError("rows represent positive integers")
    if variant is CAVariant.CA3:
        if val % 2 == 0:
            raise ValueError("base-2 rows are always odd")
        m = 3 * val + 1
        k = 0
        while m % 2 == 0:
            m //= 2
            k += 1
        return to_digits(m, 2, x.offset + k)
    if variant is CAVariant.CA2:
        if val % 2 == 0:
            return to_digits(val // 2, 4, x.offset + 1)
        m = 3 * val + 1
        k = 0
        while m % 4 == 0:
            m //= 4
            k += 1
        return to_digits(m, 4, x.offset + k)
    # base 3: long division by two, width preserved
    if val % 2 == 0:
        dividend = list(x.digits)
        offset = x.offset
    else:
        dividend = [1] + list(x.digits)
        offset = x.offset - 1
    out = []
    r = 0
    for d in reversed(dividend):
        q, r = divmod(3 * r + d, 2)
        out.append(q)
    if r:
        raise AssertionError("base-3 halving left a remainder")
    out.reverse()
    return DigitString(base=3, digits=out, offset=offset)


def oracle_rows(
    n: int, variant: CAVariant, extra_rows: int = 1, max_rows: int = 100_000
) -> list[DigitString]:
    """Row 0 and every oracle successor until 1, plus extra_rows beyond it."""
    rows = [initial_row(n, variant)]
    while rows[-1].value() != 1:
        if len(rows) > max_rows:
            raise RuntimeError(f"no 1 within {max_rows} oracle rows for n={n}")
        rows.append(row_oracle(rows[-1], variant))
    for _ in range(extra_rows):
        rows.append(row_oracle(rows[-1], variant))
    return rows


# --- frontier engine ---------------------------------------------------------


def frontier_row_cells(
    variant: CAVariant,
    prev_bottom: dict[int, int],
    prev_top: dict[int, int] | None = None,
) -> dict[int, int]:
    """Compute a full successor row from a finalized previous row.

    Cells are visited right to left so same-row right neighbors are already
    final when read.  The scanned range covers every column the new row can
    reach from the previous one.
    """
    out: dict[int, int] = {}
    if not prev_bottom:
        return out
    lo = min(prev_bottom)
    hi = max(prev_bottom)
    if variant is CAVariant.CA3:
        for j in range(lo, hi + 3):
            st = transition_ca3(
                (prev_bottom.get(j), prev_bottom.get(j - 1), prev_bottom.get(j - 2), out.get(j - 1))
            )
            if st is not None:
                out[j] = st
    elif variant is CAVariant.CA2:
        for j in range(lo, hi + 2):
            st = transition_ca2((prev_bottom.get(j), prev_bottom.get(j - 1), out.get(j - 1)))
            if st is not None:
                out[j] = st
    else:
        if prev_top is None:
            raise ValueError("base-3 rows need the previous row's parity layer")
        for j in range(lo - 1, hi + 1):
            st = transition_ca1_bottom(
                (
                    prev_bottom.get(j),
                    prev_top.get(j),
                    prev_bottom.get(j - 1),
                    prev_top.get(j - 1),
                    out.get(j - 1),
                )
            )
            if st is not None:
                out[j] = st
    return out


def frontier_top_cells(bottom: dict[int, int]) -> dict[int, int]:
    """Parity sweep over a finalized base-3 row, left to right."""
    out: dict[int, int] = {}
    if not bottom:
        return out
    lo, hi = min(bottom), max(bottom)
    for j in range(hi, lo - 2, -1):
        st = transition_ca1_top((bottom.get(j), out.get(j + 1)))
        if st is not None:
            out[j] = st
    return out


def _check_window(g: Grid, i: int, cells: dict[int, int]) -> None:
    w_lo, w_hi = g.active_window(i)
    for j in cells:
        if j < w_lo or j > w_hi:
            raise WindowViolationError(
                f"{g.variant.value} row {i}: non-default cell at column {j} "
                f"outside window [{w_lo}, {w_hi}]"
            )


def step_frontier(g: Grid) -> StepStats:
    """Finalize the next row (and, for base 3, its parity layer)."""
    i = len(g.bottom)
    if g.variant is CAVariant.CA1:
        while g._tops_swept < i - 1:
            k = g._tops_swept + 1
            g.top[k] = frontier_top_cells(g.bottom[k])
            if g.check_windows:
                _check_window(g, k, g.top[k])
            g._tops_swept = k
        new = frontier_row_cells(g.variant, g.bottom[i - 1], g.top[i - 1])
    else:
        new = frontier_row_cells(g.variant, g.bottom[i - 1])
    if g.check_windows:
        _check_window(g, i, new)
    g.bottom.append(new)
    if g.variant is CAVariant.CA1:
        g.top.append(frontier_top_cells(new))
        if g.check_windows:
            _check_window(g, i, g.top[i])
        g._tops_swept = i
    g.ticks += 1
    return StepStats(tick=g.ticks, cells_changed=len(new), rows_stable=len(g.bottom))


# --- synchronous engine ------------------------------------------------------


def _dependents(variant: CAVariant, layer: int, i: int, j: int) -> tuple:
    if variant is CAVariant.CA3:
        return ((0, i + 1, j), (0, i + 1, j + 1), (0, i + 1, j + 2), (0, i, j + 1))
    if variant is CAVariant.CA2:
        return ((0, i + 1, j), (0, i + 1, j + 1), (0, i, j + 1))
    if layer == 0:
        return ((0, i + 1, j), (0, i + 1, j + 1), (1, i, j), (0, i, j + 1))
    return ((0, i + 1, j), (0, i + 1, j + 1), (1, i, j - 1))


def _seed_dirty(g: Grid) -> None:
    dirty = set()
    for i, row in enumerate(g.bottom):
        for j in row:
            dirty.update(_dependents(g.variant, 0, i, j))
    if g.top is not None:
        for i, row in enumerate(g.top):
            for j in row:
                dirty.update(_dependents(g.variant, 1, i, j))
    g._dirty = dirty


def _evaluate(g: Grid, layer: int, i: int, j: int) -> Cell:
    bottom = g.bottom
    if g.variant is CAVariant.CA3:
        prev = bottom[i - 1]
        return transition_ca3((prev.get(j), prev.get(j - 1), prev.get(j - 2), bottom[i].get(j - 1)))
    if g.variant is CAVariant.CA2:
        prev = bottom[i - 1]
        return transition_ca2((prev.get(j), prev.get(j - 1), bottom[i].get(j - 1)))
    if layer == 1:
        return transition_ca1_top((bottom[i].get(j), g.top[i].get(j + 1)))
    prev, ptop = bottom[i - 1], g.top[i - 1]
    return transition_ca1_bottom(
        (prev.get(j), ptop.get(j), prev.get(j - 1), ptop.get(j - 1), bottom[i].get(j - 1))
    )


def ensure_rows(g: Grid, count: int) -> None:
    """Materialize empty rows so the grid holds at least `count` rows."""
    while len(g.bottom) < count:
        i = len(g.bottom)
        g.bottom.append({})
        if g.top is not None:
            g.top.append({})
        if g._dirty is not None:
            # wake the cells of the new row that can see the row above
            for j in g.bottom[i - 1]:
                g._dirty.update(_dependents(g.variant, 0, i - 1, j))
            if g.top is not None:
                for j in g.top[i - 1]:
                    g._dirty.update(_dependents(g.variant, 1, i - 1, j))


def step_synchronous(g: Grid) -> StepStats:
    """One synchronous tick: every cell reacts to the pre-tick states.

    Event-driven: only cells whose neighborhood changed last tick (or that see
    the initial digits) are re-evaluated.  Cells with an unchanged
    neighborhood would reproduce their current state, so skipping them leaves
    the tick's outcome identical to the naive full sweep.  Transient states
    (from neighborhoods that were still settling) are re-evaluated until the
    row reaches its fixpoint.
    """
    if g._dirty is None:
        _seed_dirty(g)
    updates: list[tuple[int, int, int, Cell]] = []
    deferred = set()
    nrows = len(g.bottom)
    for layer, i, j in g._dirty:
        if i >= nrows:
            deferred.add((layer, i, j))  # row not materialized yet
            continue
        if layer == 0 and i == 0:
            continue  # the input row is immutable
        if g.top is None and layer == 1:
            continue
        w_lo, w_hi = g.active_window(i)
        if j < w_lo - GROWTH_MARGIN or j > w_hi + GROWTH_MARGIN:
            continue
        new = _evaluate(g, layer, i, j)
        rows = g.bottom if layer == 0 else g.top
        if new != rows[i].get(j):
            if g.check_windows and new is not None and (j < w_lo or j > w_hi):
                raise WindowViolationError(
                    f"{g.variant.value} row {i}: cell at column {j} left window [{w_lo}, {w_hi}]"
                )
            updates.append((layer, i, j, new))
    dirty = deferred
    min_row = nrows
    for layer, i, j, new in updates:
        rows = g.bottom if layer == 0 else g.top
        if new is None:
            rows[i].pop(j, None)
        else:
            rows[i][j] = new
        dirty.update(_dependents(g.variant, layer, i, j))
        dirty.add((layer, i, j))  # its own neighborhood includes same-row cells
        if i < min_row:
            min_row = i
    g._dirty = dirty
    g.ticks += 1
    return StepStats(
        tick=g.ticks,
        cells_changed=len(updates),
        rows_stable=min_row if updates else nrows,
    )


def run_until_rows_stable(g: Grid, m: int, tick_cap: int = DEFAULT_TICK_CAP) -> Grid:
    """Advance synchronously until rows 0..m survive a full tick unchanged.

    A row's fixpoint depends only on the rows above it, so once a tick changes
    nothing at or below row m those rows are final.
    """
    if m < 0:
        raise ValueError("row index must be nonnegative")
    ensure_rows(g, m + 1)
    for _ in range(tick_cap):
        stats = step_synchronous(g)
        if stats.cells_changed == 0 or stats.rows_stable > m:
            return g
    raise RuntimeError(f"rows 0..{m} did not stabilize within {tick_cap} ticks")


# --- row extraction and snapshots -------------------------------------------


def cells_value(cells: dict[int, int], variant: CAVariant) -> int | None:
    """Integer represented by one contiguous run of digit cells."""
    if not cells:
        return None
    cols = sorted(cells)
    if cols[-1] - cols[0] + 1 != len(cols):
        raise NonContiguousRowError(f"cells at columns {cols} are not contiguous")
    base = variant.base
    v = 0
    for j in reversed(cols):
        d = cells[j]
        if variant is CAVariant.CA2:
            d &= 3
        v = v * base + d
    return v


def extract_row(g: Grid, i: int) -> int | None:
    """Value of row i, or None if the row holds no cells yet."""
    if i < 0 or i >= len(g.bottom):
        raise IndexError(f"row {i} is not materialized")
    return cells_value(g.bottom[i], g.variant)


def snapshot(g: Grid) -> str:
    """Plain-text dump: `variant rows cols origin` then one line per row.

    Tokens run left to right from the highest rendered column down to the
    lowest; the header's last field is that lowest (rightmost) column.  The
    base-3 automaton emits two lines per row: digits, then the parity layer.
    """
    occupied = [row for row in g.bottom if row]
    if g.top is not None:
        occupied += [row for row in g.top if row]
    if occupied:
        lo = min(min(row) for row in occupied)
        hi = max(max(row) for row in occupied)
    else:
        lo, hi = g.origin, g.origin
    cols = hi - lo + 1
    tv = {CAVariant.CA1: TableVariant.CA1_BOTTOM, CAVariant.CA2: TableVariant.CA2,
          CAVariant.CA3: TableVariant.CA3}[g.variant]
    lines = [f"{g.variant.value} {len(g.bottom)} {cols} {lo}"]
    for i in range(len(g.bottom)):
        lines.append(" ".join(format_cell(tv, g.bottom[i].get(j)) for j in range(hi, lo - 1, -1)))
        if g.top is not None:
            lines.append(
                " ".join(
                    format_cell(TableVariant.CA1_TOP, g.top[i].get(j))
                    for j in range(hi, lo - 1, -1)
                )
            )
    return "\n".join(lines) + "\n"
