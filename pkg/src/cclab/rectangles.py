"""Monochromatic rectangle machinery.

Rectangles are product sets (row subset) x (col subset) on which the
sign matrix is constant.  This module checks monochromaticity,
enumerates all maximal monochromatic rectangles (a Galois/closure
enumeration over columns), finds a maximum-area one by branch and
bound, and computes the cover number C(f) exactly (branch-and-bound
set cover over maximal rectangles, greedy incumbent, fooling-set lower
bound) or greedily.

Determinism: every search breaks ties lexicographically, results are
identical across runs for the same inputs and limits.  Subsets are
manipulated as Python integer bitmasks internally and exposed as
sorted index tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .limits import BudgetExceeded, Meter, SearchLimits
from .matrix import BoolFun

EXACT = "exact"
UPPER_BOUND = "upper_bound"
BOUNDS = "bounds"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Rectangle:
    """A combinatorial rectangle, optionally carrying its constant sign."""

    row_set: tuple
    col_set: tuple
    color: int | None = None

    def __post_init__(self):
        rows = tuple(sorted(set(int(r) for r in self.row_set)))
        cols = tuple(sorted(set(int(c) for c in self.col_set)))
        if not rows or not cols:
            raise ValueError("rectangle sides must be non-empty")
        if self.color not in (None, 1, -1):
            raise ValueError("color must be +1, -1 or None")
        object.__setattr__(self, "row_set", rows)
        object.__setattr__(self, "col_set", cols)

    @property
    def area(self) -> int:
        return len(self.row_set) * len(self.col_set)

    def key(self):
        return (self.row_set, self.col_set)


@dataclass(frozen=True)
class Cover:
    """A set of colored rectangles jointly covering every cell."""

    rects: tuple
    exactness: str  # EXACT | UPPER_BOUND

    @property
    def size(self) -> int:
        return len(self.rects)


@dataclass(frozen=True)
class EnumerationResult:
    rects: tuple
    truncated: bool


@dataclass(frozen=True)
class CoverResult:
    """Outcome of cover_number: exact, bounds (search limits hit), or
    inconclusive (the maximal-rectangle universe itself was truncated).
    A valid cover witnessing ``upper`` is attached whenever one exists."""

    status: str  # EXACT | BOUNDS | INCONCLUSIVE
    cover: Cover | None
    lower: int
    upper: int | None
    nodes: int = 0

    @property
    def value(self) -> int:
        if self.status != EXACT:
            raise ValueError(f"cover number not exact (status={self.status})")
        return self.upper


def check_monochromatic(f: BoolFun, r: Rectangle) -> int | None:
    """The constant sign of f on r, or None if f is not constant there."""
    if r.row_set[-1] >= f.rows or r.col_set[-1] >= f.cols:
        raise ValueError("rectangle indices out of range")
    sub = f.sign[np.ix_(r.row_set, r.col_set)]
    v = int(sub[0, 0])
    return v if np.all(sub == v) else None


def _mask_to_tuple(mask: int) -> tuple:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _col_row_masks(sign, color: int):
    """For each column, the bitmask of rows matching ``color``."""
    nr, nc = sign.shape
    eq = (sign == color)
    masks = []
    for y in range(nc):
        m = 0
        for x in range(nr):
            if eq[x, y]:
                m |= 1 << x
        masks.append(m)
    return masks


def _concepts(sign, color: int):
    """Yield (row_mask, col_mask) for every maximal monochromatic
    rectangle of the given color, via Close-by-One over columns."""
    nr, nc = sign.shape
    col_rows = _col_row_masks(sign, color)
    full_rows = (1 << nr) - 1

    def cols_of(amask):
        out = 0
        for y in range(nc):
            if col_rows[y] & amask == amask:
                out |= 1 << y
        return out

    def cbo(a, b, y_start):
        if a and b:
            yield a, b
        for y in range(y_start, nc):
            if b >> y & 1:
                continue
            a2 = a & col_rows[y]
            if a2 == 0:
                continue
            b2 = cols_of(a2)
            if (b2 & ~b) & ((1 << y) - 1):
                continue
            yield from cbo(a2, b2, y + 1)

    a0 = full_rows
    yield from cbo(a0, cols_of(a0), 0)


def enumerate_maximal_mono(f: BoolFun, budget: int = 200_000) -> EnumerationResult:
    """All maximal monochromatic rectangles, in lexicographic order of
    (row_set, col_set).  If more than ``budget`` exist, the first
    ``budget`` found are returned with the truncated flag set."""
    if budget < 1:
        raise ValueError("budget must be positive")
    found = []
    truncated = False
    for color in (1, -1):
        for a, b in _concepts(f.sign, color):
            if len(found) >= budget:
                truncated = True
                break
            found.append(Rectangle(_mask_to_tuple(a), _mask_to_tuple(b),
                                   color=color))
        if truncated:
            break
    found.sort(key=Rectangle.key)
    return EnumerationResult(rects=tuple(found), truncated=truncated)


def max_mono_rectangle(f: BoolFun) -> Rectangle:
    """A maximum-area monochromatic rectangle, ties broken
    lexicographically by (row_set, col_set).

    Branch and bound over subsets of the shorter side, keeping for each
    partial subset the full set of compatible indices on the other side.
    """
    transposed = f.rows > f.cols
    sign = f.sign.T if transposed else f.sign
    n_side, n_other = sign.shape
    best: list = [0, None, None]  # area, key, color

    for color in (1, -1):
        side_other = _col_row_masks(sign.T, color)  # per side index: mask of other
        full_other = (1 << n_other) - 1

        def consider(chosen_mask, other_mask, n_chosen, n_other_set):
            area = n_chosen * n_other_set
            if area < best[0]:
                return
            srows = _mask_to_tuple(chosen_mask)
            srest = _mask_to_tuple(other_mask)
            key = (srest, srows) if transposed else (srows, srest)
            if area > best[0] or key < best[1]:
                best[0], best[1], best[2] = area, key, color

        def dfs(i, chosen_mask, other_mask, n_chosen):
            if n_chosen:
                consider(chosen_mask, other_mask, n_chosen,
                         other_mask.bit_count())
            rem = 0
            for j in range(i, n_side):
                if side_other[j] & other_mask:
                    rem += 1
            if (n_chosen + rem) * other_mask.bit_count() < best[0]:
                return
            for j in range(i, n_side):
                m2 = other_mask & side_other[j]
                if m2 == 0:
                    continue
                dfs(j + 1, chosen_mask | (1 << j), m2, n_chosen + 1)

        dfs(0, 0, full_other, 0)

    rows, cols = best[1]
    return Rectangle(rows, cols, color=best[2])


def fooling_set_cells(f: BoolFun) -> tuple:
    """Greedy fooling set: cells no two of which fit in one
    monochromatic rectangle.  Each needs its own cover rectangle, so
    the size lower-bounds the cover number."""
    sign = f.sign
    kept = []
    for x in range(f.rows):
        for y in range(f.cols):
            v = sign[x, y]
            ok = True
            for (x2, y2, v2) in kept:
                if v == v2 and sign[x, y2] == v and sign[x2, y] == v:
                    ok = False  # compatible with a kept cell
                    break
            if ok:
                kept.append((x, y, int(v)))
    return tuple(kept)


def fooling_set_bound(f: BoolFun) -> int:
    return len(fooling_set_cells(f))


def validate_cover(f: BoolFun, cover: Cover) -> bool:
    """Independent re-validation: every rectangle monochromatic with its
    stated color, and every cell covered."""
    seen = 0
    full = (1 << (f.rows * f.cols)) - 1
    for r in cover.rects:
        if r.color is None or check_monochromatic(f, r) != r.color:
            return False
        seen |= _cells_mask(f.cols, r)
    return seen == full


def _cells_mask(n_cols: int, r: Rectangle) -> int:
    m = 0
    for x in r.row_set:
        base = x * n_cols
        for y in r.col_set:
            m |= 1 << (base + y)
    return m


def _closure_at(f: BoolFun, x: int, y: int) -> Rectangle:
    """The maximal monochromatic rectangle obtained by closing {x} x {y}."""
    v = int(f.sign[x, y])
    cols = [yy for yy in range(f.cols) if f.sign[x, yy] == v]
    rows = [xx for xx in range(f.rows)
            if all(f.sign[xx, yy] == v for yy in cols)]
    cols = [yy for yy in range(f.cols)
            if all(f.sign[xx, yy] == v for xx in rows)]
    return Rectangle(tuple(rows), tuple(cols), color=v)


def _greedy_cover(f: BoolFun, rects, cell_masks) -> list:
    """Greedy cover: (indices into rects, extra closure rectangles).

    The extras are only needed when the enumerated universe was
    truncated and left cells uncoverable."""
    full = (1 << (f.rows * f.cols)) - 1
    uncovered = full
    chosen = []
    extra = []
    while uncovered:
        best_idx = -1
        best_cov = 0
        for idx, cm in enumerate(cell_masks):
            cov = (cm & uncovered).bit_count()
            if cov > best_cov:
                best_cov = cov
                best_idx = idx
        if best_idx < 0:
            cell = (uncovered & -uncovered).bit_length() - 1
            rect = _closure_at(f, cell // f.cols, cell % f.cols)
            extra.append(rect)
            uncovered &= ~_cells_mask(f.cols, rect)
        else:
            chosen.append(best_idx)
            uncovered &= ~cell_masks[best_idx]
    return chosen, extra


def cover_number(f: BoolFun, mode: str = EXACT,
                 limits: SearchLimits | None = None) -> CoverResult:
    """The cover number C(f): minimum count of monochromatic rectangles
    covering all cells (overlaps allowed).

    mode="greedy": a valid cover by repeated best-coverage choice,
    reported as an upper bound.  mode="exact": branch-and-bound set
    cover over the maximal rectangles with the greedy value as
    incumbent; limit exhaustion yields explicit bounds, never a wrong
    exact claim.  Every returned cover is re-validated.
    """
    if mode not in (EXACT, "greedy"):
        raise ValueError("mode must be 'exact' or 'greedy'")
    limits = limits or SearchLimits()
    enum = enumerate_maximal_mono(f, budget=limits.rect_budget)
    rects = list(enum.rects)
    cell_masks = [_cells_mask(f.cols, r) for r in rects]
    fooling = fooling_set_cells(f)
    fooling_mask = 0
    for (fx, fy, _) in fooling:
        fooling_mask |= 1 << (fx * f.cols + fy)
    lower = max(1, len(fooling))

    greedy_idx, extra = _greedy_cover(f, rects, cell_masks)
    greedy_rects = tuple(rects[i] for i in greedy_idx) + tuple(extra)
    greedy_cover = Cover(rects=greedy_rects, exactness=UPPER_BOUND)
    if not validate_cover(f, greedy_cover):
        raise AssertionError("greedy cover failed re-validation")

    if mode == "greedy":
        return CoverResult(status=BOUNDS, cover=greedy_cover,
                           lower=lower, upper=greedy_cover.size)

    if enum.truncated:
        return CoverResult(status=INCONCLUSIVE, cover=greedy_cover,
                           lower=lower, upper=greedy_cover.size)

    # A rectangle only covers cells of its own color, so the cover
    # splits into two independent set covers, one per color.
    meter = Meter(limits)
    exact_done = True
    chosen_all = []
    lower_total = 0
    for color in (1, -1):
        cells_c = 0
        for x in range(f.rows):
            for y in range(f.cols):
                if f.sign[x, y] == color:
                    cells_c |= 1 << (x * f.cols + y)
        if cells_c == 0:
            continue
        incumbent = [i for i in greedy_idx if rects[i].color == color]
        fool_c = fooling_mask & cells_c
        sel, done = _exact_color_cover(
            cells_c, [i for i, r in enumerate(rects) if r.color == color],
            cell_masks, incumbent, fool_c, meter)
        chosen_all.extend(sel)
        lower_total += len(sel) if done else max(1, fool_c.bit_count())
        exact_done = exact_done and done

    final = Cover(rects=tuple(rects[i] for i in sorted(chosen_all)),
                  exactness=EXACT if exact_done else UPPER_BOUND)
    if not validate_cover(f, final):
        raise AssertionError("cover failed re-validation")

    if exact_done:
        return CoverResult(status=EXACT, cover=final, lower=final.size,
                           upper=final.size, nodes=meter.nodes)
    return CoverResult(status=BOUNDS, cover=final, lower=lower_total,
                       upper=final.size, nodes=meter.nodes)


def _exact_color_cover(universe, rect_ids, cell_masks, incumbent,
                       fooling_mask, meter):
    """Branch-and-bound set cover of one color class.

    Returns (selection, completed): the best selection found (always a
    valid cover of ``universe``) and whether minimality was proved
    within the meter's budget.
    """
    best_sel = list(incumbent)
    best_size = len(incumbent)
    if max(1, fooling_mask.bit_count()) >= best_size:
        return best_sel, True

    cand_by_cell = {}
    cells = []
    u = universe
    while u:
        low = u & -u
        cell = low.bit_length() - 1
        cells.append(cell)
        u ^= low
        cand = [i for i in rect_ids if cell_masks[i] >> cell & 1]
        cand.sort(key=lambda i: (-cell_masks[i].bit_count(), i))
        cand_by_cell[cell] = cand
    # Branch on fooling cells first (they pin distinct rectangles), then
    # scarce cells.
    cell_order = sorted(cells, key=lambda c: (not (fooling_mask >> c & 1),
                                              len(cand_by_cell[c]), c))
    seen = {}  # uncovered mask -> fewest rectangles used to reach it

    def rec(uncovered, chosen):
        nonlocal best_sel, best_size
        meter.tick()
        if uncovered == 0:
            if len(chosen) < best_size:
                best_size = len(chosen)
                best_sel = list(chosen)
            return
        if len(chosen) + 1 >= best_size:
            return
        prev = seen.get(uncovered)
        if prev is not None and prev <= len(chosen):
            return
        if len(seen) < 1_000_000:
            seen[uncovered] = len(chosen)
        # Uncovered fooling cells each need their own rectangle.
        need = (fooling_mask & uncovered).bit_count()
        if len(chosen) + max(need, 1) >= best_size:
            return
        maxcov = 0
        for i in rect_ids:
            c = (cell_masks[i] & uncovered).bit_count()
            if c > maxcov:
                maxcov = c
        need = -(-uncovered.bit_count() // maxcov)
        if len(chosen) + need >= best_size:
            return
        cell = next(c for c in cell_order if uncovered >> c & 1)
        cands = cand_by_cell[cell]
        # Dominance: drop a candidate whose remaining coverage sits inside
        # another candidate's (the dominator is always at least as good;
        # on equal coverage keep the earlier index).
        covs = [cell_masks[i] & uncovered for i in cands]
        for a, ridx in enumerate(cands):
            ca = covs[a]
            dominated = False
            for b, cb in enumerate(covs):
                if a != b and ca | cb == cb and (ca != cb or b < a):
                    dominated = True
                    break
            if dominated:
                continue
            chosen.append(ridx)
            rec(uncovered & ~ca, chosen)
            chosen.pop()

    try:
        rec(universe, [])
        return best_sel, True
    except BudgetExceeded:
        return best_sel, False


# ---------------------------------------------------------------------------
# File formats.  .rect: row indices line, col indices line, optional
# color line (+1/-1).  Cover file: a count line, then rectangle blocks
# separated by blank lines.
# ---------------------------------------------------------------------------

def parse_rect(text: str, line_offset: int = 0) -> Rectangle:
    lines = [ln.rstrip("\r") for ln in text.split("\n")]
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) < 2:
        raise ParseError("rectangle needs a row line and a col line",
                         line_offset + 1)
    try:
        rows = tuple(int(t) for t in lines[0].split())
        cols = tuple(int(t) for t in lines[1].split())
    except ValueError as e:
        raise ParseError(f"bad index: {e}", line_offset + 1) from None
    color = None
    if len(lines) >= 3:
        tok = lines[2].strip()
        if tok not in ("+1", "-1"):
            raise ParseError("color line must be +1 or -1", line_offset + 3, 1)
        color = 1 if tok == "+1" else -1
    if len(lines) > 3:
        raise ParseError("unexpected extra content", line_offset + 4, 1)
    return Rectangle(rows, cols, color=color)


def format_rect(r: Rectangle) -> str:
    out = [" ".join(str(i) for i in r.row_set),
           " ".join(str(i) for i in r.col_set)]
    if r.color is not None:
        out.append("+1" if r.color == 1 else "-1")
    return "\n".join(out) + "\n"


def parse_cover(text: str) -> Cover:
    chunks = [c for c in text.replace("\r\n", "\n").split("\n\n") if c.strip()]
    if not chunks:
        raise ParseError("empty cover file", 1)
    head = chunks[0].split("\n", 1)
    try:
        count = int(head[0].strip())
    except ValueError:
        raise ParseError("first line must be the rectangle count", 1) from None
    blocks = ([head[1]] if len(head) > 1 and head[1].strip() else []) + chunks[1:]
    rects = tuple(parse_rect(b) for b in blocks)
    if len(rects) != count:
        raise ParseError(f"count line says {count}, found {len(rects)} blocks", 1)
    return Cover(rects=rects, exactness=UPPER_BOUND)


def format_cover(cover: Cover) -> str:
    return "\n".join([str(cover.size)] + [format_rect(r) for r in cover.rects])


def read_rect(path) -> Rectangle:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rect(fh.read())


def write_rect(path, r: Rectangle) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_rect(r))
