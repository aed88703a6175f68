"""Recursive protocol construction from large monochromatic rectangles.

The engine: find a large monochromatic rectangle R of the current
subfunction (directly, or through the lift-and-extract pipeline), use
the rank split to decide which player announces consistency with R,
and recurse into the stacked block containing R (rank drops to at most
(rk+3)/2) or its complement (the input space shrinks).  Base cases:
single-cell submatrices, and rank < 5 via the distinct-row protocol
(at most 16 row classes, hence at most 32 leaves).

Rows and columns are deduplicated once at the top, which caps the cell
count at 2**(2*rank) and makes the shrink-step budget checkable.  The
trace records every step; rank_steps/shrink_steps are maxima over
root-to-leaf recursion paths, matching the budgets
ceil(log_{5/4} rank) + 1 and ceil(8 * rank * C**(1/n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError, InvariantError
from .limits import SearchLimits
from .matrix import BoolFun, rank, restrict, xor_power
from .protocol import (ALICE, BOB, CCResult, Leaf, Node, ProtocolTree,
                       balance, exact_cc, verify)
from .rectangles import (EXACT, CoverResult, Rectangle, check_monochromatic,
                         cover_number, max_mono_rectangle)
from .entropy import extract_rectangle

DIRECT_MAX = "direct"
LIFT_EXTRACT = "lift"

ALICE_SENDS = "alice_sends"
BOB_SENDS = "bob_sends"

BASE_LEAF_FACTOR = 32  # distinct-row base case: <= 16 classes x 2 leaves


@dataclass(frozen=True)
class SplitDecision:
    """Outcome of the rank split on a monochromatic rectangle."""

    rect: Rectangle
    side: str  # ALICE_SENDS | BOB_SENDS
    rank_row_block: int  # rank of [R A] = R's rows x all cols
    rank_col_block: int  # rank of [R; B] = all rows x R's cols
    chosen_bound: int    # the chosen side's rank, <= (rank(f)+3)/2


@dataclass(frozen=True)
class BuildStep:
    kind: str  # "split" | "low_rank" | "tiny"
    rows: int
    cols: int
    rank: int
    side: str | None = None
    rect_area: int | None = None
    removed_cells: int | None = None
    area_check: bool | None = None
    shrink_check: bool | None = None


@dataclass(frozen=True)
class BuildTrace:
    steps: tuple
    rank_steps: int    # max over root-leaf recursion paths
    shrink_steps: int  # max over root-leaf recursion paths
    base_case: str     # first base case reached ("low_rank" | "tiny")
    input_rank: int
    cover_value: int | None
    n: int

    def budgets_ok(self) -> bool:
        """Both step budgets, plus every recorded integer check."""
        if self.rank_steps > rank_step_budget(self.input_rank):
            return False
        if self.cover_value is not None:
            if self.shrink_steps > shrink_step_budget(
                    self.input_rank, self.cover_value, self.n):
                return False
        for s in self.steps:
            if s.area_check is False or s.shrink_check is False:
                return False
        return True


def _ceil_nth_root(t, n: int) -> int:
    """Smallest integer s >= 0 with s**n >= t (t may be a Fraction)."""
    if t <= 0:
        return 0
    if t <= 1:
        return 1
    hi = 1
    while hi ** n < t:
        hi *= 2
    lo = hi // 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** n >= t:
            hi = mid
        else:
            lo = mid + 1
    return hi


def _ceil_log_54(k: int) -> int:
    """Smallest r >= 0 with (5/4)**r >= k."""
    r = 0
    num, den = 1, 1
    while num < k * den:
        num *= 5
        den *= 4
        r += 1
    return r


def rank_step_budget(rk: int) -> int:
    return _ceil_log_54(rk) + 1


def shrink_step_budget(rk: int, cover_value, n: int) -> int:
    """ceil(8 * rk * C**(1/n)) evaluated exactly."""
    c = Fraction(cover_value)
    if c < 1:
        raise ValueError("cover value must be >= 1")
    return _ceil_nth_root((8 * rk) ** n * c, n)


def leaf_budget(rk: int, cover_value, n: int):
    """binom(ceil(8*rk*C**(1/n)) + r*, r*) * 32 with
    r* = ceil(log_{5/4} rk) + 1, as an exact big integer."""
    if rk < 1:
        raise ValueError("rank must be >= 1")
    r_star = rank_step_budget(rk)
    s_star = shrink_step_budget(rk, cover_value, n)
    return math.comb(s_star + r_star, r_star) * BASE_LEAF_FACTOR


def _area_guarantee(area: int, cells: int, cover_value: int, n: int) -> bool:
    """Integer form of area >= cells / (4 * C**(1/n))."""
    return (4 * area) ** n * cover_value >= cells ** n


def find_big_rectangle(f: BoolFun, n: int, strategy: str = DIRECT_MAX,
                       cover_value: int | None = None):
    """A large monochromatic rectangle of f.

    strategy "lift": build f^(+n), take its maximum monochromatic
    rectangle and pull it back through extract_rectangle (the literal
    proof path; needs the lift under the desk-scale cap).
    strategy "direct": the maximum monochromatic rectangle of f itself,
    which is at least as large as any extraction can promise.

    Returns (rect, check) where check records, when a cover value for
    f^(+n) is supplied, whether area >= cells / (4 * C**(1/n)) held
    (integer form); check is None when no cover value is known.
    """
    if strategy not in (DIRECT_MAX, LIFT_EXTRACT):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == LIFT_EXTRACT:
        try:
            lift = xor_power(f, n)
        except CapacityError as e:
            raise CapacityError(
                f"{e}; use strategy '{DIRECT_MAX}' for submatrices whose "
                f"lift exceeds the cap") from None
        big = max_mono_rectangle(lift.lifted)
        rect, _, _ = extract_rectangle(lift, big)
    else:
        rect = max_mono_rectangle(f)
    check = None
    if cover_value is not None:
        check = _area_guarantee(rect.area, f.cells, cover_value, n)
    return rect, check


def choose_split(f: BoolFun, R: Rectangle) -> SplitDecision:
    """Decide which player announces consistency with R.

    Computes rank([R A]) (R's rows, all columns) and rank([R; B]) (all
    rows, R's columns) exactly; picks a side whose rank is at most
    (rank(f)+3)/2, preferring the row side.  The rank chain guarantees
    at least one side qualifies; neither qualifying is a bug.
    """
    if check_monochromatic(f, R) is None:
        raise ValueError("R must be monochromatic in f")
    rk = rank(f)
    rank_row = rank(restrict(f, R.row_set, range(f.cols)))
    rank_col = rank(restrict(f, range(f.rows), R.col_set))
    # side qualifies iff 2 * side_rank <= rank(f) + 3
    if 2 * rank_row <= rk + 3:
        side, bound = ALICE_SENDS, rank_row
    elif 2 * rank_col <= rk + 3:
        side, bound = BOB_SENDS, rank_col
    else:
        raise InvariantError(
            f"no qualifying split: rank[R A]={rank_row}, "
            f"rank[R;B]={rank_col}, rank(f)={rk}")
    return SplitDecision(rect=R, side=side, rank_row_block=rank_row,
                         rank_col_block=rank_col, chosen_bound=bound)


def _dedup_classes(f: BoolFun):
    """Row and column classes by content, ordered by first occurrence.

    Returns (row_classes, col_classes): lists of index lists into f.
    """
    row_classes, seen = [], {}
    for x in range(f.rows):
        key = f.sign[x].tobytes()
        if key in seen:
            row_classes[seen[key]].append(x)
        else:
            seen[key] = len(row_classes)
            row_classes.append([x])
    reps = [cls[0] for cls in row_classes]
    col_classes, seen = [], {}
    for y in range(f.cols):
        key = f.sign[np.ix_(reps, [y])].tobytes()
        if key in seen:
            col_classes[seen[key]].append(y)
        else:
            seen[key] = len(col_classes)
            col_classes.append([y])
    return row_classes, col_classes


def build_protocol(f: BoolFun, n: int, strategy: str = DIRECT_MAX,
                   cover_value: int | None = None):
    """Build a protocol tree for f along the rank-splitting recursion.

    Returns (tree, trace) with verify(tree, f) True and the trace
    satisfying both step budgets (auditable when cover_value is the
    exact cover number of f^(+n)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    row_classes, col_classes = _dedup_classes(f)
    reps_r = [cls[0] for cls in row_classes]
    reps_c = [cls[0] for cls in col_classes]
    fd = BoolFun(f.sign[np.ix_(reps_r, reps_c)], label=f.label)

    input_rank = rank(fd)
    if fd.cells > 2 ** (2 * input_rank):
        raise InvariantError("deduplicated cell count exceeds 2**(2*rank)")

    steps = []
    maxima = {"rank": 0, "shrink": 0, "base": None}

    def bump(rsteps, ssteps, kind):
        maxima["rank"] = max(maxima["rank"], rsteps)
        maxima["shrink"] = max(maxima["shrink"], ssteps)
        if maxima["base"] is None:
            maxima["base"] = kind

    def low_rank_tree(cur_rows, cur_cols):
        groups, seen = [], {}
        for x in cur_rows:
            key = tuple(int(fd.sign[x, y]) for y in cur_cols)
            if key in seen:
                groups[seen[key]][1].append(x)
            else:
                seen[key] = len(groups)
                groups.append((x, [x]))
        if len(groups) > 16:
            raise InvariantError("low-rank base case with > 16 row classes")

        def value_leaf(rep):
            ones = frozenset(y for y in cur_cols if fd.sign[rep, y] == -1)
            if not ones:
                return Leaf(0)
            if len(ones) == len(cur_cols):
                return Leaf(1)
            return Node(BOB, ones, Leaf(0), Leaf(1))

        def enc(lo, hi):
            if hi - lo == 1:
                return value_leaf(groups[lo][0])
            mid = (lo + hi) // 2
            first = frozenset(x for _, mem in groups[lo:mid] for x in mem)
            return Node(ALICE, first, enc(mid, hi), enc(lo, mid))

        return enc(0, len(groups))

    def rec(cur_rows, cur_cols, rsteps, ssteps):
        sub = BoolFun(fd.sign[np.ix_(cur_rows, cur_cols)])
        rk = rank(sub)
        cells = sub.cells
        if cells <= 1:
            steps.append(BuildStep("tiny", sub.rows, sub.cols, rk))
            bump(rsteps, ssteps, "tiny")
            return Leaf(int(fd.sign[cur_rows[0], cur_cols[0]] == -1))
        if rk < 5:
            steps.append(BuildStep("low_rank", sub.rows, sub.cols, rk))
            bump(rsteps, ssteps, "low_rank")
            return low_rank_tree(cur_rows, cur_cols)

        rect, area_check = find_big_rectangle(sub, n, strategy, cover_value)
        decision = choose_split(sub, rect)
        if decision.side == ALICE_SENDS:
            in_r = [cur_rows[i] for i in rect.row_set]
            out_r = [r for r in cur_rows if r not in set(in_r)]
            removed = len(in_r) * len(cur_cols)
        else:
            in_c = [cur_cols[i] for i in rect.col_set]
            out_c = [c for c in cur_cols if c not in set(in_c)]
            removed = len(in_c) * len(cur_rows)
        shrink_check = None
        if cover_value is not None:
            shrink_check = _area_guarantee(removed, cells, cover_value, n)
        steps.append(BuildStep(
            "split", sub.rows, sub.cols, rk, side=decision.side,
            rect_area=rect.area, removed_cells=removed,
            area_check=area_check, shrink_check=shrink_check))

        if decision.side == ALICE_SENDS:
            child1 = rec(tuple(in_r), cur_cols, rsteps + 1, ssteps)
            child0 = rec(tuple(out_r), cur_cols, rsteps, ssteps + 1)
            return Node(ALICE, frozenset(in_r), child0, child1)
        child1 = rec(cur_rows, tuple(in_c), rsteps + 1, ssteps)
        child0 = rec(cur_rows, tuple(out_c), rsteps, ssteps + 1)
        return Node(BOB, frozenset(in_c), child0, child1)

    root_d = rec(tuple(range(fd.rows)), tuple(range(fd.cols)), 0, 0)

    def expand(node):
        if isinstance(node, Leaf):
            return node
        classes = row_classes if node.speaker == ALICE else col_classes
        members = frozenset(i for idx in node.subset for i in classes[idx])
        return Node(node.speaker, members, expand(node.child0),
                    expand(node.child1))

    tree = ProtocolTree(expand(root_d), f.rows, f.cols)
    trace = BuildTrace(steps=tuple(steps), rank_steps=maxima["rank"],
                       shrink_steps=maxima["shrink"],
                       base_case=maxima["base"], input_rank=input_rank,
                       cover_value=cover_value, n=n)
    return tree, trace


@dataclass(frozen=True)
class TheoremReport:
    """One row of the lower-bound experiment: exact-or-interval D(f),
    exact-or-bounded C(f^(+n)), and the unitless ratio
    rho = (log2(C)/n + log2 rk) * log2 rk / D, reported for inspection
    and never asserted against a target.  rank 1 makes the bound vacuous
    and sets the degenerate flag."""

    name: str
    rows: int
    cols: int
    rank: int
    d_lo: int
    d_hi: int
    d_exact: bool
    n: int
    c_lo: int
    c_hi: int | None
    c_exact: bool
    log_c: float | None
    rho: float | None
    degenerate: bool
    leaves: int
    balanced_depth: int

    def as_dict(self) -> dict:
        return {
            "name": self.name, "rows": self.rows, "cols": self.cols,
            "rank": self.rank, "D_lo": self.d_lo, "D_hi": self.d_hi,
            "n": self.n, "C_lo": self.c_lo, "C_hi": self.c_hi,
            "logC": self.log_c, "rho": self.rho,
            "degenerate": self.degenerate, "leaves": self.leaves,
            "balanced_depth": self.balanced_depth,
        }


def theorem_report(f: BoolFun, n: int, limits: SearchLimits | None = None,
                   strategy: str = DIRECT_MAX) -> TheoremReport:
    limits = limits or SearchLimits()
    rk = rank(f)
    cc: CCResult = exact_cc(f, limits)
    lift = xor_power(f, n)
    cov: CoverResult = cover_number(lift.lifted, EXACT, limits)
    c_exact = cov.status == EXACT
    cover_value = cov.upper if c_exact else None
    tree, _ = build_protocol(f, n, strategy=strategy, cover_value=cover_value)
    if not verify(tree, f):
        raise InvariantError("built protocol failed verification")
    bal = balance(tree)

    log_c = math.log2(cov.upper) if c_exact else None
    degenerate = rk == 1
    rho = None
    if cc.status == "exact" and c_exact and rk >= 2 and cc.upper > 0:
        rho = (log_c / n + math.log2(rk)) * math.log2(rk) / cc.upper
    return TheoremReport(
        name=f.label or "f", rows=f.rows, cols=f.cols, rank=rk,
        d_lo=cc.lower, d_hi=cc.upper, d_exact=cc.status == "exact",
        n=n, c_lo=cov.lower, c_hi=cov.upper, c_exact=c_exact,
        log_c=log_c, rho=rho, degenerate=degenerate,
        leaves=tree.leaf_count, balanced_depth=bal.depth)
