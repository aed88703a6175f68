"""Protocol trees and exact deterministic communication complexity.

A protocol tree is a rooted binary tree.  Each internal node names a
speaker and carries an explicit subset of that speaker's indices in
the ROOT index space: inputs in the subset branch to child1, the rest
to child0 (one bit per node, any speaker may speak at any node).
Leaves carry output bits.  Trees are immutable and validated on
construction: every predicate must be contained in the set of inputs
that can still reach its node.

``balance`` restructures a tree with many leaves into a shallow one:
find a subtree holding between 1/3 and 2/3 of the leaves, have both
players announce whether their input is consistent with reaching it,
and recurse on the four residual protocols.  The output depth is at
most ceil(2 * log_{3/2} leaf_count).

``exact_cc`` computes D(f) by memoized min-max search over submatrix
pairs, with rank and fooling-set lower bounds and a distinct-row
protocol as the incumbent upper bound.  Exhausting the caps yields an
explicit interval, never a wrong exact claim.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StructureError
from .limits import BudgetExceeded, Meter, SearchLimits
from .matrix import BoolFun, exact_rank
from .rectangles import fooling_set_bound

ALICE = "alice"
BOB = "bob"


@dataclass(frozen=True)
class Leaf:
    output: int


@dataclass(frozen=True)
class Node:
    speaker: str
    subset: frozenset
    child0: object
    child1: object


class ProtocolTree:
    """Immutable, validated protocol tree over a rows x cols input space."""

    __slots__ = ("root", "n_rows", "n_cols", "leaf_count", "depth")

    def __init__(self, root, n_rows: int, n_cols: int):
        if n_rows < 1 or n_cols < 1:
            raise StructureError("input space must be non-empty")
        leaves, depth = _check(root, frozenset(range(n_rows)),
                               frozenset(range(n_cols)))
        self.root = root
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.leaf_count = leaves
        self.depth = depth

    def __eq__(self, other):
        return (isinstance(other, ProtocolTree) and self.root == other.root
                and self.n_rows == other.n_rows and self.n_cols == other.n_cols)

    def __repr__(self):
        return (f"<ProtocolTree {self.n_rows}x{self.n_cols} "
                f"leaves={self.leaf_count} depth={self.depth}>")


def _check(node, rx, ry):
    if isinstance(node, Leaf):
        if node.output not in (0, 1):
            raise StructureError(f"leaf output must be 0 or 1, got {node.output}")
        return 1, 0
    if not isinstance(node, Node):
        raise StructureError(f"not a tree node: {node!r}")
    if node.speaker not in (ALICE, BOB):
        raise StructureError(f"unknown speaker {node.speaker!r}")
    side = rx if node.speaker == ALICE else ry
    if not node.subset <= side:
        raise StructureError(
            "predicate is not a subset of the inputs reaching its node")
    if node.speaker == ALICE:
        l1, d1 = _check(node.child1, node.subset, ry)
        l0, d0 = _check(node.child0, rx - node.subset, ry)
    else:
        l1, d1 = _check(node.child1, rx, node.subset)
        l0, d0 = _check(node.child0, rx, ry - node.subset)
    return l1 + l0, 1 + max(d1, d0)


def evaluate(t: ProtocolTree, x: int, y: int):
    """Run the protocol on (x, y): returns (output bit, bit transcript)."""
    if not (0 <= x < t.n_rows and 0 <= y < t.n_cols):
        raise ValueError("input out of range")
    node = t.root
    bits = []
    while isinstance(node, Node):
        b = 1 if (x if node.speaker == ALICE else y) in node.subset else 0
        bits.append(b)
        node = node.child1 if b else node.child0
    return node.output, tuple(bits)


def verify(t: ProtocolTree, f: BoolFun) -> bool:
    """Exhaustive check that the tree computes f on every input."""
    if t.n_rows != f.rows or t.n_cols != f.cols:
        raise ValueError("tree and function index spaces differ")
    for x in range(f.rows):
        for y in range(f.cols):
            if evaluate(t, x, y)[0] != f.f_value(x, y):
                return False
    return True


# ---------------------------------------------------------------------------
# Balancing
# ---------------------------------------------------------------------------

def _simplify(node, rx, ry):
    """Restrict a tree to the input rectangle rx x ry, collapsing nodes
    whose predicate no longer splits and normalizing predicates to the
    reachable sets.  Empty context yields a dummy leaf."""
    if not rx or not ry:
        return Leaf(0)
    if isinstance(node, Leaf):
        return node
    side = rx if node.speaker == ALICE else ry
    s1 = side & node.subset
    s0 = side - node.subset
    if not s1:
        return _simplify(node.child0, rx, ry)
    if not s0:
        return _simplify(node.child1, rx, ry)
    if node.speaker == ALICE:
        return Node(ALICE, s1, _simplify(node.child0, s0, ry),
                    _simplify(node.child1, s1, ry))
    return Node(BOB, s1, _simplify(node.child0, rx, s0),
                _simplify(node.child1, rx, s1))


def _leaf_total(node) -> int:
    if isinstance(node, Leaf):
        return 1
    return _leaf_total(node.child0) + _leaf_total(node.child1)


def _find_split_node(root, lo, hi):
    """Deepest node whose subtree has a leaf count in [lo, hi]; ties go
    to the earlier preorder position (node, child0, child1)."""
    best = []  # depth, preorder, node, path tuple
    counter = [0]

    def walk(node, depth, path):
        pre = counter[0]
        counter[0] += 1
        if isinstance(node, Leaf):
            cnt = 1
        else:
            path.append((node, 0))
            c0 = walk(node.child0, depth + 1, path)
            path[-1] = (node, 1)
            c1 = walk(node.child1, depth + 1, path)
            path.pop()
            cnt = c0 + c1
        if lo <= cnt <= hi:
            if not best or depth > best[0] or (depth == best[0] and pre < best[1]):
                best[:] = [depth, pre, node, tuple(path)]
        return cnt

    walk(root, 0, [])
    return (best[2], best[3]) if best else (None, None)


def _balance_rec(node, rx, ry):
    # node is simplified with respect to (rx, ry), both non-empty
    if isinstance(node, Leaf):
        return node
    total = _leaf_total(node)
    lo = -(-total // 3)
    hi = (2 * total) // 3
    centroid, path = _find_split_node(node, lo, hi)
    if centroid is None:
        raise StructureError("no balancing split node exists")  # unreachable

    sa, sb = rx, ry
    for anc, bit in path:
        if anc.speaker == ALICE:
            sa = sa & anc.subset if bit else sa - anc.subset
        else:
            sb = sb & anc.subset if bit else sb - anc.subset

    def residual(crx, cry):
        if not crx or not cry:
            return Leaf(0)
        return _balance_rec(_simplify(node, crx, cry), crx, cry)

    sub11 = _balance_rec(_simplify(centroid, sa, sb), sa, sb)
    sub10 = residual(sa, ry - sb)
    sub01 = residual(rx - sa, sb)
    sub00 = residual(rx - sa, ry - sb)
    return Node(ALICE, sa,
                Node(BOB, sb, sub00, sub01),
                Node(BOB, sb, sub10, sub11))


def balance(t: ProtocolTree) -> ProtocolTree:
    """Equivalent tree of depth <= ceil(2 * log_{3/2} leaf_count).

    A single-leaf tree is returned unchanged.
    """
    if isinstance(t.root, Leaf):
        return t
    rx = frozenset(range(t.n_rows))
    ry = frozenset(range(t.n_cols))
    root = _balance_rec(_simplify(t.root, rx, ry), rx, ry)
    return ProtocolTree(root, t.n_rows, t.n_cols)


# ---------------------------------------------------------------------------
# Exact communication complexity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CCResult:
    """Exact D(f) (lower == upper) or an explicit interval on caps."""

    status: str  # "exact" | "interval"
    lower: int
    upper: int
    nodes: int = 0

    @property
    def value(self) -> int:
        if self.status != "exact":
            raise ValueError("communication complexity not computed exactly")
        return self.upper


def _ceil_log2(k: int) -> int:
    return (k - 1).bit_length() if k >= 1 else 0


def exact_cc(f: BoolFun, caps: SearchLimits | None = None) -> CCResult:
    """Exact deterministic communication complexity by exhaustive
    protocol search, memoized over canonicalized submatrices.

    Intended for desk-scale matrices (up to ~8x8).  On cap exhaustion
    returns the interval [best lower bound, trivial protocol depth].
    """
    caps = caps or SearchLimits()
    meter = Meter(caps)
    sign = tuple(tuple(int(v) for v in row) for row in f.sign)
    nr, nc = f.rows, f.cols
    memo = {}
    rank_memo = {}

    def bits(mask):
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def dedup(rmask, cmask):
        rows = bits(rmask)
        cols = bits(cmask)
        seen = set()
        keep = 0
        for x in rows:
            key = tuple(sign[x][y] for y in cols)
            if key not in seen:
                seen.add(key)
                keep |= 1 << x
        rows = bits(keep)
        seen = set()
        keepc = 0
        for y in cols:
            key = tuple(sign[x][y] for x in rows)
            if key not in seen:
                seen.add(key)
                keepc |= 1 << y
        return keep, keepc

    def canon(sub):
        rows = sorted(set(sub))
        colsT = sorted(set(zip(*rows)))
        rows2 = tuple(zip(*colsT))
        return (len(rows2), len(colsT),
                bytes(1 if v == 1 else 0 for row in rows2 for v in row))

    def rank_of(key, sub):
        rk = rank_memo.get(key)
        if rk is None:
            rk = exact_rank(sub)
            rank_memo[key] = rk
        return rk

    def solve(rmask, cmask):
        meter.tick()
        rmask, cmask = dedup(rmask, cmask)
        rows = bits(rmask)
        cols = bits(cmask)
        sub = tuple(tuple(sign[x][y] for y in cols) for x in rows)
        if len(rows) == 1 and len(cols) == 1:
            return 0  # deduped to a single value: constant
        key = canon(sub)
        hit = memo.get(key)
        if hit is not None:
            return hit
        dr, dc = len(rows), len(cols)
        best = min(_ceil_log2(dr) + 1, _ceil_log2(dc) + 1)
        lo = max(1, _ceil_log2(rank_of(key, sub)))
        if best > lo:
            for side_rows in (True, False):
                idxs = rows if side_rows else cols
                k = len(idxs)
                if k < 2:
                    continue
                rest = idxs[1:]
                for pick in range(2 ** (k - 1) - 1):
                    pmask = 1 << idxs[0]
                    for b, idx in enumerate(rest):
                        if pick >> b & 1:
                            pmask |= 1 << idx
                    qmask = (rmask if side_rows else cmask) ^ pmask
                    if side_rows:
                        d1 = solve(pmask, cmask)
                        if d1 + 1 >= best:
                            continue
                        d2 = solve(qmask, cmask)
                    else:
                        d1 = solve(rmask, pmask)
                        if d1 + 1 >= best:
                            continue
                        d2 = solve(rmask, qmask)
                    val = 1 + max(d1, d2)
                    if val < best:
                        best = val
                        if best == lo:
                            break
                if best == lo:
                    break
        memo[key] = best
        return best

    full_r = (1 << nr) - 1
    full_c = (1 << nc) - 1
    if f.is_constant():
        return CCResult(status="exact", lower=0, upper=0, nodes=0)
    root_lo = max(1, _ceil_log2(exact_rank(sign)),
                  _ceil_log2(fooling_set_bound(f)))
    dr = len({row for row in sign})
    dc = len({col for col in zip(*sign)})
    root_hi = min(_ceil_log2(dr) + 1, _ceil_log2(dc) + 1)
    try:
        val = solve(full_r, full_c)
        return CCResult(status="exact", lower=val, upper=val, nodes=meter.nodes)
    except BudgetExceeded:
        return CCResult(status="interval", lower=root_lo, upper=root_hi,
                        nodes=meter.nodes)


# ---------------------------------------------------------------------------
# Serialization: nested {speaker, subset, child0, child1} / {output}
# records, wrapped with the input-space dimensions.
# ---------------------------------------------------------------------------

def _node_to_obj(node):
    if isinstance(node, Leaf):
        return {"output": node.output}
    return {"speaker": node.speaker,
            "subset": sorted(node.subset),
            "child0": _node_to_obj(node.child0),
            "child1": _node_to_obj(node.child1)}


def _node_from_obj(obj):
    if not isinstance(obj, dict):
        raise StructureError("tree node must be an object")
    if "output" in obj:
        return Leaf(output=obj["output"])
    try:
        return Node(speaker=obj["speaker"],
                    subset=frozenset(int(i) for i in obj["subset"]),
                    child0=_node_from_obj(obj["child0"]),
                    child1=_node_from_obj(obj["child1"]))
    except KeyError as e:
        raise StructureError(f"tree node missing field {e}") from None


def tree_to_obj(t: ProtocolTree) -> dict:
    return {"rows": t.n_rows, "cols": t.n_cols, "tree": _node_to_obj(t.root)}


def tree_from_obj(obj) -> ProtocolTree:
    if not isinstance(obj, dict) or "tree" not in obj:
        raise StructureError("protocol file must hold {rows, cols, tree}")
    return ProtocolTree(_node_from_obj(obj["tree"]),
                        int(obj["rows"]), int(obj["cols"]))
