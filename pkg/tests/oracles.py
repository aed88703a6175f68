"""Independent oracles for the test suite.

Everything here recomputes results by definition-level brute force,
deliberately avoiding the library's own algorithms: rank by Fraction
Gaussian elimination (vs fraction-free Bareiss), lifts by direct xor
evaluation (vs Kronecker), rectangles by subset enumeration (vs
closure search), covers by increasing-size combinations (vs branch and
bound), and communication complexity by plain memoized recursion (vs
the canonicalized pruned search).
"""

from fractions import Fraction
from itertools import combinations, product

import numpy as np

from cclab import BoolFun, splitmix64


def rank_fractions(mat) -> int:
    """Rank over the rationals by textbook Gaussian elimination."""
    m = [[Fraction(int(v)) for v in row] for row in mat]
    if not m:
        return 0
    nr, nc = len(m), len(m[0])
    rank = 0
    row = 0
    for col in range(nc):
        piv = None
        for i in range(row, nr):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col]
        m[row] = [v / inv for v in m[row]]
        for i in range(nr):
            if i != row and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[row])]
        row += 1
        rank += 1
    return rank


def brute_lift_sign(f: BoolFun, n: int) -> np.ndarray:
    """Sign matrix of the n-fold xor of f by direct evaluation."""
    rows = f.rows ** n
    cols = f.cols ** n
    out = np.empty((rows, cols), dtype=np.int8)
    xs = list(product(range(f.rows), repeat=n))
    ys = list(product(range(f.cols), repeat=n))
    for i, xt in enumerate(xs):
        for j, yt in enumerate(ys):
            bit = 0
            for a, b in zip(xt, yt):
                bit ^= f.f_value(a, b)
            out[i, j] = 1 - 2 * bit
    return out


def _subsets(n):
    for mask in range(1, 1 << n):
        yield tuple(i for i in range(n) if mask >> i & 1)


def brute_mono_rects(f: BoolFun):
    """Every monochromatic rectangle (rows, cols, color) of a tiny f."""
    out = []
    for rows in _subsets(f.rows):
        for cols in _subsets(f.cols):
            vals = {int(f.sign[x, y]) for x in rows for y in cols}
            if len(vals) == 1:
                out.append((rows, cols, vals.pop()))
    return out


def brute_maximal_rects(f: BoolFun):
    """Maximal monochromatic rectangles by pairwise containment check."""
    rects = brute_mono_rects(f)
    out = []
    for (r, c, v) in rects:
        rs, cs = set(r), set(c)
        maximal = True
        for (r2, c2, v2) in rects:
            if (r, c) != (r2, c2) and rs <= set(r2) and cs <= set(c2):
                maximal = False
                break
        if maximal:
            out.append((r, c, v))
    return sorted(out)


def brute_max_area(f: BoolFun) -> int:
    return max(len(r) * len(c) for (r, c, _) in brute_mono_rects(f))


def brute_min_cover(f: BoolFun) -> int:
    """Exact cover number by trying all combinations of increasing size
    over the brute-force maximal rectangles."""
    rects = brute_maximal_rects(f)
    masks = []
    for (r, c, _) in rects:
        m = 0
        for x in r:
            for y in c:
                m |= 1 << (x * f.cols + y)
        masks.append(m)
    full = (1 << (f.rows * f.cols)) - 1
    for k in range(1, len(masks) + 1):
        for combo in combinations(masks, k):
            u = 0
            for m in combo:
                u |= m
            if u == full:
                return k
    raise AssertionError("no cover found")


def brute_cc(f: BoolFun) -> int:
    """D(f) by plain min-max recursion over submatrix pairs."""
    sign = f.sign
    memo = {}

    def const(rows, cols):
        v = sign[rows[0], cols[0]]
        return all(sign[x, y] == v for x in rows for y in cols)

    def go(rows, cols):
        if const(rows, cols):
            return 0
        key = (rows, cols)
        if key in memo:
            return memo[key]
        best = None
        if len(rows) > 1:
            others = rows[1:]
            for mask in range(2 ** len(others) - 1):
                p = (rows[0],) + tuple(o for i, o in enumerate(others)
                                       if mask >> i & 1)
                q = tuple(r for r in rows if r not in p)
                d = 1 + max(go(p, cols), go(q, cols))
                best = d if best is None else min(best, d)
        if len(cols) > 1:
            others = cols[1:]
            for mask in range(2 ** len(others) - 1):
                p = (cols[0],) + tuple(o for i, o in enumerate(others)
                                       if mask >> i & 1)
                q = tuple(c for c in cols if c not in p)
                d = 1 + max(go(rows, p), go(rows, q))
                best = d if best is None else min(best, d)
        memo[key] = best
        return best

    return go(tuple(range(f.rows)), tuple(range(f.cols)))


def random_sign(rows: int, cols: int, seed: int) -> BoolFun:
    """Seeded random sign matrix for corpus generation (splitmix64)."""
    stream = splitmix64(seed)
    data = np.fromiter((1 - 2 * (next(stream) & 1) for _ in range(rows * cols)),
                       dtype=np.int8, count=rows * cols).reshape(rows, cols)
    return BoolFun(data, label=f"rnd{rows}x{cols}_s{seed}")


def all_sign_matrices(rows: int, cols: int):
    """Every rows x cols sign matrix (use only for tiny shapes)."""
    cells = rows * cols
    for mask in range(1 << cells):
        data = np.array([1 - 2 * (mask >> i & 1) for i in range(cells)],
                        dtype=np.int8).reshape(rows, cols)
        yield BoolFun(data, label=f"m{mask}")
