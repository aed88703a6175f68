"""Boolean functions as explicit sign matrices.

A two-party Boolean function f(x, y) is stored as the matrix whose
(x, y) entry is the sign (-1)**f(x, y), so f = 0 maps to +1 and f = 1
maps to -1.  The XOR-lift of f is then literally the n-fold Kronecker
power of the sign matrix, and rank questions are questions about that
integer matrix over the rationals.

Everything here is exact: rank uses fraction-free elimination with
Python's arbitrary-precision integers, and no floating point appears
anywhere in this module.  All values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ParseError

# Desk-scale guard: matrices (lifted ones included) are capped at 2**24
# cells so that exhaustive verification stays feasible.
DESK_CELL_CAP = 2 ** 24

FAMILIES = ("xor", "and", "eq", "gt", "ip", "random", "const")

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int):
    """Yield the splitmix64 stream for ``seed``.

    This is the single documented generator behind every seeded object:
    state += 0x9E3779B97F4A7C15; z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
    output z ^ (z >> 31).  All arithmetic mod 2**64.
    """
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


class BoolFun:
    """A total Boolean function on [rows] x [cols], held as a +-1 sign matrix.

    ``row_map``/``col_map`` record provenance when the function is a
    restriction of a parent function (local index -> parent index);
    they are None for top-level functions.
    """

    __slots__ = ("sign", "label", "row_map", "col_map")

    def __init__(self, sign, label="", row_map=None, col_map=None):
        arr = np.asarray(sign, dtype=np.int8)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("sign matrix must be 2-D and non-empty")
        if arr.shape[0] * arr.shape[1] > DESK_CELL_CAP:
            raise CapacityError(
                f"matrix has {arr.shape[0] * arr.shape[1]} cells, "
                f"over the desk-scale cap of {DESK_CELL_CAP}")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("sign matrix entries must be exactly +1 or -1")
        arr = arr.copy()
        arr.flags.writeable = False
        self.sign = arr
        self.label = label
        self.row_map = None if row_map is None else tuple(row_map)
        self.col_map = None if col_map is None else tuple(col_map)

    @property
    def rows(self) -> int:
        return self.sign.shape[0]

    @property
    def cols(self) -> int:
        return self.sign.shape[1]

    @property
    def cells(self) -> int:
        return self.rows * self.cols

    def f_value(self, x: int, y: int) -> int:
        """The 0/1 function value at (x, y)."""
        return 0 if self.sign[x, y] == 1 else 1

    def is_constant(self) -> bool:
        return bool(np.all(self.sign == self.sign[0, 0]))

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"<BoolFun{tag} {self.rows}x{self.cols}>"


@dataclass(frozen=True)
class IndexCodec:
    """Mixed-radix bijection between n-tuples and flat indices.

    The first coordinate is most significant, which makes the Kronecker
    power of the sign matrix literally equal to the lifted matrix.
    """

    radix: int
    n: int

    def encode(self, t) -> int:
        if len(t) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(t)}")
        flat = 0
        for v in t:
            if not 0 <= v < self.radix:
                raise ValueError(f"coordinate {v} out of range [0, {self.radix})")
            flat = flat * self.radix + v
        return flat

    def decode(self, flat: int) -> tuple:
        if not 0 <= flat < self.radix ** self.n:
            raise ValueError(f"flat index {flat} out of range")
        out = []
        for _ in range(self.n):
            flat, r = divmod(flat, self.radix)
            out.append(r)
        return tuple(reversed(out))


@dataclass(frozen=True)
class LiftedFun:
    """The XOR-lift f^(+n): base function, lift order, lifted matrix, codecs."""

    base: BoolFun
    n: int
    lifted: BoolFun
    row_codec: IndexCodec
    col_codec: IndexCodec


def make_family(name: str, m: int, seed: int | None = None,
                const_value: int | None = None) -> BoolFun:
    """Build the m x m sign matrix of a named test-fixture family.

    xor    parity of the bitwise XOR of the indices (AND at m=2 style:
           reduces to x XOR y on one bit); rank 1 for every m.
    and    1 iff the indices share a set bit (bitwise AND nonzero);
           reduces to Boolean AND at m=2.
    eq     1 iff x == y.
    gt     1 iff x > y.
    ip     inner product mod 2 of the index bit-vectors; m must be a
           power of two.
    random i.i.d. bits from splitmix64(seed), row-major, one stream
           output per cell, least significant bit.
    const  constant const_value.
    """
    name = name.lower()
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; choose from {FAMILIES}")
    if m < 1:
        raise ValueError("m must be >= 1")

    if name == "random":
        if seed is None:
            raise ValueError("family 'random' requires a seed")
        stream = splitmix64(seed)
        vals = np.fromiter((next(stream) & 1 for _ in range(m * m)),
                           dtype=np.int8, count=m * m).reshape(m, m)
        return BoolFun(1 - 2 * vals, label=f"random{m}_s{seed}")

    if name == "const":
        if const_value not in (0, 1):
            raise ValueError("family 'const' requires const_value of 0 or 1")
        return BoolFun(np.full((m, m), 1 - 2 * const_value, dtype=np.int8),
                       label=f"const{m}_{const_value}")

    if name == "ip" and m & (m - 1) != 0:
        raise ValueError("family 'ip' requires m to be a power of 2")

    x = np.arange(m)
    if name == "xor":
        bits = _parity_vec(x)
        f = bits[:, None] ^ bits[None, :]
    elif name == "and":
        f = ((x[:, None] & x[None, :]) != 0).astype(np.int8)
    elif name == "eq":
        f = (x[:, None] == x[None, :]).astype(np.int8)
    elif name == "gt":
        f = (x[:, None] > x[None, :]).astype(np.int8)
    else:  # ip
        f = np.array([[_popcount_parity(a & b) for b in range(m)] for a in range(m)],
                     dtype=np.int8)
    return BoolFun(1 - 2 * f.astype(np.int8), label=f"{name}{m}")


def _popcount_parity(v: int) -> int:
    return bin(v).count("1") & 1


def _parity_vec(x):
    return np.array([_popcount_parity(int(v)) for v in x], dtype=np.int8)


def xor_power(f: BoolFun, n: int) -> LiftedFun:
    """Lift f to f^(+n): the parity of n independent evaluations of f.

    The lifted sign matrix is the n-fold Kronecker power of f's sign
    matrix, with composite indices encoded most-significant-first.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cells = (f.rows ** n) * (f.cols ** n)
    if cells > DESK_CELL_CAP:
        raise CapacityError(
            f"lift would have {cells} cells, over the desk-scale cap "
            f"of {DESK_CELL_CAP}")
    sign = f.sign
    for _ in range(n - 1):
        sign = np.kron(sign, f.sign)
    label = f"{f.label or 'f'}^xor{n}"
    return LiftedFun(base=f, n=n, lifted=BoolFun(sign, label=label),
                     row_codec=IndexCodec(f.rows, n),
                     col_codec=IndexCodec(f.cols, n))


def exact_rank(mat) -> int:
    """Rank over the rationals of an integer matrix, by fraction-free
    (Bareiss) elimination on Python integers.  No floating point."""
    m = [[int(v) for v in row] for row in mat]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    rank = 0
    prev = 1
    r = 0
    for c in range(nc):
        if r == nr:
            break
        piv = None
        for i in range(r, nr):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nr):
            mic = m[i][c]
            mrc = m[r][c]
            if mic == 0:
                if prev != 1:
                    for j in range(c + 1, nc):
                        m[i][j] = (mrc * m[i][j]) // prev
                else:
                    for j in range(c + 1, nc):
                        m[i][j] = mrc * m[i][j]
            else:
                for j in range(c + 1, nc):
                    m[i][j] = (mrc * m[i][j] - mic * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        rank += 1
    return rank


def rank(f: BoolFun) -> int:
    """Exact rank of f's sign matrix over the rationals."""
    return exact_rank(f.sign.tolist())


def distinct_row_count(f: BoolFun) -> int:
    """Number of distinct rows (always <= 2**rank for a sign matrix)."""
    return len({r.tobytes() for r in f.sign})


def distinct_col_count(f: BoolFun) -> int:
    return len({c.tobytes() for c in f.sign.T})


def restrict(f: BoolFun, row_subset, col_subset) -> BoolFun:
    """The sub-function on row_subset x col_subset.

    Index maps back into f are recorded on the result for traceability.
    """
    rows = sorted(set(int(r) for r in row_subset))
    cols = sorted(set(int(c) for c in col_subset))
    if not rows or not cols:
        raise ValueError("restriction subsets must be non-empty")
    if rows[0] < 0 or rows[-1] >= f.rows or cols[0] < 0 or cols[-1] >= f.cols:
        raise ValueError("restriction index out of range")
    sub = f.sign[np.ix_(rows, cols)]
    label = f"{f.label}|sub" if f.label else "sub"
    return BoolFun(sub, label=label, row_map=rows, col_map=cols)


# ---------------------------------------------------------------------------
# .bfn file format: line 1 "<rows> <cols>", then rows lines of 0/1 f-values,
# then an optional "# label" line.  Line 1 is whitespace-strict; newlines
# may be LF or CRLF.
# ---------------------------------------------------------------------------

def parse_bfn(text: str) -> BoolFun:
    lines = text.split("\n")
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
    if not lines or not lines[0]:
        raise ParseError("empty input, expected '<rows> <cols>'", 1)
    head = lines[0]
    parts = head.split(" ")
    if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
        raise ParseError("header must be exactly '<rows> <cols>'", 1, 1)
    rows, cols = int(parts[0]), int(parts[1])
    if rows < 1 or cols < 1:
        raise ParseError("rows and cols must be >= 1", 1, 1)
    if len(lines) < 1 + rows:
        raise ParseError(f"expected {rows} data lines", len(lines), 1)
    data = np.empty((rows, cols), dtype=np.int8)
    for i in range(rows):
        ln = lines[1 + i]
        if len(ln) != cols:
            raise ParseError(f"expected {cols} characters of 0/1", 2 + i,
                             min(len(ln) + 1, cols + 1))
        for j, ch in enumerate(ln):
            if ch == "0":
                data[i, j] = 1
            elif ch == "1":
                data[i, j] = -1
            else:
                raise ParseError(f"bad character {ch!r}, expected 0 or 1",
                                 2 + i, j + 1)
    label = ""
    for k in range(1 + rows, len(lines)):
        ln = lines[k]
        if not ln.strip():
            continue
        if ln.startswith("#"):
            label = ln[1:].strip()
        else:
            raise ParseError("unexpected trailing content", k + 1, 1)
    return BoolFun(data, label=label)


def format_bfn(f: BoolFun) -> str:
    out = [f"{f.rows} {f.cols}"]
    for i in range(f.rows):
        out.append("".join("0" if v == 1 else "1" for v in f.sign[i]))
    if f.label:
        out.append(f"# {f.label}")
    return "\n".join(out) + "\n"


def read_bfn(path) -> BoolFun:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_bfn(fh.read())


def write_bfn(path, f: BoolFun) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_bfn(f))
