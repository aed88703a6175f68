"""Shannon-entropy utilities and entropy-based rectangle extraction.

The extraction takes a monochromatic rectangle R of a lifted function
f^(+n) and produces a monochromatic rectangle T of the base f with a
certified size: (4|T|)**n >= |R|, checked in exact integer arithmetic.

The selection stages (coordinate, prefix/suffix, parity bits) are
greedy maximizations of conditional entropies evaluated in double
precision; because each greedy maximum dominates the corresponding
average, the size guarantee is preserved no matter which near-tied
witness the float comparison picks, and the final certificate is
re-verified exactly.  Entropy comparisons treat values within 1e-9 as
tied and break ties lexicographically.

All functions here are pure; inputs are immutable.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantError
from .matrix import LiftedFun
from .rectangles import Rectangle, check_monochromatic

TIE_TOL = 1e-9


@dataclass(frozen=True)
class FiniteDist:
    """A finite distribution with exact rational probabilities.

    Entropy is evaluated in double precision at query time; the
    probabilities themselves stay exact.
    """

    outcomes: tuple  # ((value, Fraction), ...)

    def __post_init__(self):
        vals = [v for v, _ in self.outcomes]
        if len(set(vals)) != len(vals):
            raise ValueError("support values must be distinct")
        total = Fraction(0)
        for _, p in self.outcomes:
            if not isinstance(p, Fraction):
                raise ValueError("probabilities must be Fractions")
            if p < 0:
                raise ValueError("probabilities must be non-negative")
            total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def from_counts(cls, counts: dict) -> "FiniteDist":
        total = sum(counts.values())
        if total <= 0:
            raise ValueError("counts must be positive")
        return cls(tuple(sorted((v, Fraction(c, total))
                                for v, c in counts.items() if c)))

    @classmethod
    def uniform(cls, values) -> "FiniteDist":
        values = list(values)
        return cls(tuple((v, Fraction(1, len(values))) for v in values))


def entropy(d: FiniteDist) -> float:
    """Shannon entropy in bits."""
    h = 0.0
    for _, p in d.outcomes:
        if p > 0:
            pf = float(p)
            h -= pf * math.log2(pf)
    return h


def cond_entropy(joint: dict) -> float:
    """H(A|B) for a joint table {(a, b): probability or count}.

    Weights may be any non-negative numbers; they are normalized.
    """
    if not joint:
        raise ValueError("joint table must be non-empty")
    total = sum(joint.values())
    if total <= 0:
        raise ValueError("joint table must have positive mass")
    b_marg = defaultdict(lambda: 0)
    for (_, b), w in joint.items():
        if w < 0:
            raise ValueError("weights must be non-negative")
        b_marg[b] += w
    h = 0.0
    for (_, b), w in joint.items():
        if w > 0:
            h += w * math.log2(b_marg[b] / w)
    return h / total


def _entropy_of_counts(counts) -> float:
    """Entropy in bits of a distribution proportional to integer counts."""
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c:
            h += c * math.log2(c)
    return math.log2(total) - h / total


def _argmax_tied_lex(items):
    """Running max with a 1e-9 tie tolerance; earlier keys win ties.

    Callers iterate keys in ascending order, so a tie resolves to the
    lexicographically smallest key.  Returns (key, value at key).
    """
    best_key = None
    best_val = 0.0
    for key, val in items:
        if best_key is None or val > best_val + TIE_TOL:
            best_key, best_val = key, val
    return best_key, best_val


@dataclass(frozen=True)
class ConditioningContext:
    """The tuple fixed during extraction: coordinate i (1-based), the
    fixed x-prefix and y-suffix, and the parity bits u, v."""

    i: int
    x_prefix: tuple
    y_suffix: tuple
    u: int
    v: int


@dataclass(frozen=True)
class ExtractionCertificate:
    """Exact record of one extraction, re-verified with big integers.

    size_check is the integer form (4|T|)**n >= |R| of the guarantee
    |T| >= 2**(k/n - 2) with k = log2 |R|.
    """

    i: int
    x_prefix: tuple
    y_suffix: tuple
    u: int
    v: int
    r_size: int
    t_size: int
    color: int
    n: int
    size_check: bool
    coordinate_entropies: tuple  # H(X_i Y_i | X_<i Y_>i) for each i
    stage2_entropy: float        # H(X_i Y_i | x_<i, y_>i)
    stage3_entropy: float        # H(X_i Y_i | x_<i, y_>i, u, v)

    @property
    def holds(self) -> bool:
        return self.size_check

    def as_record(self) -> dict:
        return {
            "i": self.i,
            "x_prefix": list(self.x_prefix),
            "y_suffix": list(self.y_suffix),
            "u": self.u,
            "v": self.v,
            "R_size": self.r_size,
            "T_size": self.t_size,
            "color": self.color,
            "check": f"(4*{self.t_size})^{self.n} >= {self.r_size}: "
                     f"{'pass' if self.size_check else 'FAIL'}",
        }


def _side_groups(tuples, i, prefix_side):
    """Group tuples by their fixed part and count the i-th coordinate.

    prefix_side=True groups x-tuples by x_<i; otherwise y-tuples by y_>i.
    Returns {fixed_part: Counter(coordinate_value)}.
    """
    groups = defaultdict(Counter)
    for t in tuples:
        fixed = t[:i] if prefix_side else t[i + 1:]
        groups[fixed][t[i]] += 1
    return groups


def _grouped_cond_entropy(groups) -> float:
    """H(coordinate | fixed part) from _side_groups output."""
    total = sum(sum(c.values()) for c in groups.values())
    h = 0.0
    for counter in groups.values():
        sz = sum(counter.values())
        h += sz * _entropy_of_counts(counter.values())
    return h / total


def extract_rectangle(lift: LiftedFun, R: Rectangle):
    """From a monochromatic rectangle R of lift.lifted, extract a
    monochromatic rectangle T of the base function.

    Returns (T, ConditioningContext, ExtractionCertificate).  The
    certificate's size check (4|T|)**n >= |R| and T's monochromaticity
    are verified exactly before returning; a failure there raises
    InvariantError and is itself a bug.
    """
    color = check_monochromatic(lift.lifted, R)
    if color is None:
        raise ValueError("R is not monochromatic in the lifted function")
    n = lift.n
    base = lift.base

    if n == 1:
        ctx = ConditioningContext(i=1, x_prefix=(), y_suffix=(), u=0, v=0)
        cert = ExtractionCertificate(
            i=1, x_prefix=(), y_suffix=(), u=0, v=0,
            r_size=R.area, t_size=R.area, color=color, n=1, size_check=True,
            coordinate_entropies=(math.log2(R.area),),
            stage2_entropy=math.log2(R.area),
            stage3_entropy=math.log2(R.area))
        return Rectangle(R.row_set, R.col_set, color=color), ctx, cert

    xs = [lift.row_codec.decode(r) for r in R.row_set]
    ys = [lift.col_codec.decode(c) for c in R.col_set]

    # Stage 1: pick the coordinate with maximal H(X_i Y_i | X_<i Y_>i).
    # X and Y are independent across a rectangle, so the conditional
    # entropy splits into an X part and a Y part.
    coord_h = []
    for i in range(n):
        hx = _grouped_cond_entropy(_side_groups(xs, i, True))
        hy = _grouped_cond_entropy(_side_groups(ys, i, False))
        coord_h.append(hx + hy)
    i_star, _ = _argmax_tied_lex(enumerate(coord_h))

    # Stage 2: pick the fixed prefix/suffix maximizing the conditional
    # entropy.  The objective separates, so maximize each side alone.
    xgroups = _side_groups(xs, i_star, True)
    ygroups = _side_groups(ys, i_star, False)
    p_star, hx2 = _argmax_tied_lex(
        (p, _entropy_of_counts(c.values())) for p, c in sorted(xgroups.items()))
    s_star, hy2 = _argmax_tied_lex(
        (s, _entropy_of_counts(c.values())) for s, c in sorted(ygroups.items()))
    stage2 = hx2 + hy2

    # Stage 3: inside the chosen groups, condition on the parity bits
    # u (xor of f over the fixed x-prefix against the random y-coords)
    # and v (xor of f over the random x-coords against the fixed
    # y-suffix).  Empty xors at the boundaries are fixed to 0.
    x_pool = [t for t in xs if t[:i_star] == p_star]
    y_pool = [t for t in ys if t[i_star + 1:] == s_star]

    by_v = defaultdict(Counter)
    for t in x_pool:
        v_bit = 0
        for j in range(i_star + 1, n):
            v_bit ^= base.f_value(t[j], s_star[j - i_star - 1])
        by_v[v_bit][t[i_star]] += 1
    by_u = defaultdict(Counter)
    for t in y_pool:
        u_bit = 0
        for j in range(i_star):
            u_bit ^= base.f_value(p_star[j], t[j])
        by_u[u_bit][t[i_star]] += 1

    v_star, hx3 = _argmax_tied_lex(
        (v, _entropy_of_counts(c.values())) for v, c in sorted(by_v.items()))
    u_star, hy3 = _argmax_tied_lex(
        (u, _entropy_of_counts(c.values())) for u, c in sorted(by_u.items()))
    stage3 = hx3 + hy3

    t_rows = tuple(sorted(by_v[v_star]))
    t_cols = tuple(sorted(by_u[u_star]))
    t_color = color * (-1) ** (u_star ^ v_star)
    T = Rectangle(t_rows, t_cols, color=t_color)

    # Exact re-verification of the promised guarantees.
    if check_monochromatic(base, T) != t_color:
        raise InvariantError("extracted support is not monochromatic in the base")
    t_size = len(t_rows) * len(t_cols)
    size_check = (4 * t_size) ** n >= R.area
    if not size_check:
        raise InvariantError(
            f"size certificate failed: (4*{t_size})^{n} < {R.area}")

    ctx = ConditioningContext(i=i_star + 1, x_prefix=p_star, y_suffix=s_star,
                              u=u_star, v=v_star)
    cert = ExtractionCertificate(
        i=i_star + 1, x_prefix=p_star, y_suffix=s_star, u=u_star, v=v_star,
        r_size=R.area, t_size=t_size, color=t_color, n=n,
        size_check=size_check,
        coordinate_entropies=tuple(coord_h),
        stage2_entropy=stage2, stage3_entropy=stage3)
    return T, ctx, cert
