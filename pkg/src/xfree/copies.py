"""Grid subsets and enumeration of pattern copies inside [n]^d.

The copies of a primitive pattern X in [n]^d are exactly the sets
b + r*X with integer ratio r >= 1 and integer base b chosen so every
point lands in the grid; for coordinate i the base has n - r*w_i valid
offsets, where w_i is the pattern width.  Viewing the copies as the
hyperedges of a |X|-uniform hypergraph on the n^d grid points, the
X-free subsets of the grid are precisely its independent sets, and the
co-degree statistics of that hypergraph drive the container-parameter
arithmetic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator

from .errors import BudgetExceededError, PatternError, PreconditionError
from .patterns import Pattern, normalize

DEFAULT_VERTEX_CAP = 10**6
DEFAULT_EDGE_CAP = 10**6


def point_index(point: tuple[int, ...], n: int) -> int:
    """Bit index of a grid point: coordinate 1 is least significant."""
    idx = 0
    for c in reversed(point):
        idx = idx * n + (c - 1)
    return idx


def index_point(idx: int, n: int, d: int) -> tuple[int, ...]:
    coords = []
    for _ in range(d):
        idx, rem = divmod(idx, n)
        coords.append(rem + 1)
    return tuple(coords)


@dataclass(frozen=True)
class GridSet:
    """A subset of [n]^d with dense bit-indexed membership."""

    n: int
    d: int
    bits: int

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise PreconditionError(f"grid needs n >= 1 and d >= 1, got n={self.n} d={self.d}")
        if self.bits < 0 or self.bits >> (self.n**self.d):
            raise PreconditionError("membership bits outside the grid")

    @classmethod
    def empty(cls, n: int, d: int) -> "GridSet":
        return cls(n, d, 0)

    @classmethod
    def full(cls, n: int, d: int) -> "GridSet":
        return cls(n, d, (1 << n**d) - 1)

    @classmethod
    def from_points(cls, n: int, d: int, points) -> "GridSet":
        bits = 0
        for pt in points:
            if len(pt) != d or any(not 1 <= c <= n for c in pt):
                raise PreconditionError(f"point {pt} outside [{n}]^{d}")
            bits |= 1 << point_index(pt, n)
        return cls(n, d, bits)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def contains(self, point: tuple[int, ...]) -> bool:
        return bool(self.bits >> point_index(point, self.n) & 1)

    def points(self) -> list[tuple[int, ...]]:
        """Members in lexicographic order."""
        out = []
        bits, idx = self.bits, 0
        while bits:
            if bits & 1:
                out.append(index_point(idx, self.n, self.d))
            bits >>= 1
            idx += 1
        out.sort()
        return out

    def to_text(self) -> str:
        lines = [f"# n={self.n} d={self.d}"]
        lines += [" ".join(str(c) for c in pt) for pt in self.points()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridSet":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise PatternError("grid-set text must start with a '# n=<n> d=<d>' header")
        header = lines[0].lstrip("#").split()
        try:
            fields = dict(tok.split("=") for tok in header)
            n, d = int(fields["n"]), int(fields["d"])
        except (ValueError, KeyError):
            raise PatternError(f"bad grid-set header: {lines[0]!r}") from None
        pts = []
        for lineno, raw in enumerate(lines[1:], 2):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                pt = tuple(int(t) for t in line.split())
            except ValueError:
                raise PatternError(f"line {lineno}: non-integer coordinate") from None
            pts.append(pt)
        return cls.from_points(n, d, pts)


@dataclass(frozen=True)
class CopyPlacement:
    """One copy b + r*X, identified by its integer base and ratio."""

    base: tuple[int, ...]
    ratio: int

    def points(self, pattern: Pattern) -> list[tuple[int, ...]]:
        return [
            tuple(self.base[i] + self.ratio * x[i] for i in range(pattern.d))
            for x in pattern.points
        ]


def _primitive(pattern: Pattern) -> Pattern:
    return pattern if pattern.primitive else normalize(pattern)


def enumerate_copies(pattern: Pattern, n: int) -> Iterator[CopyPlacement]:
    """Yield every copy of the pattern in [n]^d exactly once.

    Stream order is ratio ascending, then base lexicographic, which
    downstream consumers rely on for reproducibility.
    """
    p = _primitive(pattern)
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    w = p.widths
    wmax = max(w)
    for r in range(1, (n - 1) // wmax + 1):
        ranges = [range(1, n - r * wi + 1) for wi in w]
        for b in product(*ranges):
            yield CopyPlacement(base=b, ratio=r)


def count_copies_closed_form(pattern: Pattern, n: int) -> int:
    """Number of copies of the pattern in [n]^d, as the sum over ratios
    of the product of per-coordinate base counts."""
    p = _primitive(pattern)
    w = p.widths
    wmax = max(w)
    total = 0
    for r in range(1, (n - 1) // wmax + 1):
        term = 1
        for wi in w:
            term *= n - r * wi
            if term <= 0:
                term = 0
                break
        total += term
    return total


def _count_by_placements(A: GridSet, p: Pattern, early_exit: bool) -> int:
    n, bits = A.n, A.bits
    count = 0
    for placement in enumerate_copies(p, n):
        b, r = placement.base, placement.ratio
        ok = True
        for x in p.points:
            idx = point_index(tuple(b[i] + r * x[i] for i in range(p.d)), n)
            if not bits >> idx & 1:
                ok = False
                break
        if ok:
            count += 1
            if early_exit:
                return count
    return count


def _count_by_pairs(A: GridSet, p: Pattern, early_exit: bool) -> int:
    """Count copies inside A by anchoring on its lexicographic extremes.

    A positive-ratio homothety preserves lexicographic order, so every
    copy maps the lex-smallest pattern point to its lex-smallest grid
    point and likewise for the largest; each member pair is tested as
    that anchor, which visits every copy exactly once.
    """
    n, d, bits = A.n, A.d, A.bits
    members = A.points()
    xs = p.points
    x_lo, x_hi = xs[0], xs[-1]
    delta = tuple(x_hi[i] - x_lo[i] for i in range(d))
    j0 = next(i for i in range(d) if delta[i] != 0)
    inner = xs[1:-1]
    count = 0
    for i, u in enumerate(members):
        for v in members[i + 1 :]:
            dj = v[j0] - u[j0]
            if dj <= 0:
                continue
            r, rem = divmod(dj, delta[j0])
            if rem or r < 1:
                continue
            if any(v[t] - u[t] != r * delta[t] for t in range(d)):
                continue
            base = tuple(u[t] - r * x_lo[t] for t in range(d))
            ok = True
            for x in inner:
                pt = tuple(base[t] + r * x[t] for t in range(d))
                if any(not 1 <= c <= n for c in pt) or not bits >> point_index(pt, n) & 1:
                    ok = False
                    break
            if ok:
                count += 1
                if early_exit:
                    return count
    return count


def gamma_count(A: GridSet, pattern: Pattern, *, early_exit: bool = False,
                strategy: str = "auto") -> int:
    """Number of copies of the pattern entirely contained in A.

    strategy "placements" scans every placement in the grid;
    "pairs" scans member pairs of A (better for sparse sets);
    "auto" picks whichever is estimated cheaper.  Results agree.
    """
    p = _primitive(pattern)
    if p.d != A.d:
        raise PreconditionError(f"pattern dimension {p.d} != grid dimension {A.d}")
    if A.bits == 0:
        return 0
    if strategy == "auto":
        size = A.size
        strategy = "pairs" if size * size < count_copies_closed_form(p, A.n) else "placements"
    if strategy == "pairs":
        return _count_by_pairs(A, p, early_exit)
    if strategy == "placements":
        return _count_by_placements(A, p, early_exit)
    raise PreconditionError(f"unknown strategy {strategy!r}")


def is_x_free(A: GridSet, pattern: Pattern) -> bool:
    """True when A contains no copy of the pattern."""
    return gamma_count(A, pattern, early_exit=True) == 0


def copy_edges(pattern: Pattern, n: int) -> list[tuple[int, ...]]:
    """Copies as tuples of grid-point bit indices, in stream order."""
    p = _primitive(pattern)
    edges = []
    for placement in enumerate_copies(p, n):
        b, r = placement.base, placement.ratio
        edges.append(
            tuple(
                point_index(tuple(b[i] + r * x[i] for i in range(p.d)), n)
                for x in p.points
            )
        )
    return edges


@dataclass(frozen=True)
class HypergraphSummary:
    """Size and co-degree statistics of the copies hypergraph on [n]^d."""

    n: int
    d: int
    k: int
    edge_count: int
    vertex_count: int
    avg_degree: Fraction
    codegrees: dict[int, int]
    gamma_estimate: Fraction

    def codegree(self, j: int) -> int:
        return self.codegrees[j]


def codegree_stats(pattern: Pattern, n: int, *, vertex_cap: int = DEFAULT_VERTEX_CAP,
                   edge_cap: int = DEFAULT_EDGE_CAP) -> HypergraphSummary:
    """Exact maximum co-degrees Delta_j (j = 2..k) of the copies hypergraph,
    by aggregating over the j-subsets of every edge."""
    p = _primitive(pattern)
    vertices = n**p.d
    if vertices > vertex_cap:
        raise BudgetExceededError(f"n^d = {vertices} exceeds vertex cap {vertex_cap}")
    edge_count = count_copies_closed_form(p, n)
    if edge_count > edge_cap:
        raise BudgetExceededError(f"|E| = {edge_count} exceeds edge cap {edge_cap}")
    k = p.k
    counters: dict[int, Counter] = {j: Counter() for j in range(2, k + 1)}
    for edge in copy_edges(p, n):
        se = tuple(sorted(edge))
        for j in range(2, k + 1):
            cj = counters[j]
            for sub in combinations(se, j):
                cj[sub] += 1
    codegrees = {j: (max(counters[j].values()) if counters[j] else 0) for j in range(2, k + 1)}
    avg = Fraction(k * edge_count, vertices)
    return HypergraphSummary(
        n=n,
        d=p.d,
        k=k,
        edge_count=edge_count,
        vertex_count=vertices,
        avg_degree=avg,
        codegrees=codegrees,
        gamma_estimate=avg / n,
    )
