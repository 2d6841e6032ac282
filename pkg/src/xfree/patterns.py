"""Patterns in [n]^d and their canonical primitive form.

A pattern is a finite set of at least three distinct lattice points in d
dimensions.  Two patterns are *similar* when one is a translate of a
positive rescaling of the other; similar patterns have exactly the same
copies inside any grid, so every computation here is parameterized by
the unique primitive representative of a similarity class: componentwise
minimum zero in every coordinate, and gcd 1 over all coordinates of all
pairwise differences.  Primitivity is what forces the ratio of any
lattice copy to be a positive integer, which makes the copy family
enumerable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import PatternError, PreconditionError


@dataclass(frozen=True)
class Pattern:
    """A finite point set in d dimensions.

    Points keep the order they were given in; `normalize` produces the
    canonical primitive form with lexicographically sorted points.
    """

    d: int
    points: tuple[tuple[int, ...], ...]
    primitive: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise PatternError(f"dimension must be positive, got {self.d}")
        if len(self.points) < 3:
            raise PatternError(f"need at least 3 points, got {len(self.points)}")
        seen = set()
        for pt in self.points:
            if len(pt) != self.d:
                raise PatternError(f"point {pt} has arity {len(pt)}, expected {self.d}")
            if any(c < 0 for c in pt):
                raise PatternError(f"point {pt} has a negative coordinate")
            if pt in seen:
                raise PatternError(f"duplicate point {pt}")
            seen.add(pt)

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(
            max(p[i] for p in self.points) - min(p[i] for p in self.points)
            for i in range(self.d)
        )


def parse_pattern(text: str) -> Pattern:
    """Parse the pattern file format.

    First non-comment line is "d k"; then k lines of d space-separated
    non-negative integers.  Lines starting with '#' (and blank lines)
    are skipped.  The pattern is returned exactly as listed, without
    normalization.
    """
    header = None
    pts: list[tuple[int, ...]] = []
    d = k = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 2:
                raise PatternError(f"line {lineno}: header must be 'd k', got {raw!r}")
            try:
                d, k = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise PatternError(f"line {lineno}: header must be two integers") from None
            if d < 1 or k < 1:
                raise PatternError(f"line {lineno}: d and k must be positive")
            if k < 3:
                raise PatternError(f"line {lineno}: fewer than 3 points (k={k})")
            header = (d, k)
            continue
        if len(pts) >= k:
            raise PatternError(f"line {lineno}: unexpected extra line after {k} points")
        if len(tokens) != d:
            raise PatternError(f"line {lineno}: expected {d} coordinates, got {len(tokens)}")
        try:
            pt = tuple(int(t) for t in tokens)
        except ValueError:
            raise PatternError(f"line {lineno}: non-integer coordinate in {raw!r}") from None
        if any(c < 0 for c in pt):
            raise PatternError(f"line {lineno}: negative coordinate in {raw!r}")
        if pt in pts:
            raise PatternError(f"line {lineno}: duplicate point {pt}")
        pts.append(pt)
    if header is None:
        raise PatternError("line 1: empty pattern file")
    if len(pts) != k:
        raise PatternError(f"expected {k} points, file has {len(pts)}")
    return Pattern(d=d, points=tuple(pts))


@lru_cache(maxsize=None)
def normalize(pattern: Pattern) -> Pattern:
    """Canonical primitive form: min 0 per coordinate, difference gcd 1,
    points sorted lexicographically.  Idempotent.

    The copies of a pattern and of its primitive form inside any grid
    coincide, so freeness questions may always be normalized first.
    """
    mins = [min(p[i] for p in pattern.points) for i in range(pattern.d)]
    shifted = [tuple(p[i] - mins[i] for i in range(pattern.d)) for p in pattern.points]
    # gcd over differences from one base point equals gcd over all pairs
    base = shifted[0]
    g = 0
    for p in shifted[1:]:
        for i in range(pattern.d):
            g = gcd(g, p[i] - base[i])
    g = abs(g) or 1
    scaled = sorted(tuple(c // g for c in p) for p in shifted)
    return Pattern(d=pattern.d, points=tuple(scaled), primitive=True)


def pattern_hash(pattern: Pattern) -> str:
    """Stable identifier of the similarity class (used for cache keys)."""
    p = pattern if pattern.primitive else normalize(pattern)
    payload = f"{p.d} {p.k} " + " ".join(
        ",".join(str(c) for c in pt) for pt in p.points
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:32]


@dataclass(frozen=True)
class RationalTriple:
    """Three distinct rationals a < b < c describing a one-dimensional pattern."""

    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        if not (self.a < self.b < self.c):
            raise PreconditionError(f"triple must be strictly increasing, got {self}")

    @classmethod
    def of(cls, *values) -> "RationalTriple":
        vals = sorted(Fraction(v) for v in values)
        if len(vals) != 3 or len(set(vals)) != 3:
            raise PreconditionError(f"need three distinct rationals, got {values}")
        return cls(*vals)

    @property
    def progression_ratio(self) -> Fraction:
        """The ratio (b-a)/(c-b): 1 for arithmetic progressions."""
        return (self.b - self.a) / (self.c - self.b)

    def as_primitive_pattern(self) -> Pattern:
        """The primitive integer 1-D pattern similar to {a, b, c}."""
        shifted = [self.b - self.a, self.c - self.a]
        lcm_den = shifted[0].denominator * shifted[1].denominator // gcd(
            shifted[0].denominator, shifted[1].denominator
        )
        ints = [int(v * lcm_den) for v in shifted]
        g = gcd(ints[0], ints[1]) or 1
        pts = ((0,), (ints[0] // g,), (ints[1] // g,))
        return Pattern(d=1, points=pts, primitive=True)


def triple_to_primitive(t) -> Pattern:
    """Primitive integer form of the 1-D triple {0, t, 1} for rational t.

    Similarity-invariant: a set of integers is free of copies of {0,t,1}
    exactly when it is free of copies of the returned pattern.
    """
    t = Fraction(t)
    if t in (0, 1):
        raise PreconditionError(f"degenerate triple: t={t} must avoid {{0, 1}}")
    return RationalTriple.of(0, t, 1).as_primitive_pattern()


def arithmetic_progression(k: int) -> Pattern:
    """The 1-D pattern {0, 1, ..., k-1}."""
    if k < 3:
        raise PatternError("progressions need k >= 3")
    return Pattern(d=1, points=tuple((i,) for i in range(k)), primitive=True)


def corner(d: int) -> Pattern:
    """The corner pattern {0, e_1, ..., e_d} in d >= 2 dimensions."""
    if d < 2:
        raise PatternError("corner patterns need d >= 2")
    pts = [tuple(0 for _ in range(d))]
    for i in range(d):
        pts.append(tuple(1 if j == i else 0 for j in range(d)))
    return normalize(Pattern(d=d, points=tuple(pts)))
