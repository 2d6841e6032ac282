"""Sphere-shell constructions of large pattern-free sets.

One dimension: bucket the digit cube [M]^N by squared Euclidean norm and
keep a largest shell.  Points of a sphere admit no non-trivial affine
relation u + q*w = (q+1)*v (strict convexity), and mapping digits
through a sufficiently wide base preserves that impossibility among the
images, so the image set in [n] is free of the source triple.  Sizes
come out as n^(1-o(1)) while staying verifiable at desk scale.

Higher dimensions: reduce any 3-point pattern to a rational triple
{0, t, 1} via the projection value t, build a free set S' on a quarter
interval, and lift it through the rational linear form
sum_i (s_i - n/2) (x_i - y_i); membership of the form value in S' pins
the last coordinate uniquely per prefix and target, and any copy of the
pattern inside the lifted set would project to a copy of {0, t, 1}
inside S'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Optional

from .copies import GridSet, count_copies_closed_form, gamma_count
from .errors import PreconditionError
from .patterns import Pattern, RationalTriple, normalize, pattern_hash
from .solver import RNumberRecord

# skip construction self-verification above this many elementary checks
DEFAULT_VERIFY_COST_CAP = 20_000_000


@dataclass
class Behrend1DCertificate:
    """Full trace of the one-dimensional shell construction."""

    triple: RationalTriple
    n: int
    progression_ratio: Fraction          # q with (b-a) = q*(c-b)
    num_digits: int                      # N = ceil(sqrt(log n))
    digit_max: int                       # M, digits run over 1..M
    digit_base: int                      # base of the digit map
    shell_norm: Optional[int]            # squared radius of the chosen shell
    shell_size: int
    result: GridSet
    fallback: bool
    verified: bool
    verify_checked: bool

    def to_text(self) -> str:
        lines = [
            f"kind: shell-construction-1d",
            f"triple: {self.triple.a} {self.triple.b} {self.triple.c}",
            f"n: {self.n}",
            f"progression_ratio: {self.progression_ratio}",
            f"num_digits: {self.num_digits}",
            f"digit_max: {self.digit_max}",
            f"digit_base: {self.digit_base}",
            f"shell_norm: {self.shell_norm}",
            f"shell_size: {self.shell_size}",
            f"set_size: {self.result.size}",
            f"fallback: {int(self.fallback)}",
            f"verified: {int(self.verified)}",
            f"verify_checked: {int(self.verify_checked)}",
        ]
        return "\n".join(lines) + "\n"


def _floor_nth_root(n: int, k: int) -> int:
    r = round(n ** (1.0 / k))
    while (r + 1) ** k <= n:
        r += 1
    while r > 0 and r**k > n:
        r -= 1
    return r


def _verification_cost(set_size: int, pattern: Pattern, n: int) -> int:
    return min(set_size * set_size, count_copies_closed_form(pattern, n))


def _verify_free(A: GridSet, pattern: Pattern, cap: int) -> tuple[bool, bool]:
    """(verified, checked): run the freeness check when it fits the cap."""
    if _verification_cost(A.size, pattern, A.n) > cap:
        return False, False
    return gamma_count(A, pattern, early_exit=True) == 0, True


def behrend_1d(triple: RationalTriple, n: int, *,
               verify_cost_cap: int = DEFAULT_VERIFY_COST_CAP) -> Behrend1DCertificate:
    """Build a subset of [n] free of copies of the triple.

    With q = (b-a)/(c-b) = u/v in lowest terms, digits run over [M]^N for
    N = ceil(sqrt(log n)) and M = floor(n^(1/N)/(u+v)); the digit map uses
    base (u+v)*M, which keeps every image an integer for every rational q
    (and reduces to the usual (q+1)*M when q is an integer).  When M < 2
    or q*M <= 1 the construction degenerates and the singleton {1} is
    returned with the fallback flag set.
    """
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    q = triple.progression_ratio
    base_factor = q.numerator + q.denominator
    num_digits = max(1, math.ceil(math.sqrt(math.log(n)))) if n >= 2 else 1
    digit_max = _floor_nth_root(n, num_digits) // base_factor
    primitive = triple.as_primitive_pattern()

    if digit_max < 2 or q * digit_max <= 1:
        result = GridSet.from_points(n, 1, [(1,)])
        return Behrend1DCertificate(
            triple=triple, n=n, progression_ratio=q, num_digits=num_digits,
            digit_max=digit_max, digit_base=base_factor * max(digit_max, 1),
            shell_norm=None, shell_size=1, result=result,
            fallback=True, verified=True, verify_checked=True,
        )

    M, N = digit_max, num_digits
    norm_counts = [0] * (N * M * M + 1)
    for vec in product(range(1, M + 1), repeat=N):
        norm_counts[sum(x * x for x in vec)] += 1
    best = max(norm_counts)
    shell_norm = norm_counts.index(best)  # smallest norm among the ties
    base = base_factor * M
    values = []
    for vec in product(range(1, M + 1), repeat=N):
        if sum(x * x for x in vec) == shell_norm:
            values.append(sum(x * base**i for i, x in enumerate(vec)))
    assert len(set(values)) == len(values), "digit map collided on the shell"
    assert all(1 <= v <= n for v in values), "image escaped [n]"
    # pigeonhole floor: M^N vectors over N*M^2 - N + 1 possible norms
    assert best * (N * M * M - N + 1) >= M**N

    result = GridSet.from_points(n, 1, [(v,) for v in values])
    verified, checked = _verify_free(result, primitive, verify_cost_cap)
    return Behrend1DCertificate(
        triple=triple, n=n, progression_ratio=q, num_digits=N, digit_max=M,
        digit_base=base, shell_norm=shell_norm, shell_size=best, result=result,
        fallback=False, verified=verified, verify_checked=checked,
    )


@dataclass
class TripleGeometry:
    """A 3-point pattern normalized for the lift.

    After choosing which point sits at the origin so that neither
    remaining vertex carries a right angle, permuting coordinates and
    rescaling, the difference x - y has last entry 1 and all entries in
    [-1, 1]; t is the projection of y onto the line through x - y,
    guaranteed off {0, 1} by the angle conditions.
    """

    source_points: tuple[tuple[int, ...], ...]   # (z, x, y) before normalization
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]                # x - y, last entry 1
    denominators: tuple[int, ...]                # of the first d-1 weights
    denominator_max: int
    perm: tuple[int, ...]                        # coordinate reordering applied
    t: Fraction


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def compute_t(pattern: Pattern) -> TripleGeometry:
    """Normalize a 3-point pattern and compute its projection value t.

    Relabeling always succeeds: a (possibly degenerate) triangle has at
    most one right interior angle, so some vertex can play the origin.
    t is invariant under translating or positively rescaling the input.
    """
    if pattern.k != 3:
        raise PreconditionError(f"need exactly 3 points, got {pattern.k}")
    pts = sorted(pattern.points)
    d = pattern.d
    for zi in range(3):
        z = pts[zi]
        ox, oy = [pts[j] for j in range(3) if j != zi]
        x0 = tuple(ox[i] - z[i] for i in range(d))
        y0 = tuple(oy[i] - z[i] for i in range(d))
        diff = tuple(x0[i] - y0[i] for i in range(d))
        if _dot(x0, diff) != 0 and _dot(y0, diff) != 0:
            break
    else:  # pragma: no cover - impossible by the triangle argument
        raise AssertionError("no valid relabeling of the triple")

    # move a maximal-magnitude difference entry to the last coordinate,
    # preferring one that is already positive
    best = max(abs(v) for v in diff)
    candidates = [i for i in range(d) if abs(diff[i]) == best]
    positive = [i for i in candidates if diff[i] > 0]
    j = max(positive) if positive else max(candidates)
    perm = list(range(d))
    perm[j], perm[d - 1] = perm[d - 1], perm[j]
    xp = tuple(Fraction(x0[perm[i]]) for i in range(d))
    yp = tuple(Fraction(y0[perm[i]]) for i in range(d))
    scale = Fraction(best)
    xp = tuple(v / scale for v in xp)
    yp = tuple(v / scale for v in yp)
    if xp[d - 1] - yp[d - 1] == -1:
        xp, yp = yp, xp
    weights = tuple(xp[i] - yp[i] for i in range(d))
    assert weights[d - 1] == 1 and all(abs(w) <= 1 for w in weights)

    denom = _dot(weights, weights)
    t = sum(yi * (yi - xi) for xi, yi in zip(xp, yp)) / denom
    assert t not in (0, 1), "angle conditions violated; relabeling bug"
    dens = tuple(weights[i].denominator for i in range(d - 1))
    return TripleGeometry(
        source_points=(z, ox, oy), x=xp, y=yp, weights=weights,
        denominators=dens, denominator_max=max(dens) if dens else 1,
        perm=tuple(perm), t=t,
    )


@dataclass
class LiftCertificate:
    """Trace of the d-dimensional lift (or of the 1-D delegation)."""

    pattern: Pattern
    requested_n: int
    effective_n: int
    triple_points: tuple[tuple[int, ...], ...]
    geometry: Optional[TripleGeometry]
    base_certificate: Behrend1DCertificate
    result: GridSet
    prefix_count: Optional[int]          # prefixes for which every target fits
    predicted_size: int
    fallback: bool
    verified: bool
    verify_checked: bool

    def to_text(self) -> str:
        lines = [
            "kind: slab-lift",
            f"pattern_id: {pattern_hash(self.pattern)}",
            f"requested_n: {self.requested_n}",
            f"effective_n: {self.effective_n}",
            f"triple: {';'.join(','.join(map(str, p)) for p in self.triple_points)}",
            f"t: {self.geometry.t if self.geometry else ''}",
            f"weights: {' '.join(str(w) for w in self.geometry.weights) if self.geometry else ''}",
            f"base_set_size: {self.base_certificate.result.size}",
            f"prefix_count: {self.prefix_count}",
            f"set_size: {self.result.size}",
            f"predicted_size: {self.predicted_size}",
            f"fallback: {int(self.fallback)}",
            f"verified: {int(self.verified)}",
            f"verify_checked: {int(self.verify_checked)}",
        ]
        return "\n".join(lines) + "\n"


def _first_triples(p: Pattern, all_triples: bool):
    if all_triples:
        yield from combinations(p.points, 3)
    else:
        yield p.points[:3]


def _lift_one(p: Pattern, requested_n: int, n_eff: int, triple_points,
              verify_cost_cap: int) -> LiftCertificate:
    d = p.d
    geometry = compute_t(Pattern(d=d, points=tuple(triple_points)))
    base_cert = behrend_1d(RationalTriple.of(0, geometry.t, 1), n_eff // 4,
                           verify_cost_cap=verify_cost_cap)
    targets = [pt[0] for pt in base_cert.result.points()]
    weights = geometry.weights
    den_lcm = 1
    for w in weights[:-1]:
        den_lcm = den_lcm * w.denominator // math.gcd(den_lcm, w.denominator)
    scaled = [int(w * den_lcm) for w in weights[:-1]]
    half = n_eff // 2
    points = []
    full_prefixes = 0
    for prefix in product(range(1, n_eff + 1), repeat=d - 1):
        acc = sum((prefix[i] - half) * scaled[i] for i in range(d - 1))
        if acc % den_lcm:
            continue
        partial = acc // den_lcm
        hits = 0
        for a in targets:
            s_last = a + half - partial
            if 1 <= s_last <= n_eff:
                hits += 1
                transformed = prefix + (s_last,)
                original = [0] * d
                for i, pi in enumerate(geometry.perm):
                    original[pi] = transformed[i]
                points.append(tuple(original))
        if hits == len(targets):
            full_prefixes += 1
    predicted = len(points)
    result = GridSet.from_points(n_eff, d, points)
    verified, checked = _verify_free(result, p, verify_cost_cap)
    return LiftCertificate(
        pattern=p, requested_n=requested_n, effective_n=n_eff,
        triple_points=tuple(triple_points), geometry=geometry,
        base_certificate=base_cert, result=result, prefix_count=full_prefixes,
        predicted_size=predicted, fallback=False,
        verified=verified, verify_checked=checked,
    )


def _singleton_certificate(p: Pattern, requested: int, effective: int) -> LiftCertificate:
    grid_n = max(effective, 1)
    result = GridSet.from_points(grid_n, p.d, [tuple(1 for _ in range(p.d))])
    base = GridSet.from_points(1, 1, [(1,)])
    dummy = Behrend1DCertificate(
        triple=RationalTriple.of(0, 1, 2), n=1, progression_ratio=Fraction(1),
        num_digits=1, digit_max=0, digit_base=2, shell_norm=None, shell_size=1,
        result=base, fallback=True, verified=True, verify_checked=True,
    )
    return LiftCertificate(
        pattern=p, requested_n=requested, effective_n=grid_n,
        triple_points=p.points[:3], geometry=None, base_certificate=dummy,
        result=result, prefix_count=None, predicted_size=1, fallback=True,
        verified=True, verify_checked=True,
    )


def behrend_lift(pattern: Pattern, n: int, *, all_triples: bool = False,
                 verify_cost_cap: int = DEFAULT_VERIFY_COST_CAP) -> LiftCertificate:
    """Free-set construction for any pattern and grid side.

    d = 1 delegates to the shell construction on a 3-subset of the
    pattern (a set free of a sub-pattern is free of the whole pattern).
    For d >= 2 the side is rounded down to a multiple of 4(d-1); the
    certificate records requested and effective sides.  There is always
    a non-empty output: degenerate inputs fall back to a singleton.
    """
    p = normalize(pattern)
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    if p.d == 1:
        best_cert = None
        for tri in _first_triples(p, all_triples):
            vals = sorted(c[0] for c in tri)
            cert1 = behrend_1d(RationalTriple.of(*vals), n, verify_cost_cap=verify_cost_cap)
            cert = LiftCertificate(
                pattern=p, requested_n=n, effective_n=n, triple_points=tuple(tri),
                geometry=None, base_certificate=cert1, result=cert1.result,
                prefix_count=None, predicted_size=cert1.result.size,
                fallback=cert1.fallback, verified=cert1.verified,
                verify_checked=cert1.verify_checked,
            )
            if best_cert is None or _better(cert, best_cert):
                best_cert = cert
        return best_cert

    block = 4 * (p.d - 1)
    n_eff = (n // block) * block
    if n_eff < block:
        return _singleton_certificate(p, n, n_eff)
    best_cert = None
    for tri in _first_triples(p, all_triples):
        cert = _lift_one(p, n, n_eff, tri, verify_cost_cap)
        if best_cert is None or _better(cert, best_cert):
            best_cert = cert
    if best_cert.result.size == 0:  # pragma: no cover - defensive
        return _singleton_certificate(p, n, n_eff)
    return best_cert


def _better(a: LiftCertificate, b: LiftCertificate) -> bool:
    return (a.verified, a.result.size) > (b.verified, b.result.size)


@dataclass
class LowerBoundRow:
    n: int
    effective_n: int
    set_size: int
    density: float
    empirical_c: float
    verified: bool
    record: RNumberRecord
    certificate: LiftCertificate


def lower_bound_table(pattern: Pattern, n_list, *, all_triples: bool = False,
                      verify_cost_cap: int = DEFAULT_VERIFY_COST_CAP) -> list[LowerBoundRow]:
    """Construction sizes per grid side, with the achieved constant
    c(n) = -log(size/n_eff^d)/sqrt(log n_eff) for each row."""
    p = normalize(pattern)
    rows = []
    for n in n_list:
        cert = behrend_lift(p, n, all_triples=all_triples, verify_cost_cap=verify_cost_cap)
        size = cert.result.size
        n_eff = cert.effective_n
        density = size / n_eff**p.d
        if n_eff >= 2 and density < 1:
            c_hat = -math.log(density) / math.sqrt(math.log(n_eff))
        else:
            c_hat = 0.0
        record = RNumberRecord(
            pattern_id=pattern_hash(p), n=n, lower=size, upper=n**p.d,
            exact=size == n**p.d, provenance="behrend", witness=cert.result,
        )
        rows.append(LowerBoundRow(
            n=n, effective_n=n_eff, set_size=size, density=density,
            empirical_c=c_hat, verified=cert.verified, record=record,
            certificate=cert,
        ))
    return rows
