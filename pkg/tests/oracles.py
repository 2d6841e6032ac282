"""Independent brute-force oracles used to derive and check expected values.

Everything here is deliberately naive: nested loops over all integer
placements, all subsets, all k-subsets with a rational-ratio affine test.
The oracles share no code with the library paths they check.
"""

from fractions import Fraction
from itertools import combinations, product


def grid_points(n, d):
    return [tuple(reversed(p)) for p in product(range(1, n + 1), repeat=d)]


def oracle_placements(points, n):
    """All (base, ratio) integer placements of a point set inside [n]^d.

    `points` must be translated so the componentwise minimum is zero in
    every coordinate (the primitive convention), so bases start at 1.
    """
    d = len(points[0])
    found = []
    for r in range(1, n + 1):
        for b in product(range(1, n + 1), repeat=d):
            copy = [tuple(b[i] + r * x[i] for i in range(d)) for x in points]
            if all(1 <= c <= n for pt in copy for c in pt):
                found.append((b, r))
    return found


def oracle_copy_sets(points, n):
    """The copies as frozensets of grid points, one per placement."""
    d = len(points[0])
    out = set()
    for b, r in oracle_placements(points, n):
        out.add(frozenset(tuple(b[i] + r * x[i] for i in range(d)) for x in points))
    return out


def is_affine_image(subset_sorted, points_sorted):
    """True if subset = b + r*points for some real b and r > 0.

    Both inputs lexicographically sorted; a positive-ratio homothety
    preserves lexicographic order, so the i-th smallest must map to the
    i-th smallest.  Ratio and base are solved exactly with Fractions.
    """
    k = len(points_sorted)
    if len(subset_sorted) != k:
        return False
    d = len(points_sorted[0])
    lo, hi = points_sorted[0], points_sorted[-1]
    slo, shi = subset_sorted[0], subset_sorted[-1]
    ratio = None
    for i in range(d):
        dx = hi[i] - lo[i]
        ds = shi[i] - slo[i]
        if dx == 0:
            if ds != 0:
                return False
            continue
        r = Fraction(ds, dx)
        if ratio is None:
            ratio = r
        elif ratio != r:
            return False
    if ratio is None or ratio <= 0:
        return False
    base = tuple(Fraction(slo[i]) - ratio * lo[i] for i in range(d))
    for x, s in zip(points_sorted, subset_sorted):
        if any(base[i] + ratio * x[i] != s[i] for i in range(d)):
            return False
    return True


def oracle_real_ratio_copies(points, n):
    """All k-subsets of [n]^d that are positive-real-ratio copies of the set."""
    pts_sorted = sorted(points)
    k = len(pts_sorted)
    hits = set()
    for sub in combinations(sorted(grid_points(n, len(points[0]))), k):
        if is_affine_image(list(sub), pts_sorted):
            hits.add(frozenset(sub))
    return hits


def contains_real_ratio_copy(members, points):
    """True if the member set contains a positive-real-ratio copy."""
    pts_sorted = sorted(points)
    k = len(pts_sorted)
    for sub in combinations(sorted(members), k):
        if is_affine_image(list(sub), pts_sorted):
            return True
    return False


def _edge_masks(points, n):
    d = len(points[0])
    masks = []
    for b, r in oracle_placements(points, n):
        m = 0
        for x in points:
            idx = 0
            for c in reversed(tuple(b[i] + r * x[i] for i in range(d))):
                idx = idx * n + (c - 1)
            m |= 1 << idx
        masks.append(m)
    return masks


def oracle_max_free(points, n):
    """Exhaustive maximum size of a subset of [n]^d with no integer-placement copy."""
    d = len(points[0])
    V = n**d
    masks = _edge_masks(points, n)
    best = 0
    for s in range(1 << V):
        if any(m & s == m for m in masks):
            continue
        c = bin(s).count("1")
        if c > best:
            best = c
    return best


def oracle_count_free(points, n):
    """Exhaustive count of subsets of [n]^d with no integer-placement copy."""
    d = len(points[0])
    V = n**d
    masks = _edge_masks(points, n)
    return sum(1 for s in range(1 << V) if not any(m & s == m for m in masks))
