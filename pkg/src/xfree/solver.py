"""Exact extremal values and exact counting for pattern-free grid subsets.

The largest X-free subset of [n]^d is the maximum independent set of the
copies hypergraph, found here by branch and bound: branch on a copy none
of whose points is excluded yet (one branch per removable point), prune
with a greedy packing of vertex-disjoint uncovered copies, each of which
forces at least one further exclusion.  Counting walks the grid points
in index order and prunes any extension that completes a copy, visiting
each free subset exactly once, so counts are exact arbitrary-precision
integers.
"""

from __future__ import annotations

import math
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .copies import GridSet, copy_edges, is_x_free
from .errors import BudgetExceededError, PreconditionError
from .patterns import Pattern, normalize, pattern_hash

DEFAULT_NODE_BUDGET = 5_000_000
DEFAULT_COUNT_VERTEX_CAP = 36
DEFAULT_COUNT_NODE_BUDGET = 50_000_000
PROVENANCES = ("exhaustive", "branch-and-bound", "greedy", "behrend", "user")


@dataclass
class RNumberRecord:
    """What is known about the largest free-set size for one (pattern, n)."""

    pattern_id: str
    n: int
    lower: int
    upper: int
    exact: bool
    provenance: str
    witness: Optional[GridSet] = None

    @property
    def value(self) -> int:
        if not self.exact:
            raise PreconditionError(
                f"record for n={self.n} is inexact (bounds [{self.lower}, {self.upper}])"
            )
        return self.lower


@dataclass
class CountRecord:
    """Exact number of free subsets of [n]^d, with its base-2 logarithm."""

    pattern_id: str
    n: int
    count: int
    log2_count: float
    ratio: Optional[float] = None


def _log2_big(value: int) -> float:
    if value <= 0:
        raise PreconditionError("log2 of a non-positive count")
    bl = value.bit_length()
    if bl <= 512:
        return math.log2(value)
    return (bl - 1) + math.log2(value / (1 << (bl - 1)))


class _Shared:
    """Incumbent shared across branch-and-bound workers (monotone best)."""

    def __init__(self, size: int, mask: int):
        self.size = size
        self.mask = mask
        self.lock = threading.Lock()

    def offer(self, size: int, mask: int):
        with self.lock:
            if size > self.size:
                self.size = size
                self.mask = mask


class _OutOfNodes(Exception):
    pass


def _search(masks: list[int], V: int, excluded: int, excl_count: int, kept: int,
            shared: _Shared, budget: list[int]):
    budget[0] -= 1
    if budget[0] < 0:
        raise _OutOfNodes
    if V - excl_count <= shared.size:
        return
    branch_rem = 0
    branch_popcount = V + 1
    packed = 0
    disjoint = 0
    for m in masks:
        if m & excluded:
            continue
        rem = m & ~kept
        if rem == 0:
            return  # a copy survives with every point locked in: dead branch
        c = rem.bit_count()
        if c < branch_popcount:
            branch_popcount = c
            branch_rem = rem
        if not rem & packed:
            disjoint += 1
            packed |= rem
    if branch_popcount > V:
        # no uncovered copies: the complement of the exclusions is free
        shared.offer(V - excl_count, ((1 << V) - 1) & ~excluded)
        return
    if V - excl_count - disjoint <= shared.size:
        return
    taken = 0
    rem = branch_rem
    while rem:
        v = rem & -rem
        rem ^= v
        _search(masks, V, excluded | v, excl_count + 1, kept | taken, shared, budget)
        taken |= v


def greedy_lower_bound(pattern: Pattern, n: int, seed: int = 0) -> RNumberRecord:
    """Randomized greedy insertion in a seed-shuffled vertex order.

    Deterministic given the seed; the result is always free, giving a
    valid lower bound, with n^d as the trivial upper bound.
    """
    p = normalize(pattern)
    V = n**p.d
    edges = copy_edges(p, n)
    incidence: dict[int, list[int]] = {}
    for edge in edges:
        m = 0
        for idx in edge:
            m |= 1 << idx
        for idx in edge:
            incidence.setdefault(idx, []).append(m)
    order = list(range(V))
    random.Random(seed).shuffle(order)
    chosen = 0
    for v in order:
        bit = 1 << v
        candidate = chosen | bit
        if all(e & ~candidate for e in incidence.get(v, ())):
            chosen = candidate
    size = chosen.bit_count()
    return RNumberRecord(
        pattern_id=pattern_hash(p),
        n=n,
        lower=size,
        upper=V,
        exact=size == V,
        provenance="greedy",
        witness=GridSet(n, p.d, chosen),
    )


def solve_rx_exact(pattern: Pattern, n: int, *, budget: int = DEFAULT_NODE_BUDGET,
                   workers: int = 1, vertex_cap: int = 10**6) -> RNumberRecord:
    """Exact largest free-set size by branch and bound.

    Returns an exact record with a witness when the search finishes
    within the node budget, otherwise the best bounds found so far with
    exact=False.  The exact value is independent of the worker count;
    the witness reported for it need not be.
    """
    p = normalize(pattern)
    V = n**p.d
    if V > vertex_cap:
        raise BudgetExceededError(f"n^d = {V} exceeds vertex cap {vertex_cap}")
    pid = pattern_hash(p)
    masks = []
    for edge in copy_edges(p, n):
        m = 0
        for idx in edge:
            m |= 1 << idx
        masks.append(m)
    full = (1 << V) - 1
    if not masks:
        return RNumberRecord(pid, n, V, V, True, "branch-and-bound", GridSet(n, p.d, full))

    seed_rec = greedy_lower_bound(p, n, seed=0)
    shared = _Shared(seed_rec.lower, seed_rec.witness.bits)

    # root bound: a packing of vertex-disjoint copies, each forcing an exclusion
    packed = 0
    root_disjoint = 0
    for m in masks:
        if not m & packed:
            root_disjoint += 1
            packed |= m
    root_upper = V - root_disjoint

    root_rem = min(masks, key=lambda m: m.bit_count())
    tasks = []
    taken = 0
    rem = root_rem
    while rem:
        v = rem & -rem
        rem ^= v
        tasks.append((v, taken))
        taken |= v

    complete = True
    if workers <= 1:
        box = [budget]
        try:
            for v, kept in tasks:
                _search(masks, V, v, 1, kept, shared, box)
        except _OutOfNodes:
            complete = False
    else:
        per_task = max(1, budget // len(tasks))

        def run(task):
            v, kept = task
            try:
                _search(masks, V, v, 1, kept, shared, [per_task])
                return True
            except _OutOfNodes:
                return False

        with ThreadPoolExecutor(max_workers=workers) as pool:
            complete = all(pool.map(run, tasks))

    if complete:
        return RNumberRecord(pid, n, shared.size, shared.size, True,
                             "branch-and-bound", GridSet(n, p.d, shared.mask))
    return RNumberRecord(pid, n, shared.size, root_upper, False,
                         "branch-and-bound", GridSet(n, p.d, shared.mask))


def count_xfree_subsets(pattern: Pattern, n: int, *,
                        vertex_cap: int = DEFAULT_COUNT_VERTEX_CAP,
                        budget: int = DEFAULT_COUNT_NODE_BUDGET,
                        r_exact: Optional[int] = None) -> CountRecord:
    """Exact count of free subsets of [n]^d (the empty set included).

    Backtracks over grid points in index order; a point may join only if
    it does not complete a copy among the points already chosen.
    """
    p = normalize(pattern)
    V = n**p.d
    if V > vertex_cap:
        raise BudgetExceededError(f"n^d = {V} exceeds vertex cap {vertex_cap}")
    at_max: list[list[int]] = [[] for _ in range(V)]
    for edge in copy_edges(p, n):
        top = max(edge)
        m = 0
        for idx in edge:
            if idx != top:
                m |= 1 << idx
        at_max[top].append(m)
    nodes = [budget]

    def walk(v: int, chosen: int) -> int:
        nodes[0] -= 1
        if nodes[0] < 0:
            raise BudgetExceededError(f"count budget of {budget} nodes exceeded")
        if v == V:
            return 1
        total = walk(v + 1, chosen)
        for m in at_max[v]:
            if m & ~chosen == 0:
                break
        else:
            total += walk(v + 1, chosen | (1 << v))
        return total

    count = walk(0, 0)
    log2c = _log2_big(count)
    ratio = log2c / r_exact if r_exact else None
    return CountRecord(pattern_id=pattern_hash(p), n=n, count=count,
                       log2_count=log2c, ratio=ratio)


def verify_witness(A: GridSet, pattern: Pattern, claimed: int) -> bool:
    """Certificate check: the set has the claimed size and is free."""
    return A.size == claimed and is_x_free(A, pattern)
