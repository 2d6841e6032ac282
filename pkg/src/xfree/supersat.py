"""Supersaturation experiments: how many copies dense sets must contain.

The unconditional bound is copies(A) >= |A| - r_X(n).  A sharper bound
comes from sampling: pick a prime p below |A|/(4*d*n^(d-1)*M) and a base
point b, restrict A to the dilated sub-grid b + p*[M]^d, and compare the
expected restricted copy count from below (density) and from above (few
sub-grids capture any fixed copy, because primitivity forces p to
divide its ratio).  The module computes those expectations exactly and
by seeded Monte Carlo, audits every intermediate inequality, and
implements the sequence filter that turns a density comparison between
n and m(n) into an accepted set of grid sides.

Prime counting is by sieve; the working constant l0 = 3 in the prime
lower bound pi(l) >= l/(2 log l) is validated by verify_pnt_constant up
to the sieve cap (the tail beyond the cap rests on the prime number
theorem and is not asserted by tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, NamedTuple, Optional

from mpmath import mp, mpf
from numpy.random import Generator, Philox

from .copies import GridSet, gamma_count, point_index
from .errors import BudgetExceededError, PreconditionError
from .patterns import Pattern, normalize
from .solver import RNumberRecord

PRIME_FLOOR_L0 = 3          # validated by verify_pnt_constant(3, 10**6)
DEFAULT_SIEVE_CAP = 10**8

_sieve_cache: bytearray = bytearray()


def _sieve(limit: int) -> bytearray:
    """Cached primality table for 0..limit."""
    global _sieve_cache
    if len(_sieve_cache) > limit:
        return _sieve_cache
    size = limit + 1
    table = bytearray([1]) * size
    table[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if table[p]:
            table[p * p :: p] = bytearray(len(range(p * p, size, p)))
    _sieve_cache = table
    return table


def prime_pi(limit: int, *, cap: int = DEFAULT_SIEVE_CAP) -> int:
    """Exact number of primes <= limit."""
    if limit < 2:
        raise PreconditionError(f"prime_pi needs limit >= 2, got {limit}")
    if limit > cap:
        raise BudgetExceededError(f"limit {limit} exceeds sieve cap {cap}")
    table = _sieve(limit)
    return sum(table[: limit + 1])


def primes_up_to(limit: int, *, cap: int = DEFAULT_SIEVE_CAP) -> list[int]:
    if limit < 2:
        return []
    if limit > cap:
        raise BudgetExceededError(f"limit {limit} exceeds sieve cap {cap}")
    table = _sieve(limit)
    return [p for p in range(2, limit + 1) if table[p]]


class PntCheck(NamedTuple):
    ok: bool
    first_violation: Optional[int]


def verify_pnt_constant(l0: int, l_max: int, *, cap: int = DEFAULT_SIEVE_CAP) -> PntCheck:
    """Scan pi(l) >= l/(2 log l) for every integer l in [l0, l_max].

    Logs are natural.  The comparison 2*pi(l)*log(l) >= l is done in
    floats with an escalation to 60-digit arithmetic whenever the two
    sides are within relative 1e-9, so rounding can never flip a verdict.
    """
    if not 2 <= l0 <= l_max:
        raise PreconditionError(f"need 2 <= l0 <= l_max, got {l0}, {l_max}")
    if l_max > cap:
        raise BudgetExceededError(f"l_max {l_max} exceeds sieve cap {cap}")
    table = _sieve(l_max)
    count = sum(table[:l0])
    for l in range(l0, l_max + 1):
        count += table[l]
        lhs = 2.0 * count * math.log(l)
        if abs(lhs - l) <= 1e-9 * l:
            with mp.workdps(60):
                ok = 2 * count * mp.log(l) >= l
        else:
            ok = lhs >= l
        if not ok:
            return PntCheck(False, l)
    return PntCheck(True, None)


def check_supersat_trivial(A: GridSet, pattern: Pattern, r_exact: RNumberRecord) -> bool:
    """copies(A) >= |A| - r_X(n), with r_X(n) known exactly."""
    if not r_exact.exact:
        raise PreconditionError("check_supersat_trivial needs an exact extremal record")
    if r_exact.n != A.n:
        raise PreconditionError(f"record is for n={r_exact.n}, grid has n={A.n}")
    return gamma_count(A, pattern) >= A.size - r_exact.value


# --- sub-grid sampling -------------------------------------------------

def _prime_upper(A: GridSet, M: int) -> Fraction:
    return Fraction(A.size, 4 * A.d * A.n ** (A.d - 1) * M)


def _admissible_primes(A: GridSet, M: int) -> list[int]:
    bound = _prime_upper(A, M)
    return primes_up_to(math.floor(bound))


def _size_condition(A: GridSet, M: int, r_record: Optional[RNumberRecord]) -> tuple[bool, bool]:
    """(met, conservative): |A| > max{4*l0*d*n^(d-1)*M, r_X(n)}.

    Without an exact record the r term is checked against the best known
    lower bound, which can pass when the true condition fails, so such
    checks are flagged conservative.
    """
    threshold = 4 * PRIME_FLOOR_L0 * A.d * A.n ** (A.d - 1) * M
    if A.size <= threshold:
        return False, False
    if r_record is not None and r_record.exact:
        return A.size > r_record.value, False
    r_floor = r_record.lower if r_record is not None else 1
    return A.size > r_floor, True


def _restrict(A: GridSet, pattern: Pattern, M: int, p: int, base: tuple[int, ...]) -> GridSet:
    """A intersected with base + p*[M]^d, in the sub-grid's own coordinates."""
    bits = 0
    for j in product(*(range(1, M + 1) for _ in range(A.d))):
        original = tuple(base[i] + p * j[i] for i in range(A.d))
        if A.contains(original):
            bits |= 1 << point_index(j, M)
    return GridSet(M, A.d, bits)


@dataclass(frozen=True)
class SupersatSample:
    """One draw of the (prime, base point) sub-grid experiment."""

    prime: int
    base: tuple[int, ...]
    restricted_size: int
    copy_count: int
    size_condition_met: bool
    size_condition_conservative: bool


def _require_experiment(A: GridSet, pattern: Pattern, M: int) -> Pattern:
    p = normalize(pattern)
    if p.d != A.d:
        raise PreconditionError(f"pattern dimension {p.d} != grid dimension {A.d}")
    if not 2 <= M <= A.n:
        raise PreconditionError(f"need 2 <= M <= n, got M={M}, n={A.n}")
    if not _admissible_primes(A, M):
        bound = _prime_upper(A, M)
        raise PreconditionError(
            "no admissible prime: |A|/(4*d*n^(d-1)*M) = "
            f"{float(bound):.6g} < 2 (size condition |A| > 4*l0*d*n^(d-1)*M fails)"
        )
    return p


def sample_subgrid(A: GridSet, pattern: Pattern, M: int, seed: int = 0, *,
                   index: int = 0, r_record: Optional[RNumberRecord] = None) -> SupersatSample:
    """Draw one sub-grid sample with a counter-based generator.

    Stream `index` makes samples independent and reproducible in
    parallel; the prime draw and the base-point draws consume disjoint
    positions of the stream.  The same (seed, index) always returns the
    same sample.
    """
    p = _require_experiment(A, pattern, M)
    primes = _admissible_primes(A, M)
    rng = Generator(Philox(key=seed).jumped(index) if index else Philox(key=seed))
    prime = primes[int(rng.integers(0, len(primes)))]
    span = A.n - M * prime
    base = tuple(int(v) for v in rng.integers(0, span, size=A.d))
    restricted = _restrict(A, p, M, prime, base)
    met, conservative = _size_condition(A, M, r_record)
    return SupersatSample(
        prime=prime, base=base, restricted_size=restricted.size,
        copy_count=gamma_count(restricted, p),
        size_condition_met=met, size_condition_conservative=conservative,
    )


@dataclass(frozen=True)
class PrimeAudit:
    """Exact per-prime averages plus the large-coordinate overlap |A ∩ I_p|."""

    prime: int
    base_count: int
    overlap: int
    mean_size: Fraction
    mean_gamma: Fraction


@dataclass(frozen=True)
class ExpectedGammaAudit:
    mean_gamma: Fraction
    mean_size: Fraction
    per_prime: tuple[PrimeAudit, ...]
    size_condition_met: bool
    size_condition_conservative: bool


def exact_expected_gamma(A: GridSet, pattern: Pattern, M: int, *,
                         budget: int = 2_000_000,
                         r_record: Optional[RNumberRecord] = None) -> ExpectedGammaAudit:
    """Exact E[copies(A_b)] over a uniform prime, then a uniform base.

    Also reports E[|A_b|] and, per prime, the count of members of A with
    every coordinate at most n - M*p - 1 (the region where base points
    can reach them).
    """
    p = _require_experiment(A, pattern, M)
    primes = _admissible_primes(A, M)
    total_pairs = sum((A.n - M * q) ** A.d for q in primes)
    if total_pairs > budget:
        raise BudgetExceededError(
            f"{total_pairs} (prime, base) pairs exceed the enumeration budget {budget}"
        )
    audits = []
    members = A.points()
    for q in primes:
        span = A.n - M * q
        gammas = 0
        sizes = 0
        for base in product(*(range(0, span) for _ in range(A.d))):
            restricted = _restrict(A, p, M, q, base)
            sizes += restricted.size
            gammas += gamma_count(restricted, p)
        overlap = sum(1 for pt in members if all(c <= A.n - M * q - 1 for c in pt))
        audits.append(PrimeAudit(
            prime=q, base_count=span**A.d, overlap=overlap,
            mean_size=Fraction(sizes, span**A.d),
            mean_gamma=Fraction(gammas, span**A.d),
        ))
    mean_gamma = sum((a.mean_gamma for a in audits), Fraction(0)) / len(audits)
    mean_size = sum((a.mean_size for a in audits), Fraction(0)) / len(audits)
    met, conservative = _size_condition(A, M, r_record)
    return ExpectedGammaAudit(
        mean_gamma=mean_gamma, mean_size=mean_size, per_prime=tuple(audits),
        size_condition_met=met, size_condition_conservative=conservative,
    )


class GammaEstimate(NamedTuple):
    mean: float
    stderr: float
    samples: int


def estimate_expected_gamma(A: GridSet, pattern: Pattern, M: int, samples: int,
                            seed: int = 0, *,
                            r_record: Optional[RNumberRecord] = None) -> GammaEstimate:
    """Monte-Carlo companion of exact_expected_gamma; deterministic per seed."""
    if samples < 1:
        raise PreconditionError(f"need at least one sample, got {samples}")
    values = [
        sample_subgrid(A, pattern, M, seed, index=i, r_record=r_record).copy_count
        for i in range(samples)
    ]
    mean = sum(values) / samples
    if samples > 1:
        var = sum((v - mean) ** 2 for v in values) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = 0.0
    return GammaEstimate(mean=mean, stderr=stderr, samples=samples)


def check_supersat_prime(A: GridSet, pattern: Pattern, M: int,
                         r_n: RNumberRecord, r_M: RNumberRecord) -> bool:
    """Audit of the sampled supersaturation bound (natural logs):

        copies(A) >= |A|/(11*d*log^2 n) * (n/M) * (|A|/(2n^d) - r_X(M)/M^d)

    Preconditions: 2 <= M <= n and |A| > max{4*l0*d*n^(d-1)*M, r_X(n)}.
    The r_X(n) part accepts an exact record, or an inexact one whose
    upper bound already certifies |A| > r_X(n).  r_X(M) enters the bound
    itself and must be exact.
    """
    p = normalize(pattern)
    n, d = A.n, A.d
    if p.d != d:
        raise PreconditionError(f"pattern dimension {p.d} != grid dimension {d}")
    if not 2 <= M <= n:
        raise PreconditionError(f"need 2 <= M <= n, got M={M}, n={n}")
    if not r_M.exact:
        raise PreconditionError("r_X(M) must be exact; it enters the bound")
    if r_M.n != M or r_n.n != n:
        raise PreconditionError("extremal records do not match (n, M)")
    threshold = 4 * PRIME_FLOOR_L0 * d * n ** (d - 1) * M
    if A.size <= threshold:
        raise PreconditionError(
            f"size condition fails: |A| = {A.size} <= 4*l0*d*n^(d-1)*M = {threshold}"
        )
    if r_n.exact:
        if A.size <= r_n.value:
            raise PreconditionError(f"size condition fails: |A| = {A.size} <= r_X(n) = {r_n.value}")
    elif A.size <= r_n.upper:
        raise PreconditionError(
            f"cannot certify |A| > r_X(n): |A| = {A.size}, known bounds "
            f"[{r_n.lower}, {r_n.upper}]"
        )
    size = A.size
    log_n = math.log(n)
    rhs = (size / (11 * d * log_n**2)) * (n / M) * (size / (2 * n**d) - r_M.value / M**d)
    return gamma_count(A, p) >= rhs


# --- the sequence filter ----------------------------------------------

RProvider = Callable[[int], Optional[tuple[int, str]]]


def m_of_n(pattern: Pattern, n: int, r_of: RProvider) -> int:
    """Comparison side m(n) = (n / log^(3k) n) * (r_X(n)/n^d)^(k+2),
    floored and clamped to at least 2 so the sub-grid lemma stays
    applicable.  Evaluated at 50 digits."""
    if n < 3:
        raise PreconditionError(f"m(n) needs n >= 3, got {n}")
    got = r_of(n)
    if got is None:
        raise PreconditionError(f"no extremal value available for n={n}")
    r_value, _ = got
    if r_value <= 0:
        raise PreconditionError(f"extremal value must be positive, got {r_value}")
    p = normalize(pattern)
    k, d = p.k, p.d
    with mp.workdps(50):
        m = (mpf(n) / mp.log(n) ** (3 * k)) * (mpf(r_value) / mpf(n) ** d) ** (k + 2)
        return max(2, int(mp.floor(m)))


def alpha_default(c_hat: float, k: int) -> Fraction:
    """Half of exp(-5*c^2*k/2): strictly inside the admissible interval
    (0, exp(-5*c^2*k/2)) for the sequence filter."""
    if c_hat <= 0:
        raise PreconditionError(f"need a positive empirical constant, got {c_hat}")
    return Fraction(math.exp(-2.5 * c_hat * c_hat * k)) / 2


@dataclass(frozen=True)
class SequenceFilterReport:
    alpha: Fraction
    n_min: int
    n_max: int
    m_values: dict[int, int]
    accepted: tuple[int, ...]
    r_provenance: dict[int, str]
    beta_r: Optional[float] = None      # growth hypotheses: recorded, never checked
    beta_m: Optional[float] = None


def filter_sequence(r_table: Mapping[int, int], m_map, alpha, d: int,
                    n_range: Iterable[int], *, provenance: Optional[Mapping[int, str]] = None,
                    beta_r: Optional[float] = None,
                    beta_m: Optional[float] = None) -> SequenceFilterReport:
    """Accept every n in range with r(n)/n^d >= alpha * r(m(n))/m(n)^d.

    Comparisons are exact rational arithmetic; alpha may be a Fraction,
    integer, or string like "1/2".  m_map is a mapping or callable with
    m(n) <= n, and r_table must cover the range and all m images.
    """
    alpha = Fraction(alpha)
    get_m = m_map if callable(m_map) else m_map.__getitem__
    ns = sorted(n_range)
    if not ns:
        raise PreconditionError("empty range")
    m_values: dict[int, int] = {}
    accepted = []
    for n in ns:
        m = get_m(n)
        if m > n:
            raise PreconditionError(f"m(n) must be at most n, got m({n}) = {m}")
        for point in (n, m):
            if point not in r_table:
                raise PreconditionError(f"extremal table is missing n = {point}")
        m_values[n] = m
        lhs = Fraction(r_table[n], n**d)
        rhs = alpha * Fraction(r_table[m], m**d)
        if lhs >= rhs:
            accepted.append(n)
    return SequenceFilterReport(
        alpha=alpha, n_min=ns[0], n_max=ns[-1], m_values=m_values,
        accepted=tuple(accepted),
        r_provenance=dict(provenance) if provenance else {},
        beta_r=beta_r, beta_m=beta_m,
    )


def check_supersat_seq(A: GridSet, pattern: Pattern, alpha, r_n: RNumberRecord, *,
                       copy_count=None) -> bool:
    """Strong supersaturation audit (boundary inclusive):

        copies(A) >= (log^(3k-2) n / 3d) * (n^d/r_X(n))^k * n^d

    under the precondition |A| >= (4/alpha) * r_X(n).  Generic small-n
    instances fail the inequality itself; the boolean is reported as
    computed.  `copy_count` overrides the left side for arithmetic
    audits.
    """
    p = normalize(pattern)
    if not r_n.exact:
        raise PreconditionError("check_supersat_seq needs an exact extremal record")
    if r_n.n != A.n:
        raise PreconditionError(f"record is for n={r_n.n}, grid has n={A.n}")
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise PreconditionError("alpha must be positive")
    if Fraction(A.size) * alpha < 4 * r_n.value:
        raise PreconditionError(
            f"density condition fails: |A| = {A.size} < (4/alpha)*r_X(n) = "
            f"{float(Fraction(4, 1) * r_n.value / alpha):.6g}"
        )
    n, d, k = A.n, p.d, p.k
    with mp.workdps(50):
        rhs = (mp.log(n) ** (3 * k - 2) / (3 * d)) * (mpf(n) ** d / r_n.value) ** k * mpf(n) ** d
        lhs = mpf(copy_count) if copy_count is not None else mpf(gamma_count(A, p))
        return bool(lhs >= rhs)
