"""Container-lemma parameter arithmetic for the copies hypergraph.

The container machinery itself is used as a black box; what this module
computes is everything around it: the weighted co-degree functional
Delta(G, tau), the epsilon/tau schedule driven by an extremal-value
provider, the two hypothesis checks (tau small enough; Delta below
epsilon/(12 k!)), and the assembled budget for the logarithm of the
container-family size plus the per-container size cap, which together
bound the exponent of the free-subset count.  With the schedule's own
tau, the bounded co-degree estimate meets the second hypothesis with
equality by construction; that identity is carried as a consistency
check.  All real arithmetic runs at 50 decimal digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Mapping, Optional

from mpmath import mp, mpf

from .copies import HypergraphSummary, count_copies_closed_form
from .errors import PreconditionError
from .patterns import Pattern, normalize
from .supersat import RProvider

MAX_UNIFORMITY = 8          # k!^3 growth makes larger patterns meaningless here
WORK_DPS = 50


def _to_mpf(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def _require_k(k: int):
    if not 3 <= k <= MAX_UNIFORMITY:
        raise PreconditionError(f"uniformity k must be in [3, {MAX_UNIFORMITY}], got {k}")


def delta_tau(summary: HypergraphSummary, tau) -> mpf:
    """The co-degree functional

        Delta(G, tau) = 2^(C(k,2)-1) * sum_{j=2}^{k} 2^(-C(j-1,2)) * Delta_j / (tau^(j-1) * dbar)

    evaluated at 50 digits.  Strictly decreasing in tau and homogeneous
    of degree 1 in the co-degree vector.
    """
    _require_k(summary.k)
    if summary.avg_degree == 0:
        raise PreconditionError("hypergraph has no edges (average degree zero)")
    with mp.workdps(WORK_DPS):
        tau_v = _to_mpf(tau)
        if tau_v <= 0:
            raise PreconditionError(f"tau must be positive, got {tau}")
        dbar = _to_mpf(summary.avg_degree)
        total = mpf(0)
        for j in range(2, summary.k + 1):
            total += (
                mpf(2) ** (-comb(j - 1, 2))
                * summary.codegrees[j]
                / (tau_v ** (j - 1) * dbar)
            )
        return mpf(2) ** (comb(summary.k, 2) - 1) * total


@dataclass(frozen=True)
class ScheduleResult:
    """The epsilon/tau pair for one grid side, with provenance of the
    extremal value that produced it."""

    n: int
    epsilon: mpf
    tau: mpf
    r_value: int
    r_provenance: str


def epsilon_tau_schedule(pattern: Pattern, n: int, r_of: RProvider, gamma) -> ScheduleResult:
    """Evaluate the parameter schedule (natural logs, 50 digits):

        epsilon(n) = (1/3d) * (log^(3k-2) n / n) * (n^d / r)^k
        tau(n)     = (12 k! 2^(k^2) k^3 / (gamma n epsilon(n)))^(1/(k-1))
    """
    p = normalize(pattern)
    _require_k(p.k)
    if n < 3:
        raise PreconditionError(f"the schedule needs n >= 3, got {n}")
    got = r_of(n)
    if got is None:
        raise PreconditionError(f"no extremal value available for n={n}")
    r_value, provenance = got
    if r_value <= 0:
        raise PreconditionError(f"extremal value must be positive, got {r_value}")
    gamma_v = Fraction(gamma)
    if gamma_v <= 0:
        raise PreconditionError(f"gamma must be positive, got {gamma}")
    k, d = p.k, p.d
    with mp.workdps(WORK_DPS):
        eps = (
            mpf(1) / (3 * d)
            * mp.log(n) ** (3 * k - 2) / n
            * (mpf(n) ** d / r_value) ** k
        )
        tau = (
            12 * factorial(k) * mpf(2) ** (k * k) * k**3
            / (_to_mpf(gamma_v) * n * eps)
        ) ** (mpf(1) / (k - 1))
    return ScheduleResult(n=n, epsilon=eps, tau=tau, r_value=r_value,
                          r_provenance=provenance)


@dataclass(frozen=True)
class GammaFloor:
    """Average-degree growth constant: d-bar(G_n) >= gamma * n."""

    measured_min: Fraction
    analytic_floor: Optional[Fraction]
    gamma: Fraction


def estimate_gamma_const(pattern: Pattern, n_range) -> GammaFloor:
    """Smallest measured d-bar/n over the range, the analytic floor
    k/(2^(d+1) * w_max) valid from n >= 2*w_max (truncate the copy count
    at ratios up to n/(2*w_max)), and the gamma to use downstream."""
    p = normalize(pattern)
    ns = sorted(set(n_range))
    if not ns:
        raise PreconditionError("empty range")
    measured = min(
        Fraction(p.k * count_copies_closed_form(p, n), n ** (p.d + 1)) for n in ns
    )
    wmax = max(p.widths)
    floor = None
    if ns[0] >= 2 * wmax:
        floor = Fraction(p.k, 2 ** (p.d + 1) * wmax)
    gamma = floor if floor is not None and floor <= measured else measured
    return GammaFloor(measured_min=measured, analytic_floor=floor, gamma=gamma)


def bounded_delta(k: int, tau, gamma, n: int) -> mpf:
    """Chained co-degree estimate 2^(k^2) * k^3 / (tau^(k-1) * gamma * n),
    from Delta_j <= Delta_2 <= k^2 and d-bar >= gamma*n."""
    _require_k(k)
    with mp.workdps(WORK_DPS):
        return mpf(2) ** (k * k) * k**3 / (_to_mpf(tau) ** (k - 1) * _to_mpf(Fraction(gamma)) * n)


@dataclass(frozen=True)
class HypothesisCheck:
    tau_ok: bool
    delta_ok: bool
    delta_mode: str            # "exact" or "bounded"
    delta_value: mpf
    identity_gap: Optional[mpf]  # |12*k!*delta/epsilon - 1| in bounded mode


def check_container_hypotheses(k: int, epsilon, tau, *,
                               summary: Optional[HypergraphSummary] = None,
                               gamma=None, n: Optional[int] = None) -> HypothesisCheck:
    """Both container hypotheses for the given epsilon and tau.

    With a hypergraph summary the co-degree functional is exact;
    otherwise the bounded estimate is used, which needs gamma and n.
    When tau comes from the schedule, the bounded estimate equals
    epsilon/(12 k!) by construction; identity_gap reports the relative
    deviation so callers can assert it.
    """
    _require_k(k)
    with mp.workdps(WORK_DPS):
        eps_v = _to_mpf(epsilon)
        tau_v = _to_mpf(tau)
        if summary is not None:
            mode = "exact"
            delta = delta_tau(summary, tau_v)
            gap = None
        else:
            if gamma is None or n is None:
                raise PreconditionError("bounded mode needs gamma and n")
            mode = "bounded"
            delta = bounded_delta(k, tau_v, gamma, n)
            gap = abs(12 * factorial(k) * delta / eps_v - 1)
        tau_ok = bool(tau_v < mpf(1) / (200 * k * factorial(k) ** 2))
        # the schedule's tau meets the limit with equality by construction,
        # so equality within 1e-9 relative counts as satisfied
        limit = eps_v / (12 * factorial(k))
        delta_ok = bool(delta <= limit or abs(delta / limit - 1) <= mpf("1e-9"))
        return HypothesisCheck(tau_ok=tau_ok, delta_ok=delta_ok, delta_mode=mode,
                               delta_value=delta, identity_gap=gap)


@dataclass(frozen=True)
class ContainerParams:
    """Everything the container accounting needs for one grid side."""

    n: int
    d: int
    k: int
    r_value: int
    r_provenance: str
    gamma: Fraction
    alpha: Fraction
    epsilon: mpf
    tau: mpf
    delta_mode: str
    delta_value: mpf
    hyp_tau: bool
    hyp_delta: bool
    c_cap: int                   # 1000 * k * k!^3
    logC_budget: mpf             # c * n^d * tau * log(1/eps) * log(1/tau)
    size_cap: mpf                # (4/alpha) * r
    total_exponent_budget: mpf   # logC + size_cap * log 2, natural logs

    @property
    def admissible(self) -> bool:
        with mp.workdps(WORK_DPS):
            return bool(
                self.hyp_tau and self.hyp_delta
                and 0 < self.epsilon < mpf(1) / 2
                and 0 < self.tau < mpf(1) / 2
            )


def build_container_params(pattern: Pattern, n: int, r_of: RProvider, gamma, alpha, *,
                           summary: Optional[HypergraphSummary] = None) -> ContainerParams:
    """Schedule + hypothesis checks + assembled exponent budget."""
    p = normalize(pattern)
    sched = epsilon_tau_schedule(p, n, r_of, gamma)
    check = check_container_hypotheses(
        p.k, sched.epsilon, sched.tau,
        summary=summary, gamma=None if summary is not None else gamma,
        n=None if summary is not None else n,
    )
    alpha_v = Fraction(alpha)
    if alpha_v <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    k = p.k
    with mp.workdps(WORK_DPS):
        c_cap = 1000 * k * factorial(k) ** 3
        logc = c_cap * mpf(n) ** p.d * sched.tau * mp.log(1 / sched.epsilon) * mp.log(1 / sched.tau)
        size_cap = 4 * mpf(sched.r_value) / _to_mpf(alpha_v)
        total = logc + size_cap * mp.log(2)
    return ContainerParams(
        n=n, d=p.d, k=k, r_value=sched.r_value, r_provenance=sched.r_provenance,
        gamma=Fraction(gamma), alpha=alpha_v, epsilon=sched.epsilon, tau=sched.tau,
        delta_mode=check.delta_mode, delta_value=check.delta_value,
        hyp_tau=check.tau_ok, hyp_delta=check.delta_ok, c_cap=c_cap,
        logC_budget=logc, size_cap=size_cap, total_exponent_budget=total,
    )


@dataclass(frozen=True)
class BudgetRow:
    n: int
    total_budget: float
    true_exponent: Optional[float]       # natural log of the exact count
    ratio: Optional[float]


def counting_budget(params_list, counts: Mapping[int, int]) -> list[BudgetRow]:
    """Assembled exponent budgets next to true exponents where exact
    counts exist.  A trend table: nothing is asserted here."""
    if isinstance(params_list, ContainerParams):
        params_list = [params_list]
    rows = []
    for params in params_list:
        budget = float(params.total_exponent_budget)
        count = counts.get(params.n)
        if count is not None:
            with mp.workdps(WORK_DPS):
                true_exp = float(mp.log(count))
            ratio = true_exp / budget if budget != 0 else None
        else:
            true_exp = None
            ratio = None
        rows.append(BudgetRow(n=params.n, total_budget=budget,
                              true_exponent=true_exp, ratio=ratio))
    return rows
