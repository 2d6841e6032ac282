import math
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from xfree import (
    PreconditionError,
    codegree_stats,
    count_xfree_subsets,
    solve_rx_exact,
)
from xfree.containers import (
    BudgetRow,
    bounded_delta,
    build_container_params,
    check_container_hypotheses,
    counting_budget,
    delta_tau,
    epsilon_tau_schedule,
    estimate_gamma_const,
)
from xfree.copies import HypergraphSummary
from xfree.patterns import corner


def single_edge_summary():
    return HypergraphSummary(
        n=3, d=1, k=3, edge_count=1, vertex_count=3,
        avg_degree=Fraction(1), codegrees={2: 1, 3: 1},
        gamma_estimate=Fraction(1, 3),
    )


def test_delta_tau_toy_is_sixteen():
    value = delta_tau(single_edge_summary(), Fraction(1, 2))
    assert abs(value - 16) < 1e-40


def test_delta_tau_homogeneous_and_monotone():
    toy = single_edge_summary()
    doubled = HypergraphSummary(
        n=3, d=1, k=3, edge_count=1, vertex_count=3,
        avg_degree=Fraction(1), codegrees={2: 2, 3: 2},
        gamma_estimate=Fraction(1, 3),
    )
    assert abs(delta_tau(doubled, Fraction(1, 2)) - 32) < 1e-38
    taus = [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), 1, 4, 64]
    values = [delta_tau(toy, t) for t in taus]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1  # tends to zero as tau grows


def test_delta_tau_rejects_empty():
    empty = HypergraphSummary(
        n=2, d=1, k=3, edge_count=0, vertex_count=2,
        avg_degree=Fraction(0), codegrees={2: 0, 3: 0},
        gamma_estimate=Fraction(0),
    )
    with pytest.raises(PreconditionError):
        delta_tau(empty, Fraction(1, 2))


def test_schedule_degenerate_provider(ap3):
    s = epsilon_tau_schedule(ap3, 100, lambda n: (n, "degenerate"), 1)
    with mp.workdps(50):
        expected = mp.log(100) ** 7 / (3 * 100)
    assert abs(s.epsilon - expected) < 1e-40
    assert s.r_provenance == "degenerate"


def test_schedule_golden_value(ap3):
    """k=3, d=1, n=1e4, r=1e3, gamma=1; locked after recomputation at
    doubled precision."""
    s = epsilon_tau_schedule(ap3, 10**4, lambda n: (10**3, "user"), 1)
    with mp.workdps(100):
        eps100 = mpf(1) / 3 * mp.log(10**4) ** 7 / 10**4 * mpf(10) ** 3
        tau100 = (12 * 6 * mpf(2) ** 9 * 27 / (1 * 10**4 * eps100)) ** mpf("0.5")
    assert abs(s.epsilon / eps100 - 1) < 1e-45
    assert abs(s.tau / tau100 - 1) < 1e-45
    assert f"{float(s.epsilon):.12g}" == "187416.79444"
    assert f"{float(s.tau):.12g}" == "0.0230451138517"


def test_schedule_monotone_in_r(ap3):
    values = [
        epsilon_tau_schedule(ap3, 10**4, lambda n, r=r: (r, "user"), 1).epsilon
        for r in (10**2, 10**3, 10**4)
    ]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_gamma_estimate_ap3(ap3):
    g = estimate_gamma_const(ap3, range(10, 101))
    assert g.analytic_floor == Fraction(3, 8)
    assert g.measured_min >= g.analytic_floor
    assert g.gamma == Fraction(3, 8)
    # measured density heads toward 3/4
    g_big = estimate_gamma_const(ap3, [4000])
    assert abs(float(g_big.measured_min) - 0.75) < 0.01


def test_gamma_estimate_corner():
    g = estimate_gamma_const(corner(2), range(2, 30))
    assert g.analytic_floor == Fraction(3, 8)
    assert g.measured_min >= g.analytic_floor


def test_gamma_estimate_degenerate_range(ap3):
    # below 2*w_max the floor does not apply: measurement only
    g = estimate_gamma_const(ap3, [3])
    assert g.analytic_floor is None
    assert g.gamma == g.measured_min == Fraction(3 * 1, 3**2)


def test_bounded_identity_sweep(ap3, ap3_exact_table):
    """With the schedule's own tau, the bounded co-degree estimate meets
    epsilon/(12 k!) with equality: 20-point (n, r, gamma) sweep."""
    cases = []
    for n in (10, 20, 50, 100, 10**3, 10**4, 10**5):
        for r in (max(2, n // 10), max(3, n // 3)):
            cases.append((n, r, Fraction(3, 8)))
        cases.append((n, n, Fraction(1, 2)))
    assert len(cases) >= 20
    for n, r, gamma in cases:
        s = epsilon_tau_schedule(ap3, n, lambda m, rv=r: (rv, "user"), gamma)
        chk = check_container_hypotheses(3, s.epsilon, s.tau, gamma=gamma, n=n)
        assert chk.delta_mode == "bounded"
        assert chk.identity_gap < 1e-9, (n, r)
        assert chk.delta_ok


def test_exact_delta_below_bounded_on_ap3(ap3, ap3_exact_table):
    gamma = estimate_gamma_const(ap3, range(4, 31)).gamma
    table = dict(ap3_exact_table)
    for n in range(21, 31):
        table[n] = solve_rx_exact(ap3, n).value
    for n in range(4, 31):
        summary = codegree_stats(ap3, n)
        if summary.edge_count == 0:
            continue
        s = epsilon_tau_schedule(ap3, n, lambda m: (table[m], "exact"), gamma)
        exact = delta_tau(summary, s.tau)
        bound = bounded_delta(3, s.tau, gamma, n)
        assert exact <= bound, n


def test_exact_mode_hypotheses(ap3):
    summary = codegree_stats(ap3, 30)
    s = epsilon_tau_schedule(ap3, 30, lambda n: (12, "exact"), Fraction(3, 8))
    chk = check_container_hypotheses(3, s.epsilon, s.tau, summary=summary)
    assert chk.delta_mode == "exact"
    assert not chk.tau_ok  # desk-scale tau is far above the container threshold
    assert chk.identity_gap is None


def test_build_params_and_admissibility(ap3):
    gamma = Fraction(3, 8)
    params = build_container_params(ap3, 30, lambda n: (12, "exact"), gamma, "1/2")
    assert params.c_cap == 1000 * 3 * 6**3
    assert params.size_cap == 8 * 12
    assert not params.admissible  # tau(30) is far above 1/2
    with mp.workdps(50):
        expected_total = params.logC_budget + params.size_cap * mp.log(2)
    assert abs(params.total_exponent_budget - expected_total) < 1e-30


def test_counting_budget_rows(ap3, corner2):
    gamma = Fraction(3, 8)
    count4 = count_xfree_subsets(ap3, 4).count
    assert count4 == 13
    params = build_container_params(ap3, 4, lambda n: (3, "exact"), gamma, "1/2")
    row = counting_budget(params, {4: count4})[0]
    assert isinstance(row, BudgetRow)
    assert abs(row.true_exponent - math.log(13)) < 1e-12
    assert row.total_budget > row.true_exponent
    assert 0 < row.ratio < 1

    corner_count = count_xfree_subsets(corner2, 2).count
    assert corner_count == 14
    params2 = build_container_params(corner2, 4, lambda n: (11, "exact"), gamma, "1/2")
    row2 = counting_budget(params2, {2: corner_count})[0]
    assert row2.true_exponent is None  # no count for n=4 in the cache
    empty = counting_budget(params2, {})[0]
    assert empty.true_exponent is None and empty.ratio is None


def test_budget_dominates_true_exponent_for_any_alpha(ap3, ap3_exact_table):
    """The per-container size cap alone outweighs the true exponent on
    every exactly counted instance, for any admissible alpha."""
    gamma = Fraction(3, 8)
    for n in range(4, 15):
        count = count_xfree_subsets(ap3, n).count
        for alpha in (Fraction(1, 2), Fraction(1, 10), Fraction(9, 10)):
            params = build_container_params(
                ap3, n, lambda m: (ap3_exact_table[m], "exact"), gamma, alpha
            )
            row = counting_budget(params, {n: count})[0]
            assert row.total_budget > row.true_exponent, (n, alpha)


def test_uniformity_cap():
    from xfree.patterns import arithmetic_progression

    nine = arithmetic_progression(9)
    with pytest.raises(PreconditionError):
        epsilon_tau_schedule(nine, 100, lambda n: (n, "degenerate"), 1)
