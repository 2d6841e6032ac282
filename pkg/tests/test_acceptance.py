"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (visible with pytest -s) and
enforces the stated runtime budget.  Expected values marked as derived
come from the independent brute-force oracles in oracles.py.
"""

import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import oracles
from xfree import (
    GridSet,
    Pattern,
    codegree_stats,
    count_copies_closed_form,
    count_xfree_subsets,
    enumerate_copies,
    gamma_count,
    solve_rx_exact,
)
from xfree.behrend import behrend_1d, behrend_lift, compute_t
from xfree.cli import EXIT_OK, main
from xfree.containers import (
    bounded_delta,
    check_container_hypotheses,
    delta_tau,
    epsilon_tau_schedule,
    estimate_gamma_const,
)
from xfree.copies import HypergraphSummary
from xfree.patterns import RationalTriple, arithmetic_progression, corner
from xfree.supersat import (
    check_supersat_trivial,
    estimate_expected_gamma,
    exact_expected_gamma,
    filter_sequence,
    verify_pnt_constant,
)

AP3 = arithmetic_progression(3)
CORNER = corner(2)


@contextmanager
def criterion(number, description, limit_seconds):
    start = time.time()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:02d} FAIL  {description}")
        raise
    elapsed = time.time() - start
    print(f"ACCEPTANCE {number:02d} PASS  {description}  [{elapsed:.1f}s]")
    assert elapsed < limit_seconds, f"criterion {number} took {elapsed:.1f}s"


def test_criterion_01_exact_extremal_values():
    with criterion(1, "exact extremal values match the exhaustive oracle", 60):
        for n in range(1, 13):
            rec = solve_rx_exact(AP3, n)
            assert rec.exact
            assert rec.lower == oracles.oracle_max_free([(0,), (1,), (2,)], n)
        for n in range(1, 5):
            rec = solve_rx_exact(CORNER, n)
            assert rec.exact
            assert rec.lower == oracles.oracle_max_free([(0, 0), (1, 0), (0, 1)], n)
        assert solve_rx_exact(AP3, 8).value == 4
        assert solve_rx_exact(AP3, 9).value == 5
        assert solve_rx_exact(CORNER, 2).value == 3


def test_criterion_02_exact_counting():
    with criterion(2, "exact free-subset counts match the exhaustive oracle", 60):
        for n in range(1, 13):
            assert count_xfree_subsets(AP3, n).count == oracles.oracle_count_free(
                [(0,), (1,), (2,)], n
            )
        for n in range(1, 4):
            assert count_xfree_subsets(CORNER, n).count == oracles.oracle_count_free(
                [(0, 0), (1, 0), (0, 1)], n
            )
        assert count_xfree_subsets(AP3, 3).count == 7
        assert count_xfree_subsets(AP3, 4).count == 13
        assert count_xfree_subsets(CORNER, 2).count == 14


def test_criterion_03_counting_shape_trend():
    with criterion(3, "log2(count)/r stays below 4 for n in [4, 14]", 120):
        print("\n  n  r_exact  log2(count)  ratio")
        for n in range(4, 15):
            r = solve_rx_exact(AP3, n).value
            rec = count_xfree_subsets(AP3, n, r_exact=r)
            print(f"  {n:2d}  {r:7d}  {rec.log2_count:11.4f}  {rec.ratio:.4f}")
            assert rec.ratio < 4


def test_criterion_04_copy_engine_equivalence():
    battery = {
        "ap3": AP3,
        "spread13": Pattern(1, ((0,), (1,), (3,)), primitive=True),
        "spread23": Pattern(1, ((0,), (2,), (3,)), primitive=True),
        "corner2": CORNER,
        "corner3": corner(3),
        "ap4": arithmetic_progression(4),
    }
    with criterion(4, "closed-form copy counts equal enumeration; pair co-degrees bounded", 60):
        for name, p in battery.items():
            for n in range(1, 51):
                assert count_copies_closed_form(p, n) == sum(
                    1 for _ in enumerate_copies(p, n)
                ), (name, n)
            for n in range(2, 21):
                stats = codegree_stats(p, n)
                assert stats.codegrees[2] <= p.k * (p.k - 1), (name, n)


def test_criterion_05_behrend_one_dimensional():
    with criterion(5, "shell construction: exact n=100 trace; larger sides verified", 120):
        tri = RationalTriple.of(0, 1, 2)
        cert = behrend_1d(tri, 100)
        assert cert.num_digits == 3 and cert.digit_max == 2
        assert cert.shell_size == 3 and cert.result.size == 3
        assert cert.verified
        assert gamma_count(cert.result, AP3) == 0
        for n in (10**3, 10**4, 10**5):
            cert = behrend_1d(tri, n)
            assert gamma_count(cert.result, AP3) == 0
            M, N = cert.digit_max, cert.num_digits
            assert cert.shell_size * (N * M * M - N + 1) >= M**N
            assert M**N <= 10**6
            images = {
                sum(x * cert.digit_base**i for i, x in enumerate(vec))
                for vec in product(range(1, M + 1), repeat=N)
            }
            assert len(images) == M**N


def test_criterion_06_behrend_lift():
    with criterion(6, "corner lift: t = 1/2; n=40 set verified; size factorizes", 60):
        assert compute_t(CORNER).t == Fraction(1, 2)
        cert = behrend_lift(CORNER, 40)
        assert gamma_count(cert.result, CORNER, strategy="placements") == 0
        assert cert.result.size == cert.prefix_count * cert.base_certificate.result.size


def test_criterion_07_supersaturation_audits():
    with criterion(7, "supersaturation: trivial bound, exact and sampled expectations", 120):
        import random

        rec12 = solve_rx_exact(AP3, 12)
        rng = random.Random(0)
        for _ in range(200):
            g = GridSet(12, 1, rng.getrandbits(12))
            assert check_supersat_trivial(g, AP3, rec12)
        for n in range(1, 13):
            rec = solve_rx_exact(AP3, n)
            assert check_supersat_trivial(GridSet.full(n, 1), AP3, rec)
        for n in range(1, 4):
            rec = solve_rx_exact(CORNER, n)
            assert check_supersat_trivial(GridSet.full(n, 2), CORNER, rec)

        full30 = GridSet.full(30, 1)
        audit = exact_expected_gamma(full30, AP3, 3)
        assert audit.mean_gamma == 1
        est = estimate_expected_gamma(full30, AP3, 3, samples=10**4, seed=0)
        assert abs(est.mean - 1.0) <= 3 * max(est.stderr, 1e-12)

        # intermediate inequalities on admissible instances
        for (n, M, density_seed) in ((30, 2, None), (40, 2, None), (40, 3, None)):
            A = GridSet.full(n, 1)
            aud = exact_expected_gamma(A, AP3, M)
            threshold = 4 * 3 * 1 * M
            if A.size <= threshold:
                continue
            assert aud.mean_size >= Fraction(A.size, 2) * Fraction(M, n)
            for row in aud.per_prime:
                assert row.overlap > A.size / 2


def test_criterion_08_pnt_constant():
    with criterion(8, "prime-count constant: violation at 2, verified to 1e6", 10):
        assert verify_pnt_constant(2, 10) == (False, 2)
        assert verify_pnt_constant(3, 10**6) == (True, None)


def test_criterion_09_container_arithmetic():
    with criterion(9, "co-degree functional: toy value, schedule identity, exact <= bound", 30):
        toy = HypergraphSummary(
            n=3, d=1, k=3, edge_count=1, vertex_count=3,
            avg_degree=Fraction(1), codegrees={2: 1, 3: 1},
            gamma_estimate=Fraction(1, 3),
        )
        assert abs(delta_tau(toy, Fraction(1, 2)) - 16) < 1e-40

        cases = []
        for n in (10, 20, 50, 100, 10**3, 10**4, 10**5):
            for r in (max(2, n // 10), max(3, n // 3)):
                cases.append((n, r, Fraction(3, 8)))
            cases.append((n, n, Fraction(1, 2)))
        assert len(cases) >= 20
        for n, r, gamma in cases:
            sched = epsilon_tau_schedule(AP3, n, lambda m, rv=r: (rv, "user"), gamma)
            chk = check_container_hypotheses(3, sched.epsilon, sched.tau, gamma=gamma, n=n)
            assert chk.identity_gap < 1e-9

        gamma = estimate_gamma_const(AP3, range(4, 31)).gamma
        table = {n: solve_rx_exact(AP3, n).value for n in range(3, 31)}
        for n in range(4, 31):
            summary = codegree_stats(AP3, n)
            if summary.edge_count == 0:
                continue
            sched = epsilon_tau_schedule(AP3, n, lambda m: (table[m], "exact"), gamma)
            assert delta_tau(summary, sched.tau) <= bounded_delta(3, sched.tau, gamma, n)


def test_criterion_10_sequence_filter():
    with criterion(10, "sequence filter agrees with an independent recomputation", 5):
        table = {n: solve_rx_exact(AP3, n).value for n in range(1, 21)}
        m_map = {n: (n + 1) // 2 for n in range(3, 21)}
        report = filter_sequence(table, m_map, "1/2", 1, range(3, 21))
        # independent recomputation with integer cross-multiplication
        recomputed = tuple(
            n for n in range(3, 21)
            if 2 * table[n] * m_map[n] >= table[m_map[n]] * n
        )
        assert report.accepted == recomputed
        constant = {n: n for n in range(1, 21)}
        assert filter_sequence(constant, m_map, "1/2", 1, range(3, 21)).accepted == tuple(range(3, 21))
        assert filter_sequence(table, m_map, 0, 1, range(3, 21)).accepted == tuple(range(3, 21))


def test_criterion_11_reproducibility(tmp_path):
    with criterion(11, "seeded runs byte-identical; workers agree on exact values", 60):
        pattern_file = tmp_path / "ap3.txt"
        pattern_file.write_text("1 3\n0\n1\n2\n")
        args = ["supersat-sample", "--pattern", str(pattern_file), "--n", "30",
                "--m", "2", "--samples", "50", "--seed", "13"]
        out1, out2 = tmp_path / "one.csv", tmp_path / "two.csv"
        assert main(args + ["--out", str(out1)]) == EXIT_OK
        assert main(args + ["--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

        for n in (14, 20, 24):
            values = {solve_rx_exact(AP3, n, workers=w).value for w in (1, 2, 8)}
            assert len(values) == 1
