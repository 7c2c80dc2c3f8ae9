import random
from fractions import Fraction
from itertools import combinations
from math import comb, factorial

import numpy as np
import pytest

from kpdg.density import (
    Hypergraph, bisect_threshold, check_system, codegree_audit, complete_hypergraph,
    count_simplices, fm_density, kruskal_katona_check, orient_hypergraph, orientation_bound,
    random_hypergraph, read_hypergraph, verify_point, write_hypergraph,
)

RHOS = [0.5 + i / 200 for i in range(101)]


def fm_brute(rho, steps=1500):
    # plain 2-D grid over the simplex, no reduction
    best = 0.0
    g = np.linspace(0.0, 1.0, steps + 1)
    for x in g:
        y = g[g <= 1.0 - x + 1e-12]
        z = np.maximum(0.0, 1.0 - x - y)
        ok = x * x + 2 * x * y + 2 * y * z >= rho - 1e-12
        if ok.any():
            best = max(best, float((2 * y * z)[ok].max()))
    return best


# --- f(rho) ---------------------------------------------------------------------------

def test_fm_density_values():
    assert abs(fm_density(0.5) - 0.5) <= 1e-6
    assert abs(fm_density(1.0)) <= 1e-6
    assert abs(fm_density(0.0) - 0.5) <= 1e-6
    with pytest.raises(ValueError):
        fm_density(1.5)


@pytest.mark.parametrize("rho", [0.1, 0.55, 0.6, 0.75, 0.9, 0.99])
def test_fm_density_matches_plain_grid(rho):
    # the grid oracle undershoots by O(step)
    f, g = fm_density(rho), fm_brute(rho)
    assert g - 1e-9 <= f <= g + 3e-3


def test_fm_density_shape_on_upper_half():
    vals = [fm_density(r) for r in RHOS]
    assert all(v <= 1 - r + 1e-9 for v, r in zip(vals, RHOS))
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    second = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, len(vals) - 1)]
    assert min(second) >= -1e-6


# --- the polynomial system -----------------------------------------------------------------

def test_no_point_at_1909():
    v = check_system(Fraction(1909, 1000), resolution=1e-3)
    assert v.status == "no-point-found" and not v.feasible
    assert v.max_margin <= 0
    assert v.positive_points == 0
    assert v.grid_points == comb(1002, 2)


def test_no_point_at_1909_random_sampling():
    # independent of the solver: sample all six coordinates and check exactly
    rng = random.Random(5)
    phi = Fraction(1909, 1000)
    for _ in range(20000):
        x, y = sorted((rng.random(), rng.random()))
        pt = (x, y - x, 1 - y, rng.random(), rng.random() / 2, rng.random())
        assert not verify_point(phi, [Fraction(t) for t in pt])


def test_trivial_point_at_10():
    v = check_system(10)
    assert v.feasible
    assert v.point == (0, Fraction(1, 2), Fraction(1, 2), 0, Fraction(1, 2), 0)
    assert verify_point(10, v.point)
    data = v.to_json()
    assert data["status"] == "feasible" and data["phi"] == "10/1"


def test_verify_point_is_exact():
    # equality in a strict inequality is rejected
    assert not verify_point(10, (0, Fraction(1, 2), Fraction(1, 2), 0, Fraction(1, 10), 0))
    assert verify_point(10, (0, Fraction(1, 2), Fraction(1, 2), 0, Fraction(1, 2), 0))
    with pytest.raises(ValueError):
        check_system(2, resolution=0)


def test_threshold_bracket():
    lo, hi = bisect_threshold(lo=Fraction(19, 10), hi=Fraction(2), width=1e-3, resolution=1e-2)
    assert hi - lo <= Fraction(1, 1000)
    assert not check_system(lo, 1e-2).feasible and check_system(hi, 1e-2).feasible
    assert Fraction(1909, 1000) <= lo


# --- Kruskal-Katona ---------------------------------------------------------------------------

def brute_simplices(h):
    return sum(1 for s in combinations(range(h.n), h.k + 1)
               if all(sum(1 << v for v in t) in h.edges for t in combinations(s, h.k)))


def test_kruskal_katona_examples():
    k6 = complete_hypergraph(6, 3)
    assert count_simplices(k6) == 15 and kruskal_katona_check(k6)
    empty = Hypergraph(7, 3)
    assert count_simplices(empty) == 0 and kruskal_katona_check(empty)


def test_kruskal_katona_random():
    rng = random.Random(3)
    for _ in range(500):
        n = rng.randint(4, 12)
        h = random_hypergraph(n, 3, rng.random(), rng)
        s = count_simplices(h)
        assert s == brute_simplices(h)
        assert kruskal_katona_check(h)
        if h.edges:
            # the same bound in floating point, as stated
            beta = factorial(3) * len(h.edges) / n ** 3
            assert s <= beta ** (4 / 3) * n ** 4 / factorial(4) + 1e-9


# --- orientation ------------------------------------------------------------------------------

def test_orientation_bound_values():
    assert orientation_bound(3, 10) == 2
    assert orientation_bound(2, 1) == 1
    assert orientation_bound(3, 0) == 0
    for ell in (2, 3, 4):
        for e in range(1, 200):
            L = orientation_bound(ell, e)
            exact = factorial(ell - 1) / factorial(ell) ** ((ell - 1) / ell) * e ** (1 / ell)
            assert L - 1 < exact + 1e-9 and exact <= L + 1e-9


def test_orient_examples():
    single = Hypergraph.of(3, 3, [(0, 1, 2)])
    heads = orient_hypergraph(single)
    assert codegree_audit(single, heads) == (True, 1, 1)
    k5 = complete_hypergraph(5, 3)
    assert codegree_audit(k5, orient_hypergraph(k5)) == (True, 2, 2)
    # many triples sharing the pair {0, 1}
    star = Hypergraph.of(12, 3, [(0, 1, v) for v in range(2, 12)])
    ok, worst, L = codegree_audit(star, orient_hypergraph(star))
    assert ok and worst <= L
    assert not codegree_audit(k5, {m: 7 for m in k5.edges})[0]


def test_orient_random():
    rng = random.Random(9)
    for i in range(200):
        ell = 2 + i % 2
        n = rng.randint(ell, 10)
        h = random_hypergraph(n, ell, rng.random(), rng)
        heads = orient_hypergraph(h)
        ok, worst, L = codegree_audit(h, heads)
        assert ok and worst <= L
        assert all((m >> heads[m]) & 1 for m in h.edges)


# --- file format ----------------------------------------------------------------------------------

def test_hypergraph_file_round_trip():
    h = complete_hypergraph(5, 3)
    assert read_hypergraph(write_hypergraph(h), n=5) == h
    assert read_hypergraph("# comment\n0 1 2\n\n1 2 3  # tail\n") == Hypergraph.of(4, 3, [(0, 1, 2), (1, 2, 3)])
    with pytest.raises(ValueError):
        read_hypergraph("0 1\n0 1 2\n")
    with pytest.raises(ValueError):
        read_hypergraph("0 0 1\n")
