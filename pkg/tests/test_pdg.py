import random
from fractions import Fraction
from itertools import combinations
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from kpdg.forbidden import make_Tk
from kpdg.pdg import (
    Edge, Pdg, PdgError, add_edge, complete_undirected, contains_subgraph, densities,
    find_embedding, from_text, link, link_decomposition, make_edge, mask_of,
    non_triangular_edges, square_graph, to_text,
)
from kpdg.search import TkRule, slot_table

from strategies import pdgs


def P(n, k, *edges):
    """Edges as (vertices) or (vertices, head) with 1-based labels as printed."""
    out = []
    for e in edges:
        if isinstance(e[0], tuple):
            vs, h = e
            out.append(make_edge([v - 1 for v in vs], h - 1))
        else:
            out.append(make_edge([v - 1 for v in e]))
    return Pdg(n, k, frozenset(out))


# --- edges and graphs -----------------------------------------------------------

def test_make_edge():
    e = make_edge([1, 2, 3], 3)
    assert e.vertices == (1, 2, 3) and e.head == 3 and e.directed
    assert not make_edge([1, 2, 3]).directed
    with pytest.raises(PdgError):
        make_edge([1, 2, 3], 5)
    with pytest.raises(PdgError):
        make_edge([1, 1, 2])
    with pytest.raises(PdgError):
        make_edge([1, 2], k=3)


def test_add_edge():
    g = P(4, 3, (1, 2, 3))
    h = add_edge(g, make_edge([0, 1, 3], 3))
    assert len(h.edges) == 2
    with pytest.raises(PdgError):
        add_edge(g, make_edge([0, 1, 2], 2))
    assert len(add_edge(Pdg(3, 3), make_edge([0, 1, 2])).edges) == 1


def test_pdg_rejects_bad_edges():
    with pytest.raises(PdgError):
        Pdg(3, 3, frozenset({Edge(mask_of([0, 1, 3]))}))
    with pytest.raises(PdgError):
        Pdg(4, 3, frozenset({Edge(mask_of([0, 1]))}))
    with pytest.raises(PdgError):
        Pdg.from_edges(4, 3, [([0, 1, 2], None), ([0, 1, 2], 2)])


def test_densities():
    assert densities(complete_undirected(6, 3)) == (1, 0)
    assert densities(Pdg(5, 3)) == (0, 0)


def prop_a1_graph(full):
    # 4-sets: a 3-subset of {1..5} directed at 6 or 7
    triples = [t for t in combinations(range(1, 6), 3) if full or t != (3, 4, 5)]
    edges = [(t + (h,), h) for h in (6, 7) for t in triples]
    return P(7, 4, *edges)


def test_prop_a1_printed_graph_densities():
    g = prop_a1_graph(full=False)
    assert len(g.edges) == 18
    assert densities(g) == (0, Fraction(18, 35))


def test_prop_a1_both_graphs_are_tk_free():
    t4 = make_Tk(4)
    short, full = prop_a1_graph(False), prop_a1_graph(True)
    assert not contains_subgraph(short, t4)
    assert not contains_subgraph(full, t4)
    # the printed list falls short of equality; the 20-edge version is tight
    assert densities(short).beta * Fraction(7, 4) == Fraction(9, 10)
    assert densities(full).beta * Fraction(7, 4) == 1


def test_text_round_trip():
    s = "7 4 ; 0 1 2 5>5 , 0 1 3 5>5"
    assert to_text(from_text(s)) == s
    assert to_text(from_text("3 2 ;")) == "3 2 ;"
    with pytest.raises(PdgError):
        from_text("3 2 ; 0 1 2")
    with pytest.raises(PdgError):
        from_text("nonsense")


@given(pdgs())
def test_text_round_trip_random(g):
    assert from_text(to_text(g)) == g


# --- containment --------------------------------------------------------------------

def test_containment_examples():
    host = P(4, 3, ((1, 2, 3), 3), ((1, 2, 4), 4))
    assert contains_subgraph(host, P(4, 3, (1, 2, 3), ((1, 2, 4), 4)))
    assert not contains_subgraph(host, P(4, 3, ((1, 2, 3), 2), ((1, 2, 4), 4)))
    for k in (2, 3, 4):
        assert not contains_subgraph(complete_undirected(k + 3, k), make_Tk(k))


def test_containment_uniformity_mismatch():
    with pytest.raises(PdgError):
        contains_subgraph(Pdg(4, 3), Pdg(4, 2))


def test_embedding_is_a_valid_map():
    host = P(5, 3, (1, 2, 3), ((1, 2, 4), 4), (1, 3, 4), (2, 4, 5))
    phi = find_embedding(host, make_Tk(3))
    assert phi is not None and len(set(phi.values())) == len(phi)
    for e in make_Tk(3).edges:
        he = host.edge_on(mask_of(phi[v] for v in e.vertices))
        assert he is not None
        if e.directed:
            assert he.head == phi[e.head]


@settings(max_examples=60, deadline=None)
@given(pdgs(max_n=5))
def test_containment_reflexive(g):
    assert contains_subgraph(g, g)


def _random_subgraph(g, rng):
    edges = [e if rng.random() < 0.7 or not e.directed else e.undirected()
             for e in g.edges if rng.random() < 0.8]
    return Pdg(g.n, g.k, frozenset(edges))


@settings(max_examples=60, deadline=None)
@given(pdgs(max_n=6), st.randoms(use_true_random=False))
def test_containment_transitive(a, rng):
    b = _random_subgraph(a, rng)
    c = _random_subgraph(b, rng)
    perm = list(range(a.n))
    rng.shuffle(perm)
    b = b.relabel(perm)
    assert contains_subgraph(a, b) and contains_subgraph(b, c.relabel(perm))
    assert contains_subgraph(a, c.relabel(perm))


@settings(max_examples=60, deadline=None)
@given(pdgs(max_n=6), st.randoms(use_true_random=False))
def test_forget_and_delete(host, rng):
    pattern = _random_subgraph(host, rng)
    undirected_pattern = Pdg(pattern.n, pattern.k, frozenset(e.undirected() for e in pattern.edges))
    forgot = Pdg(host.n, host.k, frozenset(e.undirected() for e in host.edges))
    assert contains_subgraph(forgot, undirected_pattern)
    # deleting a host edge never creates containment
    if host.edges:
        smaller = Pdg(host.n, host.k, host.edges - {rng.choice(sorted(host.edges))})
        t = make_Tk(host.k)
        if not contains_subgraph(host, t):
            assert not contains_subgraph(smaller, t)


@settings(max_examples=150, deadline=None)
@given(pdgs(max_n=6, max_k=4))
def test_incremental_rule_matches_full_search(g):
    rule = TkRule(slot_table(g.n, g.k))
    assert rule.graph_free(g) == (not contains_subgraph(g, make_Tk(g.k)))


# --- links ---------------------------------------------------------------------------

def test_link_examples():
    t3 = P(4, 3, (1, 2, 3), ((1, 2, 4), 4), (1, 3, 4))
    assert to_text(link(t3, 3)) == "3 2 ; 0 1 , 0 2"
    assert to_text(link(P(3, 3, ((1, 2, 3), 3)), 0)) == "2 2 ; 0 1>1"
    assert link(P(4, 3, (1, 2, 3)), 3).edges == frozenset()


def test_link_decomposition():
    n = 5
    g = P(n, 3, (1, 2, 3))
    assert link_decomposition(g, 0) == (Fraction(1, comb(n - 1, 2)), 0, 0)
    g = P(n, 3, ((1, 2, 3), 3))
    assert link_decomposition(g, 2) == (0, 0, Fraction(1, comb(n - 1, 2)))
    with pytest.raises(PdgError):
        link_decomposition(Pdg(4, 2), 0)


@settings(max_examples=80, deadline=None)
@given(pdgs(k=3, min_n=3, max_n=7))
def test_link_decomposition_averages(g):
    rows = [link_decomposition(g, v) for v in range(g.n)]
    mean = [sum(r[i] for r in rows) / g.n for i in range(3)]
    a, b = densities(g)
    assert mean == [a, 2 * b / 3, b / 3]


@settings(max_examples=80, deadline=None)
@given(pdgs(max_n=7, max_k=4))
def test_link_edge_count_identities(g):
    links = [link(g, v) for v in range(g.n)]
    assert g.k * g.e_u + g.e_d == sum(l.e_u for l in links)
    assert (g.k - 1) * g.e_d == sum(l.e_d for l in links)


@settings(max_examples=80, deadline=None)
@given(pdgs(min_n=4, max_n=7, max_k=4))
def test_links_of_free_graphs_are_free(g):
    if g.k < 3 or contains_subgraph(g, make_Tk(g.k)):
        return
    for v in range(g.n):
        assert not contains_subgraph(link(g, v), make_Tk(g.k - 1))


# --- plain graphs ---------------------------------------------------------------------

def G(n, pairs):
    return Pdg.from_edges(n, 2, [tuple(p) for p in pairs])


def test_square_graph_examples():
    assert len(square_graph(G(3, [(0, 1), (1, 2), (0, 2)])).edges) == 3
    c4 = G(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert to_text(square_graph(c4)) == "4 2 ; 0 2 , 1 3"
    assert not square_graph(G(2, [(0, 1)])).edges
    with pytest.raises(PdgError):
        square_graph(Pdg.from_edges(2, 2, [([0, 1], 1)]))


def test_non_triangular_edges():
    assert non_triangular_edges(G(3, [(0, 1), (1, 2), (0, 2)])) == 0
    assert non_triangular_edges(G(3, [(0, 1), (1, 2)])) == 2
    assert non_triangular_edges(G(4, [(0, 2), (0, 3), (1, 2), (1, 3)])) == 4


def test_furedi_inequality_random():
    rng = random.Random(2024)
    for _ in range(1000):
        n = rng.randint(1, 12)
        p = rng.random()
        g = G(n, [e for e in combinations(range(n), 2) if rng.random() < p])
        assert len(square_graph(g).edges) >= len(g.edges) - n // 2
