"""Partially directed k-uniform hypergraphs (k-PDGs).

An edge is a k-subset of vertices stored as a bitmask, optionally pointed at
one of its vertices (the head). A k-PDG carries at most one edge per k-subset.
Vertices are 0-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from math import comb
from typing import Iterable, NamedTuple, Optional

NO_HEAD = -1
MAX_VERTICES = 16


class PdgError(ValueError):
    """Raised when an edge or graph would violate the k-PDG model."""


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def bits(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


@dataclass(frozen=True, order=True, slots=True)
class Edge:
    """A k-set of vertices (bitmask) with an optional head vertex."""

    mask: int
    head: int = NO_HEAD

    @property
    def vertices(self) -> tuple[int, ...]:
        return bits(self.mask)

    @property
    def directed(self) -> bool:
        return self.head != NO_HEAD

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def undirected(self) -> "Edge":
        return Edge(self.mask)

    def relabel(self, perm) -> "Edge":
        m = 0
        for v in bits(self.mask):
            m |= 1 << perm[v]
        return Edge(m, perm[self.head] if self.head != NO_HEAD else NO_HEAD)

    def __str__(self) -> str:
        body = " ".join(str(v) for v in self.vertices)
        return f"{body}>{self.head}" if self.directed else body


def make_edge(vertices: Iterable[int], head: Optional[int] = None, k: Optional[int] = None) -> Edge:
    """Validate and build an edge; ``k`` (if given) fixes the required cardinality."""
    vs = list(vertices)
    if len(set(vs)) != len(vs):
        raise PdgError(f"repeated vertex in {vs}")
    if any(v < 0 or v >= MAX_VERTICES for v in vs):
        raise PdgError(f"vertex index out of range in {vs}")
    if k is not None and len(vs) != k:
        raise PdgError(f"edge {vs} has {len(vs)} vertices, expected {k}")
    if not vs:
        raise PdgError("empty edge")
    if head is not None and head not in vs:
        raise PdgError(f"head {head} not in edge {vs}")
    return Edge(mask_of(vs), NO_HEAD if head is None else head)


class Densities(NamedTuple):
    alpha: Fraction
    beta: Fraction


@dataclass(frozen=True)
class Pdg:
    """An immutable k-PDG on vertices ``0..n-1``."""

    n: int
    k: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 1 <= self.k:
            raise PdgError(f"uniformity must be positive, got {self.k}")
        if not 0 <= self.n <= MAX_VERTICES:
            raise PdgError(f"n={self.n} outside 0..{MAX_VERTICES}")
        edges = frozenset(self.edges)
        object.__setattr__(self, "edges", edges)
        by_mask = {}
        full = (1 << self.n) - 1
        for e in edges:
            if e.size != self.k:
                raise PdgError(f"edge {e} is not {self.k}-uniform")
            if e.mask & ~full:
                raise PdgError(f"edge {e} uses a vertex outside 0..{self.n - 1}")
            if e.directed and not (e.mask >> e.head) & 1:
                raise PdgError(f"head of {e} not in its vertex set")
            if e.mask in by_mask:
                raise PdgError(f"edges {by_mask[e.mask]} and {e} share a vertex set")
            by_mask[e.mask] = e
        object.__setattr__(self, "_by_mask", by_mask)

    @classmethod
    def from_edges(cls, n: int, k: int, edges: Iterable) -> "Pdg":
        """Build from edges given as ``Edge`` or ``(vertices, head)`` / vertex tuples."""
        out = []
        for e in edges:
            if isinstance(e, Edge):
                out.append(e)
            elif len(e) == 2 and not isinstance(e[0], int):
                out.append(make_edge(e[0], e[1], k))
            else:
                out.append(make_edge(e, None, k))
        if len({e.mask for e in out}) != len(out):
            raise PdgError("two edges share a vertex set")
        return cls(n, k, frozenset(out))

    def edge_on(self, mask: int) -> Optional[Edge]:
        return self._by_mask.get(mask)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    @property
    def e_u(self) -> int:
        return sum(1 for e in self.edges if not e.directed)

    @property
    def e_d(self) -> int:
        return sum(1 for e in self.edges if e.directed)

    def relabel(self, perm) -> "Pdg":
        return Pdg(self.n, self.k, frozenset(e.relabel(perm) for e in self.edges))

    def with_vertices(self, n: int) -> "Pdg":
        return Pdg(n, self.k, self.edges)

    def __str__(self) -> str:
        return to_text(self)


def add_edge(g: Pdg, e: Edge) -> Pdg:
    if e.mask in g._by_mask:
        raise PdgError(f"vertex set of {e} already carries edge {g._by_mask[e.mask]}")
    return Pdg(g.n, g.k, g.edges | {e})


def densities(g: Pdg) -> Densities:
    total = comb(g.n, g.k)
    if total == 0:
        return Densities(Fraction(0), Fraction(0))
    return Densities(Fraction(g.e_u, total), Fraction(g.e_d, total))


def complete_undirected(n: int, k: int) -> Pdg:
    return Pdg(n, k, frozenset(Edge(mask_of(c)) for c in combinations(range(n), k)))


# --- text encoding -------------------------------------------------------

def to_text(g: Pdg) -> str:
    """``n k ; e1 , e2`` with edges sorted by (mask, head); ``>h`` marks a head."""
    body = " , ".join(str(e) for e in g.sorted_edges())
    return f"{g.n} {g.k} ; {body}" if body else f"{g.n} {g.k} ;"


def from_text(s: str) -> Pdg:
    try:
        head_part, _, body = s.partition(";")
        n, k = (int(t) for t in head_part.split())
        edges = []
        for chunk in body.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            h = None
            tokens = chunk.split()
            if ">" in tokens[-1]:
                last, hs = tokens[-1].split(">")
                tokens[-1] = last
                h = int(hs)
            edges.append(make_edge([int(t) for t in tokens], h, k))
    except PdgError:
        raise
    except Exception as exc:
        raise PdgError(f"cannot parse k-PDG text {s!r}") from exc
    return Pdg.from_edges(n, k, edges)


# --- subgraph containment ------------------------------------------------

def _shadow(host: Pdg) -> dict:
    """(k-1)-mask -> list of (extra vertex, edge) over host edges containing it."""
    sh = host.__dict__.get("_shadow")
    if sh is None:
        sh = {}
        for e in host.edges:
            m = e.mask
            while m:
                low = m & -m
                sh.setdefault(e.mask ^ low, []).append((low.bit_length() - 1, e))
                m ^= low
        object.__setattr__(host, "_shadow", sh)
    return sh


def _plan(pattern: Pdg, first: Edge) -> tuple[list[int], list[list[Edge]]]:
    """Vertex order starting with ``first`` and the pattern edges completed at each step."""
    verts = set()
    for e in pattern.edges:
        verts.update(e.vertices)
    order = list(first.vertices)
    placed = first.mask
    while len(order) < len(verts):
        def score(v):
            m = placed | (1 << v)
            done = sum(1 for e in pattern.edges if e.mask & (1 << v) and e.mask & m == e.mask)
            touch = sum(1 for e in pattern.edges if e.mask & (1 << v) and e.mask & placed)
            return (done, touch, -v)

        v = max((u for u in verts if not (placed >> u) & 1), key=score)
        order.append(v)
        placed |= 1 << v
    pos = {v: i for i, v in enumerate(order)}
    checks: list[list[Edge]] = [[] for _ in order]
    for e in pattern.edges:
        checks[max(pos[v] for v in e.vertices)].append(e)
    return order, checks


def _fits(host: Pdg, pe: Edge, phi: dict) -> bool:
    m = 0
    for v in bits(pe.mask):
        m |= 1 << phi[v]
    he = host._by_mask.get(m)
    if he is None:
        return False
    return not pe.directed or he.head == phi[pe.head]


def _extend(host, order, checks, i, phi, used, shadow):
    if i == len(order):
        return dict(phi)
    v = order[i]
    if checks[i]:
        pe = checks[i][0]
        m = 0
        for u in bits(pe.mask):
            if u != v:
                m |= 1 << phi[u]
        cands = [w for w, _ in shadow.get(m, ()) if not (used >> w) & 1]
    else:
        cands = [w for w in range(host.n) if not (used >> w) & 1]
    for w in cands:
        phi[v] = w
        if all(_fits(host, pe, phi) for pe in checks[i]):
            found = _extend(host, order, checks, i + 1, phi, used | (1 << w), shadow)
            if found is not None:
                return found
        del phi[v]
    return None


def _edge_maps(pe: Edge, he: Edge):
    """Bijections from the vertices of pattern edge ``pe`` onto host edge ``he``."""
    if pe.directed and he.head == NO_HEAD:
        return
    src = pe.vertices
    for img in permutations(he.vertices):
        if pe.directed and img[src.index(pe.head)] != he.head:
            continue
        yield dict(zip(src, img))


def find_embedding(host: Pdg, pattern: Pdg, anchor: Optional[Edge] = None) -> Optional[dict]:
    """Injective vertex map sending pattern into host, or None.

    A pattern edge on S needs a host edge on phi(S); a directed pattern edge
    needs the host edge directed at the image of its head. With ``anchor``,
    only embeddings whose image uses that host edge are searched.
    """
    if host.k != pattern.k:
        raise PdgError(f"uniformity mismatch: host k={host.k}, pattern k={pattern.k}")
    if pattern.n > host.n or len(pattern.edges) > len(host.edges) or pattern.e_d > host.e_d:
        return None
    if not pattern.edges:
        return {v: v for v in range(pattern.n)}
    shadow = _shadow(host)
    if anchor is not None:
        if host._by_mask.get(anchor.mask) != anchor:
            return None
        starts = [(pe, [anchor]) for pe in sorted(pattern.edges)]
    else:
        # a directed pattern edge has the fewest host images
        pe = max(pattern.edges, key=lambda e: (e.directed, e.mask))
        starts = [(pe, sorted(host.edges))]
    for pe, host_edges in starts:
        order, checks = _plan(pattern, pe)
        k = pattern.k
        for he in host_edges:
            for phi in _edge_maps(pe, he):
                if not all(_fits(host, c, phi) for i in range(k) for c in checks[i]):
                    continue
                found = _extend(host, order, checks, k, phi, he.mask, shadow)
                if found is not None:
                    return found
    return None


def contains_subgraph(host: Pdg, pattern: Pdg) -> bool:
    return find_embedding(host, pattern) is not None


# --- links -----------------------------------------------------------------

def link(g: Pdg, v: int) -> Pdg:
    """The (k-1)-PDG through ``v``, relabeled onto ``0..n-2`` by closing the gap at ``v``.

    Edges headed at ``v`` lose their direction.
    """
    if not 0 <= v < g.n:
        raise PdgError(f"vertex {v} outside 0..{g.n - 1}")
    if g.k < 2:
        raise PdgError("link needs k >= 2")
    perm = [u if u < v else u - 1 for u in range(g.n)]
    out = []
    for e in g.edges:
        if not (e.mask >> v) & 1:
            continue
        rest = [perm[u] for u in e.vertices if u != v]
        head = None if (not e.directed or e.head == v) else perm[e.head]
        out.append(make_edge(rest, head, g.k - 1))
    return Pdg(g.n - 1, g.k - 1, frozenset(out))


def link_decomposition(g: Pdg, v: int) -> tuple[Fraction, Fraction, Fraction]:
    """(a_v, b_v, c_v) for a 3-PDG: undirected / directed away from v / directed at v."""
    if g.k != 3:
        raise PdgError("link decomposition is defined for 3-PDGs")
    total = comb(g.n - 1, 2)
    a = b = c = 0
    for e in g.edges:
        if not (e.mask >> v) & 1:
            continue
        if not e.directed:
            a += 1
        elif e.head == v:
            c += 1
        else:
            b += 1
    return Fraction(a, total), Fraction(b, total), Fraction(c, total)


# --- plain graphs (k = 2) --------------------------------------------------

def _adjacency(g: Pdg) -> list[int]:
    if g.k != 2:
        raise PdgError("expected a 2-uniform graph")
    adj = [0] * g.n
    for e in g.edges:
        x, y = e.vertices
        adj[x] |= 1 << y
        adj[y] |= 1 << x
    return adj


def square_graph(g: Pdg) -> Pdg:
    """xy is an edge iff x and y have a common neighbour in ``g``."""
    if any(e.directed for e in g.edges):
        raise PdgError("square graph is defined for undirected graphs")
    adj = _adjacency(g)
    out = [Edge((1 << x) | (1 << y)) for x, y in combinations(range(g.n), 2) if adj[x] & adj[y]]
    return Pdg(g.n, 2, frozenset(out))


def non_triangular_edges(g: Pdg) -> int:
    adj = _adjacency(g)
    count = 0
    for e in g.edges:
        x, y = e.vertices
        if not adj[x] & adj[y]:
            count += 1
    return count
