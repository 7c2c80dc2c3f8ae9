"""The triangle T_k and the forbidden families F_k.

F_k is produced from construction traces: an initial edge, up to k directed
extension edges pointing at fresh vertices, and one closing edge. Traces are
built on a fixed labeling (the initial edge on 0..k-1, extension heads
k, k+1, ...), since any relabeled trace yields an isomorphic graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement

from .canonical import _combine, canonical_labeling_unbounded, form_bytes, graph_hash
from .pdg import Edge, Pdg, PdgError, find_embedding, make_edge, mask_of

MAX_FAMILY_K = 6


def make_Tk(k: int) -> Pdg:
    """T_k on vertices 0..k: T_2 on {k-2, k-1, k} joined with the common set 0..k-3.

    For k = 3 the edges are 0 1 2, 0 1 3>3 and 0 2 3.
    """
    if k < 2:
        raise PdgError(f"T_k needs k >= 2, got {k}")
    common = list(range(k - 2))
    a, b, c = k - 2, k - 1, k
    return Pdg.from_edges(
        k + 1,
        k,
        [
            make_edge(common + [a, b]),
            make_edge(common + [a, c], c),
            make_edge(common + [b, c]),
        ],
    )


@dataclass(frozen=True)
class Trace:
    """How a member was produced; enough to replay and audit the closure rules."""

    init_edge: Edge
    extensions: tuple  # directed edges e_1..e_j, e_i headed at the fresh vertex w_i
    closure: str  # "a" or "b"
    closure_edge: Edge

    @property
    def j(self) -> int:
        return len(self.extensions)

    @property
    def init_directed(self) -> bool:
        return self.init_edge.directed

    def relabel(self, perm) -> "Trace":
        return Trace(
            self.init_edge.relabel(perm),
            tuple(e.relabel(perm) for e in self.extensions),
            self.closure,
            self.closure_edge.relabel(perm),
        )

    def describe(self) -> str:
        ext = " , ".join(map(str, self.extensions)) or "-"
        return f"init={self.init_edge} ext=[{ext}] closure({self.closure})={self.closure_edge}"


@dataclass(frozen=True)
class ForbiddenFamily:
    k: int
    members: tuple  # canonical Pdg representatives, sorted by canonical form
    traces: tuple = ()

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def iter_traces(k: int):
    """Yield (graph, trace) for every construction trace on the fixed labeling."""
    for init_directed in (False, True):
        e0 = make_edge(range(k), k - 1 if init_directed else None)
        S = list(range(k - 1)) if init_directed else list(range(k))
        S_mask = mask_of(S)
        choices = list(combinations(S, k - 1))
        for j in range(0, k + 1):
            for ext in combinations_with_replacement(choices, j):
                edges = [e0]
                for i, sub in enumerate(ext):
                    w = k + i
                    edges.append(make_edge(list(sub) + [w], w))
                T = list(range(k + j))
                used = {e.mask for e in edges}
                base = tuple(edges)
                for sub in combinations(T, k):
                    m = mask_of(sub)
                    if m in used:
                        continue
                    closing = Edge(m)
                    yield Pdg(k + j, k, frozenset(base + (closing,))), Trace(
                        e0, base[1:], "a", closing
                    )
                w0 = k + j
                for sub in combinations(T, k - 1):
                    if not mask_of(sub) & ~S_mask:
                        continue
                    closing = make_edge(list(sub) + [w0], w0)
                    yield Pdg(k + j + 1, k, frozenset(base + (closing,))), Trace(
                        e0, base[1:], "b", closing
                    )


def _weight(g: Pdg) -> int:
    return len(g.edges) + g.e_d


def _same_graph(a: Pdg, b: Pdg) -> bool:
    return (
        a.n == b.n
        and len(a.edges) == len(b.edges)
        and a.e_d == b.e_d
        and find_embedding(a, b) is not None
    )


def generate_Fk(k: int) -> ForbiddenFamily:
    """Generate F_k: producible graphs with no other producible graph as a subgraph.

    A producible B inside producible A with B not isomorphic to A has fewer
    edges or fewer directions, and containment is transitive, so scanning by
    increasing (edges + directed edges) and testing only against members
    already accepted gives exactly the minimal elements.
    """
    if not 2 <= k <= MAX_FAMILY_K:
        raise PdgError(f"F_k generation supports 2 <= k <= {MAX_FAMILY_K}, got {k}")
    seen: dict = {}
    for g, tr in iter_traces(k):
        key = g.edges
        if key not in seen:
            seen[key] = (g, tr)
    candidates = sorted(seen.values(), key=lambda gt: (_weight(gt[0]), gt[0].n, sorted(gt[0].edges)))
    members: list[tuple[Pdg, Trace, int, int]] = []
    for g, tr in candidates:
        w = _weight(g)
        if any(mw < w and find_embedding(g, m) is not None for m, _, mw, _ in members):
            continue
        h = graph_hash(g)
        if any(mw == w and mh == h and _same_graph(g, m) for m, _, mw, mh in members):
            continue
        members.append((g, tr, w, h))
    canon = []
    for g, tr, _, _ in members:
        perm, _ = canonical_labeling_unbounded(g)
        c = g.relabel(perm)
        canon.append((form_bytes(c), c, tr.relabel(perm)))
    canon.sort(key=lambda t: t[0])
    return ForbiddenFamily(k, tuple(c[1] for c in canon), tuple(c[2] for c in canon))


def is_family_free(g: Pdg, family) -> bool:
    members = family.members if isinstance(family, ForbiddenFamily) else tuple(family)
    for m in members:
        if m.k != g.k:
            raise PdgError(f"uniformity mismatch: graph k={g.k}, member k={m.k}")
    return all(find_embedding(g, m) is None for m in members)


def family_key(family) -> int:
    members = family.members if isinstance(family, ForbiddenFamily) else tuple(family)
    return _combine(sorted(graph_hash(m) for m in members))
