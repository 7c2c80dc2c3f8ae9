"""Canonical labeling, vertex signatures and isomorphism-invariant hashes.

The canonical form is the lexicographically smallest sorted edge list over
all relabelings that order vertices by signature. Signatures are
isomorphism invariant, so restricting to signature-sorted relabelings keeps
the result canonical while cutting the n! search down to the product of the
signature class sizes.
"""

from __future__ import annotations

from itertools import permutations, product

from .pdg import NO_HEAD, Edge, Pdg, PdgError, bits, from_text, to_text

MAX_CANONICAL_N = 10

_M64 = (1 << 64) - 1
_SEED = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    # splitmix64 finalizer
    x = (x + _SEED) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _combine(values) -> int:
    h = 0x2545F4914F6CDD1D
    for v in values:
        h = _mix(h ^ v)
    return h


def _base_signatures(g: Pdg) -> list[int]:
    und = [0] * g.n
    tail = [0] * g.n
    head = [0] * g.n
    for e in g.edges:
        for v in bits(e.mask):
            if not e.directed:
                und[v] += 1
            elif e.head == v:
                head[v] += 1
            else:
                tail[v] += 1
    return [_combine((und[v], tail[v], head[v])) for v in range(g.n)]


def vertex_signatures(g: Pdg) -> list[int]:
    """Per-vertex 64-bit signatures: degree triple plus one round of neighbour aggregation."""
    base = _base_signatures(g)
    incident: list[list[int]] = [[] for _ in range(g.n)]
    for e in g.edges:
        vs = bits(e.mask)
        for v in vs:
            if not e.directed:
                role = 0
            elif e.head == v:
                role = 1
            else:
                role = 2
            others = sorted(
                _combine((base[u], 3 if u == e.head else 4)) for u in vs if u != v
            )
            incident[v].append(_combine((role, *others)))
    return [_combine((base[v], *sorted(incident[v]))) for v in range(g.n)]


def vertex_signature(g: Pdg, v: int) -> int:
    if not 0 <= v < g.n:
        raise PdgError(f"vertex {v} outside 0..{g.n - 1}")
    return vertex_signatures(g)[v]


def graph_hash(g: Pdg) -> int:
    """Isomorphism-invariant 64-bit hash of (n, k, sorted signature multiset)."""
    return _combine((g.n, g.k, len(g.edges), *sorted(vertex_signatures(g))))


def _encode(edges, perm) -> tuple:
    out = []
    for mask, head in edges:
        m = 0
        while mask:
            low = mask & -mask
            m |= 1 << perm[low.bit_length() - 1]
            mask ^= low
        out.append((m, perm[head] if head != NO_HEAD else NO_HEAD))
    out.sort()
    return tuple(out)


def canonical_labeling(g: Pdg) -> tuple[list[int], tuple]:
    """Return (perm, encoding) where ``perm`` maps old labels to canonical labels."""
    if g.n > MAX_CANONICAL_N:
        raise PdgError(f"canonical form limited to n <= {MAX_CANONICAL_N}, got {g.n}")
    return canonical_labeling_unbounded(g)


def canonical_labeling_unbounded(g: Pdg) -> tuple[list[int], tuple]:
    # no size guard: callers know their graphs have small signature classes
    sigs = vertex_signatures(g)
    classes: dict[int, list[int]] = {}
    for v in range(g.n):
        classes.setdefault(sigs[v], []).append(v)
    ordered = [classes[s] for s in sorted(classes)]
    slots = []
    start = 0
    for cls in ordered:
        slots.append(list(range(start, start + len(cls))))
        start += len(cls)
    edges = [(e.mask, e.head) for e in g.edges]
    best = None
    best_perm = None
    perm = [0] * g.n
    for choice in product(*(permutations(s) for s in slots)):
        for cls, labels in zip(ordered, choice):
            for v, lab in zip(cls, labels):
                perm[v] = lab
        enc = _encode(edges, perm)
        if best is None or enc < best:
            best = enc
            best_perm = list(perm)
    return best_perm, best


def _pack(n: int, k: int, enc) -> bytes:
    out = bytearray((n, k))
    for mask, head in enc:
        out += mask.to_bytes(2, "big")
        out.append(head + 1)
    return bytes(out)


def form_bytes(g: Pdg) -> bytes:
    """Byte encoding of ``g`` as labeled (no relabeling)."""
    return _pack(g.n, g.k, sorted((e.mask, e.head) for e in g.edges))


def canonical_form(g: Pdg) -> bytes:
    """Comparable byte encoding of the canonical relabeling of ``g``."""
    _, enc = canonical_labeling(g)
    return _pack(g.n, g.k, enc)


def canonical_graph(g: Pdg) -> Pdg:
    perm, _ = canonical_labeling(g)
    return g.relabel(perm)


def canonical_text(g: Pdg) -> str:
    return to_text(canonical_graph(g))


def form_to_graph(form: bytes) -> Pdg:
    n, k = form[0], form[1]
    edges = []
    for i in range(2, len(form), 3):
        edges.append(Edge(int.from_bytes(form[i:i + 2], "big"), form[i + 2] - 1))
    return Pdg(n, k, frozenset(edges))


def is_isomorphic(a: Pdg, b: Pdg) -> bool:
    if (a.n, a.k) != (b.n, b.k):
        raise PdgError(f"parameter mismatch: ({a.n},{a.k}) vs ({b.n},{b.k})")
    if len(a.edges) != len(b.edges) or a.e_d != b.e_d:
        return False
    if graph_hash(a) != graph_hash(b):
        return False
    return canonical_form(a) == canonical_form(b)


def reparse_canonical(text: str) -> str:
    """Parse a text-encoded graph and return its canonical text."""
    return canonical_text(from_text(text))
