"""Numerical companions: the Furedi-Maleki function, the link-density system,
a Kruskal-Katona check and hypergraph orientation by bipartite matching."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import networkx as nx
import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .pdg import bits, mask_of


# --- f(rho) -----------------------------------------------------------------------------

def _fm_objective(y: float, rho: float) -> float:
    # for fixed y, x*x + 2xy + 2yz = x*x + 2y(1-y); the best x is the smallest allowed
    x = math.sqrt(max(0.0, rho - 2.0 * y * (1.0 - y)))
    if x > 1.0 - y + 1e-15:
        return -1.0
    return 2.0 * y * max(0.0, 1.0 - y - x)


def fm_density(rho: float, grid: int = 20001) -> float:
    """max 2yz over x + y + z = 1, x, y, z >= 0, x^2 + 2xy + 2yz >= rho.

    Reduced to one variable: with y fixed the constraint reads x^2 >= rho - 2y(1-y),
    so x is taken as small as allowed and z = 1 - x - y. A dense grid over y is
    refined by bounded scalar search around the best grid point.
    """
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    ys = np.linspace(0.0, 1.0, grid)
    xs = np.sqrt(np.maximum(0.0, rho - 2.0 * ys * (1.0 - ys)))
    vals = np.where(xs <= 1.0 - ys + 1e-15, 2.0 * ys * np.maximum(0.0, 1.0 - ys - xs), -1.0)
    i = int(np.argmax(vals))
    best = float(vals[i])
    step = 1.0 / (grid - 1)
    lo, hi = max(0.0, ys[i] - step), min(1.0, ys[i] + step)
    res = minimize_scalar(lambda y: -_fm_objective(y, rho), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return max(best, -float(res.fun), 0.0)


# --- the link-density system ----------------------------------------------------------

@dataclass
class FeasibilityVerdict:
    """Outcome of the grid search; "no-point-found" is evidence, not a proof."""

    status: str  # "feasible" or "no-point-found"
    phi: Fraction
    resolution: float
    point: Optional[tuple] = None  # exact (x, y, z, a, b, c) when feasible
    max_margin: float = float("-inf")
    argmax: Optional[tuple] = None
    grid_points: int = 0
    positive_points: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "phi": _frac_str(self.phi),
            "resolution": self.resolution,
            "point": None if self.point is None else [_frac_str(v) for v in self.point],
            "max_margin": self.max_margin,
            "argmax": None if self.argmax is None else list(self.argmax),
            "grid_points": self.grid_points,
            "positive_points": self.positive_points,
        }


def _frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _inner_candidates(rho, q):
    """Candidate (a, b, c) for max min(L1, L2) over a,b,c >= 0, a+b+c <= rho, b <= q.

    The polytope's vertices plus, for each pair of vertices, the point on the
    segment where the two linear objectives agree; the optimum of a minimum of
    two linear functions over a polytope is among these.
    """
    return [
        (0 * rho, 0 * rho, 0 * rho),
        (rho, 0 * rho, 0 * rho),
        (0 * rho, 0 * rho, rho),
        (0 * rho, q, 0 * rho),
        (rho - q, q, 0 * rho),
        (0 * rho, q, rho - q),
    ]


def _objectives(phi, gamma, a, b, c):
    return a + gamma * b + c, a + phi * (b + c)


def _exact_inner(phi: Fraction, x: Fraction, y: Fraction, z: Fraction):
    """Best (margin, (a, b, c)) for fixed x, y, z in exact arithmetic."""
    gamma = (3 * phi - 1) / 2
    rho = x * x + 2 * x * y + 2 * y * z
    q = 2 * y * z
    q = min(q, rho)
    verts = _inner_candidates(rho, q)
    cands = list(verts)
    for (p1, p2) in combinations(verts, 2):
        d1 = _objectives(phi, gamma, *p1)
        d2 = _objectives(phi, gamma, *p2)
        g1, g2 = d1[0] - d1[1], d2[0] - d2[1]
        if g1 * g2 < 0:
            t = g1 / (g1 - g2)
            cands.append(tuple(u + t * (v - u) for u, v in zip(p1, p2)))
    best = None
    for p in cands:
        m = min(_objectives(phi, gamma, *p)) - 1
        if best is None or m > best[0]:
            best = (m, p)
    return best


def _grid_margins(phi: float, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    gamma = (3.0 * phi - 1.0) / 2.0
    zs = 1.0 - xs - ys
    rho = xs * xs + 2.0 * xs * ys + 2.0 * ys * zs
    q = np.minimum(2.0 * ys * zs, rho)
    zero = np.zeros_like(rho)
    verts = [
        (zero, zero, zero),
        (rho, zero, zero),
        (zero, zero, rho),
        (zero, q, zero),
        (rho - q, q, zero),
        (zero, q, rho - q),
    ]
    objs = [(a + gamma * b + c, a + phi * (b + c)) for a, b, c in verts]
    best = np.full(rho.shape, -np.inf)
    for l1, l2 in objs:
        best = np.maximum(best, np.minimum(l1, l2))
    for (u1, u2), (v1, v2) in combinations(objs, 2):
        g1, g2 = u1 - u2, v1 - v2
        cross = g1 * g2 < 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(cross, g1 / np.where(cross, g1 - g2, 1.0), 0.0)
        val = u1 + t * (v1 - u1)
        best = np.maximum(best, np.where(cross, val, -np.inf))
    return best - 1.0


def _margin_at(phi: float, x: float, y: float) -> float:
    x = min(max(x, 0.0), 1.0)
    y = min(max(y, 0.0), 1.0 - x)
    return float(_grid_margins(phi, np.array([x]), np.array([y]))[0])


def _verify(phi: Fraction, x: Fraction, y: Fraction):
    z = 1 - x - y
    if x < 0 or y < 0 or z < 0:
        return None
    m, (a, b, c) = _exact_inner(phi, x, y, z)
    gamma = (3 * phi - 1) / 2
    ok = (
        a + gamma * b + c > 1
        and a + phi * (b + c) > 1
        and x + y + z == 1
        and x * x + 2 * x * y + 2 * y * z >= a + b + c
        and 2 * y * z >= b
        and min(a, b, c, x, y, z) >= 0
    )
    return (x, y, z, a, b, c) if ok else None


def verify_point(phi, point) -> bool:
    """Re-check every constraint of the system at ``point`` in exact arithmetic."""
    phi = Fraction(phi)
    x, y, z, a, b, c = (Fraction(v) for v in point)
    gamma = (3 * phi - 1) / 2
    return (
        a + gamma * b + c > 1
        and a + phi * (b + c) > 1
        and x + y + z == 1
        and x * x + 2 * x * y + 2 * y * z >= a + b + c
        and 2 * y * z >= b
        and min(a, b, c, x, y, z) >= 0
    )


_SIMPLE_POINTS = [
    (Fraction(0), Fraction(1, 2)),
    (Fraction(1, 2), Fraction(1, 2)),
    (Fraction(1, 2), Fraction(0)),
    (Fraction(1, 3), Fraction(1, 3)),
    (Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(1)),
    (Fraction(0), Fraction(0)),
]


def check_system(phi, resolution: float = 1e-3, polish: bool = True) -> FeasibilityVerdict:
    """Search for (x, y, z, a, b, c) with
        a + (3 phi - 1)/2 b + c > 1,  a + phi (b + c) > 1,  x + y + z = 1,
        x^2 + 2xy + 2yz >= a + b + c,  2yz >= b,  all variables >= 0.

    For fixed (x, y, z) the best (a, b, c) is found exactly, so the search
    runs over a grid on the (x, y) triangle at the given resolution, followed
    by local polishing of the best grid point. Simple rational points are
    tried first. A returned point has been re-verified in exact arithmetic.
    Not finding a point does not prove infeasibility.
    """
    phi = Fraction(phi)
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    steps = max(1, int(round(1.0 / resolution)))
    pf = float(phi)
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = i + j <= steps
    xs = i[keep] / steps
    ys = j[keep] / steps
    margins = _grid_margins(pf, xs, ys)
    k = int(np.argmax(margins))
    verdict = FeasibilityVerdict(
        "no-point-found", phi, resolution,
        max_margin=float(margins[k]),
        argmax=(float(xs[k]), float(ys[k]), float(1.0 - xs[k] - ys[k])),
        grid_points=int(margins.size),
        positive_points=int((margins > 0).sum()),
    )
    # exact margin at the best grid point replaces the float estimate
    gx, gy = Fraction(int(i[keep][k]), steps), Fraction(int(j[keep][k]), steps)
    exact_m, _ = _exact_inner(phi, gx, gy, 1 - gx - gy)
    verdict.max_margin = float(exact_m)

    candidates = list(_SIMPLE_POINTS)
    candidates.append((gx, gy))
    if polish:
        res = minimize(lambda p: -_margin_at(pf, p[0], p[1]), x0=[float(gx), float(gy)],
                       method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        px = min(max(float(res.x[0]), 0.0), 1.0)
        py = min(max(float(res.x[1]), 0.0), 1.0 - px)
        fx, fy = Fraction(px).limit_denominator(10 ** 9), Fraction(py).limit_denominator(10 ** 9)
        if fx + fy <= 1:
            m, _ = _exact_inner(phi, fx, fy, 1 - fx - fy)
            if float(m) > verdict.max_margin:
                verdict.max_margin = float(m)
                verdict.argmax = (float(fx), float(fy), float(1 - fx - fy))
            candidates.append((fx, fy))
    for x, y in candidates:
        pt = _verify(phi, x, y)
        if pt is not None:
            verdict.status = "feasible"
            verdict.point = pt
            break
    return verdict


def bisect_threshold(lo=Fraction(178, 100), hi=Fraction(10), width=1e-4, resolution: float = 1e-3):
    """Bracket the smallest phi at which check_system finds a point.

    Returns (lo, hi) with no point found at lo and a point found at hi.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if check_system(lo, resolution).feasible:
        raise ValueError(f"a point is already found at the lower end {lo}")
    if not check_system(hi, resolution).feasible:
        raise ValueError(f"no point found at the upper end {hi}")
    while hi - lo > Fraction(width):
        mid = (lo + hi) / 2
        mid = Fraction(round(mid * 10 ** 8), 10 ** 8)
        if mid in (lo, hi):
            break
        if check_system(mid, resolution).feasible:
            hi = mid
        else:
            lo = mid
    return lo, hi


# --- uniform hypergraphs ------------------------------------------------------------

@dataclass(frozen=True)
class Hypergraph:
    n: int
    k: int
    edges: frozenset = field(default_factory=frozenset)  # vertex masks

    def __post_init__(self):
        for m in self.edges:
            if bin(m).count("1") != self.k or m >> self.n:
                raise ValueError(f"bad edge {bits(m)} for n={self.n}, k={self.k}")

    @classmethod
    def of(cls, n: int, k: int, edges) -> "Hypergraph":
        return cls(n, k, frozenset(mask_of(e) for e in edges))


def read_hypergraph(text: str, n: Optional[int] = None) -> Hypergraph:
    """One edge per line, vertex indices separated by spaces; '#' starts a comment."""
    edges = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        vs = [int(t) for t in line.split()]
        if len(set(vs)) != len(vs) or min(vs) < 0:
            raise ValueError(f"bad edge line {line!r}")
        edges.append(vs)
    ks = {len(e) for e in edges}
    if len(ks) > 1:
        raise ValueError(f"mixed edge sizes {sorted(ks)}")
    k = ks.pop() if ks else 0
    if n is None:
        n = max((max(e) + 1 for e in edges), default=0)
    return Hypergraph.of(n, k, edges)


def write_hypergraph(h: Hypergraph) -> str:
    return "".join(" ".join(map(str, bits(m))) + "\n" for m in sorted(h.edges))


def complete_hypergraph(n: int, k: int) -> Hypergraph:
    return Hypergraph.of(n, k, combinations(range(n), k))


def random_hypergraph(n: int, k: int, p: float, rng: random.Random) -> Hypergraph:
    return Hypergraph.of(n, k, [e for e in combinations(range(n), k) if rng.random() < p])


def count_simplices(h: Hypergraph) -> int:
    """Number of (k+1)-sets all of whose k-subsets are edges."""
    k = h.k
    if k == 0:
        return 0
    edges = h.edges
    # each simplex is counted once via its edge missing the largest vertex
    total = 0
    for m in edges:
        top = m.bit_length()
        for v in range(top, h.n):
            vb = 1 << v
            if all((m ^ (1 << u)) | vb in edges for u in bits(m)):
                total += 1
    return total


def kruskal_katona_check(h: Hypergraph) -> bool:
    """simplices <= beta^((k+1)/k) n^(k+1)/(k+1)! with beta = k! e / n^k, in integers.

    Raising both sides to the k-th power the inequality becomes
    ((k+1)! s)^k <= (k! e)^(k+1), free of n.
    """
    k = h.k
    if k == 0 or not h.edges:
        return True
    s = count_simplices(h)
    return (math.factorial(k + 1) * s) ** k <= (math.factorial(k) * len(h.edges)) ** (k + 1)


def orientation_bound(ell: int, e: int) -> int:
    """ceil((ell-1)! / (ell!)^((ell-1)/ell) * e^(1/ell)) computed exactly.

    L is the least integer with L^ell (ell!)^(ell-1) >= ((ell-1)!)^ell e.
    """
    if ell < 1:
        raise ValueError("uniformity must be positive")
    if e == 0:
        return 0
    rhs = math.factorial(ell - 1) ** ell * e
    f = math.factorial(ell) ** (ell - 1)
    L = max(0, int((rhs / f) ** (1.0 / ell)) - 1)
    while L ** ell * f < rhs:
        L += 1
    return L


def orient_hypergraph(h: Hypergraph) -> dict:
    """Direct every edge so each (k-1)-set has at most L edges pointing outside it.

    Edges are matched to (k-1)-subsets, each usable L times; an edge matched to
    S points at its vertex outside S. Returns {edge mask: head}.
    """
    ell = h.k
    if not h.edges:
        return {}
    L = orientation_bound(ell, len(h.edges))
    g = nx.Graph()
    left = [("e", m) for m in sorted(h.edges)]
    g.add_nodes_from(left, bipartite=0)
    for _, m in left:
        for u in bits(m):
            s = m ^ (1 << u)
            for i in range(L):
                g.add_edge(("e", m), ("s", s, i))
    matching = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
    heads = {}
    for node in left:
        if node not in matching:
            raise RuntimeError("orientation matching failed; the lemma guarantees one exists")
        s = matching[node][1]
        m = node[1]
        heads[m] = (m ^ s).bit_length() - 1
    return heads


def codegree_audit(h: Hypergraph, heads: dict) -> tuple[bool, int, int]:
    """Independent recount: (ok, worst outward codegree, bound)."""
    L = orientation_bound(h.k, len(h.edges))
    counts: dict = {}
    for m in h.edges:
        hd = heads[m]
        if not (m >> hd) & 1:
            return False, -1, L
        s = m ^ (1 << hd)
        counts[s] = counts.get(s, 0) + 1
    worst = max(counts.values(), default=0)
    return worst <= L and set(heads) == set(h.edges), worst, L


# --- graphs ---------------------------------------------------------------------

def random_graph_edges(n: int, p: float, rng: random.Random) -> list[tuple[int, int]]:
    return [e for e in combinations(range(n), 2) if rng.random() < p]
