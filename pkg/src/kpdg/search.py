"""Level-by-level enumeration of family-free k-PDGs and exact theta_max.

Graphs are held as slot-state vectors: slot r is the r-th k-subset in colex
order, so the slots of an l-vertex graph are a prefix of those of an
(l+1)-vertex graph. A slot state is 0 (no edge), 1 (undirected) or 2 + v
(directed at vertex v).

Growing from l to l+1 vertices assigns the C(l, k-1) slots that contain the
new vertex, depth first, abandoning a branch as soon as a forbidden pattern
appears (containment only grows as edges are added). For T_k a forbidden copy
lives inside a single (k+1)-set W: W carries at least three edges, one of
them W-y directed at some x with W-x also present. That local rule is the
fast path; any other family falls back to anchored subgraph search.

theta_max(n, k) = min over free graphs with directed edges of (1 - alpha)/beta.
Since alpha + beta <= 1 that ratio is >= 1, and adding an edge or a direction
never raises it, so at the final level a branch is cut once
(N - e_u) / (e_d + remaining slots) cannot beat the best ratio found so far.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Optional, Sequence

from .canonical import canonical_labeling, form_bytes, is_isomorphic
from .forbidden import ForbiddenFamily, make_Tk
from .pdg import Edge, Pdg, PdgError, bits, find_embedding, from_text, mask_of, to_text

log = logging.getLogger(__name__)

SCHEMA = 1


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, checkpoint: Optional[str] = None):
        super().__init__(message)
        self.checkpoint = checkpoint


# --- slot tables -------------------------------------------------------------

@lru_cache(maxsize=None)
def slot_table(n: int, k: int) -> "SlotTable":
    return SlotTable(n, k)


class SlotTable:
    """Colex ranking of k-subsets of 0..n-1 and the (k+1)-sets through each slot."""

    def __init__(self, n: int, k: int):
        self.n, self.k = n, k
        subsets = sorted(combinations(range(n), k), key=lambda s: s[::-1])
        self.masks = [mask_of(s) for s in subsets]
        self.rank = {m: r for r, m in enumerate(self.masks)}
        # per slot: for each W = S + v, (max vertex of W, slots of W-y keyed by y)
        self.through: list[list[tuple[int, dict]]] = []
        for m in self.masks:
            entries = []
            for v in range(n):
                if (m >> v) & 1:
                    continue
                w = m | (1 << v)
                by_y = {y: self.rank[w ^ (1 << y)] for y in bits(w)}
                entries.append((max(bits(w)), by_y))
            self.through.append(entries)

    def new_slots(self, level: int) -> list[int]:
        """Slots that contain vertex ``level`` and otherwise lie in 0..level-1."""
        return list(range(comb(level, self.k), comb(level + 1, self.k)))


def to_states(g: Pdg, table: SlotTable) -> list[int]:
    st = [0] * len(table.masks)
    for e in g.edges:
        st[table.rank[e.mask]] = 1 if not e.directed else 2 + e.head
    return st


def from_states(st: Sequence[int], n: int, table: SlotTable) -> Pdg:
    edges = []
    for r, s in enumerate(st):
        if s:
            m = table.masks[r]
            if m >> n:
                continue
            edges.append(Edge(m) if s == 1 else Edge(m, s - 2))
    return Pdg(n, table.k, frozenset(edges))


def slot_choices(mask: int) -> list[int]:
    """Try order for a slot: directed states first, then undirected, then empty."""
    return [2 + v for v in bits(mask)] + [1, 0]


# --- freeness checkers -----------------------------------------------------------

def _tk_bad_at(st, by_y: dict) -> bool:
    present = 0
    for s in by_y.values():
        if st[s]:
            present += 1
    if present < 3:
        return False
    for y, s in by_y.items():
        a = st[s]
        if a >= 2 and st[by_y[a - 2]]:
            return True
    return False


class TkRule:
    """Incremental T_k test: only (k+1)-sets through the newly set slot are examined."""

    name = "tk"

    def __init__(self, table: SlotTable):
        self.table = table

    def creates_copy(self, st, slot: int, level: int) -> bool:
        for top, by_y in self.table.through[slot]:
            if top <= level and _tk_bad_at(st, by_y):
                return True
        return False

    def graph_free(self, g: Pdg) -> bool:
        st = to_states(g, self.table)
        return not any(
            _tk_bad_at(st, by_y)
            for slot, s in enumerate(st)
            if s
            for top, by_y in self.table.through[slot]
            if top < g.n
        )


class FamilyRule:
    """Incremental test for an arbitrary family: embeddings must use the new edge."""

    name = "family"

    def __init__(self, table: SlotTable, members: Sequence[Pdg], tk_member: bool):
        self.table = table
        self.members = list(members)
        self.tk = TkRule(table) if tk_member else None

    def creates_copy(self, st, slot: int, level: int) -> bool:
        if self.tk is not None and self.tk.creates_copy(st, slot, level):
            return True
        host = from_states(st, level + 1, self.table)
        s = st[slot]
        m = self.table.masks[slot]
        anchor = Edge(m) if s == 1 else Edge(m, s - 2)
        return any(find_embedding(host, p, anchor) is not None for p in self.members)

    def graph_free(self, g: Pdg) -> bool:
        return all(find_embedding(g, p) is None for p in self.members)


def family_members(family, k: int) -> list[Pdg]:
    if family is None:
        return [make_Tk(k)]
    members = list(family.members if isinstance(family, ForbiddenFamily) else family)
    for m in members:
        if m.k != k:
            raise PdgError(f"family member has k={m.k}, expected {k}")
    return members


def make_rule(table: SlotTable, members: Sequence[Pdg]):
    tk = make_Tk(table.k)
    is_tk = [m.n == tk.n and is_isomorphic(m, tk) for m in members]
    if len(members) == 1 and is_tk[0]:
        return TkRule(table)
    others = [m for m, t in zip(members, is_tk) if not t]
    return FamilyRule(table, others, any(is_tk))


# --- level sets --------------------------------------------------------------------

@dataclass
class LevelSet:
    """Graphs on vertices 0..level-1, keyed by canonical form (or labeled form without dedup)."""

    level: int
    k: int
    graphs: dict = field(default_factory=dict)
    deduped: bool = True

    def sorted_graphs(self) -> list[Pdg]:
        return [self.graphs[key] for key in sorted(self.graphs)]

    def __len__(self) -> int:
        return len(self.graphs)

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            fh.write(f"# level {self.level} k {self.k} count {len(self)} deduped {int(self.deduped)}\n")
            for g in self.sorted_graphs():
                fh.write(to_text(g) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "LevelSet":
        with open(path) as fh:
            header = fh.readline().split()
            level, k, deduped = int(header[2]), int(header[4]), bool(int(header[8]))
            ls = cls(level, k, deduped=deduped)
            for line in fh:
                line = line.strip()
                if line:
                    g = from_text(line)
                    ls.graphs[form_bytes(g)] = g
        return ls


def initial_level(k: int) -> LevelSet:
    g = Pdg(k - 1, k, frozenset())
    return LevelSet(k - 1, k, {form_bytes(g): g})


def _extensions(base: Pdg, rule, table: SlotTable):
    """Yield state vectors of all free extensions of ``base`` by its last vertex."""
    level = base.n - 1
    st = to_states(base, table)
    slots = table.new_slots(level)
    choices = [slot_choices(table.masks[s]) for s in slots]
    depth = len(slots)

    def rec(i):
        if i == depth:
            yield st
            return
        s = slots[i]
        for c in choices[i]:
            st[s] = c
            if c and rule.creates_copy(st, s, level):
                continue
            yield from rec(i + 1)
        st[s] = 0

    yield from rec(0)


def _grow_chunk(args):
    bases, k, n_table, members, dedup = args
    table = slot_table(n_table, k)
    rule = make_rule(table, members)
    out = {}
    for base in bases:
        for st in _extensions(base, rule, table):
            g = from_states(st, base.n, table)
            if dedup:
                perm, _ = canonical_labeling(g)
                g = g.relabel(perm)
            out.setdefault(form_bytes(g), g)
    return out


def _chunks(seq: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(seq)))
    size, extra = divmod(len(seq), parts)
    out, start = [], 0
    for i in range(parts):
        end = start + size + (1 if i < extra else 0)
        out.append(seq[start:end])
        start = end
    return out


def grow_level(prev: LevelSet, family=None, dedup: bool = True, workers: int = 1) -> LevelSet:
    """All free one-vertex extensions of ``prev``, up to isomorphism when ``dedup``."""
    k = prev.k
    members = family_members(family, k)
    bases = [g.with_vertices(prev.level + 1) for g in prev.sorted_graphs()]
    n_table = prev.level + 1
    merged: dict = {}
    jobs = [(chunk, k, n_table, members, dedup) for chunk in _chunks(bases, workers * 4)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_grow_chunk, jobs))
    else:
        parts = [_grow_chunk(j) for j in jobs]
    for part in parts:
        for key, g in part.items():
            merged.setdefault(key, g)
    return LevelSet(prev.level + 1, k, merged, deduped=dedup)


# --- theta -------------------------------------------------------------------------

@dataclass
class ThetaResult:
    n: int
    k: int
    theta: Optional[Fraction]
    witness: Optional[Pdg]
    level_counts: list
    final_count: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "n": self.n,
            "k": self.k,
            "theta": None if self.theta is None else f"{self.theta.numerator}/{self.theta.denominator}",
            "witness": None if self.witness is None else to_text(self.witness),
            "level_counts": list(self.level_counts),
            "final_count": self.final_count,
        }


@dataclass
class _Best:
    num: int = 1  # ratio num/den; 1/0 encodes +infinity
    den: int = 0
    key: Optional[tuple] = None
    states: Optional[list] = None

    def better(self, num: int, den: int, key: tuple) -> bool:
        lhs, rhs = num * self.den, self.num * den
        if self.den == 0:
            return True
        return lhs < rhs or (lhs == rhs and (self.key is None or key < self.key))


def _final_scan(bases: list[tuple[int, Pdg]], k: int, n: int, members, exhaustive: bool, seed: Optional[tuple] = None):
    """Scan final-level extensions of indexed bases; returns (num, den, key, witness_text, count)."""
    table = slot_table(n, k)
    rule = make_rule(table, members)
    total = comb(n, k)
    best = _Best()
    if seed is not None:
        best.num, best.den = seed
    count = 0
    slots = table.new_slots(n - 1)
    choices = [slot_choices(table.masks[s]) for s in slots]
    depth = len(slots)
    for idx, base in bases:
        st = to_states(base.with_vertices(n), table)
        u0 = base.e_u
        d0 = base.e_d
        path = [0] * depth

        def rec(i, u, d):
            nonlocal count
            if not exhaustive and best.den:
                # lower bound: every remaining slot directed
                if (total - u) * best.den >= best.num * (d + depth - i):
                    return
            if i == depth:
                count += 1
                if d and best.better(total - u, d, (idx, tuple(path))):
                    best.num, best.den = total - u, d
                    best.key = (idx, tuple(path))
                    best.states = list(st)
                return
            s = slots[i]
            for ci, c in enumerate(choices[i]):
                st[s] = c
                if c and rule.creates_copy(st, s, n - 1):
                    continue
                path[i] = ci
                rec(i + 1, u + (c == 1), d + (c >= 2))
            st[s] = 0

        rec(0, u0, d0)
    witness = None if best.states is None else to_text(from_states(best.states, n, table))
    return best.num, best.den, best.key, witness, count


def _merge_final(parts):
    best = None
    count = 0
    for num, den, key, witness, c in parts:
        count += c
        if witness is None:
            continue
        if best is None:
            best = (num, den, key, witness)
            continue
        lhs, rhs = num * best[1], best[0] * den
        if lhs < rhs or (lhs == rhs and key < best[2]):
            best = (num, den, key, witness)
    return best, count


def lift_theta(theta, k: int) -> Fraction:
    """The weight for k-PDGs obtained by averaging links of a bound for (k-1)-PDGs."""
    if k < 3:
        raise ValueError(f"lift needs k >= 3, got {k}")
    theta = Fraction(theta)
    return ((k - 1) * theta + 1) / k


def enumerate_levels(n: int, k: int, family=None, workers: int = 1, checkpoint=None,
                     deadline: Optional[float] = None) -> list[LevelSet]:
    """Deduplicated level sets for 0..n-1 extra vertices, i.e. levels k-1 .. n-1."""
    members = family_members(family, k)
    ckdir = Path(checkpoint) if checkpoint else None
    levels = [initial_level(k)]
    for level in range(k, n):
        path = ckdir / f"level_{level}.txt" if ckdir else None
        if path is not None and path.exists():
            levels.append(LevelSet.load(path))
            continue
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(f"time budget exhausted before level {level}", str(ckdir) if ckdir else None)
        t0 = time.monotonic()
        nxt = grow_level(levels[-1], members, dedup=True, workers=workers)
        log.info("level %d: %d classes (%.1fs)", level, len(nxt), time.monotonic() - t0)
        if path is not None:
            nxt.save(path)
        levels.append(nxt)
    return levels


def theta_max(n: int, k: int, family=None, *, workers: int = 1, batches: int = 1,
              batch_index: Optional[int] = None, checkpoint=None, final: str = "bound",
              max_seconds: Optional[float] = None) -> ThetaResult:
    """Largest theta with alpha + theta*beta <= 1 over all n-vertex family-free k-PDGs.

    ``final`` selects the last level: "bound" (branch and bound, no final count),
    "exhaustive" (every labeled extension, counted) or "dedup" (also counted up
    to isomorphism). With ``batch_index`` only that batch of final-level bases
    is scanned and the result is partial.
    """
    if k < 1 or n < k:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    if final not in ("bound", "exhaustive", "dedup"):
        raise ValueError(f"unknown final mode {final!r}")
    members = family_members(family, k)
    deadline = None if max_seconds is None else time.monotonic() + max_seconds
    ckdir = Path(checkpoint) if checkpoint else None
    if ckdir:
        ckdir.mkdir(parents=True, exist_ok=True)
    levels = enumerate_levels(n, k, members, workers, ckdir, deadline)
    counts = [len(ls) for ls in levels]
    if final == "dedup":
        last = grow_level(levels[-1], members, dedup=True, workers=workers)
        best = None
        for key in sorted(last.graphs):
            g = last.graphs[key]
            if g.e_d == 0:
                continue
            r = Fraction(comb(n, k) - g.e_u, g.e_d)
            if best is None or r < best[0]:
                best = (r, g)
        return ThetaResult(n, k, best and best[0], best and best[1], counts, len(last))

    bases = list(enumerate(levels[-1].sorted_graphs()))
    groups = _chunks(bases, batches) if batches > 1 else [bases]
    while len(groups) < batches:
        groups.append([])
    selected = range(len(groups)) if batch_index is None else [batch_index]
    exhaustive = final == "exhaustive"
    parts = []
    todo = []
    for b in selected:
        part_path = ckdir / f"final_{batches}_{b}.json" if ckdir else None
        if part_path is not None and part_path.exists():
            with open(part_path) as fh:
                rec = json.load(fh)
            parts.append(_part_from_json(rec))
        else:
            todo.append((b, part_path))
    # subdivide each batch for the worker pool; sub-results merge exactly
    for b, part_path in todo:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(f"time budget exhausted before final batch {b}", str(ckdir) if ckdir else None)
        subs = _chunks(groups[b], workers * 4) if groups[b] else []
        jobs = [(s, k, n, members, exhaustive) for s in subs]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(workers) as ex:
                sub_parts = list(ex.map(_final_job, jobs))
        else:
            sub_parts = [_final_job(j) for j in jobs]
        merged, count = _merge_final(sub_parts)
        part = (merged[0], merged[1], merged[2], merged[3], count) if merged else (1, 0, None, None, count)
        if part_path is not None:
            with open(part_path, "w") as fh:
                json.dump(_part_to_json(part), fh)
        parts.append(part)
    best, count = _merge_final(parts)
    theta = None if best is None else Fraction(best[0], best[1])
    witness = None if best is None else from_text(best[3])
    res = ThetaResult(n, k, theta, witness, counts, count if exhaustive else None)
    if batch_index is not None:
        res.partial = {"batches": batches, "batch_index": batch_index,
                       "part": _part_to_json(parts[0])}
    return res


def _final_job(args):
    bases, k, n, members, exhaustive = args
    return _final_scan(bases, k, n, members, exhaustive)


def _part_to_json(part) -> dict:
    num, den, key, witness, count = part
    return {
        "num": num,
        "den": den,
        "key": None if key is None else [key[0], list(key[1])],
        "witness": witness,
        "count": count,
    }


def _part_from_json(rec: dict):
    key = None if rec["key"] is None else (rec["key"][0], tuple(rec["key"][1]))
    return rec["num"], rec["den"], key, rec["witness"], rec["count"]


def merge_partials(n: int, k: int, level_counts: list, partials: Sequence[dict], exhaustive: bool = False) -> ThetaResult:
    """Combine per-batch partial records into one result."""
    parts = [_part_from_json(p) for p in partials]
    best, count = _merge_final(parts)
    theta = None if best is None else Fraction(best[0], best[1])
    witness = None if best is None else from_text(best[3])
    return ThetaResult(n, k, theta, witness, list(level_counts), count if exhaustive else None)
