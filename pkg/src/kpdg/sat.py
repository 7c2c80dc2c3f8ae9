"""k-SAT DNF formulae: witnesses, minimality, blowups, types and function counts.

A clause is a pair of disjoint bitmasks (positive variables, negated
variables). Assignments are ints with variable i in bit i, which is also the
truth-table index order (variable 0 is the least significant bit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .pdg import Edge, Pdg, bits, mask_of

MAX_TABLE_VARS = 24
MAX_SWEEP_CLAUSES = 24
# below this many variables minimality is decided from the full truth table
TABLE_METHOD_VARS = 16


class SatError(ValueError):
    pass


class SatBudgetExceeded(SatError):
    pass


class Literal(NamedTuple):
    var: int
    positive: bool = True

    def __str__(self) -> str:
        return str(self.var) if self.positive else f"~{self.var}"


@dataclass(frozen=True, order=True)
class Clause:
    pos: int
    neg: int

    def __post_init__(self):
        if self.pos & self.neg:
            raise SatError("clause uses a variable twice")

    @classmethod
    def of(cls, literals) -> "Clause":
        pos = neg = 0
        for lit in literals:
            lit = Literal(*lit) if not isinstance(lit, Literal) else lit
            bit = 1 << lit.var
            if (pos | neg) & bit:
                raise SatError(f"variable {lit.var} repeated in clause")
            if lit.positive:
                pos |= bit
            else:
                neg |= bit
        return cls(pos, neg)

    @property
    def vars(self) -> int:
        return self.pos | self.neg

    @property
    def width(self) -> int:
        return bin(self.pos | self.neg).count("1")

    @property
    def literals(self) -> list[Literal]:
        return [Literal(v, bool((self.pos >> v) & 1)) for v in bits(self.vars)]

    def satisfied_by(self, w: int) -> bool:
        return (w & self.pos) == self.pos and not (w & self.neg)

    def __str__(self) -> str:
        return " ".join(map(str, self.literals))


@dataclass(frozen=True)
class Formula:
    n: int
    k: int
    clauses: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "clauses", frozenset(self.clauses))
        for c in self.clauses:
            if c.width != self.k:
                raise SatError(f"clause {c} has width {c.width}, expected {self.k}")
            if c.vars >> self.n:
                raise SatError(f"clause {c} uses a variable >= {self.n}")

    @classmethod
    def of(cls, n: int, k: int, clauses) -> "Formula":
        return cls(n, k, frozenset(c if isinstance(c, Clause) else Clause.of(c) for c in clauses))

    def sorted_clauses(self) -> list[Clause]:
        return sorted(self.clauses, key=lambda c: (_lits_key(c)))

    def __len__(self) -> int:
        return len(self.clauses)

    def __str__(self) -> str:
        return to_text(self)


def _lits_key(c: Clause):
    return [(v, not ((c.pos >> v) & 1)) for v in bits(c.vars)]


def to_text(f: Formula) -> str:
    return ", ".join(str(c) for c in f.sorted_clauses())


def from_text(text: str, n: Optional[int] = None, k: Optional[int] = None) -> Formula:
    """Parse ``"0 1, ~0 2"``; n defaults to 1 + the largest variable index."""
    clauses = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lits = []
        for tok in part.split():
            neg = tok.startswith("~")
            try:
                v = int(tok[1:] if neg else tok)
            except ValueError:
                raise SatError(f"bad literal {tok!r}") from None
            if v < 0:
                raise SatError(f"bad literal {tok!r}")
            lits.append(Literal(v, not neg))
        clauses.append(Clause.of(lits))
    if k is None:
        widths = {c.width for c in clauses}
        if len(widths) > 1:
            raise SatError(f"mixed clause widths {sorted(widths)}")
        k = widths.pop() if widths else 0
    if n is None:
        n = max((max(bits(c.vars)) + 1 for c in clauses), default=0)
    return Formula(n, k, frozenset(clauses))


# --- evaluation ---------------------------------------------------------------------

def _as_int(w, n: int) -> int:
    if isinstance(w, int):
        if w >> n:
            raise SatError(f"assignment {w} has more than {n} bits")
        return w
    w = list(w)
    if len(w) != n:
        raise SatError(f"assignment has length {len(w)}, expected {n}")
    return sum(1 << i for i, b in enumerate(w) if b)


def evaluate(f: Formula, w) -> int:
    x = _as_int(w, f.n)
    return int(any(c.satisfied_by(x) for c in f.clauses))


def assignment_bits(w: int, n: int) -> tuple:
    return tuple((w >> i) & 1 for i in range(n))


@dataclass(frozen=True)
class TruthTable:
    n: int
    value: int  # bit w is f(w)

    def __getitem__(self, w: int) -> int:
        return (self.value >> w) & 1

    def __len__(self) -> int:
        return 1 << self.n

    def __str__(self) -> str:
        # assignments in lexicographic order of (x_0, ..., x_{n-1}), x_0 leading
        n = self.n
        return "".join(str(self[sum(((p >> (n - 1 - v)) & 1) << v for v in range(n))])
                       for p in range(1 << n))


def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.uint32)


def _clause_rows(f: Formula, clauses: Sequence[Clause]) -> np.ndarray:
    w = _indices(f.n)
    rows = np.empty((len(clauses), 1 << f.n), dtype=bool)
    for i, c in enumerate(clauses):
        rows[i] = ((w & c.pos) == c.pos) & ((w & c.neg) == 0)
    return rows


def _table_array(f: Formula) -> np.ndarray:
    if f.n > MAX_TABLE_VARS:
        raise SatBudgetExceeded(f"truth tables limited to n <= {MAX_TABLE_VARS}, got {f.n}")
    w = _indices(f.n)
    out = np.zeros(1 << f.n, dtype=bool)
    for c in f.clauses:
        out |= ((w & c.pos) == c.pos) & ((w & c.neg) == 0)
    return out


def _pack(arr: np.ndarray) -> int:
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def truth_table(f: Formula) -> TruthTable:
    return TruthTable(f.n, _pack(_table_array(f)))


# --- witnesses and minimality ------------------------------------------------------

def find_witness(f: Formula, c: Clause) -> Optional[tuple]:
    """An assignment satisfying ``c`` and no other clause of ``f``, or None.

    The literals of ``c`` are fixed; every other clause that is not already
    falsified by them must get a false literal among its free variables. That
    is a CNF problem over the free variables, solved by unit propagation plus
    depth-first search. Unconstrained variables are set to 0.
    """
    if c not in f.clauses:
        raise SatError(f"clause {c} not in formula")
    fixed_one, fixed_zero = c.pos, c.neg
    # each constraint: (pos, neg) of the reduced clause; need some pos var = 0 or neg var = 1
    cons = []
    for d in f.clauses:
        if d == c:
            continue
        if (d.pos & fixed_zero) or (d.neg & fixed_one):
            continue
        pos, neg = d.pos & ~c.vars, d.neg & ~c.vars
        if not (pos | neg):
            return None
        cons.append((pos, neg))
    sol = _solve(cons, 0, 0)
    if sol is None:
        return None
    one = fixed_one | sol
    return assignment_bits(one, f.n)


def _solve(cons, ones: int, zeros: int) -> Optional[int]:
    """Find ones/zeros extending the partial assignment so every (pos, neg) has pos-var 0 or neg-var 1."""
    while True:
        pending = []
        changed = False
        for pos, neg in cons:
            if (pos & zeros) or (neg & ones):
                continue
            pos_free, neg_free = pos & ~ones, neg & ~zeros
            if not (pos_free | neg_free):
                return None
            if (pos_free | neg_free) & ((pos_free | neg_free) - 1) == 0:
                if pos_free:
                    zeros |= pos_free
                else:
                    ones |= neg_free
                changed = True
            else:
                pending.append((pos_free, neg_free))
        cons = pending
        if not changed:
            break
    if not cons:
        return ones
    pos, neg = cons[0]
    bit = (pos | neg) & -(pos | neg)
    # prefer the value that satisfies this constraint
    first, second = ((ones, zeros | bit), (ones | bit, zeros)) if pos & bit else ((ones | bit, zeros), (ones, zeros | bit))
    for o, z in (first, second):
        r = _solve(cons, o, z)
        if r is not None:
            return r
    return None


def _unique_rows(f: Formula) -> tuple[list[Clause], np.ndarray]:
    clauses = f.sorted_clauses()
    rows = _clause_rows(f, clauses)
    counts = rows.sum(axis=0, dtype=np.int32)
    has = (rows & (counts == 1)).any(axis=1)
    return clauses, has


def minimality_witnesses(f: Formula) -> dict:
    """Map each clause to a witness assignment (tuple of bits) or None."""
    return {c: find_witness(f, c) for c in f.sorted_clauses()}


def is_minimal(f: Formula, method: str = "auto") -> bool:
    """True iff every clause has a witness.

    ``method`` is "search" (propagation plus DFS per clause), "table" (count
    satisfied clauses over all 2^n assignments) or "auto".
    """
    if method == "auto":
        method = "table" if f.n <= TABLE_METHOD_VARS else "search"
    if method == "table":
        if not f.clauses:
            return True
        _, has = _unique_rows(f)
        return bool(has.all())
    if method != "search":
        raise SatError(f"unknown method {method!r}")
    return all(find_witness(f, c) is not None for c in f.sorted_clauses())


# --- structural operations ----------------------------------------------------------

def blowup(f: Formula, b: int) -> Formula:
    """Copy t of variable v becomes variable t*n + v; polarities are preserved."""
    if b < 1:
        raise SatError(f"blowup multiplicity must be >= 1, got {b}")
    n = f.n
    out = set()
    for c in f.clauses:
        lits = c.literals
        for copies in product(range(b), repeat=len(lits)):
            out.add(Clause.of(Literal(t * n + l.var, l.positive) for l, t in zip(lits, copies)))
    return Formula(b * n, f.k, frozenset(out))


def _by_varset(f: Formula) -> dict:
    groups: dict = {}
    for c in f.clauses:
        groups.setdefault(c.vars, []).append(c)
    return groups


def is_simple(f: Formula) -> bool:
    return all(len(g) == 1 for g in _by_varset(f).values())


def _pair_head(a: Clause, b: Clause) -> Optional[int]:
    diff = a.pos ^ b.pos
    if diff and not diff & (diff - 1):
        return diff.bit_length() - 1
    return None


def is_semisimple(f: Formula) -> bool:
    for g in _by_varset(f).values():
        if len(g) > 2 or (len(g) == 2 and _pair_head(*g) is None):
            return False
    return True


def type_of(f: Formula) -> Pdg:
    edges = []
    for vars_, g in _by_varset(f).items():
        if len(g) == 1:
            edges.append(Edge(vars_))
        elif len(g) == 2 and _pair_head(*g) is not None:
            edges.append(Edge(vars_, _pair_head(*g)))
        else:
            raise SatError("formula is not semisimple")
    return Pdg(f.n, f.k, frozenset(edges))


def positive_instance(h: Pdg) -> Formula:
    clauses = []
    for e in h.edges:
        clauses.append(Clause(e.mask, 0))
        if e.directed:
            clauses.append(Clause(e.mask ^ (1 << e.head), 1 << e.head))
    return Formula(h.n, h.k, frozenset(clauses))


def simple_subformulae(h: Pdg):
    """Yield every simple subformula of the positive instance of ``h``."""
    options = []
    for e in h.sorted_edges():
        opts = [None, Clause(e.mask, 0)]
        if e.directed:
            opts.append(Clause(e.mask ^ (1 << e.head), 1 << e.head))
        options.append(opts)
    for pick in product(*options):
        yield Formula(h.n, h.k, frozenset(c for c in pick if c is not None))


def simple_subformula_count(h: Pdg) -> int:
    return 2 ** h.e_u * 3 ** h.e_d


@dataclass
class PositiveInstanceReport:
    subformulae: int
    minimal: int
    distinct_functions: int
    counterexample: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None and self.minimal == self.subformulae == self.distinct_functions


def check_positive_instance_lemmas(h: Pdg, family=None, budget: int = 10 ** 5) -> PositiveInstanceReport:
    """Check that every simple subformula of the positive instance is minimal
    and that they all compute different functions.

    ``family`` defaults to the generated F_k; a graph containing a member
    violates the precondition and raises SatError.
    """
    from .forbidden import generate_Fk, is_family_free

    if h.n > 20:
        raise SatBudgetExceeded(f"positive-instance check limited to n <= 20, got {h.n}")
    total = simple_subformula_count(h)
    if total > budget:
        raise SatBudgetExceeded(f"{total} subformulae exceed budget {budget}")
    if family is None:
        family = generate_Fk(h.k)
    if not is_family_free(h, family):
        raise SatError("graph contains a member of the forbidden family")
    seen = set()
    minimal = 0
    bad = None
    for g in simple_subformulae(h):
        if is_minimal(g):
            minimal += 1
        elif bad is None:
            bad = f"non-minimal: {to_text(g)}"
        t = truth_table(g).value
        if t in seen and bad is None:
            bad = f"repeated function: {to_text(g)}"
        seen.add(t)
    return PositiveInstanceReport(total, minimal, len(seen), bad)


# --- realizations and blowup certificates -------------------------------------------

def realizations(h: Pdg):
    """Semisimple formulae with type ``h``, one per class under negating variables.

    Signs are chosen edge by edge in sorted order; the first time a variable
    appears with a determined sign (anywhere but as a head) that sign is
    taken positive, which picks one representative per negation class.
    """
    edges = h.sorted_edges()

    def rec(i, decided: int, clauses: list):
        if i == len(edges):
            yield Formula(h.n, h.k, frozenset(clauses))
            return
        e = edges[i]
        free = [v for v in bits(e.mask) if v != e.head]
        fresh = [v for v in free if not (decided >> v) & 1]
        old = [v for v in free if (decided >> v) & 1]
        for signs in product((True, False), repeat=len(old)):
            neg = sum(1 << v for v, s in zip(old, signs) if not s)
            pos = e.mask & ~neg
            dec = decided | mask_of(fresh)
            if e.directed:
                hb = 1 << e.head
                new = [Clause(pos, neg), Clause(pos & ~hb, neg | hb)]
            else:
                new = [Clause(pos, neg)]
            yield from rec(i + 1, dec, clauses + new)

    yield from rec(0, 0, [])


def _is_pair_seed(f: Formula) -> bool:
    return len(f.clauses) == 2 and len(_by_varset(f)) == 1


def _is_clique_seed(f: Formula) -> bool:
    if len(f.clauses) != f.k + 1 or not is_simple(f):
        return False
    allv = 0
    for c in f.clauses:
        allv |= c.vars
    return bin(allv).count("1") == f.k + 1


def seed_shape(f: Formula, family=None) -> str:
    """Classify a blowup seed as "pair", "family" or "clique"; raise otherwise."""
    if _is_pair_seed(f):
        return "pair"
    if is_semisimple(f) and f.clauses:
        from .canonical import is_isomorphic
        from .forbidden import generate_Fk

        t = type_of(f)
        used = 0
        for c in f.clauses:
            used |= c.vars
        t = _compress(t, used)
        members = generate_Fk(f.k) if family is None else family
        if any(m.n == t.n and is_isomorphic(m, t) for m in members):
            return "family"
    if _is_clique_seed(f) and not is_unate(f):
        return "clique"
    raise SatError("seed is not a clause pair, a forbidden-type formula or a non-unate (k+1)-clique")


def _compress(g: Pdg, used: int) -> Pdg:
    order = bits(used)
    perm = [0] * g.n
    for i, v in enumerate(order):
        perm[v] = i
    edges = [e.relabel(perm) for e in g.edges]
    return Pdg(len(order), g.k, frozenset(edges))


def check_blowup_nonminimality(seed: Formula, family=None, check_shape: bool = True) -> bool:
    """True iff the 2-blowup of a supported seed is non-minimal."""
    if check_shape:
        seed_shape(seed, family)
    return not is_minimal(blowup(seed, 2))


def same_set_pairs(k: int):
    """All clause pairs on variables 0..k-1, up to negating variables: the
    first clause is monotone, the second negates a nonempty set."""
    full = (1 << k) - 1
    for negset in range(1, 1 << k):
        yield Formula(k, k, frozenset({Clause(full, 0), Clause(full & ~negset, negset)}))


# --- counting ---------------------------------------------------------------------------

def all_clauses(n: int, k: int) -> list[Clause]:
    out = []
    for vs in combinations(range(n), k):
        m = mask_of(vs)
        for signs in range(1 << k):
            neg = sum(1 << v for i, v in enumerate(vs) if (signs >> i) & 1)
            out.append(Clause(m & ~neg, neg))
    return out


def _table_dtype(n: int):
    size = 1 << n
    for dt, width in ((np.uint8, 8), (np.uint16, 16), (np.uint32, 32), (np.uint64, 64)):
        if size <= width:
            return dt
    raise SatBudgetExceeded(f"function counting limited to n <= 6, got {n}")


def _clause_value(c: Clause, n: int) -> int:
    v = 0
    for w in range(1 << n):
        if c.satisfied_by(w):
            v |= 1 << w
    return v


def _subset_tables(values: Sequence[int], dtype) -> np.ndarray:
    arr = np.zeros(1, dtype=dtype)
    for v in values:
        arr = np.concatenate([arr, arr | dtype(v)])
    return arr


def count_functions(n: int, k: int) -> int:
    """Number of distinct functions computed by k-SAT formulae on n variables."""
    clauses = all_clauses(n, k)
    if len(clauses) > MAX_SWEEP_CLAUSES:
        raise SatBudgetExceeded(f"{len(clauses)} clauses: 2^{len(clauses)} formulae exceed the sweep budget")
    dt = _table_dtype(n)
    arr = _subset_tables([_clause_value(c, n) for c in clauses], dt)
    return int(np.unique(arr).size)


def count_unate_functions(n: int, k: int) -> int:
    """Number of distinct functions computed by unate k-SAT formulae on n variables."""
    if comb(n, k) > MAX_SWEEP_CLAUSES:
        raise SatBudgetExceeded("unate sweep over budget")
    dt = _table_dtype(n)
    seen = set()
    full = (1 << n) - 1
    for sigma in range(1 << n):  # bit v set: variable v used positively
        vals = []
        for vs in combinations(range(n), k):
            m = mask_of(vs)
            vals.append(_clause_value(Clause(m & sigma, m & ~sigma & full), n))
        seen.update(np.unique(_subset_tables(vals, dt)).tolist())
    return len(seen)


# --- unateness ------------------------------------------------------------------------------

def literal_counts(f: Formula) -> list[tuple[int, int]]:
    """Per variable (m(x), m(not x)): clauses containing the literal."""
    out = []
    for v in range(f.n):
        b = 1 << v
        out.append((sum(1 for c in f.clauses if c.pos & b), sum(1 for c in f.clauses if c.neg & b)))
    return out


def distance_to_unate(f: Formula) -> int:
    """Fewest clause deletions leaving a unate formula (minimum over polarity vectors)."""
    if f.n > 20:
        raise SatBudgetExceeded(f"unate distance limited to n <= 20, got {f.n}")
    if not f.clauses:
        return 0
    sigma = np.arange(1 << f.n, dtype=np.int64)  # bit v set: x_v kept positive
    bad = np.zeros(1 << f.n, dtype=np.int32)
    for c in f.clauses:
        bad += (((~sigma) & c.pos) != 0) | ((sigma & c.neg) != 0)
    return int(bad.min())


def is_unate(f: Formula) -> bool:
    # unate iff no variable occurs with both signs
    return all(not (p and q) for p, q in literal_counts(f))
