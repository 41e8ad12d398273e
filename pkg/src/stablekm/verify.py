"""Exhaustive oracles for formulas and triple systems, and the chain verifier."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, NotUniquelySatisfiable
from .metric import MetricInstance, cost
from .oracle import certify_stability
from .reductions.cnf import CnfFormula
from .reductions.embed import COVERED, UNCOVERED, build_chain
from .reductions.sat import clause_gadget_sizes
from .reductions.tdm import TripleSystem, canonical_matching

SAT_BUDGET = 1 << 22
_CHUNK = 1 << 18


# -- SAT ----------------------------------------------------------------------

def _unsat_counts(phi: CnfFormula, lo: int, hi: int) -> np.ndarray:
    """Unsatisfied-clause count for assignments ``lo..hi-1`` (bit v-1 is variable v)."""
    idx = np.arange(lo, hi, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(max(phi.n_vars, 1), dtype=np.int64)) & 1).astype(bool)
    unsat = np.zeros(hi - lo, dtype=np.int32)
    for c in phi.clauses:
        sat = np.zeros(hi - lo, dtype=bool)
        for lit in c:
            col = bits[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        unsat += ~sat
    return unsat


def _check_sat_budget(phi: CnfFormula, budget: int):
    if (1 << phi.n_vars) > budget:
        raise BudgetExceeded(f"2^{phi.n_vars} assignments exceed the budget of {budget}")


def _decode(i: int, n: int) -> tuple[bool, ...]:
    return tuple(bool(i >> v & 1) for v in range(n))


def count_sat(phi: CnfFormula, budget: int = SAT_BUDGET, keep: int = 1024):
    """Truth-table count; returns (count, first ``keep`` satisfying assignments)."""
    _check_sat_budget(phi, budget)
    total = 1 << phi.n_vars
    count, found = 0, []
    for lo in range(0, total, _CHUNK):
        hi = min(total, lo + _CHUNK)
        hits = np.flatnonzero(_unsat_counts(phi, lo, hi) == 0)
        count += len(hits)
        for h in hits[: max(0, keep - len(found))]:
            found.append(_decode(lo + int(h), phi.n_vars))
    return count, found


def count_models(phi: CnfFormula, node_budget: int = 5_000_000) -> int:
    """Exact model count by branching with unit propagation.

    Used where the truth table is too large; validated against it in tests.
    """
    nodes = 0
    clauses = [tuple(c) for c in phi.clauses]

    def walk(assign: dict) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded(f"model counter exceeded {node_budget} nodes")
        assign = dict(assign)
        while True:
            unit = None
            for c in clauses:
                free = []
                sat = False
                for lit in c:
                    v = assign.get(abs(lit))
                    if v is None:
                        free.append(lit)
                    elif v == (lit > 0):
                        sat = True
                        break
                if sat:
                    continue
                if not free:
                    return 0
                if len(free) == 1:
                    unit = free[0]
                    break
            if unit is None:
                break
            assign[abs(unit)] = unit > 0
        open_clauses = [c for c in clauses if not any(assign.get(abs(l)) == (l > 0) for l in c)]
        if not open_clauses:
            return 1 << (phi.n_vars - len(assign))
        v = min(abs(l) for c in open_clauses for l in c if abs(l) not in assign)
        return walk({**assign, v: True}) + walk({**assign, v: False})

    return walk({})


def sat_stability_profile(phi: CnfFormula, budget: int = SAT_BUDGET):
    """Unique solution and the fewest unsatisfied clauses at each Hamming distance."""
    _check_sat_budget(phi, budget)
    n = phi.n_vars
    total = 1 << n
    best = np.full(n + 1, np.iinfo(np.int32).max, dtype=np.int64)
    unsat_all = []
    for lo in range(0, total, _CHUNK):
        unsat_all.append(_unsat_counts(phi, lo, min(total, lo + _CHUNK)))
    unsat = np.concatenate(unsat_all) if unsat_all else np.zeros(0, dtype=np.int32)
    sols = np.flatnonzero(unsat == 0)
    if len(sols) != 1:
        raise NotUniquelySatisfiable(f"formula has {len(sols)} satisfying assignments")
    star = int(sols[0])
    idx = np.arange(total, dtype=np.int64) ^ star
    hw = np.zeros(total, dtype=np.int64)
    for v in range(n):
        hw += (idx >> v) & 1
    np.minimum.at(best, hw, unsat)
    return _decode(star, n), [int(b) for b in best]


def measure_sat_stability(phi: CnfFormula, budget: int = SAT_BUDGET) -> Fraction:
    """Least ratio of unsatisfied-clause fraction to Hamming fraction away from the solution."""
    _, best = sat_stability_profile(phi, budget)
    n, m = phi.n_vars, phi.m
    if n == 0:
        raise NotUniquelySatisfiable("no variables, nothing to perturb")
    return min(Fraction(best[h] * n, m * h) for h in range(1, n + 1))


# -- triple systems ------------------------------------------------------------

class _Search:
    def __init__(self, ts: TripleSystem, node_budget: int | None, seconds: float | None):
        self.ts = ts
        self.masks = [(1 << a) | (1 << b) | (1 << c) for a, b, c in ts.triples]
        self.by_vertex = [[] for _ in range(ts.n_vertices)]
        for i, t in enumerate(ts.triples):
            for v in t:
                self.by_vertex[v].append(i)
        self.node_budget = node_budget
        self.deadline = None if seconds is None else time.monotonic() + seconds
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise BudgetExceeded(f"search exceeded {self.node_budget} nodes")
        if self.deadline is not None and self.nodes % 1024 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded("search exceeded its time budget")


def perfect_matchings(ts: TripleSystem, node_budget: int | None = None, seconds: float | None = None):
    """Yield every perfect matching as a sorted list of triple indices.

    Branches on the uncovered vertex with the fewest live triples.
    """
    s = _Search(ts, node_budget, seconds)
    full = (1 << ts.n_vertices) - 1
    if ts.n_vertices % 3:
        return

    def rec(covered: int, chosen: list[int]):
        s.tick()
        if covered == full:
            yield sorted(chosen)
            return
        best_opts = None
        for v in range(ts.n_vertices):
            if covered >> v & 1:
                continue
            opts = [i for i in s.by_vertex[v] if not covered & s.masks[i]]
            if not opts:
                return
            if best_opts is None or len(opts) < len(best_opts):
                best_opts = opts
                if len(opts) == 1:
                    break
        for i in best_opts:
            chosen.append(i)
            yield from rec(covered | s.masks[i], chosen)
            chosen.pop()

    yield from rec(0, [])


def count_perfect_matchings(ts: TripleSystem, node_budget: int | None = None,
                            seconds: float | None = None) -> int:
    return sum(1 for _ in perfect_matchings(ts, node_budget, seconds))


def matchings_at_least(ts: TripleSystem, size: int, node_budget: int | None = None):
    """Yield every matching (list of triple indices) with at least ``size`` triples.

    Each vertex is decided in index order: left uncovered, or covered by one
    of its live triples.  A matching maps to exactly one branch path.
    """
    s = _Search(ts, node_budget, None)
    nv = ts.n_vertices

    def rec(v: int, used: int, chosen: list[int]):
        # ``used`` holds covered vertices and those decided to stay uncovered
        s.tick()
        while v < nv and used >> v & 1:
            v += 1
        free = sum(1 for u in range(v, nv) if not used >> u & 1)
        if len(chosen) + free // 3 < size:
            return
        if v == nv:
            yield sorted(chosen)
            return
        for i in s.by_vertex[v]:
            if not used & s.masks[i]:
                chosen.append(i)
                yield from rec(v + 1, used | s.masks[i], chosen)
                chosen.pop()
        yield from rec(v + 1, used | 1 << v, chosen)

    yield from rec(0, 0, [])


def max_matching(ts: TripleSystem, node_budget: int | None = 2_000_000) -> int:
    """Largest set of pairwise disjoint triples (branch and bound)."""
    s = _Search(ts, node_budget, None)
    nv = ts.n_vertices
    best = 0

    def rec(v: int, used: int, size: int):
        nonlocal best
        s.tick()
        while v < nv and used >> v & 1:
            v += 1
        free = sum(1 for u in range(v, nv) if not used >> u & 1)
        if size + free // 3 <= best:
            return
        if v == nv:
            best = max(best, size)
            return
        for i in s.by_vertex[v]:
            if not used & s.masks[i]:
                rec(v + 1, used | s.masks[i], size + 1)
        rec(v + 1, used | 1 << v, size)

    rec(0, 0, 0)
    return best


def max_cover(ts: TripleSystem, size_n: int, budget: int = 2_000_000) -> int:
    """Most vertices covered by ``size_n`` distinct triples."""
    T = len(ts.triples)
    if size_n > T:
        raise ValueError(f"cannot pick {size_n} distinct triples out of {T}")
    from math import comb
    if comb(T, size_n) > budget:
        raise BudgetExceeded(f"C({T},{size_n}) triple sets exceed the budget of {budget}")
    masks = [(1 << a) | (1 << b) | (1 << c) for a, b, c in ts.triples]
    best = 0
    for pick in combinations(masks, size_n):
        m = 0
        for x in pick:
            m |= x
        best = max(best, m.bit_count())
    return best


# -- chain report --------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE, INFO = "pass", "fail", "inconclusive", "info"


@dataclass
class Check:
    stage: str
    name: str
    expected: object
    actual: object
    source: str
    status: str

    def to_json(self) -> dict:
        return {"stage": self.stage, "name": self.name, "expected": _plain(self.expected),
                "actual": _plain(self.actual), "source": self.source, "status": self.status}


def _plain(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


@dataclass
class Budgets:
    sat_assignments: int = SAT_BUDGET
    model_nodes: int = 5_000_000
    matching_nodes: int = 5_000_000
    matching_seconds: float = 60.0

    @classmethod
    def zero(cls) -> "Budgets":
        return cls(0, 0, 0, 0.0)


@dataclass
class ChainReport:
    checks: list[Check] = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    stability: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    provenance: dict | None = None

    def add(self, stage, name, expected, actual, source, ok=None, status=None):
        if status is None:
            status = PASS if (ok if ok is not None else expected == actual) else FAIL
        self.checks.append(Check(stage, name, expected, actual, source, status))

    @property
    def verdict(self) -> str:
        states = {c.status for c in self.checks}
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states:
            return INCONCLUSIVE
        return PASS

    def to_json(self, timings: bool = False) -> dict:
        out = {"verdict": self.verdict, "checks": [c.to_json() for c in self.checks],
               "counts": self.counts, "stability": {k: _plain(v) for k, v in self.stability.items()}}
        if timings:
            out["timings"] = self.timings
        if self.provenance is not None:
            out["provenance"] = self.provenance
        return out

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for c in self.checks:
            lines.append(f"[{c.status:>12}] {c.stage}: {c.name}: expected {_plain(c.expected)}, "
                         f"got {_plain(c.actual)} ({c.source})")
        return "\n".join(lines)


def _sat_count(phi: CnfFormula, budgets: Budgets):
    """(count, method) using the truth table when affordable, else the model counter."""
    if (1 << phi.n_vars) <= budgets.sat_assignments:
        return count_sat(phi, budgets.sat_assignments, keep=2)[0], "truth table"
    return count_models(phi, budgets.model_nodes), "model counter"


def verify_chain(phi: CnfFormula, k_override=4, budgets: Budgets | None = None) -> ChainReport:
    budgets = budgets or Budgets()
    rep = ChainReport()
    t0 = time.perf_counter()
    ch = build_chain(phi, k_override)
    rep.timings["build"] = time.perf_counter() - t0
    rep.provenance = ch.provenance.to_json()
    psi, ts, inst = ch.psi, ch.ts, ch.instance
    B, Q, m, n = phi.B, phi.Q, phi.m, phi.n_vars

    # stage 1
    sizes = [clause_gadget_sizes(len(c)) for c in phi.clauses]
    rep.add("qsat_to_e3sat", "output clauses", sum(s[1] for s in sizes), psi.m, "per-width gadget sizes")
    rep.add("qsat_to_e3sat", "output variables", n + sum(s[0] for s in sizes), psi.n_vars,
            "per-width gadget sizes")
    rep.add("qsat_to_e3sat", "every clause has width 3", True,
            all(len(c) == 3 for c in psi.clauses), "construction")
    rep.add("qsat_to_e3sat", "occurrence bound", f"<= {max(7 * B, 4 * B * Q * Q)}", psi.B,
            "max{7B, 4BQ^2}", ok=psi.B <= max(7 * B, 4 * B * Q * Q))
    if Q >= 3:
        rep.add("qsat_to_e3sat", "m' <= 3Q^2 m", f"<= {3 * Q * Q * m}", psi.m, "coarse size bound",
                ok=psi.m <= 3 * Q * Q * m)
        rep.add("qsat_to_e3sat", "n' <= 2QB n", f"<= {2 * Q * B * n}", psi.n_vars, "coarse size bound",
                ok=psi.n_vars <= 2 * Q * B * n)
    else:
        rep.add("qsat_to_e3sat", "coarse size bounds", "Q >= 3", Q, "bounds only claimed for Q >= 3",
                status=INFO)

    counts = {}
    for label, f in (("phi", phi), ("psi", psi)):
        try:
            counts[label], method = _sat_count(f, budgets)
            rep.counts[f"sat_{label}"] = counts[label]
            rep.counts[f"sat_{label}_method"] = method
        except BudgetExceeded as exc:
            rep.add("qsat_to_e3sat", f"count satisfying assignments of {label}", "within budget",
                    str(exc), "budget", status=INCONCLUSIVE)
    if "phi" in counts and "psi" in counts:
        rep.add("qsat_to_e3sat", "parsimony #sat(phi) = #sat(psi)", counts["phi"], counts["psi"],
                "solution count preserved")

    # stage 2
    K = ts.K
    rep.add("e3sat_to_3dm", "vertex count", (18 * K + 15) * psi.m, ts.n_vertices, "(18K+15)m")
    rep.add("e3sat_to_3dm", "triple count", (12 * K + 15) * psi.m, len(ts.triples), "(12K+15)m")
    rep.add("e3sat_to_3dm", "target matching size", (6 * K + 5) * psi.m, ts.n, "(6K+5)m")
    pm = None
    t0 = time.perf_counter()
    try:
        if budgets.matching_nodes <= 0:
            raise BudgetExceeded("matching budget is zero")
        found = list(perfect_matchings(ts, budgets.matching_nodes, budgets.matching_seconds))
        pm = len(found)
        rep.counts["perfect_matchings"] = pm
        if "psi" in counts:
            rep.add("e3sat_to_3dm", "parsimony #perfect matchings = #sat(psi)", counts["psi"], pm,
                    "solution count preserved")
    except BudgetExceeded as exc:
        found = None
        rep.add("e3sat_to_3dm", "count perfect matchings", "within budget", str(exc), "budget",
                status=INCONCLUSIVE)
    rep.timings["matchings"] = time.perf_counter() - t0

    # stage 3 is the identity; stage 4
    n_cbt = ts.n
    rep.add("cbt_to_kmeans", "points = 3n", 3 * n_cbt, inst.n_points, "one point per vertex")
    rep.add("cbt_to_kmeans", "centres = |T|", len(ts.triples), inst.n_centres, "one centre per triple")
    rep.add("cbt_to_kmeans", "k = n", n_cbt, inst.k, "one centre per matched triple")
    values = {v for row in inst.sqdist for v in row}
    rep.add("cbt_to_kmeans", "squared distances in {2,4}", [COVERED, UNCOVERED], sorted(values),
            "basis-vector geometry", ok=values <= {COVERED, UNCOVERED})
    lower = COVERED * inst.n_points
    rep.add("cbt_to_kmeans", "lower bound 6n from min distance", 6 * n_cbt, lower,
            "every point pays at least 2")
    if found is not None:
        if pm:
            costs = sorted({cost(inst, S) for S in found})
            rep.add("cbt_to_kmeans", "cost of every perfect-matching solution", [6 * n_cbt], costs,
                    "12n - 2*3n")
            rep.counts["optimal_kmeans_solutions"] = pm
            rep.add("cbt_to_kmeans", "optimal k-means solutions = #sat(phi)", counts.get("phi"), pm,
                    "exact covers are the cost-6n solutions", ok=counts.get("phi") == pm)
            if "psi" in counts and counts["psi"]:
                sat = count_sat(psi, budgets.sat_assignments, keep=pm)[1] \
                    if (1 << psi.n_vars) <= budgets.sat_assignments else []
                if sat:
                    canon = sorted(sorted(canonical_matching(ts, psi, a)) for a in sat)
                    rep.add("e3sat_to_3dm", "perfect matchings are the canonical ones", True,
                            canon == sorted(found), "assignment encoding")
        else:
            # no exact cover: coverage <= 3n - 1, every cost is even
            even = all(v % 2 == 0 for v in values)
            rep.add("cbt_to_kmeans", "no-case optimum lower bound", f">= {6 * n_cbt + 2}",
                    f">= {12 * n_cbt - 2 * (3 * n_cbt - 1)}", "12n - 2 maxcover, maxcover <= 3n-1",
                    ok=even)

    for label, f in (("phi", phi), ("psi", psi)):
        if counts.get(label) == 1 and (1 << f.n_vars) <= budgets.sat_assignments:
            rep.stability[f"s_{label}"] = measure_sat_stability(f, budgets.sat_assignments)
    return rep


def measure_kmeans_stability_margin(instance: MetricInstance, alphas, budget: int = 250_000):
    """Certifier verdict per alpha plus the largest alpha certified stable."""
    verdicts = {}
    for a in sorted(Fraction(x) for x in alphas):
        verdicts[a] = certify_stability(instance, a, budget).stable
    stable = [a for a, v in verdicts.items() if v]
    return verdicts, (max(stable) if stable else None)
