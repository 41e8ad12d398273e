"""Exactly-3-literal CNF to bounded-degree triple systems.

Layout of the emitted system, variable-major and then clause-major:

* per variable, ``K`` wheels of ``2*beta`` triples each.  Wheel triple ``t``
  is ``(tip_t, hub_t, hub_{t+1})`` on a ring of ``2*beta`` hubs; even tips are
  the positive tips of occurrence ``t//2``, odd tips the negative ones.
* per occurrence and sign, a binary tree of ``K - 1`` triples over the ``K``
  tips of that occurrence.  Internal triple = (own node, left port, right
  port); the top node is the root ``u`` (positive) or ``ubar`` (negative).
* per clause, for every one of its 7 satisfying assignments, three fresh
  vertices ``f1 f2 f3`` with triples ``(f1 f2 f3)``, ``(f1 r1 r2)`` and
  ``(f2 f3 r3)``.  ``r_s`` is the root agreeing with the assignment.

In the canonical matching for ``x = True`` the wheels use their odd triples,
the positive trees are left with exposed tips and therefore an exposed root,
and that root is picked up by the clause gadget of the true assignment.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from itertools import product

from ..errors import BadOverride, MalformedTripleSystem, NotExactly3SAT, ParseError, UnusedVariable
from .cnf import CnfFormula
from .provenance import ReductionProvenance


class Role(enum.Enum):
    WHEEL_HUB = "WHEEL_HUB"
    WHEEL_TIP = "WHEEL_TIP"
    TREE_NODE = "TREE_NODE"
    ROOT = "ROOT"
    CLAUSE = "CLAUSE"


@dataclass
class TripleSystem:
    roles: list[Role]
    triples: list[tuple[int, int, int]]
    tags: list[tuple] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    K: int | None = None
    kind: str = "3dm"

    def __post_init__(self):
        nv = len(self.roles)
        seen = set()
        norm = []
        for t in self.triples:
            t = tuple(sorted(int(v) for v in t))
            if len(t) != 3 or len(set(t)) != 3:
                raise MalformedTripleSystem(f"triple {t} needs 3 distinct vertices")
            if t[0] < 0 or t[2] >= nv:
                raise MalformedTripleSystem(f"triple {t} references a missing vertex")
            if t in seen:
                raise MalformedTripleSystem(f"duplicate triple {t}")
            seen.add(t)
            norm.append(t)
        self.triples = norm
        if not self.tags:
            self.tags = [("PLAIN", i) for i in range(len(norm))]
        if not self.labels:
            self.labels = [f"v{i}" for i in range(nv)]
        if len(self.tags) != len(norm) or len(self.labels) != nv:
            raise MalformedTripleSystem("tags/labels do not line up with triples/vertices")

    @classmethod
    def plain(cls, n_vertices: int, triples) -> "TripleSystem":
        return cls([Role.CLAUSE] * n_vertices, list(triples))

    @property
    def n_vertices(self) -> int:
        return len(self.roles)

    @property
    def n(self) -> int:
        """Target matching size; only meaningful when 3 divides the vertex count."""
        if self.n_vertices % 3:
            raise MalformedTripleSystem(f"{self.n_vertices} vertices is not a multiple of 3")
        return self.n_vertices // 3

    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for t in self.triples:
            for v in t:
                deg[v] += 1
        return deg

    @property
    def B(self) -> int:
        return max(self.degrees(), default=0)

    def without(self, removed) -> "TripleSystem":
        """Same vertex set, dropping every triple that touches ``removed``."""
        removed = set(removed)
        keep = [i for i, t in enumerate(self.triples) if not removed.intersection(t)]
        return TripleSystem(list(self.roles), [self.triples[i] for i in keep],
                            [self.tags[i] for i in keep], list(self.labels), self.K, self.kind)

    def to_text(self) -> str:
        lines = [f"p 3dm {self.n_vertices} {len(self.triples)}"]
        lines += [" ".join(str(v + 1) for v in t) for t in self.triples]
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {
            "kind": self.kind,
            "K": self.K,
            "roles": [r.value for r in self.roles],
            "labels": self.labels,
            "tags": [list(t) for t in self.tags],
        }


def parse_triple_text(text: str, sidecar: dict | None = None) -> TripleSystem:
    header = None
    triples = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "3dm":
                raise ParseError(f"bad header {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        try:
            tri = tuple(int(p) - 1 for p in parts)
        except ValueError as exc:
            raise ParseError(f"bad triple line {line!r}") from exc
        if len(tri) != 3:
            raise ParseError(f"triple line {line!r} needs 3 vertices")
        triples.append(tri)
    if header is None:
        raise ParseError("missing 'p 3dm' header")
    if header[1] != len(triples):
        raise ParseError(f"header declares {header[1]} triples, found {len(triples)}")
    if sidecar:
        return TripleSystem([Role(r) for r in sidecar["roles"]], triples,
                            [tuple(t) for t in sidecar["tags"]], sidecar["labels"],
                            sidecar.get("K"), sidecar.get("kind", "3dm"))
    return TripleSystem.plain(header[0], triples)


# -- construction -------------------------------------------------------------

def theorem_K(B: int) -> tuple[int, int]:
    """``(p, 4**p)`` for the smallest ``p`` with ``4**p >= 6B + 1/2``."""
    p = 0
    while 2 * 4**p < 12 * B + 1:
        p += 1
    return p, 4**p


def _check_override(k) -> int:
    k = int(k)
    if k < 4 or k & (k - 1) or (k.bit_length() - 1) % 2:
        raise BadOverride(f"K override {k} must be a power of 4 that is at least 4")
    return k


class _Builder:
    def __init__(self):
        self.roles: list[Role] = []
        self.labels: list[str] = []
        self.triples: list[tuple[int, int, int]] = []
        self.tags: list[tuple] = []

    def vertex(self, role: Role, label: str) -> int:
        self.roles.append(role)
        self.labels.append(label)
        return len(self.roles) - 1

    def triple(self, a, b, c, tag) -> int:
        self.triples.append((a, b, c))
        self.tags.append(tag)
        return len(self.triples) - 1

    def system(self, K, kind="3dm") -> TripleSystem:
        return TripleSystem(self.roles, self.triples, self.tags, self.labels, K, kind)


def _emit_variable(bld: _Builder, j: int, beta: int, K: int):
    """Wheels and trees of one variable; returns (roots[b][sign], vertex range, triple range)."""
    v0, t0 = len(bld.roles), len(bld.triples)
    tips = []
    for k in range(K):
        hubs = [bld.vertex(Role.WHEEL_HUB, f"h{j}[{k},{t}]") for t in range(2 * beta)]
        ring = []
        for t in range(2 * beta):
            bar = "" if t % 2 == 0 else "~"
            ring.append(bld.vertex(Role.WHEEL_TIP, f"{bar}v{j}[{k},{t // 2}]"))
        for t in range(2 * beta):
            bld.triple(ring[t], hubs[t], hubs[(t + 1) % (2 * beta)], ("WHEEL", j, k, t))
        tips.append(ring)
    roots = []
    depth = K.bit_length() - 1
    for b in range(beta):
        pair = {}
        for sign in (1, -1):
            ports = [tips[k][2 * b + (0 if sign > 0 else 1)] for k in range(K)]
            for level in range(depth):
                nxt = []
                for pos in range(len(ports) // 2):
                    top = level == depth - 1
                    bar = "" if sign > 0 else "~"
                    node = bld.vertex(Role.ROOT if top else Role.TREE_NODE,
                                      f"{bar}u{j}[{b}]" if top else f"{bar}n{j}[{b},{level},{pos}]")
                    bld.triple(node, ports[2 * pos], ports[2 * pos + 1],
                               ("TREE", j, b, sign, level, pos))
                    nxt.append(node)
                ports = nxt
            pair[sign] = ports[0]
        roots.append(pair)
    return roots, (v0, len(bld.roles)), (t0, len(bld.triples))


def _satisfying_patterns(clause) -> list[tuple[bool, bool, bool]]:
    """Variable values (in clause order) that satisfy the clause, lexicographic."""
    return [a for a in product((False, True), repeat=3)
            if any(val == (lit > 0) for val, lit in zip(a, clause))]


def _emit_clause(bld: _Builder, ci: int, clause, root_of):
    """``root_of(s, value)`` gives the root vertex for literal slot ``s``."""
    v0, t0 = len(bld.roles), len(bld.triples)
    for ai, a in enumerate(_satisfying_patterns(clause)):
        f = [bld.vertex(Role.CLAUSE, f"f{ci}[{ai},{s}]") for s in range(3)]
        r = [root_of(s, a[s]) for s in range(3)]
        bld.triple(f[0], f[1], f[2], ("CLAUSE", ci, ai, 0))
        bld.triple(f[0], r[0], r[1], ("CLAUSE", ci, ai, 1))
        bld.triple(f[1], f[2], r[2], ("CLAUSE", ci, ai, 2))
    return (v0, len(bld.roles)), (t0, len(bld.triples))


def e3sat_to_3dm(psi: CnfFormula, k_override=None):
    for ci, c in enumerate(psi.clauses):
        if len(c) != 3:
            raise NotExactly3SAT(f"clause {ci} has {len(c)} literals")
    occ: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, psi.n_vars + 1)}
    for ci, c in enumerate(psi.clauses):
        for s, lit in enumerate(c):
            occ[abs(lit)].append((ci, s))
    unused = [v for v, o in occ.items() if not o]
    if unused:
        raise UnusedVariable(f"variables {unused} never occur")
    p, K_thm = theorem_K(psi.B)
    K = _check_override(k_override) if k_override is not None else K_thm

    bld = _Builder()
    roots = {}
    slot_occ = {}
    var_vertices, var_triples = {}, {}
    for j in range(1, psi.n_vars + 1):
        roots[j], var_vertices[j], var_triples[j] = _emit_variable(bld, j, len(occ[j]), K)
        for b, (ci, s) in enumerate(occ[j]):
            slot_occ[(ci, s)] = (j, b)
    clause_vertices, clause_triples = {}, {}
    for ci, c in enumerate(psi.clauses):
        def root_of(s, value, ci=ci):
            j, b = slot_occ[(ci, s)]
            return roots[j][b][1 if value else -1]
        clause_vertices[ci], clause_triples[ci] = _emit_clause(bld, ci, c, root_of)

    ts = bld.system(K)
    m = psi.m
    prov = ReductionProvenance(stage="e3sat_to_3dm")
    prov.maps.update({
        "variable_to_vertices": var_vertices,
        "variable_to_triples": var_triples,
        "clause_to_vertices": clause_vertices,
        "clause_to_triples": clause_triples,
        "roots": {j: [[r[1], r[-1]] for r in rs] for j, rs in roots.items()},
    })
    prov.constants.update({
        "K": K, "K_formula": "2^(2p), p = ceil(log2(6B + 1/2) / 2)",
        "p": p, "K_theorem": K_thm, "k_override": k_override,
        "B_in": psi.B, "B_out": ts.B, "m": m,
        "expected_vertices": (18 * K + 15) * m,
        "expected_triples": (12 * K + 15) * m,
        "expected_matching": (6 * K + 5) * m,
        "s1": "s'/(3 (6K+5) B')", "gamma1": "(gamma' + 3(1 - zeta))/B (symbolic)",
    })
    if k_override is not None and K != K_thm:
        prov.notes.append(f"K overridden to {K}; stability constants assume K={K_thm}")
    return ts, prov


def canonical_matching(ts: TripleSystem, psi: CnfFormula, assignment) -> list[int]:
    """Triple indices of the perfect matching encoding a satisfying assignment."""
    if not psi.satisfied_by(assignment):
        raise ValueError("assignment does not satisfy the formula")
    pattern = {ci: tuple(bool(assignment[abs(l) - 1]) for l in c) for ci, c in enumerate(psi.clauses)}
    chosen = []
    for i, tag in enumerate(ts.tags):
        kind = tag[0]
        if kind == "WHEEL":
            _, j, _, t = tag
            if t % 2 == (1 if assignment[j - 1] else 0):
                chosen.append(i)
        elif kind == "TREE":
            _, j, _, sign, level, _ = tag
            tips_free = (sign > 0) == bool(assignment[j - 1])
            if level % 2 == (0 if tips_free else 1):
                chosen.append(i)
        elif kind == "CLAUSE":
            _, ci, ai, slot = tag
            hit = _satisfying_patterns(psi.clauses[ci])[ai] == pattern[ci]
            if (slot > 0) == hit:
                chosen.append(i)
    return chosen


def variable_gadget(beta: int, K: int = 4) -> TripleSystem:
    """Wheels and trees of a single variable with ``beta`` occurrences, nothing else."""
    K = _check_override(K)
    bld = _Builder()
    _emit_variable(bld, 1, beta, K)
    return bld.system(K)


def variable_canonical(ts: TripleSystem, value: bool) -> list[int]:
    """Canonical matching of :func:`variable_gadget` for one truth value."""
    chosen = []
    for i, tag in enumerate(ts.tags):
        if tag[0] == "WHEEL" and tag[3] % 2 == (1 if value else 0):
            chosen.append(i)
        elif tag[0] == "TREE":
            tips_free = (tag[3] > 0) == value
            if tag[4] % 2 == (0 if tips_free else 1):
                chosen.append(i)
    return chosen


def isolated_clause_gadget(clause=(1, 2, 3)):
    """One clause's 21 gadget triples plus its 6 root vertices.

    Returns the system and ``roots[(slot, value)] -> vertex``.
    """
    if len(clause) != 3 or len({abs(l) for l in clause}) != 3:
        raise NotExactly3SAT("need 3 literals over distinct variables")
    bld = _Builder()
    roots = {}
    for s in range(3):
        for value in (True, False):
            bar = "" if value else "~"
            roots[(s, value)] = bld.vertex(Role.ROOT, f"{bar}u[{s}]")
    _emit_clause(bld, 0, clause, lambda s, value: roots[(s, value)])
    return bld.system(None), roots


def tdm_to_cbt(ts: TripleSystem) -> TripleSystem:
    """Identity on the triples; only the interpretation changes."""
    return TripleSystem(list(ts.roles), list(ts.triples), list(ts.tags), list(ts.labels), ts.K, "cbt")


def cbt_provenance(prov: ReductionProvenance | None = None) -> ReductionProvenance:
    p = ReductionProvenance(stage="tdm_to_cbt", previous=prov.stages() if prov else [])
    p.maps["triple_identity"] = True
    p.constants.update({"s2": "s1/(3*s1 + 4)", "gamma2": "gamma1/3"})
    return p


def dump_sidecar(ts: TripleSystem, prov: ReductionProvenance | None = None) -> str:
    obj = ts.sidecar()
    if prov is not None:
        obj["provenance"] = prov.to_json()
    return json.dumps(obj, sort_keys=True)
