"""Covering-by-triples to Euclidean k-means, and the composed chain."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import MalformedTripleSystem
from ..metric import MetricInstance, Objective, table_instance
from .cnf import CnfFormula
from .provenance import ReductionProvenance
from .sat import qsat_to_e3sat
from .tdm import TripleSystem, cbt_provenance, e3sat_to_3dm, tdm_to_cbt

COVERED, UNCOVERED = 2, 4


def cbt_to_kmeans(ts: TripleSystem, prov: ReductionProvenance | None = None):
    """Points are basis vectors ``e_j``; each triple ``{a,b,c}`` becomes ``e_a+e_b+e_c``.

    The coordinates live in ``3n`` dimensions, so the instance is emitted as
    its squared-distance table (2 inside the triple, 4 outside).
    """
    if not ts.triples:
        raise MalformedTripleSystem("no triples to turn into centres")
    n = ts.n
    table = []
    for t in ts.triples:
        row = [UNCOVERED] * ts.n_vertices
        for v in t:
            row[v] = COVERED
        table.append(row)
    inst = table_instance(table, k=n, objective=Objective.MEANS)
    p = ReductionProvenance(stage="cbt_to_kmeans", previous=prov.stages() if prov else [])
    p.maps["centre_to_triple"] = "identity"
    p.maps["point_to_vertex"] = "identity"
    p.constants.update({
        "n": n, "k": n, "points": ts.n_vertices, "centres": len(ts.triples),
        "yes_cost": 6 * n, "no_cost_lower": "12n - 2(1 - gamma3)3n",
        "eps0": "min{(6 s2 - s3)/(6(1 + s2)), gamma2 - gamma3} (s3, gamma3 unfixed)",
    })
    return inst, p


def kmeans_coordinates(ts: TripleSystem) -> tuple[list[list[int]], list[list[int]]]:
    dim = ts.n_vertices
    points = [[int(i == j) for i in range(dim)] for j in range(dim)]
    centres = [[int(i in t) for i in range(dim)] for t in ts.triples]
    return points, centres


def cover_cost(n: int, covered: int) -> int:
    """Cost of ``n`` centres covering ``covered`` of the ``3n`` points."""
    return COVERED * covered + UNCOVERED * (3 * n - covered)


@dataclass
class ChainArtifacts:
    phi: CnfFormula
    psi: CnfFormula
    ts: TripleSystem
    instance: MetricInstance
    provenance: ReductionProvenance


def build_chain(phi: CnfFormula, k_override=None) -> ChainArtifacts:
    """All four stages, keeping every intermediate artifact."""
    psi, p1 = qsat_to_e3sat(phi)
    ts, p2 = e3sat_to_3dm(psi, k_override)
    p2.previous = p1.stages()
    inst, p4 = cbt_to_kmeans(tdm_to_cbt(ts), cbt_provenance(p2))
    return ChainArtifacts(phi, psi, ts, inst, p4)


def full_chain(phi: CnfFormula, k_override=None):
    ch = build_chain(phi, k_override)
    return ch.instance, ch.provenance
