"""A stable formula whose consistency-gadget image is not stable."""

from __future__ import annotations

from .cnf import CnfFormula


def phi_family(n: int) -> CnfFormula:
    """Variable 1 is ``z``, variable ``i + 1`` is ``x_i``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    z = 1
    clauses = [(z, -(i + 1)) for i in range(1, n + 1)]
    clauses += [(-(i + 1),) for i in range(1, n + 1)]
    clauses.append((-z,))
    return CnfFormula(n + 1, tuple(clauses))


def split_occurrences(phi: CnfFormula) -> tuple[CnfFormula, dict[int, list[int]]]:
    """Give every occurrence its own copy and tie the copies of a variable together.

    Copies are joined along a cycle (a single edge for two copies) by the
    equality pair ``(a | ~b)``, ``(~a | b)``.
    """
    copies: dict[int, list[int]] = {v: [] for v in range(1, phi.n_vars + 1)}
    out = []
    nxt = 0
    for c in phi.clauses:
        new = []
        for lit in c:
            nxt += 1
            copies[abs(lit)].append(nxt)
            new.append(nxt if lit > 0 else -nxt)
        out.append(tuple(new))
    for v, cs in copies.items():
        if len(cs) == 2:
            edges = [(cs[0], cs[1])]
        elif len(cs) > 2:
            edges = [(cs[i], cs[(i + 1) % len(cs)]) for i in range(len(cs))]
        else:
            edges = []
        for a, b in edges:
            out += [(a, -b), (-a, b)]
    return CnfFormula(nxt, tuple(out)), copies


def appendix_d_family(n: int) -> tuple[CnfFormula, CnfFormula]:
    phi = phi_family(n)
    psi, _ = split_occurrences(phi)
    return phi, psi
