"""Bounded-width CNF to exactly-3-literal CNF, preserving the solution count."""

from __future__ import annotations

from math import comb

from ..errors import EmptyClause, RepeatedVariable
from .cnf import CnfFormula
from .provenance import ReductionProvenance


def f_gadget(l1: int, l2: int, l3: int) -> list[tuple[int, int, int]]:
    """Seven 3-clauses satisfied only when all three literals are false."""
    if len({abs(l1), abs(l2), abs(l3)}) != 3:
        raise RepeatedVariable(f"F-gadget literals {l1}, {l2}, {l3} must use distinct variables")
    return [
        (-l1, l2, l3),
        (-l1, l2, -l3),
        (-l1, -l2, l3),
        (-l1, -l2, -l3),
        (l1, -l2, l3),
        (l1, -l2, -l3),
        (l1, l2, -l3),
    ]


def clause_gadget_sizes(width: int) -> tuple[int, int]:
    """(fresh variables, output clauses) generated for one clause of this width."""
    if width == 1:
        return 2, 7
    if width == 2:
        return 3, 8
    if width == 3:
        return 0, 1
    return width + 2, 2 * width + comb(width, 2) + 7


def qsat_to_e3sat(phi: CnfFormula):
    """Pad or split every clause into exactly-3-literal clauses.

    Original variables keep their indices; fresh variables follow, grouped by
    source clause.  Satisfying assignments of the input extend uniquely.
    """
    next_var = phi.n_vars + 1
    out: list[tuple[int, ...]] = []
    clause_ranges = []
    fresh_ranges = []

    def fresh(n):
        nonlocal next_var
        vs = list(range(next_var, next_var + n))
        next_var += n
        return vs

    for ci, C in enumerate(phi.clauses):
        L = len(C)
        if L == 0:
            raise EmptyClause(f"clause {ci} is empty")
        start_clause, start_var = len(out), next_var
        if L == 1:
            y, z = fresh(2)
            out += f_gadget(-C[0], y, z)
        elif L == 2:
            w, y, z = fresh(3)
            out.append((C[0], C[1], w))
            out += f_gadget(w, y, z)
        elif L == 3:
            out.append(tuple(C))
        else:
            ys = fresh(L + 1)
            (z,) = fresh(1)
            for i in range(1, L + 1):
                out.append((ys[i - 1], C[i - 1], -ys[i]))
            for i in range(1, L + 1):
                out.append((-ys[i - 1], ys[i], z))
            for i in range(1, L + 1):
                for j in range(i + 1, L + 1):
                    out.append((-C[i - 1], ys[j - 1], z))
            out += f_gadget(ys[0], -ys[L], z)
        clause_ranges.append((start_clause, len(out)))
        fresh_ranges.append((start_var, next_var))

    psi = CnfFormula(next_var - 1, tuple(out))
    B, Q = phi.B, phi.Q
    prov = ReductionProvenance(stage="qsat_to_e3sat")
    prov.maps["variable"] = {v: v for v in range(1, phi.n_vars + 1)}
    prov.maps["clause_to_output_clauses"] = {i: r for i, r in enumerate(clause_ranges)}
    prov.maps["clause_to_fresh_variables"] = {i: r for i, r in enumerate(fresh_ranges)}
    prov.constants.update({
        "B": B,
        "Q": Q,
        "B_prime": max(7 * B, 4 * B * Q * Q),
        "s_prime": f"s/(8*B*B'*Q^2) = s/{8 * B * max(7 * B, 4 * B * Q * Q) * Q * Q}",
        "gamma_prime": "symbolic (no closed form is given for it)",
    })
    return psi, prov
