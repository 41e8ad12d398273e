"""CNF formulas with DIMACS-style signed literals (variables are 1-based)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from ..errors import ParseError, RepeatedVariable


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cl = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", cl)
        for c in cl:
            vs = [abs(l) for l in c]
            if 0 in vs:
                raise ParseError("literal 0 is not a variable")
            if len(set(vs)) != len(vs):
                raise RepeatedVariable(f"clause {c} repeats a variable")
            if vs and max(vs) > self.n_vars:
                raise ParseError(f"clause {c} uses a variable beyond n_vars={self.n_vars}")

    @classmethod
    def of(cls, clauses: Iterable[Iterable[int]], n_vars: int | None = None) -> "CnfFormula":
        cl = tuple(tuple(c) for c in clauses)
        if n_vars is None:
            n_vars = max((abs(l) for c in cl for l in c), default=0)
        return cls(n_vars, cl)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> Counter:
        """Clauses containing each variable in either sign."""
        return Counter(abs(l) for c in self.clauses for l in c)

    @property
    def B(self) -> int:
        return max(self.occurrences().values(), default=0)

    @property
    def Q(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def satisfied_by(self, assignment) -> bool:
        """``assignment[v-1]`` is the value of variable ``v``."""
        return all(any((l > 0) == bool(assignment[abs(l) - 1]) for l in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {self.m}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    n_vars = None
    declared = None
    clauses: list[list[int]] = []
    cur: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad problem line: {line!r}")
            try:
                n_vars, declared = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise ParseError(f"bad problem line: {line!r}") from exc
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise ParseError(f"bad literal {tok!r}") from exc
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    if n_vars is None:
        raise ParseError("missing 'p cnf' header")
    if declared is not None and declared != len(clauses):
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(n_vars, tuple(tuple(c) for c in clauses))
