"""Exhaustive ground truth for small instances.

The stability certifier compares the base optimum ``O`` against every other
k-subset ``S`` under the adversary's best admissible stretch.  Costs depend
only on centre/point distances and separate over points.  For a fixed point,
centres only in ``S`` stay at base length and centres only in ``O`` are
stretched fully.  The shared centres enter both minima through their own
minimum ``m``, which can take any value between the smallest base length and
that length stretched.  The per-point gap ``min(A, m) - min(B, m)`` is
monotone in ``m``, so checking the two endpoints gives the exact worst case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, InvalidAlpha
from .local_search import SearchTrace
from .metric import (
    MetricInstance,
    Objective,
    Solution,
    assign,
    check_solution,
    cost,
    cost_to_json,
    distance_value,
)
from .roots import RootSum

DEFAULT_BUDGET = 250_000


def _enumeration_size(instance: MetricInstance) -> int:
    return math.comb(instance.n_centres, instance.k)


def all_solutions(instance: MetricInstance, budget: int = DEFAULT_BUDGET):
    size = _enumeration_size(instance)
    if size > budget:
        raise BudgetExceeded(f"{size} solutions exceed enumeration budget {budget}")
    return (Solution(c) for c in combinations(range(instance.n_centres), instance.k))


def brute_force_optimum(instance: MetricInstance, budget: int = DEFAULT_BUDGET):
    """Every minimiser over all k-subsets and the minimum cost."""
    best = None
    optima: list[Solution] = []
    for S in all_solutions(instance, budget):
        c = cost(instance, S)
        if best is None or c < best:
            best, optima = c, [S]
        elif c == best:
            optima.append(S)
    return optima, best


def psi(instance: MetricInstance, S, O):
    """Cost of points served by ``S - O`` in ``S`` and by ``O - S`` in ``O``, both sides."""
    S, O = Solution.of(S), Solution.of(O)
    sS, sO = assign(instance, S), assign(instance, O)
    only_S = set(S) - set(O)
    only_O = set(O) - set(S)
    total = 0
    for j in range(instance.n_points):
        a, b = sS[j], sO[j]
        if a in only_S and b in only_O:
            total = distance_value(instance, a, j) + distance_value(instance, b, j) + total
    return total


def is_nearly_good(instance: MetricInstance, S, O, eps) -> bool:
    eps = Fraction(eps)
    return cost(instance, S) <= cost(instance, O) + 2 * eps * psi(instance, S, O)


def eps_from_eps_prime(eps_prime) -> Fraction:
    """The ``eps`` with ``1 + 6 eps = (1 + eps_prime)**2``."""
    e = Fraction(eps_prime)
    if e < 0:
        raise ValueError("eps_prime must be nonnegative")
    return ((1 + e) ** 2 - 1) / 6


def annotate_nearly_good(instance: MetricInstance, trace: SearchTrace, O, eps) -> SearchTrace:
    for t, (S, _) in enumerate(trace.iterates):
        if is_nearly_good(instance, S, O, eps):
            trace.first_nearly_good_index = t
            break
    return trace


# -- certifier ---------------------------------------------------------------

@dataclass
class StabilityReport:
    alpha: Fraction
    stable: bool
    unique_optimum: Solution | None = None
    optimum_cost: object = None
    violating_solution: Solution | None = None
    violating_margin: object = None
    # sparse (centre, point) pairs stretched by alpha in the witness
    witness: list[tuple[int, int]] = field(default_factory=list)
    solutions_checked: int = 0
    min_margin: object = None
    tightest_solution: Solution | None = None
    n_optima: int = 0

    def to_json(self) -> dict:
        def sol(x):
            return None if x is None else x.to_json()

        def val(x):
            return None if x is None else cost_to_json(x)

        return {
            "alpha": str(self.alpha),
            "stable": self.stable,
            "unique_optimum": sol(self.unique_optimum),
            "n_optima": self.n_optima,
            "optimum_cost": val(self.optimum_cost),
            "violating_solution": sol(self.violating_solution),
            "violating_margin": val(self.violating_margin),
            "witness_stretched_pairs": [list(p) for p in self.witness],
            "solutions_checked": self.solutions_checked,
            "min_margin": val(self.min_margin),
            "tightest_solution": sol(self.tightest_solution),
        }


def _check_alpha(alpha) -> Fraction:
    a = Fraction(alpha)
    if a <= 1:
        raise InvalidAlpha(f"alpha={a} must exceed 1")
    return a


class _Lengths:
    """Per-pair base and fully stretched contributions, scaled to stay exact.

    ``lo[i][j] / den`` is the base contribution and ``hi[i][j] / den`` the
    stretched one.
    """

    def __init__(self, instance: MetricInstance, alpha: Fraction):
        if instance.objective is Objective.MEANS:
            f = alpha * alpha
            lo_m, hi_m = f.denominator, f.numerator
            self.lo = [[lo_m * d for d in row] for row in instance.sqdist]
            self.hi = [[hi_m * d for d in row] for row in instance.sqdist]
            self.den = lo_m
        else:
            lo_m, hi_m = alpha.denominator, alpha.numerator
            self.lo = [[RootSum.sqrt(d, lo_m) for d in row] for row in instance.sqdist]
            self.hi = [[RootSum.sqrt(d, hi_m) for d in row] for row in instance.sqdist]
            self.den = lo_m


def _point_gap(L: _Lengths, j: int, only_S, only_O, shared):
    """Smallest per-point ``cost'(S) - cost'(O)`` and whether shared centres stretch."""
    A = min((L.lo[i][j] for i in only_S), default=None)
    B = min((L.hi[i][j] for i in only_O), default=None)
    if not shared:
        return A - B, False
    i0 = min(shared, key=lambda i: (L.lo[i][j], i))
    best = None
    for stretched, m in ((False, L.lo[i0][j]), (True, L.hi[i0][j])):
        a = m if A is None or m < A else A
        b = m if B is None or m < B else B
        g = a - b
        if best is None or g < best[0]:
            best = (g, stretched)
    return best


def extremal_margin(instance: MetricInstance, S, O, alpha, _lengths=None):
    """``min over admissible stretches of cost'(S) - cost'(O)`` and its witness."""
    alpha = _check_alpha(alpha)
    L = _lengths or _Lengths(instance, alpha)
    S, O = Solution.of(S), Solution.of(O)
    only_S = [i for i in S if i not in O]
    only_O = [i for i in O if i not in S]
    shared = [i for i in S if i in O]
    total = 0
    witness = []
    for j in range(instance.n_points):
        g, stretch_shared = _point_gap(L, j, only_S, only_O, shared)
        total = g + total
        for i in only_O:
            witness.append((i, j))
        if stretch_shared:
            for i in shared:
                witness.append((i, j))
    witness.sort()
    if isinstance(total, int):
        total = Fraction(total, L.den)
    else:
        total = total * Fraction(1, L.den)
    return total, witness


def certify_stability(instance: MetricInstance, alpha, budget: int = DEFAULT_BUDGET,
                      exhaustive: bool = False) -> StabilityReport:
    """Exact alpha-stability verdict by enumeration of all k-subsets.

    Ties count as violations.  The first violating solution in lexicographic
    order is reported; with ``exhaustive`` the scan continues to find the
    smallest margin overall.
    """
    alpha = _check_alpha(alpha)
    optima, best = brute_force_optimum(instance, budget)
    report = StabilityReport(alpha=alpha, stable=False, optimum_cost=best, n_optima=len(optima))
    if len(optima) != 1:
        return report
    O = optima[0]
    report.unique_optimum = O
    L = _Lengths(instance, alpha)
    checked = 0
    for S in all_solutions(instance, budget):
        if S == O:
            continue
        checked += 1
        margin, witness = extremal_margin(instance, S, O, alpha, _lengths=L)
        if report.min_margin is None or margin < report.min_margin:
            report.min_margin, report.tightest_solution = margin, S
        if margin <= 0 and report.violating_solution is None:
            report.violating_solution = S
            report.violating_margin = margin
            report.witness = witness
            if not exhaustive:
                break
    report.solutions_checked = checked
    report.stable = report.violating_solution is None
    return report


def perturbed_cost(instance: MetricInstance, S, alpha, stretched) -> object:
    """Exact cost of ``S`` when the listed (centre, point) pairs are stretched by ``alpha``."""
    alpha = Fraction(alpha)
    stretched = set(map(tuple, stretched))
    total = 0
    for j in range(instance.n_points):
        vals = []
        for i in Solution.of(S):
            v = distance_value(instance, i, j)
            if (i, j) in stretched:
                v = v * (alpha * alpha if instance.objective is Objective.MEANS else alpha)
            vals.append(v)
        total = min(vals) + total
    return total


def replay_witness(instance: MetricInstance, report: StabilityReport) -> bool:
    """True iff the witness makes the violating solution no worse than the optimum."""
    if report.violating_solution is None:
        return False
    a = perturbed_cost(instance, report.violating_solution, report.alpha, report.witness)
    b = perturbed_cost(instance, report.unique_optimum, report.alpha, report.witness)
    return a <= b


# -- sampling cross-check -----------------------------------------------------

_SAMPLE_BITS = 20


def _exact_factor_cost(instance, S, alpha, u_table):
    """Exact cost with per-pair factor ``1 + (alpha-1) u / 2**bits``."""
    step = (alpha - 1) / (1 << _SAMPLE_BITS)
    total = 0
    for j in range(instance.n_points):
        best = None
        for i in S:
            f = 1 + step * int(u_table[i, j])
            if instance.objective is Objective.MEANS:
                v = f * f * instance.sqdist[i][j]
            else:
                v = RootSum.sqrt(instance.sqdist[i][j], f)
            if best is None or v < best:
                best = v
        total = best + total
    return total


def sample_perturbation_costs(instance: MetricInstance, alpha, trials: int, seed: int,
                              budget: int = DEFAULT_BUDGET, chunk: int | None = None):
    """Yield ``(u_tables, solutions, float_costs)`` for batches of random stretches.

    Factors are dyadic rationals in ``[1, alpha]`` so any sample can be
    re-evaluated exactly from its integer table ``u``.
    """
    alpha = Fraction(alpha)
    sols = list(all_solutions(instance, budget))
    idx = np.array([s.centre_indices for s in sols], dtype=np.intp)
    base = np.array(instance.sqdist, dtype=np.float64)
    if instance.objective is Objective.MEDIAN:
        base = np.sqrt(base)
    rng = np.random.Generator(np.random.PCG64(seed))
    per = idx.size * instance.n_points
    chunk = chunk or max(1, min(trials, 4_000_000 // max(per, 1)))
    done = 0
    a1 = float(alpha - 1)
    while done < trials:
        t = min(chunk, trials - done)
        u = rng.integers(0, (1 << _SAMPLE_BITS) + 1, size=(t,) + base.shape, dtype=np.int64)
        f = 1.0 + a1 * (u / float(1 << _SAMPLE_BITS))
        if instance.objective is Objective.MEANS:
            f = f * f
        P = base[None, :, :] * f
        costs = P[:, idx, :].min(axis=2).sum(axis=2)
        yield u, sols, costs
        done += t


def sample_perturbation_check(instance: MetricInstance, alpha, trials: int, seed: int,
                              optimum=None, budget: int = DEFAULT_BUDGET) -> bool:
    """Falsification only: True iff the optimum stays strictly best on every sample.

    Float costs screen the samples; anything within rounding distance of a
    tie is decided exactly.
    """
    if trials <= 0:
        return True
    alpha = Fraction(alpha)
    if optimum is None:
        optima, _ = brute_force_optimum(instance, budget)
        if len(optima) != 1:
            return False
        optimum = optima[0]
    O = check_solution(instance, optimum)
    for u, sols, costs in sample_perturbation_costs(instance, alpha, trials, seed, budget):
        o = sols.index(O)
        co = costs[:, o]
        tol = 1e-9 * max(1.0, float(np.abs(costs).max()))
        close = costs <= co[:, None] + tol
        close[:, o] = False
        for t, s in zip(*np.nonzero(close)):
            exact_o = _exact_factor_cost(instance, O, alpha, u[t])
            exact_s = _exact_factor_cost(instance, sols[s], alpha, u[t])
            if exact_s <= exact_o:
                return False
    return True
