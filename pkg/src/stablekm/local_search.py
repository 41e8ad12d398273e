"""Best-improvement multi-swap local search.

``run_local_search`` always moves to the cheapest solution within ``rho``
swaps of the current one and stops only when nothing is strictly cheaper.
``run_generic`` is the fixed-iteration engine for any problem that exposes a
cost and a neighbourhood; its iteration count is chosen so that the
approximation ratio of a locality analysis holds with no epsilon loss.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Protocol

from .errors import InvalidConfig, RhoOutOfRange
from .metric import MetricInstance, Solution, check_solution, cost, cost_to_json, delta_max


@dataclass
class SearchTrace:
    iterates: list[tuple[Solution, object]]
    terminated_locally_optimal: bool = False
    iteration_cap_hit: bool = False
    first_nearly_good_index: int | None = None

    @property
    def final(self) -> tuple[Solution, object]:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    def to_json(self) -> list[dict]:
        return [
            {"iteration": t, "centre_indices": S.to_json(), "cost": cost_to_json(c)}
            for t, (S, c) in enumerate(self.iterates)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "cost"])
        for t, (_, c) in enumerate(self.iterates):
            w.writerow([t, float(c) if not isinstance(c, int) else c])
        return buf.getvalue()


def neighborhood(instance: MetricInstance, S, rho: int) -> Iterator[Solution]:
    """All k-subsets within ``rho`` swaps of ``S`` (``S`` included), in sorted order."""
    S = check_solution(instance, S)
    k = instance.k
    if not 1 <= rho <= k:
        raise RhoOutOfRange(f"rho={rho} outside 1..{k}")
    inside = S.centre_indices
    outside = [i for i in range(instance.n_centres) if i not in set(inside)]
    found = [inside]
    for r in range(1, rho + 1):
        for out in combinations(inside, r):
            keep = [i for i in inside if i not in out]
            for add in combinations(outside, r):
                found.append(tuple(sorted(keep + list(add))))
    found.sort()
    return (Solution(t) for t in found)


def _argmin(pairs: Iterable[tuple[Solution, object]]):
    best = None
    for S, c in pairs:
        if best is None or c < best[1] or (c == best[1] and S < best[0]):
            best = (S, c)
    return best


def best_swap(instance: MetricInstance, S, rho: int, threads: int = 1):
    """Cheapest solution within ``rho`` swaps; ``S`` itself unless strictly beaten.

    Equal-cost minima resolve to the lexicographically smallest index tuple,
    which keeps the result independent of how the costs were evaluated.
    """
    S = check_solution(instance, S)
    cands = list(neighborhood(instance, S, rho))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            costs = list(pool.map(lambda T: cost(instance, T), cands, chunksize=16))
    else:
        costs = [cost(instance, T) for T in cands]
    here = costs[cands.index(S)]
    T, c = _argmin(zip(cands, costs))
    if c < here:
        return T, c
    return S, here


def run_local_search(instance: MetricInstance, rho: int, start, cap: int | None = None,
                     threads: int = 1) -> SearchTrace:
    S = check_solution(instance, start)
    if not 1 <= rho <= instance.k:
        raise RhoOutOfRange(f"rho={rho} outside 1..{instance.k}")
    trace = SearchTrace([(S, cost(instance, S))])
    while True:
        if cap is not None and trace.iterations >= cap:
            trace.iteration_cap_hit = True
            break
        T, c = best_swap(instance, S, rho, threads=threads)
        if T == S:
            trace.terminated_locally_optimal = True
            break
        trace.iterates.append((T, c))
        S = T
    return trace


def iteration_bound(instance: MetricInstance) -> int:
    """``ceil(2k ln(n * Delta))``, or 0 when every distance is zero."""
    d = delta_max(instance)
    if d < 1:
        return 0
    x = instance.n_points * d
    return max(0, math.ceil(2 * instance.k * math.log(x)))


def first_k_centres(instance: MetricInstance) -> Solution:
    return Solution(tuple(range(instance.k)))


def run_truncated(instance: MetricInstance, rho: int = 2, threads: int = 1):
    trace = run_truncated_trace(instance, rho, threads=threads)
    return trace.final


def run_truncated_trace(instance: MetricInstance, rho: int = 2, threads: int = 1) -> SearchTrace:
    return run_local_search(instance, rho, first_k_centres(instance),
                            cap=iteration_bound(instance), threads=threads)


# -- generic engine ----------------------------------------------------------

class ProblemAdapter(Protocol):
    def cost(self, solution): ...

    def neighbors(self, solution) -> Iterable: ...


@dataclass(frozen=True)
class GenericLSConfig:
    alpha: Fraction
    beta: Fraction
    kappa: int
    delta_bound: int
    M: int = field(default=0)

    def __post_init__(self):
        a, b = Fraction(self.alpha), Fraction(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        lcm = math.lcm(a.denominator, b.denominator)
        if self.M == 0:
            object.__setattr__(self, "M", lcm)
        if a < 1:
            raise InvalidConfig(f"alpha={a} must be >= 1")
        if not 0 < b <= 1:
            raise InvalidConfig(f"beta={b} must lie in (0, 1]")
        if self.kappa < 1:
            raise InvalidConfig("kappa must be a positive integer")
        if self.M < 1 or self.M % lcm:
            raise InvalidConfig(f"M={self.M} is not a multiple of denominators of alpha, beta")
        if self.delta_bound < 0:
            raise InvalidConfig("delta_bound must be nonnegative")

    def iterations(self) -> int:
        """Iteration count meeting both the stated formula and the decay argument.

        The decay argument needs ``(1 - beta/kappa)**K * Delta < 1/M``, which
        ``K >= (kappa/beta) ln(Delta M)`` guarantees.
        """
        kb = float(Fraction(self.kappa) / self.beta)
        dm = self.delta_bound * self.M
        by_decay = math.ceil(kb * math.log(dm)) if dm > 1 else 0
        by_header = math.ceil(kb * math.log(self.delta_bound) * self.M) if self.delta_bound > 1 else 0
        return max(by_decay, by_header)


@dataclass
class GenericResult:
    solution: object
    cost: object
    iterations_run: int
    iterations_budget: int


def run_generic(adapter: ProblemAdapter, config: GenericLSConfig, start,
                key: Callable = lambda s: s) -> GenericResult:
    """Take the cheapest neighbour for a fixed number of rounds.

    Staying put wins ties, so a round that returns the current solution is a
    fixed point and the remaining rounds are skipped.
    """
    budget = config.iterations()
    S = start
    c = adapter.cost(S)
    t = 0
    while t < budget:
        best_S, best_c = S, c
        for T in adapter.neighbors(S):
            cT = adapter.cost(T)
            if cT < best_c or (cT == best_c and best_S is not S and key(T) < key(best_S)):
                best_S, best_c = T, cT
        t += 1
        if best_S is S:
            break
        S, c = best_S, best_c
    return GenericResult(S, c, t, budget)


class SwapAdapter:
    """Single- or multi-swap neighbourhood on a metric instance."""

    def __init__(self, instance: MetricInstance, rho: int = 1):
        self.instance = instance
        self.rho = rho

    def cost(self, S):
        return cost(self.instance, S)

    def neighbors(self, S):
        return neighborhood(self.instance, S, self.rho)

    def delta_bound(self) -> int:
        """Integer upper bound on any solution's (scaled) cost."""
        d = delta_max(self.instance)
        n = self.instance.n_points
        if self.instance.objective.value == "kmeans":
            return n * d
        r = math.isqrt(d)
        return n * (r if r * r == d else r + 1)


def kmedian_swap_config(instance: MetricInstance) -> GenericLSConfig:
    """Single-swap k-median setting: alpha=5, beta=1, kappa=k."""
    return GenericLSConfig(alpha=Fraction(5), beta=Fraction(1), kappa=instance.k,
                           delta_bound=SwapAdapter(instance).delta_bound())
