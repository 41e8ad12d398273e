"""Exact discrete k-means / k-median instances.

Coordinates are rationals.  At construction every coordinate is multiplied by
the LCM of all denominators, so the stored squared distances are exact
integers.  Centre/point distances are the only quantities any cost depends on;
the table ``sqdist[i][j]`` holds the scaled squared distance from centre ``i``
to point ``j``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import DimensionMismatch, KOutOfRange, ParseError
from .roots import RootSum


class Objective(enum.Enum):
    MEANS = "kmeans"
    MEDIAN = "kmedian"


@dataclass(frozen=True)
class Solution:
    """A sorted tuple of distinct centre indices."""

    centre_indices: tuple[int, ...]

    @classmethod
    def of(cls, indices: Iterable[int]) -> "Solution":
        if isinstance(indices, Solution):
            return indices
        idx = tuple(sorted(int(i) for i in indices))
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated centre index in {idx}")
        return cls(idx)

    def __iter__(self):
        return iter(self.centre_indices)

    def __len__(self):
        return len(self.centre_indices)

    def __contains__(self, i):
        return i in self.centre_indices

    def __lt__(self, other):
        return self.centre_indices < other.centre_indices

    def to_json(self):
        return list(self.centre_indices)


@dataclass(frozen=True)
class Assignment:
    sigma: tuple[int, ...]

    def __getitem__(self, j):
        return self.sigma[j]


@dataclass(frozen=True)
class MetricInstance:
    sqdist: tuple[tuple[int, ...], ...]
    k: int
    objective: Objective = Objective.MEANS
    points: tuple[tuple[Fraction, ...], ...] | None = None
    centres: tuple[tuple[Fraction, ...], ...] | None = None
    scale: int = 1
    dim: int | None = None
    warnings: tuple[str, ...] = ()
    # per-point rows of sqdist, indexed [point][centre]
    columns: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.sqdist or not self.sqdist[0]:
            raise ValueError("instance needs at least one centre and one point")
        width = len(self.sqdist[0])
        if any(len(row) != width for row in self.sqdist):
            raise DimensionMismatch("ragged distance table")
        if any(v < 0 for row in self.sqdist for v in row):
            raise ValueError("squared distances must be nonnegative")
        if not 1 <= self.k <= len(self.sqdist):
            raise KOutOfRange(f"k={self.k} outside 1..{len(self.sqdist)}")
        object.__setattr__(self, "columns", tuple(zip(*self.sqdist)))

    @property
    def n_points(self) -> int:
        return len(self.columns)

    @property
    def n_centres(self) -> int:
        return len(self.sqdist)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats are exact binary rationals; callers wanting decimals pass strings
        return Fraction(x)
    try:
        return Fraction(x)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"not a rational coordinate: {x!r}") from exc


def build_instance(points, centres, k: int, objective=Objective.MEANS) -> MetricInstance:
    """Build an instance from rational coordinates.

    The scale is the LCM of all coordinate denominators; distances are
    computed on the scaled integer coordinates and are therefore exact.
    """
    pts = tuple(tuple(_frac(x) for x in p) for p in points)
    cts = tuple(tuple(_frac(x) for x in c) for c in centres)
    if not pts or not cts:
        raise ValueError("points and centres must be nonempty")
    dims = {len(p) for p in pts} | {len(c) for c in cts}
    if len(dims) != 1:
        raise DimensionMismatch(f"coordinate vectors have dimensions {sorted(dims)}")
    if not 1 <= k <= len(cts):
        raise KOutOfRange(f"k={k} outside 1..{len(cts)}")
    objective = Objective(objective)
    scale = 1
    for v in pts + cts:
        for x in v:
            scale = math.lcm(scale, x.denominator)
    ip = [[int(x * scale) for x in p] for p in pts]
    ic = [[int(x * scale) for x in c] for c in cts]
    table = tuple(
        tuple(sum((a - b) * (a - b) for a, b in zip(c, p)) for p in ip) for c in ic
    )
    warnings = ()
    dup = [c for c, n in Counter(cts).items() if n > 1]
    if dup:
        warnings = (f"duplicate centres present ({len(dup)} distinct coordinates repeated)",)
    return MetricInstance(
        sqdist=table,
        k=k,
        objective=objective,
        points=pts,
        centres=cts,
        scale=scale,
        dim=dims.pop(),
        warnings=warnings,
    )


def table_instance(sqdist, k: int, objective=Objective.MEANS) -> MetricInstance:
    """Instance given directly by its (already integral) squared-distance table."""
    table = tuple(tuple(int(v) for v in row) for row in sqdist)
    warnings = ()
    if len(set(table)) != len(table):
        warnings = ("duplicate centre rows present",)
    return MetricInstance(sqdist=table, k=k, objective=Objective(objective), warnings=warnings)


def check_solution(instance: MetricInstance, S) -> Solution:
    S = Solution.of(S)
    if len(S) != instance.k:
        raise KOutOfRange(f"solution has {len(S)} centres, instance has k={instance.k}")
    if S.centre_indices and not (0 <= S.centre_indices[0] and S.centre_indices[-1] < instance.n_centres):
        raise IndexError(f"centre index out of range in {S.centre_indices}")
    return S


def _indices(S) -> tuple[int, ...]:
    return S.centre_indices if isinstance(S, Solution) else tuple(sorted(S))


def nearest_sqdists(instance: MetricInstance, S) -> list[int]:
    idx = _indices(S)
    return [min(col[i] for i in idx) for col in instance.columns]


def total(instance: MetricInstance, sq_values: Iterable[int]):
    """Objective value of a multiset of per-point squared distances."""
    if instance.objective is Objective.MEANS:
        return sum(sq_values)
    terms: dict[int, Fraction] = {}
    for q, mult in Counter(sq_values).items():
        if q:
            part = RootSum.sqrt(q, mult)
            for r, c in part.terms.items():
                terms[r] = terms.get(r, 0) + c
    return RootSum(terms)


def cost(instance: MetricInstance, S):
    """Exact cost of ``S``: an ``int`` for k-means, a :class:`RootSum` for k-median.

    ``S`` is treated as a plain set of centres; its size is not checked against
    ``k`` so the function also evaluates supersets and subsets.
    """
    return total(instance, nearest_sqdists(instance, S))


def distance_value(instance: MetricInstance, i: int, j: int):
    """Per-pair contribution to the objective: squared distance or distance."""
    q = instance.sqdist[i][j]
    if instance.objective is Objective.MEANS:
        return q
    return RootSum.sqrt(q)


def assign(instance: MetricInstance, S) -> Assignment:
    """Nearest open centre per point, ties to the smallest centre index."""
    idx = _indices(S)
    sigma = []
    for col in instance.columns:
        best = idx[0]
        bv = col[best]
        for i in idx[1:]:
            if col[i] < bv:
                best, bv = i, col[i]
        sigma.append(best)
    return Assignment(tuple(sigma))


def delta_max(instance: MetricInstance) -> int:
    return max(max(row) for row in instance.sqdist)


# -- JSON ------------------------------------------------------------------

def _rat_str(x: Fraction) -> str:
    return str(x)


def to_json(instance: MetricInstance, coordinates: bool = True) -> dict:
    out = {"objective": instance.objective.value, "k": instance.k}
    if coordinates and instance.points is not None:
        out["points"] = [[_rat_str(x) for x in p] for p in instance.points]
        out["centres"] = [[_rat_str(x) for x in c] for c in instance.centres]
    else:
        out["sqdist"] = [list(row) for row in instance.sqdist]
    return out


def from_json(obj: dict) -> MetricInstance:
    try:
        k = int(obj["k"])
        objective = Objective(obj.get("objective", "kmeans"))
        if "sqdist" in obj:
            return table_instance(obj["sqdist"], k, objective)
        return build_instance(obj["points"], obj["centres"], k, objective)
    except KeyError as exc:
        raise ParseError(f"instance JSON missing field {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, (DimensionMismatch, KOutOfRange, ParseError)):
            raise
        raise ParseError(str(exc)) from exc


def cost_to_json(value):
    if isinstance(value, RootSum):
        return value.to_json()
    if isinstance(value, Fraction) and value.denominator != 1:
        return str(value)
    return int(value)
