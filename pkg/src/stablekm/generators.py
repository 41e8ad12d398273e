"""Seeded instance families with integer coordinates.

All randomness comes from a PCG64 generator seeded with the spec's 64-bit
seed, so an instance is a pure function of its :class:`GenSpec`.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import SpecInvalid
from .metric import MetricInstance, Objective, build_instance


class Kind(enum.Enum):
    SEPARATED_CLUSTERS = "separated_clusters"
    UNIFORM_RANDOM = "uniform_random"
    COLINEAR_TIE = "colinear_tie"


@dataclass(frozen=True)
class GenSpec:
    kind: Kind
    n_points: int
    n_centres: int
    k: int
    dim: int = 2
    gap: Fraction = Fraction(20)
    seed: int = 0
    spread: int = 2
    box: int = 20
    objective: Objective = Objective.MEANS

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "objective", Objective(self.objective))
        object.__setattr__(self, "gap", Fraction(self.gap))
        if self.dim < 1:
            raise SpecInvalid("dim must be positive")
        if not 1 <= self.k <= self.n_points:
            raise SpecInvalid(f"need n_points >= k >= 1 (k={self.k}, n_points={self.n_points})")
        if self.n_centres < self.k:
            raise SpecInvalid(f"need n_centres >= k (k={self.k}, n_centres={self.n_centres})")
        if not 0 <= self.seed < 1 << 64:
            raise SpecInvalid("seed must be a 64-bit unsigned integer")
        if self.kind is Kind.SEPARATED_CLUSTERS:
            if self.gap <= 1:
                raise SpecInvalid("gap must exceed 1")
            if self.spread < 1:
                raise SpecInvalid("spread must be positive")
        if self.kind is Kind.COLINEAR_TIE:
            if self.k % 2 == 0:
                raise SpecInvalid("COLINEAR_TIE needs odd k so no optimum is mirror-symmetric")
            if self.n_centres % 2 or self.n_points % 2:
                raise SpecInvalid("COLINEAR_TIE needs even n_points and n_centres (mirror pairs)")

    def to_json(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["objective"] = self.objective.value
        d["gap"] = str(self.gap)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "GenSpec":
        try:
            obj = dict(obj)
            obj["kind"] = Kind(obj["kind"].lower())
            if "gap" in obj:
                obj["gap"] = Fraction(str(obj["gap"]))
            if "objective" in obj:
                obj["objective"] = Objective(obj["objective"])
            return cls(**obj)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecInvalid):
                raise
            raise SpecInvalid(f"bad generator spec: {exc}") from exc


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate(spec: GenSpec) -> MetricInstance:
    rng = _rng(spec.seed)
    if spec.kind is Kind.SEPARATED_CLUSTERS:
        points, centres = _separated(spec, rng)
    elif spec.kind is Kind.UNIFORM_RANDOM:
        points = rng.integers(0, spec.box + 1, size=(spec.n_points, spec.dim)).tolist()
        centres = rng.integers(0, spec.box + 1, size=(spec.n_centres, spec.dim)).tolist()
    else:
        points, centres = _mirror(spec, rng)
    return build_instance(points, centres, spec.k, spec.objective)


def _separated(spec: GenSpec, rng):
    """k jittered clusters whose anchors are at least gap * spread apart.

    Candidates: one rounded centroid per cluster, decoys at midpoints of anchor
    pairs, then extra decoys at least a quarter separation from every anchor.
    The candidate list is shuffled so the first k are not the answer.
    """
    k, d, spread = spec.k, spec.dim, spec.spread
    sep = spec.gap * spread
    side = int(sep * (k + 1)) + 1
    anchors: list[np.ndarray] = []
    attempts = 0
    while len(anchors) < k:
        attempts += 1
        if attempts > 100_000:
            side *= 2
            attempts = 0
        a = rng.integers(0, side + 1, size=d)
        if all(int(((a - b) ** 2).sum()) >= sep * sep for b in anchors):
            anchors.append(a)
    labels = [j % k for j in range(spec.n_points)]
    points = [anchors[c] + rng.integers(-spread, spread + 1, size=d) for c in labels]
    centres = []
    for c in range(k):
        members = [p for p, l in zip(points, labels) if l == c]
        mean = [Fraction(int(sum(int(p[t]) for p in members)), len(members)) for t in range(d)]
        centres.append([round(x) for x in mean])
    pairs = list(combinations(range(k), 2))
    for a, b in pairs:
        if len(centres) == spec.n_centres:
            break
        centres.append([int(x) // 2 for x in anchors[a] + anchors[b]])
    reach = int(sep / 2) + 1
    while len(centres) < spec.n_centres:
        c = anchors[int(rng.integers(0, k))]
        cand = c + rng.integers(-reach, reach + 1, size=d)
        # decoys keep clear of every cluster so they never tie a centroid
        if all(16 * int(((cand - a) ** 2).sum()) >= sep * sep for a in anchors):
            centres.append(cand.tolist())
    order = rng.permutation(len(centres))
    centres = [centres[i] for i in order]
    return [p.tolist() for p in points], [list(map(int, c)) for c in centres]


def _mirror(spec: GenSpec, rng):
    """Two mirror-image clusters on the first axis; every centre has a twin."""
    d = spec.dim
    offset = spec.box
    half_p = []
    for _ in range(spec.n_points // 2):
        p = rng.integers(-spec.spread, spec.spread + 1, size=d)
        p[0] += offset
        half_p.append(p)
    half_c = []
    for _ in range(spec.n_centres // 2):
        c = rng.integers(-spec.spread, spec.spread + 1, size=d)
        c[0] += offset
        half_c.append(c)
    flip = np.ones(d, dtype=np.int64)
    flip[0] = -1
    points = [p.tolist() for p in half_p] + [(p * flip).tolist() for p in half_p]
    centres = [c.tolist() for c in half_c] + [(c * flip).tolist() for c in half_c]
    return points, centres
