"""Bookkeeping attached to every reduction output."""

from __future__ import annotations

from dataclasses import dataclass, field


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


@dataclass
class ReductionProvenance:
    stage: str
    maps: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    previous: list = field(default_factory=list)

    def stages(self) -> list["ReductionProvenance"]:
        """Earlier stages first, this one last."""
        return [*self.previous, self]

    def to_json(self) -> dict:
        return {
            "stages": [
                {"stage": p.stage, "constants": _jsonable(p.constants),
                 "notes": list(p.notes), "maps": _jsonable(p.maps)}
                for p in self.stages()
            ]
        }
