"""Verdict records shared by the sequence tests and the class checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive-at-horizon"


@dataclass(frozen=True)
class Witness:
    """A single violated inequality: at ``vertex`` and ``order`` the quantity is ``value``."""

    vertex: str
    order: int
    value: Fraction
    note: str = ""

    def to_json(self, float_mode: bool = False) -> dict[str, Any]:
        out = {"vertex": self.vertex, "order": self.order, "value": fmt(self.value, float_mode)}
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class ClassVerdict:
    cls: str
    status: str
    witness: Witness | None = None
    horizon_used: int = 0
    exact: bool = False
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == FAILS and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    def to_json(self, float_mode: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "class": self.cls,
            "status": self.status,
            "witness": self.witness.to_json(float_mode) if self.witness else None,
            "horizon": self.horizon_used,
            "exact": self.exact,
        }
        if self.info:
            out["info"] = {k: fmt(v, float_mode) for k, v in self.info.items()}
        return out


def fmt(x: Any, float_mode: bool = False) -> Any:
    """Render rationals as "p/q" (or 17-digit floats); recurse into containers."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, Fraction):
        if float_mode:
            return format(float(x), ".17g")
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        if x == float("inf"):
            return "inf"
        return format(x, ".17g")
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): fmt(v, float_mode) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v, float_mode) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return x
