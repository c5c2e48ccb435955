"""Verification rows and their table / JSON renderings."""

from dataclasses import dataclass
from typing import Any, Iterable, List, Literal, Mapping, Tuple

from src.numerics.serialization import dumps

Comparison = Literal["two-sided", "at-most", "at-least"]


@dataclass(frozen=True)
class VerificationReport:
    """One computed quantity checked against its target."""

    name: str
    computed: float
    target: float
    tolerance: float
    comparison: Comparison
    anchor: str

    @property
    def passed(self) -> bool:
        if self.comparison == "two-sided":
            return abs(self.computed - self.target) <= self.tolerance
        if self.comparison == "at-most":
            return self.computed <= self.target + self.tolerance
        return self.computed >= self.target - self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "computed": self.computed,
            "target": self.target,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "passed": self.passed,
            "anchor": self.anchor,
        }


_SYMBOL = {"two-sided": "≈", "at-most": "≤", "at-least": "≥"}


def render_table(rows: Iterable[VerificationReport], title: str) -> str:
    rows = list(rows)
    width = max([len(r.name) for r in rows] + [4])
    lines = [title, "=" * max(len(title), 50)]
    for r in rows:
        mark = "✅" if r.passed else "❌"
        lines.append(
            f"{mark} {r.name:<{width}}  {r.computed:>22.15g}  {_SYMBOL[r.comparison]} "
            f"{r.target:.6g} (tol {r.tolerance:.1e})  [{r.anchor}]"
        )
    failed = sum(not r.passed for r in rows)
    lines.append("-" * max(len(title), 50))
    lines.append(f"{len(rows) - failed}/{len(rows)} checks passed")
    return "\n".join(lines) + "\n"


def render_json(rows: Iterable[VerificationReport]) -> str:
    return dumps([r.to_dict() for r in rows])


def _flatten(data: Mapping[str, Any], prefix: str = "") -> List[Tuple[str, Any]]:
    items: List[Tuple[str, Any]] = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            items.extend(_flatten(value, name + "."))
        else:
            items.append((name, value))
    return items


def render_mapping(data: Mapping[str, Any], title: str) -> str:
    """Key/value table of a report dict; nested dicts become dotted keys."""
    items = _flatten(data)
    width = max([len(k) for k, _ in items] + [4])
    lines = [title, "=" * max(len(title), 50)]
    for key, value in items:
        text = f"{value:.15g}" if isinstance(value, float) else str(value)
        lines.append(f"{key:<{width}}  {text}")
    return "\n".join(lines) + "\n"


def all_passed(rows: List[VerificationReport]) -> bool:
    return all(r.passed for r in rows)
