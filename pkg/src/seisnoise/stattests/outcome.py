from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

TAILS = ("left", "right", "two")


@dataclass(frozen=True)
class TestOutcome:
    """Result of one hypothesis test.

    ``reject_null`` is always derived from the statistic and the critical
    values, never stored independently, so the two cannot disagree.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    tail: str
    alpha: float
    critical_lower: Optional[float] = None
    critical_upper: Optional[float] = None
    p_value: Optional[float] = None
    details: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.tail not in TAILS:
            raise ValueError(f"tail must be one of {TAILS}, got {self.tail!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        need_lower = self.tail in ("left", "two")
        need_upper = self.tail in ("right", "two")
        if need_lower and self.critical_lower is None:
            raise ValueError(f"{self.tail}-tailed outcome needs critical_lower")
        if need_upper and self.critical_upper is None:
            raise ValueError(f"{self.tail}-tailed outcome needs critical_upper")

    @property
    def reject_null(self) -> bool:
        return decide(self.statistic, self.tail, self.critical_lower, self.critical_upper)

    @property
    def critical(self) -> Optional[float]:
        """The single critical value of a one-tailed test."""
        if self.tail == "left":
            return self.critical_lower
        if self.tail == "right":
            return self.critical_upper
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "critical": [self.critical_lower, self.critical_upper],
            "tail": self.tail,
            "alpha": self.alpha,
            "reject": self.reject_null,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, name: str, d: dict[str, Any]) -> "TestOutcome":
        lo, hi = d["critical"]
        return cls(name, d["statistic"], d["tail"], d["alpha"], lo, hi, d.get("p_value"),
                   dict(d.get("details") or {}))


def decide(statistic, tail, lower=None, upper=None) -> bool:
    if math.isnan(statistic):
        return False
    if tail == "left":
        return statistic < lower
    if tail == "right":
        return statistic > upper
    return statistic < lower or statistic > upper
