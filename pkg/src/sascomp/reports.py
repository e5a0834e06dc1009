"""Report containers shared by the verification pipelines.

Every check in this package is report-style: it never raises on a failed
inequality, it records signed margins so a reader can see how close the
run came to the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA = "sascomp/v1"


@dataclass
class ValidationReport:
    """Residuals of the contact-frame normalization identities."""

    residuals: dict[str, float]
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return all(abs(r) <= self.tol for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "passed": self.passed,
            "tol": self.tol,
            "residuals": self.residuals,
        }


@dataclass
class ComparisonReport:
    """Outcome of a theorem-verification run.

    ``margins`` holds signed slack per sub-check: nonnegative means the
    inequality held with that much room, negative by more than ``tol``
    means a violation.
    """

    name: str
    margins: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-9
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m >= -self.tol for m in self.margins.values())

    @property
    def worst_margin(self) -> float:
        return min(self.margins.values()) if self.margins else 0.0

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "name": self.name,
            "passed": self.passed,
            "tol": self.tol,
            "margins": self.margins,
            "details": self.details,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)
