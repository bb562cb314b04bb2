"""Uniform result type for every verification routine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# cap on violations kept per report; the count is always exact
MAX_STORED_VIOLATIONS = 50


@dataclass
class Violation:
    where: tuple
    expected: Any = None
    got: Any = None


@dataclass
class CheckReport:
    """Outcome of a check.  ``passed`` holds exactly when no violation was found."""

    name: str
    violations: list = field(default_factory=list)
    checked: int = 0
    violation_count: int = 0
    skipped: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def add(self, where, expected=None, got=None):
        self.violation_count += 1
        if len(self.violations) < MAX_STORED_VIOLATIONS:
            self.violations.append(Violation(tuple(where), expected, got))

    def tick(self, n: int = 1):
        self.checked += n

    def merge(self, other: "CheckReport", prefix: str | None = None):
        """Fold another report's counts and violations into this one."""
        tag = prefix if prefix is not None else other.name
        self.checked += other.checked
        for v in other.violations:
            if len(self.violations) < MAX_STORED_VIOLATIONS:
                self.violations.append(Violation((tag,) + v.where, v.expected, v.got))
        self.violation_count += other.violation_count
        self.skipped.extend(f"{tag}: {s}" for s in other.skipped)
        return self

    def sort(self):
        self.violations.sort(key=lambda v: repr(v.where))
        return self

    def to_dict(self, fmt=repr) -> dict:
        """JSON-ready dict; ``fmt`` renders expected/got payloads."""
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "violation_count": self.violation_count,
            "violations": [
                {"where": [str(w) for w in v.where], "expected": fmt(v.expected), "got": fmt(v.got)}
                for v in self.violations
            ],
            "skipped": list(self.skipped),
            "notes": self.notes,
        }

    def __bool__(self):
        return self.passed
