"""Structured verification outcomes shared by the checking modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

CERTIFIED = "certified"
INCONCLUSIVE = "inconclusive"
VIOLATED = "violated"

SCHEMA_VERSION = 1


@dataclass
class Check:
    """One verified statement.

    ``passed`` is ``None`` for entries that are declared rather than proven
    (they never turn a report red, but they keep it from being certified).
    ``margin`` is signed: nonnegative means the inequality held.
    """

    name: str
    passed: bool | None
    margin: float | None = None
    witness: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "witness": self.witness,
            "note": self.note,
        }


@dataclass
class VerificationReport:
    title: str
    checks: list[Check] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        """Conjunction over all proven checks."""
        return all(c.passed is not False for c in self.checks)

    @property
    def status(self) -> str:
        if not self.passed:
            return VIOLATED
        if any(c.passed is None for c in self.checks):
            return INCONCLUSIVE
        return CERTIFIED

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.passed is False]

    def worst(self) -> Check | None:
        """The check with the smallest margin (the binding one)."""
        scored = [c for c in self.checks if c.margin is not None]
        if not scored:
            return None
        return min(scored, key=lambda c: c.margin)

    def to_dict(self) -> dict[str, Any]:
        worst = self.worst()
        return {
            "schema_version": SCHEMA_VERSION,
            "title": self.title,
            "status": self.status,
            "passed": self.passed,
            "worst": worst.to_dict() if worst is not None else None,
            "meta": self.meta,
            "checks": [c.to_dict() for c in self.checks],
        }
