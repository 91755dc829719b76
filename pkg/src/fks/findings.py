"""Findings: machine-readable defect reports shared by the wellformedness
checker and the cross-view consistency engine."""

from __future__ import annotations

from dataclasses import dataclass

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    code: str
    severity: str  # "error" | "warning"
    document: str  # source name of the owning document
    path: str      # element path, e.g. "automaton SQBeh/transition 0"
    message: str

    def line(self) -> str:
        return f"{self.severity}[{self.code}] {self.document}:{self.path}: {self.message}"


def sort_findings(findings: list[Finding]) -> list[Finding]:
    return sorted(findings, key=lambda f: (f.document, f.path, f.code, f.message))
