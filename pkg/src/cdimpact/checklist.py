"""Rendering of evaluated hints as a text checklist or a structured document."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

from .differ import ModelDifference
from .engine import ChecklistHint
from .rules import Probability, RuleSet, Severity

SEPARATOR = "====="
UNRESOLVED_MARKER = "[unresolved]"


class RenderMode(enum.Enum):
    SHORT = "short"
    DETAILED = "detailed"


@dataclass(frozen=True)
class ChecklistSection:
    rule_name: str
    description: str
    severity: Severity | None
    probability: Probability | None
    relevant_for: str | None
    hints: tuple[ChecklistHint, ...]


@dataclass(frozen=True)
class Checklist:
    sections: tuple[ChecklistSection, ...] = ()

    def __len__(self) -> int:
        return sum(len(s.hints) for s in self.sections)

    def hints(self) -> list[ChecklistHint]:
        return [h for s in self.sections for h in s.hints]


def build_checklist(rs: RuleSet, hints: Iterable[ChecklistHint]) -> Checklist:
    """Group hints into one section per rule, in rule-set order.

    Inside a section hints follow the canonical order of their causing
    change, then impact-entry order; fan-out variants keep their order.
    """
    by_rule: dict[str, list[ChecklistHint]] = {}
    for h in hints:
        by_rule.setdefault(h.rule_name, []).append(h)
    unknown = set(by_rule) - {r.name for r in rs}
    if unknown:
        raise ValueError(f"hints from rules not in the rule set: {sorted(unknown)}")
    sections = []
    for rule in rs:
        group = by_rule.get(rule.name)
        if not group:
            continue
        group.sort(key=lambda h: (h.cause.sort_key(), h.entry_index))
        sections.append(ChecklistSection(rule.name, rule.description, rule.severity,
                                         rule.probability, rule.relevant_for, tuple(group)))
    return Checklist(tuple(sections))


def _hint_line(h: ChecklistHint) -> str:
    return f"- {h.text} (Causing model change: {h.cause.description})"


def _label(value: enum.Enum | None) -> str:
    return value.value if value is not None else "-"


def render_text(c: Checklist, mode: RenderMode = RenderMode.SHORT) -> str:
    blocks = []
    for s in c.sections:
        lines = [f"{s.rule_name}:", SEPARATOR]
        if mode is RenderMode.DETAILED:
            lines += [f"Description: {s.description}",
                      f"Severity: {_label(s.severity)}",
                      f"Probability: {_label(s.probability)}",
                      f"Relevant for: {s.relevant_for or '-'}"]
        for h in s.hints:
            lines.append(_hint_line(h))
            if mode is RenderMode.DETAILED and h.unresolved:
                lines.append(UNRESOLVED_MARKER)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def render_structured(c: Checklist) -> dict:
    return {"sections": [
        {
            "rule": s.rule_name,
            "description": s.description,
            "severity": s.severity.value if s.severity else None,
            "probability": s.probability.value if s.probability else None,
            "relevant_for": s.relevant_for,
            "hints": [
                {
                    "text": h.text,
                    "cause": h.cause.to_dict(),
                    "severity": h.severity.value if h.severity else None,
                    "probability": h.probability.value if h.probability else None,
                    "relevant_for": h.relevant_for,
                    "unresolved": h.unresolved,
                    "entry_index": h.entry_index,
                }
                for h in s.hints
            ],
        }
        for s in c.sections
    ]}


def _opt(enum_cls, value):
    return enum_cls(value) if value is not None else None


def checklist_from_structured(doc: dict) -> Checklist:
    sections = []
    for s in doc["sections"]:
        hints = tuple(
            ChecklistHint(s["rule"], h["text"], ModelDifference.from_dict(h["cause"]),
                          _opt(Severity, h.get("severity")), _opt(Probability, h.get("probability")),
                          h.get("relevant_for"), bool(h.get("unresolved")), h.get("entry_index", 0))
            for h in s["hints"])
        sections.append(ChecklistSection(s["rule"], s["description"], _opt(Severity, s.get("severity")),
                                         _opt(Probability, s.get("probability")),
                                         s.get("relevant_for"), hints))
    return Checklist(tuple(sections))


def checklist_to_json(c: Checklist) -> str:
    return json.dumps(render_structured(c), indent=2, ensure_ascii=False) + "\n"


def checklist_from_json(text: str) -> Checklist:
    return checklist_from_structured(json.loads(text))
