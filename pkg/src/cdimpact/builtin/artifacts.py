"""Readers for the ORM mapping and property files the shipped rules consult."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..model import ModelError, QualifiedName

_QN = r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*"
_ID = r"[A-Za-z_][A-Za-z0-9_]*"
_CLASS_LINE = re.compile(rf"class\s+({_QN})\s*->\s*table\s+({_ID})")
_PROP_LINE = re.compile(rf"property\s+({_QN}#{_ID})\s*->\s*column\s+({_ID})")


class ArtifactError(ValueError):
    def __init__(self, message: str, line: int, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}: {message}")


@dataclass(frozen=True)
class OrmEntry:
    kind: str  # "class" or "property"
    qname: QualifiedName
    target: str  # table or column name
    line: int
    text: str


@dataclass(frozen=True)
class OrmMappingFile:
    entries: tuple[OrmEntry, ...] = ()
    source: str | None = None

    def lookup(self, qname: QualifiedName | str) -> OrmEntry | None:
        key = str(qname)
        for e in self.entries:
            if str(e.qname) == key:
                return e
        return None


def parse_orm_file(text: str, source: str | None = None) -> OrmMappingFile:
    """Parse ``class <qname> -> table <T>`` / ``property <qname#attr> -> column <C>`` lines."""
    entries: list[OrmEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _CLASS_LINE.fullmatch(stripped)
        kind = "class"
        if m is None:
            m = _PROP_LINE.fullmatch(stripped)
            kind = "property"
        if m is None:
            raise ArtifactError(f"malformed mapping line {stripped!r}", lineno, source)
        try:
            qn = QualifiedName.parse(m.group(1))
        except ModelError as exc:
            raise ArtifactError(str(exc), lineno, source) from None
        if str(qn) in seen:
            raise ArtifactError(f"element '{qn}' mapped twice", lineno, source)
        seen.add(str(qn))
        entries.append(OrmEntry(kind, qn, m.group(2), lineno, stripped))
    return OrmMappingFile(tuple(entries), source)


@dataclass(frozen=True)
class PropertyFile:
    entries: dict[str, str] = field(default_factory=dict)
    source: str | None = None

    @property
    def name(self) -> str | None:
        return Path(self.source).name if self.source else None

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __hash__(self) -> int:
        return hash((tuple(self.entries.items()), self.source))


def parse_property_file(text: str, source: str | None = None) -> PropertyFile:
    """Parse ``key=value`` lines; ``#`` and ``!`` start comment lines."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#!":
            continue
        key, sep, value = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ArtifactError(f"expected key=value, got {stripped!r}", lineno, source)
        if key in entries:
            raise ArtifactError(f"duplicate key {key!r}", lineno, source)
        entries[key] = value.strip()
    return PropertyFile(entries, source)
