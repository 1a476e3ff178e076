"""Lexical scan of source files for table/column names of changed persistent elements."""
from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..differ import DiffKind, DiffModel, ModelDifference
from ..model import Attribute, ClassDecl, resolve_ref
from .naming import NamingConvention

log = logging.getLogger(__name__)

DEFAULT_EXTENSIONS = (".java", ".sql", ".xml", ".properties", ".txt")
_SCHEMA_KINDS = {DiffKind.RenamedClass, DiffKind.DeletedClass,
                 DiffKind.RenamedAttribute, DiffKind.DeletedAttribute}
_WORD = "A-Za-z0-9_"


@dataclass(frozen=True)
class SqlScanHit:
    path: str  # relative to the scanned root, '/'-separated
    line: int
    identifier: str
    difference: ModelDifference
    text: str = ""

    @property
    def location(self) -> str:
        return f"{self.path}:{self.line}"


def word_pattern(identifier: str) -> re.Pattern:
    return re.compile(rf"(?<![{_WORD}]){re.escape(identifier)}(?![{_WORD}])")


def schema_identifier(d: ModelDifference, dm: DiffModel, persistent: str = "persistent",
                      naming: NamingConvention = NamingConvention.UPPER_SNAKE) -> str | None:
    """Old table/column name touched by a rename or deletion of a persistent element."""
    if d.kind not in _SCHEMA_KINDS:
        return None
    el = resolve_ref(dm.old, d.subject)
    if not isinstance(el, (ClassDecl, Attribute)) or persistent not in el.stereotypes:
        return None
    return naming.apply(el.name)


def _iter_files(root: Path, extensions: Sequence[str]) -> list[Path]:
    exts = tuple(e.lower() for e in extensions)
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for fn in sorted(filenames):
            if fn.lower().endswith(exts):
                found.append(Path(dirpath) / fn)
    return found


def sql_scan(dm: DiffModel, source_root: str | os.PathLike | None,
             extensions: Iterable[str] = DEFAULT_EXTENSIONS, *,
             persistent: str = "persistent",
             naming: NamingConvention = NamingConvention.UPPER_SNAKE) -> list[SqlScanHit]:
    """Report every word-boundary occurrence of an affected table/column name.

    Results are ordered by (path, line, identifier, difference). Unreadable
    files are logged and skipped.
    """
    if source_root is None:
        return []
    root = Path(source_root)
    targets: dict[str, list[ModelDifference]] = {}
    for d in dm:
        ident = schema_identifier(d, dm, persistent, naming)
        if ident:
            targets.setdefault(ident, []).append(d)
    if not targets or not root.is_dir():
        return []
    alternatives = "|".join(re.escape(t) for t in sorted(targets, key=lambda s: (-len(s), s)))
    pattern = re.compile(rf"(?<![{_WORD}])(?:{alternatives})(?![{_WORD}])")
    hits: list[SqlScanHit] = []
    for path in _iter_files(root, list(extensions)):
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            log.warning("skipping unreadable file %s: %s", path, exc)
            continue
        rel = path.relative_to(root).as_posix()
        for lineno, line in enumerate(text.splitlines(), 1):
            found = {m.group() for m in pattern.finditer(line)}
            for ident in sorted(found):
                for d in targets[ident]:
                    hits.append(SqlScanHit(rel, lineno, ident, d, line.strip()))
    hits.sort(key=lambda h: (h.path, h.line, h.identifier, h.difference.sort_key()))
    return hits
