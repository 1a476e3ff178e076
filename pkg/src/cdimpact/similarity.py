"""Name and structure similarity scores used by the matcher."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .model import ClassDecl


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    row = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        diag, row[0] = row[0], i
        for j, cb in enumerate(b, 1):
            up = row[j]
            row[j] = min(up + 1, row[j - 1] + 1, diag + (ca != cb))
            diag = up
    return row[-1]


def name_similarity(a: str, b: str) -> float:
    """``1 - levenshtein(a, b) / max(len(a), len(b))``; 1.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def structural_similarity(a: ClassDecl, b: ClassDecl) -> float:
    """Jaccard index of the two classes' attribute name sets."""
    sa = {x.name for x in a.attributes}
    sb = {x.name for x in b.attributes}
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def name_similarity_matrix(a: Sequence[str], b: Sequence[str]) -> np.ndarray:
    dist = _kernels.levenshtein_matrix(a, b).astype(np.float64)
    la = np.array([len(s) for s in a], dtype=np.float64)
    lb = np.array([len(s) for s in b], dtype=np.float64)
    longest = np.maximum(la[:, None], lb[None, :])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(longest > 0, 1.0 - dist / np.where(longest > 0, longest, 1.0), 1.0)


def structural_similarity_matrix(a: Sequence[ClassDecl], b: Sequence[ClassDecl]) -> np.ndarray:
    return _kernels.jaccard_matrix([frozenset(x.name for x in c.attributes) for c in a],
                                   [frozenset(x.name for x in c.attributes) for c in b])
