"""Model matching, difference computation and difference rendering."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .lexer import ParseError, TokenStream, tokenize
from .model import (IDENT_RE, ElementKind, ElementRef, Model, ModelError,
                    QualifiedName)
from .similarity import name_similarity, name_similarity_matrix, structural_similarity_matrix

DEFAULT_THRESHOLD = 0.65
CLASS_NAME_WEIGHT = 0.6
CLASS_STRUCT_WEIGHT = 0.4
ATTR_NAME_WEIGHT = 0.7
ATTR_TYPE_WEIGHT = 0.3
NO_SUPERCLASS = "none"


class DiffError(ValueError):
    """Matching could not honour the given presettings."""


# ---------------------------------------------------------------------------
# presettings

class Instruction(enum.Enum):
    RENAMED = "renamed"
    MOVED = "moved"


@dataclass(frozen=True)
class Presetting:
    instruction: Instruction
    subject: ElementRef
    target: str | QualifiedName  # new simple name, or new container for MOVED
    line: int = 0

    def __str__(self) -> str:
        return f'{self.instruction.value} "{self.subject}" to "{self.target}";'


@dataclass(frozen=True)
class PresettingSet:
    presettings: tuple[Presetting, ...] = ()

    def __iter__(self) -> Iterator[Presetting]:
        return iter(self.presettings)

    def __len__(self) -> int:
        return len(self.presettings)


def parse_presettings(text: str, source: str | None = None) -> PresettingSet:
    """Parse a ``.ups`` file of ``renamed``/``moved`` instructions."""
    ts = TokenStream(tokenize(text, source), source)
    out: list[Presetting] = []
    seen: dict[str, int] = {}
    while not ts.at("EOF"):
        head = ts.current
        if not (ts.at_keyword("renamed") or ts.at_keyword("moved")):
            raise ts.error(["'renamed'", "'moved'"])
        instr = Instruction(ts.advance().value)
        subj_tok = ts.expect_string("quoted element reference")
        ts.expect_keyword("to")
        tgt_tok = ts.expect_string("quoted target")
        ts.expect_sym(";")
        try:
            qn = QualifiedName.parse(subj_tok.value)
        except ModelError as exc:
            raise ParseError(str(exc), subj_tok.line, subj_tok.column, source) from None
        kind = ElementKind.ATTRIBUTE if qn.attribute is not None else ElementKind.CLASS
        subject = ElementRef(kind, qn)
        if instr is Instruction.RENAMED:
            if not IDENT_RE.match(tgt_tok.value):
                raise ParseError(f"rename target must be a bare identifier, got {tgt_tok.value!r}",
                                 tgt_tok.line, tgt_tok.column, source)
            target: str | QualifiedName = tgt_tok.value
        else:
            try:
                target = QualifiedName.parse(tgt_tok.value)
            except ModelError as exc:
                raise ParseError(str(exc), tgt_tok.line, tgt_tok.column, source) from None
            if target.attribute is not None:
                raise ParseError("move target must name a package or class, not an attribute",
                                 tgt_tok.line, tgt_tok.column, source)
        key = str(qn)
        if key in seen:
            raise ParseError(f"duplicate presetting for '{key}' (first on line {seen[key]})",
                             head.line, head.column, source)
        seen[key] = head.line
        out.append(Presetting(instr, subject, target, head.line))
    return PresettingSet(tuple(out))


# ---------------------------------------------------------------------------
# matching

class Provenance(enum.Enum):
    PRESET = "preset"
    EXACT = "exact"
    SIMILARITY = "similarity"


@dataclass(frozen=True)
class MatchPair:
    old: ElementRef
    new: ElementRef
    provenance: Provenance
    score: float = 1.0


@dataclass
class Matching:
    """Partial injective mapping between old-model and new-model elements."""

    pairs: list[MatchPair] = field(default_factory=list)
    _fwd: dict[ElementRef, MatchPair] = field(default_factory=dict, repr=False)
    _bwd: dict[ElementRef, MatchPair] = field(default_factory=dict, repr=False)

    def add(self, old: ElementRef, new: ElementRef, provenance: Provenance, score: float = 1.0) -> None:
        if old.kind is not new.kind:
            raise DiffError(f"cannot pair {old.kind.value} '{old}' with {new.kind.value} '{new}'")
        if old in self._fwd or new in self._bwd:
            raise DiffError(f"'{old}' or '{new}' is already matched")
        pair = MatchPair(old, new, provenance, score)
        self.pairs.append(pair)
        self._fwd[old] = pair
        self._bwd[new] = pair

    def new_for(self, old: ElementRef) -> ElementRef | None:
        p = self._fwd.get(old)
        return p.new if p else None

    def old_for(self, new: ElementRef) -> ElementRef | None:
        p = self._bwd.get(new)
        return p.old if p else None

    def provenance(self, old: ElementRef) -> Provenance | None:
        p = self._fwd.get(old)
        return p.provenance if p else None

    def __contains__(self, ref: ElementRef) -> bool:
        return ref in self._fwd or ref in self._bwd

    def __len__(self) -> int:
        return len(self.pairs)


def _pref(qn: QualifiedName) -> ElementRef:
    return ElementRef(ElementKind.PACKAGE, qn)


def _cref(qn: QualifiedName) -> ElementRef:
    return ElementRef(ElementKind.CLASS, qn)


def _aref(qn: QualifiedName) -> ElementRef:
    return ElementRef(ElementKind.ATTRIBUTE, qn)


def _asref(name: str) -> ElementRef:
    return ElementRef(ElementKind.ASSOCIATION, QualifiedName((name,)))


class _Matcher:
    def __init__(self, old: Model, new: Model, ps: PresettingSet, threshold: float):
        self.old, self.new = old, new
        self.threshold = threshold
        self.m = Matching()
        self.presets: dict[ElementRef, Presetting] = {}
        for p in ps:
            subject = p.subject
            if subject.kind is ElementKind.CLASS and old.class_(subject.qname) is None \
                    and old.package(subject.qname) is not None:
                if p.instruction is Instruction.MOVED:
                    raise DiffError(f"{p}: packages can only be renamed")
                subject = _pref(subject.qname)
            if subject.kind is ElementKind.CLASS and old.class_(subject.qname) is None:
                raise DiffError(f"{p}: subject '{subject}' not found in old model")
            if subject.kind is ElementKind.ATTRIBUTE and old.attribute(subject.qname) is None:
                raise DiffError(f"{p}: subject '{subject}' not found in old model")
            self.presets[subject] = p

    def project(self, container: QualifiedName | None, kind: ElementKind) -> QualifiedName | None:
        """Where an old container lives in the new model (itself if unmatched)."""
        if container is None:
            return None
        ref = ElementRef(kind, container)
        new = self.m.new_for(ref)
        return new.qname if new is not None else container

    def force(self, old: ElementRef, target: QualifiedName, p: Presetting, exists) -> None:
        new = ElementRef(old.kind, target)
        if not exists(target):
            raise DiffError(f"{p}: target '{target}' not found in new model")
        if new in self.m:
            raise DiffError(f"{p}: target '{target}' is already matched")
        self.m.add(old, new, Provenance.PRESET)

    def preset_target(self, ref: ElementRef, p: Presetting, container_kind: ElementKind) -> QualifiedName:
        qn = ref.qname
        if p.instruction is Instruction.RENAMED:
            if ref.kind is ElementKind.ATTRIBUTE:
                owner = self.project(qn.container, ElementKind.CLASS)
                return owner.attr(p.target)
            parent = self.project(qn.container, container_kind)
            return QualifiedName((p.target,)) if parent is None else parent.child(p.target)
        target = p.target
        if ref.kind is ElementKind.ATTRIBUTE:
            return target.attr(qn.attribute)
        return target.child(qn.name)

    def run(self) -> Matching:
        self.match_packages()
        self.match_classes()
        self.match_attributes()
        self.match_associations()
        return self.m

    def match_packages(self) -> None:
        by_depth: dict[int, list[QualifiedName]] = {}
        for qn, _ in self.old.iter_packages():
            by_depth.setdefault(len(qn.segments), []).append(qn)
        for depth in sorted(by_depth):
            level = by_depth[depth]
            for qn in level:
                ref = _pref(qn)
                p = self.presets.get(ref)
                if p is not None:
                    self.force(ref, self.preset_target(ref, p, ElementKind.PACKAGE), p,
                               lambda q: self.new.package(q) is not None)
            for qn in level:
                ref = _pref(qn)
                if ref in self.m:
                    continue
                parent = self.project(qn.container, ElementKind.PACKAGE)
                target = QualifiedName((qn.name,)) if parent is None else parent.child(qn.name)
                new = _pref(target)
                if self.new.package(target) is not None and new not in self.m:
                    self.m.add(ref, new, Provenance.EXACT)

    def match_classes(self) -> None:
        old_classes = [qn for qn, _ in self.old.iter_classes()]
        for qn in old_classes:
            ref = _cref(qn)
            p = self.presets.get(ref)
            if p is not None:
                self.force(ref, self.preset_target(ref, p, ElementKind.PACKAGE), p,
                           lambda q: self.new.class_(q) is not None)
        for qn in old_classes:
            ref = _cref(qn)
            if ref in self.m:
                continue
            target = self.project(qn.container, ElementKind.PACKAGE).child(qn.name)
            new = _cref(target)
            if self.new.class_(target) is not None and new not in self.m:
                self.m.add(ref, new, Provenance.EXACT)
        left_old = [qn for qn in old_classes if _cref(qn) not in self.m]
        left_new = [qn for qn, _ in self.new.iter_classes() if _cref(qn) not in self.m]
        if not left_old or not left_new:
            return
        a = [self.old.class_(q) for q in left_old]
        b = [self.new.class_(q) for q in left_new]
        score = (CLASS_NAME_WEIGHT * name_similarity_matrix([c.name for c in a], [c.name for c in b])
                 + CLASS_STRUCT_WEIGHT * structural_similarity_matrix(a, b))
        self.greedy(left_old, left_new, score, _cref)

    def greedy(self, left_old: Sequence[QualifiedName], left_new: Sequence[QualifiedName],
               score: np.ndarray, make) -> None:
        ii, jj = np.nonzero(score >= self.threshold)
        if len(ii) == 0:
            return
        cands = sorted(zip(ii.tolist(), jj.tolist()),
                       key=lambda ij: (-score[ij], str(left_old[ij[0]]), str(left_new[ij[1]])))
        used_old: set[int] = set()
        used_new: set[int] = set()
        for i, j in cands:
            if i in used_old or j in used_new:
                continue
            used_old.add(i)
            used_new.add(j)
            self.m.add(make(left_old[i]), make(left_new[j]), Provenance.SIMILARITY, float(score[i, j]))

    def match_attributes(self) -> None:
        old_attrs = [qn for qn, _ in self.old.iter_attributes()]
        for qn in old_attrs:
            ref = _aref(qn)
            p = self.presets.get(ref)
            if p is not None:
                self.force(ref, self.preset_target(ref, p, ElementKind.CLASS), p,
                           lambda q: self.new.attribute(q) is not None)
        for pair in list(self.m.pairs):
            if pair.old.kind is not ElementKind.CLASS:
                continue
            old_cls = self.old.class_(pair.old.qname)
            new_cls = self.new.class_(pair.new.qname)
            left_old = [pair.old.qname.attr(a.name) for a in old_cls.attributes
                        if _aref(pair.old.qname.attr(a.name)) not in self.m]
            new_names = {a.name for a in new_cls.attributes
                         if _aref(pair.new.qname.attr(a.name)) not in self.m}
            for qn in left_old:
                if qn.attribute in new_names:
                    self.m.add(_aref(qn), _aref(pair.new.qname.attr(qn.attribute)), Provenance.EXACT)
                    new_names.discard(qn.attribute)
            left_old = [qn for qn in left_old if _aref(qn) not in self.m]
            left_new = [pair.new.qname.attr(a.name) for a in new_cls.attributes if a.name in new_names]
            if left_old and left_new:
                self.greedy(left_old, left_new, self.attr_scores(left_old, left_new), _aref)

    def attr_scores(self, left_old, left_new) -> np.ndarray:
        score = np.empty((len(left_old), len(left_new)))
        for i, o in enumerate(left_old):
            oa = self.old.attribute(o)
            for j, n in enumerate(left_new):
                na = self.new.attribute(n)
                type_sim = 1.0 if oa.type_name == na.type_name else 0.0
                score[i, j] = (ATTR_NAME_WEIGHT * name_similarity(oa.name, na.name)
                               + ATTR_TYPE_WEIGHT * type_sim)
        return score

    def mapped_class(self, qn: QualifiedName) -> QualifiedName | None:
        new = self.m.new_for(_cref(qn))
        return new.qname if new is not None else None

    def match_associations(self) -> None:
        new_by_name = {a.name: a for a in self.new.associations}
        for a in self.old.associations:
            n = new_by_name.get(a.name)
            if n is None:
                continue
            exact = (self.mapped_class(a.source) == n.source
                     and self.mapped_class(a.target) == n.target)
            # without an exact end match a same-named association is still the
            # best candidate: only its ends changed
            self.m.add(_asref(a.name), _asref(n.name),
                       Provenance.EXACT if exact else Provenance.SIMILARITY)


def match_models(old: Model, new: Model, ps: PresettingSet | None = None,
                 threshold: float = DEFAULT_THRESHOLD) -> Matching:
    """Pair up old and new elements: presettings, then equal names, then similarity."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    return _Matcher(old, new, ps or PresettingSet(), threshold).run()


# ---------------------------------------------------------------------------
# differences

class DiffKind(enum.Enum):
    AddedPackage = "AddedPackage"
    DeletedPackage = "DeletedPackage"
    RenamedPackage = "RenamedPackage"
    AddedClass = "AddedClass"
    DeletedClass = "DeletedClass"
    RenamedClass = "RenamedClass"
    MovedClass = "MovedClass"
    ChangedClassProperty = "ChangedClassProperty"
    AddedAttribute = "AddedAttribute"
    DeletedAttribute = "DeletedAttribute"
    RenamedAttribute = "RenamedAttribute"
    MovedAttribute = "MovedAttribute"
    ChangedAttributeType = "ChangedAttributeType"
    ChangedAttributeCardinality = "ChangedAttributeCardinality"
    AddedStereotype = "AddedStereotype"
    RemovedStereotype = "RemovedStereotype"
    AddedAssociation = "AddedAssociation"
    DeletedAssociation = "DeletedAssociation"
    ChangedAssociationEnd = "ChangedAssociationEnd"

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]


_KIND_ORDER = {k: i for i, k in enumerate(DiffKind)}
_ADDED = {DiffKind.AddedPackage, DiffKind.AddedClass, DiffKind.AddedAttribute,
          DiffKind.AddedAssociation}
_DELETED = {DiffKind.DeletedPackage, DiffKind.DeletedClass, DiffKind.DeletedAttribute,
            DiffKind.DeletedAssociation}
_RENAMED = {DiffKind.RenamedPackage, DiffKind.RenamedClass, DiffKind.RenamedAttribute}
_MOVED = {DiffKind.MovedClass, DiffKind.MovedAttribute}
_SUBJECT_KIND = {
    DiffKind.AddedPackage: ElementKind.PACKAGE, DiffKind.DeletedPackage: ElementKind.PACKAGE,
    DiffKind.RenamedPackage: ElementKind.PACKAGE,
    DiffKind.AddedClass: ElementKind.CLASS, DiffKind.DeletedClass: ElementKind.CLASS,
    DiffKind.RenamedClass: ElementKind.CLASS, DiffKind.MovedClass: ElementKind.CLASS,
    DiffKind.ChangedClassProperty: ElementKind.CLASS,
    DiffKind.AddedAttribute: ElementKind.ATTRIBUTE, DiffKind.DeletedAttribute: ElementKind.ATTRIBUTE,
    DiffKind.RenamedAttribute: ElementKind.ATTRIBUTE, DiffKind.MovedAttribute: ElementKind.ATTRIBUTE,
    DiffKind.ChangedAttributeType: ElementKind.ATTRIBUTE,
    DiffKind.ChangedAttributeCardinality: ElementKind.ATTRIBUTE,
    DiffKind.AddedAssociation: ElementKind.ASSOCIATION,
    DiffKind.DeletedAssociation: ElementKind.ASSOCIATION,
    DiffKind.ChangedAssociationEnd: ElementKind.ASSOCIATION,
}


def subject_kind(kind: DiffKind, qname: QualifiedName) -> ElementKind:
    if kind in (DiffKind.AddedStereotype, DiffKind.RemovedStereotype):
        return ElementKind.ATTRIBUTE if qname.attribute is not None else ElementKind.CLASS
    return _SUBJECT_KIND[kind]


@dataclass(frozen=True)
class ModelDifference:
    """One typed change. ``subject`` is new-side for additions, old-side otherwise."""

    kind: DiffKind
    subject: ElementRef
    old_value: str | None = None
    new_value: str | None = None
    counterpart: ElementRef | None = None
    facet: str | None = None

    def __post_init__(self) -> None:
        if self.kind in _ADDED and self.old_value is not None:
            raise ValueError(f"{self.kind.value} cannot carry an old value")
        if self.kind in _DELETED and self.new_value is not None:
            raise ValueError(f"{self.kind.value} cannot carry a new value")
        if self.kind in _RENAMED and (self.old_value is None or self.new_value is None
                                      or self.old_value == self.new_value):
            raise ValueError(f"{self.kind.value} needs distinct old and new names")

    def sort_key(self) -> tuple:
        return (self.kind.order, str(self.subject.qname), self.facet or "",
                self.old_value or "", self.new_value or "")

    def identity(self) -> tuple:
        return (self.kind, self.subject, self.facet, self.old_value, self.new_value)

    @property
    def description(self) -> str:
        return describe_difference(self)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "subject": str(self.subject),
            "old": self.old_value,
            "new": self.new_value,
            "facet": self.facet,
            "counterpart": str(self.counterpart) if self.counterpart is not None else None,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ModelDifference:
        kind = DiffKind(d["kind"])
        qn = QualifiedName.parse(d["subject"])
        ek = subject_kind(kind, qn)
        cp = d.get("counterpart")
        return cls(kind, ElementRef(ek, qn), d.get("old"), d.get("new"),
                   ElementRef(ek, QualifiedName.parse(cp)) if cp else None, d.get("facet"))


_FACET_LABEL = {"superclass": "superclass", "type": "type", "cardinality": "cardinality",
                "source": "source", "target": "target",
                "source_card": "source cardinality", "target_card": "target cardinality"}


def describe_difference(d: ModelDifference) -> str:
    word = d.subject.kind.value
    qn = str(d.subject.qname)
    if d.kind in _ADDED:
        return f"Added {word} '{qn}'"
    if d.kind in _DELETED:
        return f"Deleted {word} '{qn}'"
    if d.kind in _RENAMED:
        return f"Renamed {word} '{qn}' to '{d.new_value}'"
    if d.kind in _MOVED:
        return f"Moved {word} '{qn}' to '{d.new_value}'"
    if d.kind is DiffKind.AddedStereotype:
        return f"Added stereotype '{d.new_value}' to {word} '{qn}'"
    if d.kind is DiffKind.RemovedStereotype:
        return f"Removed stereotype '{d.old_value}' from {word} '{qn}'"
    facet = _FACET_LABEL.get(d.facet or "", d.facet or "property")
    return f"Changed {facet} of '{qn}' from '{d.old_value}' to '{d.new_value}'"


@dataclass(frozen=True)
class DiffModel:
    differences: tuple[ModelDifference, ...]
    old: Model = field(default_factory=Model, compare=False, repr=False)
    new: Model = field(default_factory=Model, compare=False, repr=False)

    def __iter__(self) -> Iterator[ModelDifference]:
        return iter(self.differences)

    def __len__(self) -> int:
        return len(self.differences)

    def __getitem__(self, i: int) -> ModelDifference:
        return self.differences[i]

    def __contains__(self, d: object) -> bool:
        return d in self._members

    @property
    def _members(self) -> frozenset:
        cached = self.__dict__.get("_member_cache")
        if cached is None:
            cached = frozenset(self.differences)
            object.__setattr__(self, "_member_cache", cached)
        return cached

    def of_kind(self, *kinds: DiffKind) -> list[ModelDifference]:
        return [d for d in self.differences if d.kind in kinds]


def canonicalize(diffs: Iterable[ModelDifference]) -> tuple[ModelDifference, ...]:
    """Sort into canonical order and drop duplicate entries."""
    seen: set = set()
    out = []
    for d in sorted(diffs, key=ModelDifference.sort_key):
        key = d.identity()
        if key not in seen:
            seen.add(key)
            out.append(d)
    return tuple(out)


def _stereo_deltas(out: list, old_ref: ElementRef, new_ref: ElementRef,
                   old_st: frozenset[str], new_st: frozenset[str]) -> None:
    for s in sorted(new_st - old_st):
        out.append(ModelDifference(DiffKind.AddedStereotype, old_ref, None, s, new_ref, "stereotype"))
    for s in sorted(old_st - new_st):
        out.append(ModelDifference(DiffKind.RemovedStereotype, old_ref, s, None, new_ref, "stereotype"))


def compute_diff(old: Model, new: Model, matching: Matching) -> DiffModel:
    """Turn a matching into typed differences in canonical order."""
    out: list[ModelDifference] = []

    def mapped(kind: ElementKind, qn: QualifiedName | None) -> QualifiedName | None:
        if qn is None:
            return None
        n = matching.new_for(ElementRef(kind, qn))
        return n.qname if n is not None else None

    def unmatched(kind: ElementKind, qnames: Iterable[QualifiedName], added: bool) -> None:
        dk = {ElementKind.PACKAGE: (DiffKind.AddedPackage, DiffKind.DeletedPackage),
              ElementKind.CLASS: (DiffKind.AddedClass, DiffKind.DeletedClass),
              ElementKind.ATTRIBUTE: (DiffKind.AddedAttribute, DiffKind.DeletedAttribute),
              ElementKind.ASSOCIATION: (DiffKind.AddedAssociation, DiffKind.DeletedAssociation)}[kind]
        for qn in qnames:
            ref = ElementRef(kind, qn)
            if ref not in matching:
                out.append(ModelDifference(dk[0] if added else dk[1], ref))

    for model, added in ((old, False), (new, True)):
        unmatched(ElementKind.PACKAGE, (q for q, _ in model.iter_packages()), added)
        unmatched(ElementKind.CLASS, (q for q, _ in model.iter_classes()), added)
        unmatched(ElementKind.ATTRIBUTE, (q for q, _ in model.iter_attributes()), added)
        unmatched(ElementKind.ASSOCIATION, (QualifiedName((a.name,)) for a in model.associations), added)

    for pair in matching.pairs:
        o, n = pair.old, pair.new
        oq, nq = o.qname, n.qname
        kind = o.kind
        if kind is ElementKind.PACKAGE:
            if oq.name != nq.name:
                out.append(ModelDifference(DiffKind.RenamedPackage, o, oq.name, nq.name, n))
        elif kind is ElementKind.CLASS:
            oc, nc = old.class_(oq), new.class_(nq)
            if oq.name != nq.name:
                out.append(ModelDifference(DiffKind.RenamedClass, o, oq.name, nq.name, n))
            projected = mapped(ElementKind.PACKAGE, oq.container) or oq.container
            if projected != nq.container:
                out.append(ModelDifference(DiffKind.MovedClass, o, str(oq.container),
                                           str(nq.container), n))
            if mapped(ElementKind.CLASS, oc.superclass) != nc.superclass:
                out.append(ModelDifference(
                    DiffKind.ChangedClassProperty, o,
                    str(oc.superclass) if oc.superclass else NO_SUPERCLASS,
                    str(nc.superclass) if nc.superclass else NO_SUPERCLASS, n, "superclass"))
            _stereo_deltas(out, o, n, oc.stereotypes, nc.stereotypes)
        elif kind is ElementKind.ATTRIBUTE:
            oa, na = old.attribute(oq), new.attribute(nq)
            if oq.name != nq.name:
                out.append(ModelDifference(DiffKind.RenamedAttribute, o, oq.name, nq.name, n))
            if mapped(ElementKind.CLASS, oq.container) != nq.container:
                out.append(ModelDifference(DiffKind.MovedAttribute, o, str(oq.container),
                                           str(nq.container), n))
            if oa.type_name != na.type_name:
                out.append(ModelDifference(DiffKind.ChangedAttributeType, o, oa.type_name,
                                           na.type_name, n, "type"))
            if oa.cardinality != na.cardinality:
                out.append(ModelDifference(DiffKind.ChangedAttributeCardinality, o,
                                           str(oa.cardinality), str(na.cardinality), n, "cardinality"))
            _stereo_deltas(out, o, n, oa.stereotypes, na.stereotypes)
        else:
            oa, na = old.association(oq.name), new.association(nq.name)
            for facet in ("source", "target"):
                ov, nv = getattr(oa, facet), getattr(na, facet)
                if mapped(ElementKind.CLASS, ov) != nv:
                    out.append(ModelDifference(DiffKind.ChangedAssociationEnd, o, str(ov), str(nv), n, facet))
            for facet in ("source_card", "target_card"):
                ov, nv = getattr(oa, facet), getattr(na, facet)
                if ov != nv:
                    out.append(ModelDifference(DiffKind.ChangedAssociationEnd, o, str(ov), str(nv), n, facet))
    return DiffModel(canonicalize(out), old, new)


def diff_models(old: Model, new: Model, presettings: PresettingSet | None = None,
                threshold: float = DEFAULT_THRESHOLD) -> DiffModel:
    return compute_diff(old, new, match_models(old, new, presettings, threshold))


# ---------------------------------------------------------------------------
# export

_LINE_FIELDS = ("kind", "subject", "old", "new", "facet", "counterpart", "description")


def diff_to_lines(diffs: Iterable[ModelDifference]) -> str:
    """Tab-separated records, one difference per line; empty field means absent."""
    rows = []
    for d in diffs:
        rec = d.to_dict()
        rows.append("\t".join("" if rec[f] is None else rec[f] for f in _LINE_FIELDS))
    return "".join(r + "\n" for r in rows)


def diff_from_lines(text: str) -> list[ModelDifference]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != len(_LINE_FIELDS):
            raise ValueError(f"line {lineno}: expected {len(_LINE_FIELDS)} fields, got {len(parts)}")
        rec = {f: (v if v != "" else None) for f, v in zip(_LINE_FIELDS, parts)}
        out.append(ModelDifference.from_dict(rec))
    return out


def diff_to_json(dm: DiffModel | Sequence[ModelDifference]) -> str:
    doc = {"differences": [d.to_dict() for d in dm]}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def diff_from_json(text: str) -> list[ModelDifference]:
    return [ModelDifference.from_dict(d) for d in json.loads(text)["differences"]]
