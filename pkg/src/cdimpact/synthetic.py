"""Seeded generator of model pairs with a known list of injected differences.

Used by the diff oracle tests and the benchmarks. Every class carries at
least one attribute and attribute names are unique across the whole model,
so two distinct classes never share attributes and their match score stays
below the threshold whatever their names. Each class is touched by at most
one edit per script, which keeps the expected differences independent of
each other.
"""
from __future__ import annotations

import random
import string
from dataclasses import dataclass, field
from pathlib import Path

from .differ import DiffKind, ModelDifference, canonicalize, diff_to_lines
from .model import (AddAssociation, AddAttribute, AddClass, AddPackage, AddStereotype,
                    Association, Attribute, Cardinality, ChangeAssociationEnd, ChangeCardinality,
                    ClassDecl, DeleteAssociation, DeleteAttribute, DeleteClass, DeletePackage,
                    ElementKind, ElementRef, Model, MoveClass, Package, QualifiedName,
                    RemoveStereotype, RenameAttribute, RenameClass, RetypeAttribute,
                    SetSuperclass, apply_edit_script, serialize_model)

TYPES = ("String", "Integer", "Boolean", "Date", "Double", "Long", "Text")
CARDINALITIES = (Cardinality(1, 1), Cardinality(0, 1), Cardinality(0, None),
                 Cardinality(1, None), Cardinality(2, 5))
STEREOTYPES = ("persistent", "active", "transient")
_RESERVED = {"package", "class", "association", "extends"}

EDIT_KINDS = ("add_class", "delete_class", "rename_class", "move_class", "set_superclass",
              "add_attribute", "delete_attribute", "rename_attribute", "retype_attribute",
              "change_cardinality", "add_stereotype", "remove_stereotype",
              "add_association", "delete_association", "change_association_end",
              "add_package", "delete_package")


def _cref(qn: QualifiedName) -> ElementRef:
    return ElementRef(ElementKind.CLASS, qn)


def _aref(qn: QualifiedName) -> ElementRef:
    return ElementRef(ElementKind.ATTRIBUTE, qn)


def _pref(qn: QualifiedName) -> ElementRef:
    return ElementRef(ElementKind.PACKAGE, qn)


def _asref(name: str) -> ElementRef:
    return ElementRef(ElementKind.ASSOCIATION, QualifiedName((name,)))


class _Names:
    def __init__(self, rng: random.Random, taken=()):
        self.rng = rng
        self.taken = set(taken) | _RESERVED

    def fresh(self, capital: bool = False) -> str:
        while True:
            n = "".join(self.rng.choice(string.ascii_lowercase) for _ in range(self.rng.randint(6, 10)))
            if capital:
                n = n.capitalize()
            if n not in self.taken:
                self.taken.add(n)
                return n

    def mutate(self, name: str) -> str:
        """A close variant of ``name``: one or two letters replaced, first letter kept."""
        while True:
            chars = list(name)
            for pos in self.rng.sample(range(1, len(chars)), min(self.rng.choice((1, 2)), len(chars) - 1)):
                chars[pos] = self.rng.choice([c for c in string.ascii_lowercase if c != chars[pos]])
            new = "".join(chars)
            if new not in self.taken:
                self.taken.add(new)
                return new


def _build_model(pkgs: dict[str, dict], roots: list[str], assocs: list[Association]) -> Model:
    def build(key: str) -> Package:
        p = pkgs[key]
        return Package(p["qn"].name, tuple(build(k) for k in p["children"]), tuple(p["classes"]))
    return Model(tuple(build(k) for k in roots), tuple(assocs))


def generate_model(classes: int, rng: random.Random, names: _Names | None = None) -> Model:
    names = names or _Names(rng)
    pkgs: dict[str, dict] = {}
    roots: list[str] = []

    def new_package(parent: str | None) -> str:
        name = names.fresh()
        qn = QualifiedName((name,)) if parent is None else pkgs[parent]["qn"].child(name)
        key = str(qn)
        pkgs[key] = {"qn": qn, "children": [], "classes": []}
        (roots if parent is None else pkgs[parent]["children"]).append(key)
        return key

    filled: list[str] = []
    for i in range(max(2, classes // 40)):
        candidates = [k for k in filled if len(pkgs[k]["qn"].segments) < 3]
        parent = None if i == 0 or not candidates or rng.random() < 0.3 else rng.choice(candidates)
        filled.append(new_package(parent))
    for _ in range(1 + classes // 200):
        new_package(rng.choice(filled))  # left empty

    class_qns: list[QualifiedName] = []
    for i in range(classes):
        pkg = rng.choice(filled)
        attrs = tuple(Attribute(names.fresh(), rng.choice(TYPES), rng.choice(CARDINALITIES),
                                frozenset({"persistent"}) if rng.random() < 0.5 else frozenset())
                      for _ in range(rng.randint(1, 4)))
        stereos = set()
        if rng.random() < 0.7:
            stereos.add("persistent")
        if rng.random() < 0.3:
            stereos.add("active")
        sup = class_qns[rng.randrange(i)] if i and rng.random() < 0.1 else None
        decl = ClassDecl(names.fresh(capital=True), attrs, frozenset(stereos), sup)
        pkgs[pkg]["classes"].append(decl)
        class_qns.append(pkgs[pkg]["qn"].child(decl.name))
    assocs = []
    if len(class_qns) >= 2:
        for _ in range(classes // 10):
            s, t = rng.sample(class_qns, 2)
            assocs.append(Association(names.fresh(), s, t, rng.choice(CARDINALITIES),
                                      rng.choice(CARDINALITIES)))
    return _build_model(pkgs, roots, assocs)


class _EditPlanner:
    def __init__(self, m: Model, rng: random.Random, names: _Names):
        self.m = m
        self.rng = rng
        self.names = names
        self.classes = [(qn, c) for qn, c in m.iter_classes()]
        self.used: set[QualifiedName] = set()
        self.referenced: set[QualifiedName] = set()
        for _, c in self.classes:
            if c.superclass is not None:
                self.referenced.add(c.superclass)
        for a in m.associations:
            self.referenced.update((a.source, a.target))
        self.targets = [qn for qn, p in m.iter_packages() if p.classes]
        self.empty = [qn for qn, p in m.iter_packages() if not p.classes and not p.packages]
        self.assocs = list(m.associations)
        self.used_assocs: set[str] = set()
        self.deleted_pkgs: set[QualifiedName] = set()
        self.edits: list = []
        self.expected: list[ModelDifference] = []

    def _free_class(self, pred=lambda qn, c: True):
        if not self.classes:
            return None
        for _ in range(30):
            qn, c = self.rng.choice(self.classes)
            if qn not in self.used and pred(qn, c):
                self.used.add(qn)
                return qn, c
        return None

    def _emit(self, edit, *diffs: ModelDifference) -> bool:
        self.edits.append(edit)
        self.expected.extend(diffs)
        return True

    def _new_attribute(self) -> Attribute:
        return Attribute(self.names.fresh(), self.rng.choice(TYPES), self.rng.choice(CARDINALITIES),
                         frozenset({"persistent"}) if self.rng.random() < 0.5 else frozenset())

    def add_class(self) -> bool:
        if not self.targets:
            return False
        pkg = self.rng.choice(self.targets)
        attrs = tuple(self._new_attribute() for _ in range(self.rng.randint(1, 3)))
        decl = ClassDecl(self.names.fresh(capital=True), attrs,
                         frozenset({"persistent"}) if self.rng.random() < 0.7 else frozenset())
        qn = pkg.child(decl.name)
        return self._emit(AddClass(pkg, decl), ModelDifference(DiffKind.AddedClass, _cref(qn)),
                          *(ModelDifference(DiffKind.AddedAttribute, _aref(qn.attr(a.name))) for a in attrs))

    def delete_class(self) -> bool:
        hit = self._free_class(lambda qn, c: qn not in self.referenced)
        if hit is None:
            return False
        qn, c = hit
        return self._emit(DeleteClass(qn), ModelDifference(DiffKind.DeletedClass, _cref(qn)),
                          *(ModelDifference(DiffKind.DeletedAttribute, _aref(qn.attr(a.name)))
                            for a in c.attributes))

    def rename_class(self) -> bool:
        hit = self._free_class()
        if hit is None:
            return False
        qn, c = hit
        new = self.names.mutate(c.name)
        return self._emit(RenameClass(qn, new), ModelDifference(
            DiffKind.RenamedClass, _cref(qn), c.name, new, _cref(qn.with_name(new))))

    def move_class(self) -> bool:
        if len(self.targets) < 2:
            return False
        hit = self._free_class()
        if hit is None:
            return False
        qn, c = hit
        dest = self.rng.choice([p for p in self.targets if p != qn.container])
        return self._emit(MoveClass(qn, dest), ModelDifference(
            DiffKind.MovedClass, _cref(qn), str(qn.container), str(dest), _cref(dest.child(c.name))))

    def set_superclass(self) -> bool:
        sub = self._free_class()
        if sub is None:
            return False
        qn, c = sub
        if c.superclass is not None and self.rng.random() < 0.3:
            return self._emit(SetSuperclass(qn, None), ModelDifference(
                DiffKind.ChangedClassProperty, _cref(qn), str(c.superclass), "none", _cref(qn), "superclass"))
        sup = self._free_class(lambda q, d: d.superclass is None and q != c.superclass)
        if sup is None:
            self.used.discard(qn)
            return False
        old = str(c.superclass) if c.superclass else "none"
        return self._emit(SetSuperclass(qn, sup[0]), ModelDifference(
            DiffKind.ChangedClassProperty, _cref(qn), old, str(sup[0]), _cref(qn), "superclass"))

    def _free_attribute(self, pred=lambda qn, c: True):
        hit = self._free_class(pred)
        if hit is None:
            return None
        qn, c = hit
        return qn, c, self.rng.choice(c.attributes)

    def add_attribute(self) -> bool:
        hit = self._free_class()
        if hit is None:
            return False
        a = self._new_attribute()
        return self._emit(AddAttribute(hit[0], a),
                          ModelDifference(DiffKind.AddedAttribute, _aref(hit[0].attr(a.name))))

    def delete_attribute(self) -> bool:
        hit = self._free_attribute(lambda qn, c: len(c.attributes) >= 2)
        if hit is None:
            return False
        qn, _, a = hit
        return self._emit(DeleteAttribute(qn.attr(a.name)),
                          ModelDifference(DiffKind.DeletedAttribute, _aref(qn.attr(a.name))))

    def rename_attribute(self) -> bool:
        hit = self._free_attribute()
        if hit is None:
            return False
        qn, _, a = hit
        new = self.names.mutate(a.name)
        return self._emit(RenameAttribute(qn.attr(a.name), new), ModelDifference(
            DiffKind.RenamedAttribute, _aref(qn.attr(a.name)), a.name, new, _aref(qn.attr(new))))

    def retype_attribute(self) -> bool:
        hit = self._free_attribute()
        if hit is None:
            return False
        qn, _, a = hit
        t = self.rng.choice([t for t in TYPES if t != a.type_name])
        ref = _aref(qn.attr(a.name))
        return self._emit(RetypeAttribute(ref.qname, t), ModelDifference(
            DiffKind.ChangedAttributeType, ref, a.type_name, t, ref, "type"))

    def change_cardinality(self) -> bool:
        hit = self._free_attribute()
        if hit is None:
            return False
        qn, _, a = hit
        card = self.rng.choice([k for k in CARDINALITIES if k != a.cardinality])
        ref = _aref(qn.attr(a.name))
        return self._emit(ChangeCardinality(ref.qname, card), ModelDifference(
            DiffKind.ChangedAttributeCardinality, ref, str(a.cardinality), str(card), ref, "cardinality"))

    def add_stereotype(self) -> bool:
        hit = self._free_class(lambda qn, c: any(s not in c.stereotypes for s in STEREOTYPES))
        if hit is None:
            return False
        qn, c = hit
        s = self.rng.choice([s for s in STEREOTYPES if s not in c.stereotypes])
        return self._emit(AddStereotype(qn, s), ModelDifference(
            DiffKind.AddedStereotype, _cref(qn), None, s, _cref(qn), "stereotype"))

    def remove_stereotype(self) -> bool:
        hit = self._free_class(lambda qn, c: bool(c.stereotypes))
        if hit is None:
            return False
        qn, c = hit
        s = self.rng.choice(sorted(c.stereotypes))
        return self._emit(RemoveStereotype(qn, s), ModelDifference(
            DiffKind.RemovedStereotype, _cref(qn), s, None, _cref(qn), "stereotype"))

    def add_association(self) -> bool:
        src = self._free_class()
        if src is None:
            return False
        tgt = self._free_class()
        if tgt is None:
            self.used.discard(src[0])
            return False
        a = Association(self.names.fresh(), src[0], tgt[0], self.rng.choice(CARDINALITIES),
                        self.rng.choice(CARDINALITIES))
        return self._emit(AddAssociation(a), ModelDifference(DiffKind.AddedAssociation, _asref(a.name)))

    def _free_association(self):
        free = [a for a in self.assocs if a.name not in self.used_assocs]
        if not free:
            return None
        a = self.rng.choice(free)
        self.used_assocs.add(a.name)
        return a

    def delete_association(self) -> bool:
        a = self._free_association()
        if a is None:
            return False
        return self._emit(DeleteAssociation(a.name),
                          ModelDifference(DiffKind.DeletedAssociation, _asref(a.name)))

    def change_association_end(self) -> bool:
        a = self._free_association()
        if a is None:
            return False
        ref = _asref(a.name)
        if self.rng.random() < 0.5:
            t = self._free_class(lambda qn, c: qn != a.target)
            if t is not None:
                return self._emit(ChangeAssociationEnd(a.name, target=t[0]), ModelDifference(
                    DiffKind.ChangedAssociationEnd, ref, str(a.target), str(t[0]), ref, "target"))
        card = self.rng.choice([k for k in CARDINALITIES if k != a.target_card])
        return self._emit(ChangeAssociationEnd(a.name, target_card=card), ModelDifference(
            DiffKind.ChangedAssociationEnd, ref, str(a.target_card), str(card), ref, "target_card"))

    def add_package(self) -> bool:
        parent = self.rng.choice(self.targets) if self.targets and self.rng.random() < 0.7 else None
        name = self.names.fresh()
        qn = QualifiedName((name,)) if parent is None else parent.child(name)
        return self._emit(AddPackage(qn), ModelDifference(DiffKind.AddedPackage, _pref(qn)))

    def delete_package(self) -> bool:
        free = [p for p in self.empty if p not in self.deleted_pkgs]
        if not free:
            return False
        p = self.rng.choice(free)
        self.deleted_pkgs.add(p)
        return self._emit(DeletePackage(p), ModelDifference(DiffKind.DeletedPackage, _pref(p)))

    def plan(self, count: int) -> None:
        kinds = list(EDIT_KINDS)
        self.rng.shuffle(kinds)
        attempts = 0
        while len(self.edits) < count and attempts < 20 * count + 50:
            kind = kinds[attempts] if attempts < len(kinds) else self.rng.choice(EDIT_KINDS)
            attempts += 1
            getattr(self, kind)()


@dataclass
class SyntheticCase:
    old: Model
    new: Model
    edits: list = field(default_factory=list)
    expected: tuple[ModelDifference, ...] = ()

    @property
    def manifest(self) -> str:
        return diff_to_lines(self.expected)

    def write(self, old_path, new_path, manifest_path=None) -> None:
        Path(old_path).write_text(serialize_model(self.old), encoding="utf-8")
        Path(new_path).write_text(serialize_model(self.new), encoding="utf-8")
        if manifest_path is not None:
            Path(manifest_path).write_text(self.manifest, encoding="utf-8")


def evolve(m: Model, edits: int, rng: random.Random) -> SyntheticCase:
    """Apply ``edits`` random edits to ``m`` and record the differences they inject."""
    names = _Names(rng, _model_names(m))
    planner = _EditPlanner(m, rng, names)
    planner.plan(edits)
    new = apply_edit_script(m, planner.edits)
    return SyntheticCase(m, new, planner.edits, canonicalize(planner.expected))


def _model_names(m: Model) -> set[str]:
    taken = {qn.name for qn, _ in m.iter_packages()}
    for qn, c in m.iter_classes():
        taken.add(qn.name)
        taken.update(a.name for a in c.attributes)
    taken.update(a.name for a in m.associations)
    return taken


def generate_synthetic(classes: int, edits: int, seed: int) -> SyntheticCase:
    """Deterministic (old, new, expected differences) triple for a seed."""
    if classes <= 0 or edits < 0:
        raise ValueError("class count must be positive and edit count non-negative")
    rng = random.Random(seed)
    names = _Names(rng)
    old = generate_model(classes, rng, names)
    planner = _EditPlanner(old, rng, names)
    planner.plan(edits)
    new = apply_edit_script(old, planner.edits)
    return SyntheticCase(old, new, planner.edits, canonicalize(planner.expected))


def version_chain(classes: int, versions: int, edits_per_step: int, seed: int) -> list[Model]:
    """Successive versions of one evolving model."""
    rng = random.Random(seed)
    names = _Names(rng)
    models = [generate_model(classes, rng, names)]
    for _ in range(versions - 1):
        planner = _EditPlanner(models[-1], rng, names)
        planner.plan(edits_per_step)
        models.append(apply_edit_script(models[-1], planner.edits))
    return models
