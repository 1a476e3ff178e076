"""Class-diagram data model and the textual ``.cd`` model format."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, Union

from .lexer import ParseError, TokenStream, tokenize

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ModelError(ValueError):
    """A model violates one of its structural invariants."""


def _check_ident(name: str, what: str = "identifier") -> str:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise ModelError(f"invalid {what}: {name!r}")
    return name


@dataclass(frozen=True)
class QualifiedName:
    """Dotted path to a package or class, optionally with ``#attr``."""

    segments: tuple[str, ...]
    attribute: str | None = None

    def __post_init__(self) -> None:
        if not self.segments:
            raise ModelError("qualified name needs at least one segment")
        for seg in self.segments:
            _check_ident(seg, "name segment")
        if self.attribute is not None:
            _check_ident(self.attribute, "attribute name")

    @classmethod
    def parse(cls, text: str) -> QualifiedName:
        if text.count("#") > 1:
            raise ModelError(f"malformed reference {text!r}: more than one '#'")
        path, sep, attr = text.partition("#")
        segments = tuple(path.split(".")) if path else ()
        if not segments or not all(segments):
            raise ModelError(f"malformed reference {text!r}")
        try:
            return cls(segments, attr if sep else None)
        except ModelError as exc:
            raise ModelError(f"malformed reference {text!r}: {exc}") from None

    @classmethod
    def coerce(cls, value: Union[str, QualifiedName]) -> QualifiedName:
        return value if isinstance(value, QualifiedName) else cls.parse(value)

    @property
    def name(self) -> str:
        return self.attribute if self.attribute is not None else self.segments[-1]

    @property
    def container(self) -> QualifiedName | None:
        if self.attribute is not None:
            return QualifiedName(self.segments)
        if len(self.segments) == 1:
            return None
        return QualifiedName(self.segments[:-1])

    def child(self, name: str) -> QualifiedName:
        return QualifiedName(self.segments + (name,))

    def attr(self, name: str) -> QualifiedName:
        return QualifiedName(self.segments, name)

    def with_name(self, name: str) -> QualifiedName:
        if self.attribute is not None:
            return QualifiedName(self.segments, name)
        return QualifiedName(self.segments[:-1] + (name,))

    def __str__(self) -> str:
        path = ".".join(self.segments)
        return f"{path}#{self.attribute}" if self.attribute is not None else path


def _qn_under(container: QualifiedName | None, name: str) -> QualifiedName:
    return QualifiedName((name,)) if container is None else container.child(name)


@dataclass(frozen=True)
class Cardinality:
    lower: int = 1
    upper: int | None = 1  # None means unbounded

    def __post_init__(self) -> None:
        if self.lower < 0 or (self.upper is not None and self.upper < 0):
            raise ModelError(f"negative cardinality bound in {self}")
        if self.upper is not None and self.lower > self.upper:
            raise ModelError(f"cardinality lower bound exceeds upper bound in {self}")

    @classmethod
    def parse(cls, text: str) -> Cardinality:
        m = re.fullmatch(r"\[\s*(\d+)\s*(?:\.\.\s*(\d+|\*)\s*)?\]", text.strip())
        if not m:
            raise ModelError(f"malformed cardinality {text!r}")
        lower = int(m.group(1))
        if m.group(2) is None:
            return cls(lower, lower)
        return cls(lower, None if m.group(2) == "*" else int(m.group(2)))

    def narrows(self, old: Cardinality) -> bool:
        """True if some value admitted by ``old`` is no longer admitted."""
        if self.lower > old.lower:
            return True
        if self.upper is None:
            return False
        return old.upper is None or self.upper < old.upper

    def __str__(self) -> str:
        if self.upper is None:
            return f"[{self.lower}..*]"
        if self.upper == self.lower:
            return f"[{self.lower}]"
        return f"[{self.lower}..{self.upper}]"


ONE = Cardinality(1, 1)


@dataclass(frozen=True)
class Attribute:
    name: str
    type_name: str
    cardinality: Cardinality = ONE
    stereotypes: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    attributes: tuple[Attribute, ...] = ()
    stereotypes: frozenset[str] = frozenset()
    superclass: QualifiedName | None = None

    def attribute(self, name: str) -> Attribute | None:
        for a in self.attributes:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class Association:
    name: str
    source: QualifiedName
    target: QualifiedName
    source_card: Cardinality = ONE
    target_card: Cardinality = ONE


@dataclass(frozen=True)
class Package:
    name: str
    packages: tuple[Package, ...] = ()
    classes: tuple[ClassDecl, ...] = ()


class ElementKind(enum.Enum):
    PACKAGE = "package"
    CLASS = "class"
    ATTRIBUTE = "attribute"
    ASSOCIATION = "association"


@dataclass(frozen=True)
class ElementRef:
    kind: ElementKind
    qname: QualifiedName

    def __post_init__(self) -> None:
        if (self.kind is ElementKind.ATTRIBUTE) != (self.qname.attribute is not None):
            raise ModelError(f"{self.kind.value} reference {self.qname} has wrong shape")

    @classmethod
    def parse(cls, kind: ElementKind, text: str) -> ElementRef:
        return cls(kind, QualifiedName.parse(text))

    def __str__(self) -> str:
        return str(self.qname)


@dataclass(frozen=True)
class _Index:
    packages: dict[str, Package]
    classes: dict[str, ClassDecl]
    attributes: dict[str, Attribute]
    associations: dict[str, Association]


@dataclass(frozen=True)
class Model:
    packages: tuple[Package, ...] = ()
    associations: tuple[Association, ...] = ()

    @cached_property
    def _index(self) -> _Index:
        packages: dict[str, Package] = {}
        classes: dict[str, ClassDecl] = {}
        attributes: dict[str, Attribute] = {}
        for qn, pkg in self.iter_packages():
            packages[str(qn)] = pkg
        for qn, cls in self.iter_classes():
            classes[str(qn)] = cls
            for a in cls.attributes:
                attributes[f"{qn}#{a.name}"] = a
        assocs = {a.name: a for a in self.associations}
        return _Index(packages, classes, attributes, assocs)

    def iter_packages(self) -> Iterator[tuple[QualifiedName, Package]]:
        stack = [(QualifiedName((p.name,)), p) for p in reversed(self.packages)]
        while stack:
            qn, pkg = stack.pop()
            yield qn, pkg
            stack.extend((qn.child(p.name), p) for p in reversed(pkg.packages))

    def iter_classes(self) -> Iterator[tuple[QualifiedName, ClassDecl]]:
        for qn, pkg in self.iter_packages():
            for cls in pkg.classes:
                yield qn.child(cls.name), cls

    def iter_attributes(self) -> Iterator[tuple[QualifiedName, Attribute]]:
        for qn, cls in self.iter_classes():
            for a in cls.attributes:
                yield qn.attr(a.name), a

    def package(self, qname: Union[str, QualifiedName]) -> Package | None:
        return self._index.packages.get(str(qname))

    def class_(self, qname: Union[str, QualifiedName]) -> ClassDecl | None:
        return self._index.classes.get(str(qname))

    def attribute(self, qname: Union[str, QualifiedName]) -> Attribute | None:
        return self._index.attributes.get(str(qname))

    def association(self, name: str) -> Association | None:
        return self._index.associations.get(str(name))

    @property
    def class_count(self) -> int:
        return len(self._index.classes)


ModelElement = Union[Package, ClassDecl, Attribute, Association]


def resolve_ref(m: Model, ref: ElementRef) -> ModelElement | None:
    """Look up the element named by ``ref``; None when absent or of another kind."""
    key = str(ref.qname)
    if ref.kind is ElementKind.PACKAGE:
        return m.package(key)
    if ref.kind is ElementKind.CLASS:
        return m.class_(key)
    if ref.kind is ElementKind.ATTRIBUTE:
        return m.attribute(key)
    if len(ref.qname.segments) != 1:
        return None
    return m.association(key)


def validate_model(m: Model) -> None:
    """Raise ModelError if ``m`` breaks a naming or reference invariant."""
    seen: set[str] = set()
    for qn, pkg in m.iter_packages():
        _check_ident(pkg.name, "package name")
        key = str(qn)
        if key in seen:
            raise ModelError(f"duplicate element name '{key}'")
        seen.add(key)
        for cls in pkg.classes:
            _check_ident(cls.name, "class name")
            ckey = f"{key}.{cls.name}"
            if ckey in seen:
                raise ModelError(f"duplicate element name '{ckey}'")
            seen.add(ckey)
            names: set[str] = set()
            for a in cls.attributes:
                _check_ident(a.name, "attribute name")
                _check_ident(a.type_name, "type name")
                if a.name in names:
                    raise ModelError(f"duplicate attribute '{ckey}#{a.name}'")
                names.add(a.name)
    for qn, cls in m.iter_classes():
        if cls.superclass is not None and m.class_(cls.superclass) is None:
            raise ModelError(f"superclass '{cls.superclass}' of '{qn}' does not resolve")
    names = set()
    for assoc in m.associations:
        _check_ident(assoc.name, "association name")
        if assoc.name in names:
            raise ModelError(f"duplicate association '{assoc.name}'")
        names.add(assoc.name)
        for end in (assoc.source, assoc.target):
            if m.class_(end) is None:
                raise ModelError(f"association '{assoc.name}' end '{end}' does not resolve")


# ---------------------------------------------------------------------------
# parsing

class _ModelParser:
    def __init__(self, text: str, source: str | None):
        self.ts = TokenStream(tokenize(text, source), source)
        self.source = source
        self.class_names: set[str] = set()
        self.refs: list[tuple[str, QualifiedName, object]] = []

    def fail(self, message: str, tok) -> ParseError:
        return ParseError(message, tok.line, tok.column, self.source)

    def parse(self) -> Model:
        ts = self.ts
        packages: list[Package] = []
        seen: set[str] = set()
        while ts.at_keyword("package"):
            start = ts.current
            pkg = self.package(None)
            if pkg.name in seen:
                raise self.fail(f"duplicate package '{pkg.name}'", start)
            seen.add(pkg.name)
            packages.append(pkg)
        associations: list[Association] = []
        anames: set[str] = set()
        while ts.at_keyword("association"):
            start = ts.current
            assoc = self.association()
            if assoc.name in anames:
                raise self.fail(f"duplicate association '{assoc.name}'", start)
            anames.add(assoc.name)
            associations.append(assoc)
        if not ts.at("EOF"):
            expected = ["'association'"] if associations else ["'package'", "'association'"]
            raise ts.error(expected + ["end of input"])
        for what, ref, tok in self.refs:
            if str(ref) not in self.class_names:
                raise self.fail(f"{what} '{ref}' does not resolve to a class", tok)
        return Model(tuple(packages), tuple(associations))

    def qname(self) -> QualifiedName:
        parts = [self.ts.expect_ident("qualified name").value]
        while self.ts.accept_sym("."):
            parts.append(self.ts.expect_ident().value)
        return QualifiedName(tuple(parts))

    def stereotypes(self) -> frozenset[str]:
        out = set()
        while self.ts.accept_sym("<<"):
            out.add(self.ts.expect_ident("stereotype name").value)
            self.ts.expect_sym(">>")
        return frozenset(out)

    def cardinality(self, required: bool) -> Cardinality:
        ts = self.ts
        if not ts.at_sym("["):
            if required:
                raise ts.error(["'['"])
            return ONE
        start = ts.advance()
        lower = int(ts.expect("INT", None, "integer").value)
        upper: int | None = lower
        if ts.accept_sym(".."):
            if ts.accept_sym("*"):
                upper = None
            else:
                upper = int(ts.expect("INT", None, "integer or '*'").value)
        ts.expect_sym("]")
        try:
            return Cardinality(lower, upper)
        except ModelError as exc:
            raise self.fail(str(exc), start) from None

    def package(self, parent: QualifiedName | None) -> Package:
        ts = self.ts
        ts.expect_keyword("package")
        name = ts.expect_ident("package name").value
        qn = _qn_under(parent, name)
        ts.expect_sym("{")
        packages: list[Package] = []
        classes: list[ClassDecl] = []
        local: set[str] = set()
        while not ts.at_sym("}"):
            start = ts.current
            if ts.at_keyword("package"):
                elem = self.package(qn)
            elif ts.at_sym("<<") or ts.at_keyword("class"):
                elem = self.class_decl(qn)
            else:
                raise ts.error(["'package'", "'class'", "'<<'", "'}'"])
            if elem.name in local:
                raise self.fail(f"duplicate element name '{qn.child(elem.name)}'", start)
            local.add(elem.name)
            if isinstance(elem, Package):
                packages.append(elem)
            else:
                classes.append(elem)
                self.class_names.add(str(qn.child(elem.name)))
        ts.expect_sym("}")
        return Package(name, tuple(packages), tuple(classes))

    def class_decl(self, pkg: QualifiedName) -> ClassDecl:
        ts = self.ts
        stereos = self.stereotypes()
        ts.expect_keyword("class")
        name = ts.expect_ident("class name").value
        superclass = None
        if ts.at_keyword("extends"):
            ts.advance()
            tok = ts.current
            superclass = self.qname()
            self.refs.append(("superclass", superclass, tok))
        ts.expect_sym("{")
        attrs: list[Attribute] = []
        names: set[str] = set()
        while not ts.at_sym("}"):
            if not (ts.at_sym("<<") or ts.at("IDENT")):
                raise ts.error(["attribute", "'}'"])
            start = ts.current
            a = self.attribute()
            if a.name in names:
                raise self.fail(f"duplicate attribute '{pkg.child(name)}#{a.name}'", start)
            names.add(a.name)
            attrs.append(a)
        ts.expect_sym("}")
        return ClassDecl(name, tuple(attrs), stereos, superclass)

    def attribute(self) -> Attribute:
        ts = self.ts
        stereos = self.stereotypes()
        name = ts.expect_ident("attribute name").value
        ts.expect_sym(":")
        type_name = ts.expect_ident("type name").value
        card = self.cardinality(required=False)
        return Attribute(name, type_name, card, stereos)

    def association(self) -> Association:
        ts = self.ts
        ts.expect_keyword("association")
        name = ts.expect_ident("association name").value
        scard = self.cardinality(required=True)
        tok = ts.current
        source = self.qname()
        self.refs.append((f"association '{name}' source", source, tok))
        ts.expect_sym("->")
        tcard = self.cardinality(required=True)
        tok = ts.current
        target = self.qname()
        self.refs.append((f"association '{name}' target", target, tok))
        return Association(name, source, target, scard, tcard)


def parse_model(text: str, source: str | None = None) -> Model:
    """Parse ``.cd`` text into a Model, rejecting duplicates and dangling references."""
    return _ModelParser(text, source).parse()


def _stereo_prefix(stereos: frozenset[str]) -> str:
    return "".join(f"<<{s}>> " for s in sorted(stereos))


def serialize_model(m: Model) -> str:
    lines: list[str] = []

    def emit_package(pkg: Package, depth: int) -> None:
        pad = "    " * depth
        lines.append(f"{pad}package {pkg.name} {{")
        for sub in pkg.packages:
            emit_package(sub, depth + 1)
        for cls in pkg.classes:
            ext = f" extends {cls.superclass}" if cls.superclass is not None else ""
            head = f"{pad}    {_stereo_prefix(cls.stereotypes)}class {cls.name}{ext} {{"
            if not cls.attributes:
                lines.append(head + "}")
                continue
            lines.append(head)
            for a in cls.attributes:
                lines.append(f"{pad}        {_stereo_prefix(a.stereotypes)}"
                             f"{a.name}: {a.type_name} {a.cardinality}")
            lines.append(f"{pad}    }}")
        lines.append(f"{pad}}}")

    for pkg in m.packages:
        emit_package(pkg, 0)
    for a in m.associations:
        lines.append(f"association {a.name} {a.source_card} {a.source} -> {a.target_card} {a.target}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# edit scripts

@dataclass(frozen=True)
class AddPackage:
    qname: QualifiedName


@dataclass(frozen=True)
class DeletePackage:
    qname: QualifiedName


@dataclass(frozen=True)
class RenamePackage:
    qname: QualifiedName
    new_name: str


@dataclass(frozen=True)
class AddClass:
    package: QualifiedName
    cls: ClassDecl


@dataclass(frozen=True)
class DeleteClass:
    qname: QualifiedName


@dataclass(frozen=True)
class RenameClass:
    qname: QualifiedName
    new_name: str


@dataclass(frozen=True)
class MoveClass:
    qname: QualifiedName
    new_package: QualifiedName


@dataclass(frozen=True)
class SetSuperclass:
    qname: QualifiedName
    superclass: QualifiedName | None


@dataclass(frozen=True)
class AddAttribute:
    owner: QualifiedName
    attribute: Attribute


@dataclass(frozen=True)
class DeleteAttribute:
    qname: QualifiedName


@dataclass(frozen=True)
class RenameAttribute:
    qname: QualifiedName
    new_name: str


@dataclass(frozen=True)
class MoveAttribute:
    qname: QualifiedName
    new_owner: QualifiedName


@dataclass(frozen=True)
class RetypeAttribute:
    qname: QualifiedName
    type_name: str


@dataclass(frozen=True)
class ChangeCardinality:
    qname: QualifiedName
    cardinality: Cardinality


@dataclass(frozen=True)
class AddStereotype:
    qname: QualifiedName  # class or attribute
    stereotype: str


@dataclass(frozen=True)
class RemoveStereotype:
    qname: QualifiedName
    stereotype: str


@dataclass(frozen=True)
class AddAssociation:
    association: Association


@dataclass(frozen=True)
class DeleteAssociation:
    name: str


@dataclass(frozen=True)
class ChangeAssociationEnd:
    name: str
    source: QualifiedName | None = None
    target: QualifiedName | None = None
    source_card: Cardinality | None = None
    target_card: Cardinality | None = None


Edit = Union[AddPackage, DeletePackage, RenamePackage, AddClass, DeleteClass, RenameClass,
             MoveClass, SetSuperclass, AddAttribute, DeleteAttribute, RenameAttribute,
             MoveAttribute, RetypeAttribute, ChangeCardinality, AddStereotype,
             RemoveStereotype, AddAssociation, DeleteAssociation, ChangeAssociationEnd]


class EditError(ModelError):
    """An edit could not be applied."""


# Mutable mirror of the model. Cross references (superclass, association ends)
# point at _MClass objects so renames and moves never need reference rewriting.

@dataclass(eq=False)
class _MPackage:
    name: str
    parent: _MPackage | None
    packages: dict[str, _MPackage] = field(default_factory=dict)
    classes: dict[str, _MClass] = field(default_factory=dict)
    alive: bool = True

    def qname(self) -> QualifiedName:
        parts = []
        node: _MPackage | None = self
        while node is not None:
            parts.append(node.name)
            node = node.parent
        return QualifiedName(tuple(reversed(parts)))


@dataclass(eq=False)
class _MClass:
    name: str
    package: _MPackage
    stereotypes: set[str]
    attributes: dict[str, Attribute]
    superclass: object = None  # _MClass | None
    alive: bool = True

    def qname(self) -> QualifiedName:
        return self.package.qname().child(self.name)


@dataclass(eq=False)
class _MAssoc:
    name: str
    source: _MClass
    target: _MClass
    source_card: Cardinality
    target_card: Cardinality


class _Workspace:
    def __init__(self, m: Model):
        self.root: dict[str, _MPackage] = {}
        self.assocs: dict[str, _MAssoc] = {}
        pending: list[tuple[_MClass, QualifiedName]] = []

        def load(pkg: Package, parent: _MPackage | None) -> _MPackage:
            node = _MPackage(pkg.name, parent)
            for sub in pkg.packages:
                node.packages[sub.name] = load(sub, node)
            for cls in pkg.classes:
                mc = _MClass(cls.name, node, set(cls.stereotypes),
                             {a.name: a for a in cls.attributes})
                if cls.superclass is not None:
                    pending.append((mc, cls.superclass))
                node.classes[cls.name] = mc
            return node

        for pkg in m.packages:
            self.root[pkg.name] = load(pkg, None)
        for mc, sup in pending:
            mc.superclass = self.find_class(sup)
        for a in m.associations:
            self.assocs[a.name] = _MAssoc(a.name, self.find_class(a.source),
                                          self.find_class(a.target), a.source_card, a.target_card)

    def find_package(self, qn: QualifiedName) -> _MPackage:
        if qn.attribute is not None:
            raise EditError(f"'{qn}' is not a package name")
        children = self.root
        node = None
        for seg in qn.segments:
            node = children.get(seg)
            if node is None:
                raise EditError(f"package '{qn}' not found")
            children = node.packages
        return node

    def find_class(self, qn: QualifiedName) -> _MClass:
        container = qn.container if qn.attribute is None else None
        if container is None:
            raise EditError(f"class '{qn}' not found")
        pkg = self.find_package(container)
        cls = pkg.classes.get(qn.name)
        if cls is None:
            raise EditError(f"class '{qn}' not found")
        return cls

    def find_attribute(self, qn: QualifiedName) -> tuple[_MClass, Attribute]:
        if qn.attribute is None:
            raise EditError(f"'{qn}' is not an attribute reference")
        cls = self.find_class(QualifiedName(qn.segments))
        a = cls.attributes.get(qn.attribute)
        if a is None:
            raise EditError(f"attribute '{qn}' not found")
        return cls, a

    def siblings(self, parent: _MPackage | None) -> tuple[dict, dict]:
        if parent is None:
            return self.root, {}
        return parent.packages, parent.classes

    def ensure_free(self, parent: _MPackage | None, name: str) -> None:
        pkgs, classes = self.siblings(parent)
        if name in pkgs or name in classes:
            where = f"{parent.qname()}.{name}" if parent else name
            raise EditError(f"duplicate element name '{where}'")

    def apply(self, e: Edit) -> None:
        if isinstance(e, AddPackage):
            parent = self.find_package(e.qname.container) if e.qname.container else None
            _check_ident(e.qname.name, "package name")
            self.ensure_free(parent, e.qname.name)
            node = _MPackage(e.qname.name, parent)
            if parent is None:
                self.root[node.name] = node
            else:
                parent.packages[node.name] = node
        elif isinstance(e, DeletePackage):
            node = self.find_package(e.qname)
            pkgs, _ = self.siblings(node.parent)
            del pkgs[node.name]
            self._kill(node)
        elif isinstance(e, RenamePackage):
            node = self.find_package(e.qname)
            _check_ident(e.new_name, "package name")
            self.ensure_free(node.parent, e.new_name)
            pkgs, _ = self.siblings(node.parent)
            del pkgs[node.name]
            node.name = e.new_name
            pkgs[node.name] = node
        elif isinstance(e, AddClass):
            pkg = self.find_package(e.package)
            _check_ident(e.cls.name, "class name")
            self.ensure_free(pkg, e.cls.name)
            attrs: dict[str, Attribute] = {}
            for a in e.cls.attributes:
                if a.name in attrs:
                    raise EditError(f"duplicate attribute '{a.name}' in added class")
                attrs[a.name] = a
            mc = _MClass(e.cls.name, pkg, set(e.cls.stereotypes), attrs)
            if e.cls.superclass is not None:
                mc.superclass = self.find_class(e.cls.superclass)
            pkg.classes[mc.name] = mc
        elif isinstance(e, DeleteClass):
            cls = self.find_class(e.qname)
            del cls.package.classes[cls.name]
            cls.alive = False
        elif isinstance(e, RenameClass):
            cls = self.find_class(e.qname)
            _check_ident(e.new_name, "class name")
            self.ensure_free(cls.package, e.new_name)
            del cls.package.classes[cls.name]
            cls.name = e.new_name
            cls.package.classes[cls.name] = cls
        elif isinstance(e, MoveClass):
            cls = self.find_class(e.qname)
            dest = self.find_package(e.new_package)
            if dest is not cls.package:
                self.ensure_free(dest, cls.name)
                del cls.package.classes[cls.name]
                cls.package = dest
                dest.classes[cls.name] = cls
        elif isinstance(e, SetSuperclass):
            cls = self.find_class(e.qname)
            cls.superclass = None if e.superclass is None else self.find_class(e.superclass)
        elif isinstance(e, AddAttribute):
            cls = self.find_class(e.owner)
            _check_ident(e.attribute.name, "attribute name")
            if e.attribute.name in cls.attributes:
                raise EditError(f"duplicate attribute '{e.owner}#{e.attribute.name}'")
            cls.attributes[e.attribute.name] = e.attribute
        elif isinstance(e, DeleteAttribute):
            cls, a = self.find_attribute(e.qname)
            del cls.attributes[a.name]
        elif isinstance(e, RenameAttribute):
            cls, a = self.find_attribute(e.qname)
            _check_ident(e.new_name, "attribute name")
            if e.new_name in cls.attributes:
                raise EditError(f"duplicate attribute '{QualifiedName(e.qname.segments)}#{e.new_name}'")
            renamed = replace(a, name=e.new_name)
            cls.attributes = {(renamed.name if k == a.name else k): (renamed if k == a.name else v)
                              for k, v in cls.attributes.items()}
        elif isinstance(e, MoveAttribute):
            cls, a = self.find_attribute(e.qname)
            dest = self.find_class(e.new_owner)
            if dest is not cls:
                if a.name in dest.attributes:
                    raise EditError(f"duplicate attribute '{e.new_owner}#{a.name}'")
                del cls.attributes[a.name]
                dest.attributes[a.name] = a
        elif isinstance(e, RetypeAttribute):
            cls, a = self.find_attribute(e.qname)
            _check_ident(e.type_name, "type name")
            cls.attributes[a.name] = replace(a, type_name=e.type_name)
        elif isinstance(e, ChangeCardinality):
            cls, a = self.find_attribute(e.qname)
            cls.attributes[a.name] = replace(a, cardinality=e.cardinality)
        elif isinstance(e, (AddStereotype, RemoveStereotype)):
            adding = isinstance(e, AddStereotype)
            _check_ident(e.stereotype, "stereotype")
            if e.qname.attribute is not None:
                cls, a = self.find_attribute(e.qname)
                stereos = a.stereotypes | {e.stereotype} if adding else a.stereotypes - {e.stereotype}
                cls.attributes[a.name] = replace(a, stereotypes=frozenset(stereos))
            else:
                cls = self.find_class(e.qname)
                if adding:
                    cls.stereotypes.add(e.stereotype)
                else:
                    cls.stereotypes.discard(e.stereotype)
        elif isinstance(e, AddAssociation):
            a = e.association
            _check_ident(a.name, "association name")
            if a.name in self.assocs:
                raise EditError(f"duplicate association '{a.name}'")
            self.assocs[a.name] = _MAssoc(a.name, self.find_class(a.source),
                                          self.find_class(a.target), a.source_card, a.target_card)
        elif isinstance(e, DeleteAssociation):
            if e.name not in self.assocs:
                raise EditError(f"association '{e.name}' not found")
            del self.assocs[e.name]
        elif isinstance(e, ChangeAssociationEnd):
            a = self.assocs.get(e.name)
            if a is None:
                raise EditError(f"association '{e.name}' not found")
            if e.source is not None:
                a.source = self.find_class(e.source)
            if e.target is not None:
                a.target = self.find_class(e.target)
            if e.source_card is not None:
                a.source_card = e.source_card
            if e.target_card is not None:
                a.target_card = e.target_card
        else:
            raise EditError(f"unknown edit {e!r}")

    def _kill(self, node: _MPackage) -> None:
        node.alive = False
        for cls in node.classes.values():
            cls.alive = False
        for sub in node.packages.values():
            self._kill(sub)

    def freeze(self) -> Model:
        def ref(cls: _MClass, what: str) -> QualifiedName:
            if not cls.alive:
                raise EditError(f"{what} refers to deleted class '{cls.name}'")
            return cls.qname()

        def build(node: _MPackage) -> Package:
            classes = []
            for c in node.classes.values():
                sup = ref(c.superclass, f"superclass of '{c.qname()}'") if c.superclass else None
                classes.append(ClassDecl(c.name, tuple(c.attributes.values()),
                                         frozenset(c.stereotypes), sup))
            return Package(node.name, tuple(build(p) for p in node.packages.values()),
                           tuple(classes))

        packages = tuple(build(p) for p in self.root.values())
        assocs = tuple(
            Association(a.name, ref(a.source, f"association '{a.name}'"),
                        ref(a.target, f"association '{a.name}'"), a.source_card, a.target_card)
            for a in self.assocs.values())
        return Model(packages, assocs)


def apply_edit_script(m: Model, edits) -> Model:
    """Apply ``edits`` in order and return the resulting model.

    The input model is left untouched. Raises EditError when an edit target
    does not resolve or the result would break a model invariant (for example
    deleting a class that is still referenced).
    """
    edits = list(edits)
    if not edits:
        return m
    ws = _Workspace(m)
    for i, e in enumerate(edits):
        try:
            ws.apply(e)
        except ModelError as exc:
            raise EditError(f"edit {i} ({type(e).__name__}): {exc}") from None
    result = ws.freeze()
    validate_model(result)
    return result
