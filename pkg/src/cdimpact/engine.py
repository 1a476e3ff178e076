"""Evaluation of impact rules against a difference model."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .differ import DiffKind, DiffModel, ModelDifference
from .model import Attribute, ClassDecl, Model, resolve_ref
from .rules import (And, ConditionExpr, ExtensionDecl, ExtensionKind, HintTemplate,
                    ImpactRuleDecl, Not, Or, Placeholder, PredefinedCall, Probability,
                    ProviderRef, RuleSet, Severity)


class UnresolvedPolicy(enum.Enum):
    FAIL = "fail"
    FALSE = "false"
    FLAG = "flag"


class _Unresolved:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNRESOLVED"

    def __bool__(self) -> bool:
        raise TypeError("UNRESOLVED has no truth value")


UNRESOLVED = _Unresolved()


class EvaluationError(RuntimeError):
    """A rule could not be evaluated (unknown predefined condition, bad arity)."""


class UnresolvedNameError(EvaluationError):
    """A user condition or placeholder has no implementation under the FAIL policy."""

    def __init__(self, kind: str, name: str, rule: str | None = None):
        self.kind, self.name, self.rule = kind, name, rule
        where = f" in rule {rule!r}" if rule else ""
        super().__init__(f"unresolved {kind} '{name}'{where}")


@dataclass
class EngineConfig:
    persistent_stereotype: str = "persistent"
    # free-form inputs for registered providers (ORM file, property file, ...)
    artifacts: dict[str, Any] = field(default_factory=dict)


@dataclass
class EvaluationContext:
    difference: ModelDifference
    diff_model: DiffModel
    old: Model
    new: Model
    config: EngineConfig = field(default_factory=EngineConfig)

    @property
    def subject_model(self) -> Model:
        return self.new if self.difference.kind in _ADDITIONS else self.old

    @property
    def element(self):
        """The subject element, looked up on the side the subject names."""
        return resolve_ref(self.subject_model, self.difference.subject)

    @property
    def counterpart_element(self):
        cp = self.difference.counterpart
        return resolve_ref(self.new, cp) if cp is not None else None

    def element_has_stereotype(self, stereotype: str) -> bool:
        el = self.element
        return isinstance(el, (ClassDecl, Attribute)) and stereotype in el.stereotypes

    def is_persistent(self) -> bool:
        return self.element_has_stereotype(self.config.persistent_stereotype)


_ADDITIONS = {DiffKind.AddedPackage, DiffKind.AddedClass, DiffKind.AddedAttribute,
              DiffKind.AddedAssociation}


def _kind_condition_name(kind: DiffKind) -> str:
    return kind.value[0].lower() + kind.value[1:]


def _kind_condition(kind: DiffKind) -> Callable[[EvaluationContext], bool]:
    def check(ctx: EvaluationContext) -> bool:
        return ctx.difference.kind is kind
    check.__name__ = _kind_condition_name(kind)
    return check


def _persistent(kind: DiffKind) -> Callable[[EvaluationContext], bool]:
    def check(ctx: EvaluationContext) -> bool:
        return ctx.difference.kind is kind and ctx.is_persistent()
    return check


def _has_stereotype(ctx: EvaluationContext, stereotype: str) -> bool:
    return ctx.element_has_stereotype(stereotype)


def _name_matches(ctx: EvaluationContext, pattern: str) -> bool:
    return re.fullmatch(pattern, ctx.difference.subject.qname.name) is not None


PREDEFINED: dict[str, Callable[..., bool]] = {_kind_condition_name(k): _kind_condition(k) for k in DiffKind}
PREDEFINED.update({
    "elementHasStereotype": _has_stereotype,
    "elementNameMatches": _name_matches,
    "addedPersistentClass": _persistent(DiffKind.AddedClass),
    "deletedPersistentClass": _persistent(DiffKind.DeletedClass),
    "addedPersistentAttribute": _persistent(DiffKind.AddedAttribute),
    "deletedPersistentAttribute": _persistent(DiffKind.DeletedAttribute),
    "renamedPersistentAttribute": _persistent(DiffKind.RenamedAttribute),
})
PREDEFINED_ARITY: dict[str, int] = {name: 0 for name in PREDEFINED}
PREDEFINED_ARITY.update({"elementHasStereotype": 1, "elementNameMatches": 1})


def eval_predefined(name: str, args, ctx: EvaluationContext) -> bool:
    fn = PREDEFINED.get(name)
    if fn is None:
        raise EvaluationError(f"unknown predefined condition 'pc.{name}'")
    if len(args) != PREDEFINED_ARITY[name]:
        raise EvaluationError(f"'pc.{name}' takes {PREDEFINED_ARITY[name]} argument(s), got {len(args)}")
    return bool(fn(ctx, *args))


def _old_name(ctx: EvaluationContext) -> str | None:
    d = ctx.difference
    if d.kind in (DiffKind.RenamedPackage, DiffKind.RenamedClass, DiffKind.RenamedAttribute):
        return d.old_value
    return None if d.kind in _ADDITIONS else d.subject.qname.name


def _new_name(ctx: EvaluationContext) -> str | None:
    d = ctx.difference
    if d.kind in (DiffKind.RenamedPackage, DiffKind.RenamedClass, DiffKind.RenamedAttribute):
        return d.new_value
    if d.kind in _ADDITIONS:
        return d.subject.qname.name
    return d.counterpart.qname.name if d.counterpart is not None else None


BUILTIN_PLACEHOLDERS: dict[str, Callable[[EvaluationContext], Any]] = {
    "element.name": lambda ctx: ctx.difference.subject.qname.name,
    "element.qualifiedName": lambda ctx: str(ctx.difference.subject.qname),
    "change.description": lambda ctx: ctx.difference.description,
    "oldName": _old_name,
    "newName": _new_name,
}


class ExtensionRegistry:
    """Named conditions, placeholders and providers available to rules.

    Conditions and placeholders registered here take precedence over
    declarations loaded from an extension file. Providers are what
    ``define placeholder X = some.provider("arg");`` declarations point at.
    """

    def __init__(self) -> None:
        self.conditions: dict[str, Callable[..., bool]] = {}
        self.placeholders: dict[str, Callable[..., Any]] = {}
        self.providers: dict[str, Callable[..., Any]] = {}
        self.declared_conditions: dict[str, ConditionExpr] = {}
        self.declared_placeholders: dict[str, ProviderRef] = {}

    def register_condition(self, name: str, fn: Callable[..., bool]) -> None:
        self.conditions[name] = fn

    def register_placeholder(self, name: str, fn: Callable[..., Any]) -> None:
        self.placeholders[name] = fn

    def register_provider(self, path: str, fn: Callable[..., Any]) -> None:
        self.providers[path] = fn

    def load(self, decls: Iterable[ExtensionDecl]) -> ExtensionRegistry:
        for d in decls:
            if d.kind is ExtensionKind.CONDITION:
                self.declared_conditions[d.name] = d.body
            else:
                if d.body.path not in self.providers:
                    raise EvaluationError(f"placeholder '{d.name}' refers to unknown provider '{d.body.path}'")
                self.declared_placeholders[d.name] = d.body
        return self

    def condition_names(self) -> set[str]:
        return set(self.conditions) | set(self.declared_conditions)

    def placeholder_names(self) -> set[str]:
        return set(self.placeholders) | set(self.declared_placeholders) | set(BUILTIN_PLACEHOLDERS)


def evaluate_condition(expr: ConditionExpr, ctx: EvaluationContext, reg: ExtensionRegistry,
                       policy: UnresolvedPolicy = UnresolvedPolicy.FLAG, *, _rule: str | None = None,
                       _active: frozenset = frozenset()):
    """Three-valued, short-circuiting evaluation; returns True, False or UNRESOLVED."""
    if isinstance(expr, And):
        left = evaluate_condition(expr.left, ctx, reg, policy, _rule=_rule, _active=_active)
        if left is False:
            return False
        right = evaluate_condition(expr.right, ctx, reg, policy, _rule=_rule, _active=_active)
        if right is False:
            return False
        return UNRESOLVED if UNRESOLVED in (left, right) else True
    if isinstance(expr, Or):
        left = evaluate_condition(expr.left, ctx, reg, policy, _rule=_rule, _active=_active)
        if left is True:
            return True
        right = evaluate_condition(expr.right, ctx, reg, policy, _rule=_rule, _active=_active)
        if right is True:
            return True
        return UNRESOLVED if UNRESOLVED in (left, right) else False
    if isinstance(expr, Not):
        inner = evaluate_condition(expr.operand, ctx, reg, policy, _rule=_rule, _active=_active)
        return inner if inner is UNRESOLVED else not inner
    if isinstance(expr, PredefinedCall):
        return eval_predefined(expr.name, expr.args, ctx)
    fn = reg.conditions.get(expr.name)
    if fn is not None:
        return bool(fn(ctx, *expr.args))
    body = reg.declared_conditions.get(expr.name)
    if body is not None:
        if expr.name in _active:
            raise EvaluationError(f"cyclic condition '{expr.name}'")
        if expr.args:
            raise EvaluationError(f"declared condition '{expr.name}' takes no arguments")
        return evaluate_condition(body, ctx, reg, policy, _rule=_rule, _active=_active | {expr.name})
    if policy is UnresolvedPolicy.FAIL:
        raise UnresolvedNameError("condition", expr.name, _rule)
    return False if policy is UnresolvedPolicy.FALSE else UNRESOLVED


def _placeholder_value(name: str, ctx: EvaluationContext, reg: ExtensionRegistry):
    if name in reg.placeholders:
        return reg.placeholders[name](ctx)
    ref = reg.declared_placeholders.get(name)
    if ref is not None:
        return reg.providers[ref.path](ctx, *ref.args)
    if name in BUILTIN_PLACEHOLDERS:
        return BUILTIN_PLACEHOLDERS[name](ctx)
    return None


def expand_variants(t: HintTemplate, ctx: EvaluationContext, reg: ExtensionRegistry,
                    policy: UnresolvedPolicy = UnresolvedPolicy.FLAG,
                    rule: str | None = None) -> list[tuple[str, bool]]:
    """Expand ``t`` into (text, unresolved) variants.

    A provider returning a list fans the hint out into one variant per item
    (an empty list yields no variant); at most one list-valued placeholder
    may appear in a template.
    """
    parts: list[str] = []
    unresolved = False
    fan_at: int | None = None
    fan_values: list[str] = []
    for seg in t.segments:
        if not isinstance(seg, Placeholder):
            parts.append(seg.text)
            continue
        value = _placeholder_value(seg.name, ctx, reg)
        if value is None:
            if policy is UnresolvedPolicy.FAIL:
                raise UnresolvedNameError("placeholder", seg.name, rule)
            parts.append("{" + seg.name + ":unresolved}")
            unresolved = True
        elif isinstance(value, (list, tuple)):
            if fan_at is not None:
                raise EvaluationError("only one list-valued placeholder per hint is supported")
            fan_at = len(parts)
            fan_values = [str(v) for v in value]
            parts.append("")
        else:
            parts.append(str(value))
    if fan_at is None:
        return [("".join(parts), unresolved)]
    out = []
    for v in fan_values:
        parts[fan_at] = v
        out.append(("".join(parts), unresolved))
    return out


def expand_template(t: HintTemplate, ctx: EvaluationContext, reg: ExtensionRegistry,
                    policy: UnresolvedPolicy = UnresolvedPolicy.FLAG) -> str:
    variants = expand_variants(t, ctx, reg, policy)
    return "\n".join(text for text, _ in variants)


@dataclass(frozen=True)
class ChecklistHint:
    rule_name: str
    text: str
    cause: ModelDifference
    severity: Severity | None = None
    probability: Probability | None = None
    relevant_for: str | None = None
    unresolved: bool = False
    entry_index: int = 0

    def audiences(self) -> list[str]:
        if not self.relevant_for:
            return []
        return [t.strip() for t in self.relevant_for.split(",") if t.strip()]


def evaluate_rule(rule: ImpactRuleDecl, ctx: EvaluationContext, reg: ExtensionRegistry,
                  policy: UnresolvedPolicy = UnresolvedPolicy.FLAG) -> list[ChecklistHint]:
    hints: list[ChecklistHint] = []
    for idx, entry in enumerate(rule.entries):
        verdict = evaluate_condition(entry.condition, ctx, reg, policy, _rule=rule.name)
        if verdict is False:
            continue
        for text, flagged in expand_variants(entry.hint, ctx, reg, policy, rule.name):
            hints.append(ChecklistHint(rule.name, text, ctx.difference, rule.severity,
                                       rule.probability, rule.relevant_for,
                                       flagged or verdict is UNRESOLVED, idx))
    return hints


def passes_filters(h: ChecklistHint, relevant_for: str | None = None,
                   min_severity: Severity | None = None) -> bool:
    if relevant_for is not None and relevant_for not in h.audiences():
        return False
    if min_severity is not None and (h.severity or Severity.NORMAL).rank < min_severity.rank:
        return False
    return True


def evaluate_all(rs: RuleSet, dm: DiffModel, reg: ExtensionRegistry,
                 policy: UnresolvedPolicy = UnresolvedPolicy.FLAG, *,
                 relevant_for: str | None = None, min_severity: Severity | None = None,
                 config: EngineConfig | None = None) -> list[ChecklistHint]:
    """Run every rule over every difference: rule-major, then canonical difference order."""
    config = config or EngineConfig()
    contexts = [EvaluationContext(d, dm, dm.old, dm.new, config) for d in dm]
    out: list[ChecklistHint] = []
    for rule in rs:
        if not rule.entries:
            continue
        for ctx in contexts:
            for h in evaluate_rule(rule, ctx, reg, policy):
                if passes_filters(h, relevant_for, min_severity):
                    out.append(h)
    return out

