"""Impact-rule and extension file parsing, printing and validation."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .lexer import ParseError, Token, TokenStream, tokenize

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PLACEHOLDER_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*")


# ---------------------------------------------------------------------------
# condition AST

@dataclass(frozen=True)
class And:
    left: ConditionExpr
    right: ConditionExpr


@dataclass(frozen=True)
class Or:
    left: ConditionExpr
    right: ConditionExpr


@dataclass(frozen=True)
class Not:
    operand: ConditionExpr


@dataclass(frozen=True)
class PredefinedCall:
    """``pc.<name>(...)``; the ``pc.`` prefix is not part of ``name``."""

    name: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class UserCall:
    name: str
    args: tuple[str, ...] = ()


ConditionExpr = Union[And, Or, Not, PredefinedCall, UserCall]


def iter_calls(expr: ConditionExpr) -> Iterator[PredefinedCall | UserCall]:
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, (And, Or)):
            stack.extend((node.right, node.left))
        elif isinstance(node, Not):
            stack.append(node.operand)
        else:
            yield node


# ---------------------------------------------------------------------------
# hint templates

@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Placeholder:
    name: str


@dataclass(frozen=True)
class HintTemplate:
    segments: tuple[Literal | Placeholder, ...]

    @classmethod
    def parse(cls, raw: str, line: int = 0, column: int = 0, source: str | None = None) -> HintTemplate:
        """Parse the raw (still escaped) body of a hint string literal."""
        segs: list[Literal | Placeholder] = []
        buf: list[str] = []
        escapes = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "{": "{", "}": "}"}
        i = 0
        while i < len(raw):
            ch = raw[i]
            if ch == "\\" and i + 1 < len(raw):
                buf.append(escapes.get(raw[i + 1], raw[i + 1]))
                i += 2
            elif ch == "{":
                end = raw.find("}", i + 1)
                name = raw[i + 1:end] if end >= 0 else ""
                if end < 0 or not _PLACEHOLDER_NAME.fullmatch(name):
                    raise ParseError("malformed placeholder; literal braces must be escaped as \\{ \\}",
                                     line, column + i + 1, source)
                if buf:
                    segs.append(Literal("".join(buf)))
                    buf = []
                segs.append(Placeholder(name))
                i = end + 1
            elif ch == "}":
                raise ParseError("unmatched '}' in hint; escape literal braces as \\}",
                                 line, column + i + 1, source)
            else:
                buf.append(ch)
                i += 1
        if buf:
            segs.append(Literal("".join(buf)))
        return cls(tuple(segs))

    @property
    def placeholders(self) -> list[str]:
        return [s.name for s in self.segments if isinstance(s, Placeholder)]

    def source_text(self) -> str:
        out = []
        for s in self.segments:
            if isinstance(s, Placeholder):
                out.append("{" + s.name + "}")
            else:
                out.append(_escape(s.text, braces=True))
        return '"' + "".join(out) + '"'


def _escape(text: str, braces: bool = False) -> str:
    text = (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\t", "\\t"))
    if braces:
        text = text.replace("{", "\\{").replace("}", "\\}")
    return text


def quote(text: str) -> str:
    return '"' + _escape(text) + '"'


# ---------------------------------------------------------------------------
# rules

class Severity(enum.Enum):
    MINOR = "minor"
    NORMAL = "normal"
    CRITICAL = "critical"

    @property
    def rank(self) -> int:
        return ("minor", "normal", "critical").index(self.value)


class Probability(enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


@dataclass(frozen=True)
class ImpactEntry:
    condition: ConditionExpr
    hint: HintTemplate
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ImpactRuleDecl:
    name: str
    description: str
    severity: Severity | None = None
    probability: Probability | None = None
    relevant_for: str | None = None
    entries: tuple[ImpactEntry, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[ImpactRuleDecl, ...] = ()

    def __post_init__(self) -> None:
        names: set[str] = set()
        for r in self.rules:
            if r.name in names:
                raise ValueError(f"duplicate rule name {r.name!r}")
            names.add(r.name)

    def __iter__(self) -> Iterator[ImpactRuleDecl]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def get(self, name: str) -> ImpactRuleDecl | None:
        for r in self.rules:
            if r.name == name:
                return r
        return None

    def index(self, name: str) -> int:
        for i, r in enumerate(self.rules):
            if r.name == name:
                return i
        raise KeyError(name)

    def concat(self, other: RuleSet) -> RuleSet:
        return RuleSet(self.rules + other.rules)


class ExtensionKind(enum.Enum):
    CONDITION = "condition"
    PLACEHOLDER = "placeholder"


@dataclass(frozen=True)
class ProviderRef:
    path: str  # dotted provider name, e.g. ``orm.excerpt``
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExtensionDecl:
    kind: ExtensionKind
    name: str
    body: ConditionExpr | ProviderRef
    line: int = field(default=0, compare=False)


# ---------------------------------------------------------------------------
# parsing

_META = ("description", "severity", "probability", "relevantFor")


class _Parser:
    def __init__(self, text: str, source: str | None):
        self.source = source
        self.ts = TokenStream(tokenize(text, source), source)

    def fail(self, message: str, tok: Token) -> ParseError:
        return ParseError(message, tok.line, tok.column, self.source)

    # orExpr := andExpr ('||' andExpr)*
    def or_expr(self) -> ConditionExpr:
        left = self.and_expr()
        while self.ts.accept_sym("||"):
            left = Or(left, self.and_expr())
        return left

    def and_expr(self) -> ConditionExpr:
        left = self.unary()
        while self.ts.accept_sym("&&"):
            left = And(left, self.unary())
        return left

    def unary(self) -> ConditionExpr:
        ts = self.ts
        if ts.accept_sym("!"):
            return Not(self.unary())
        if ts.accept_sym("("):
            inner = self.or_expr()
            ts.expect_sym(")")
            return inner
        if ts.at("IDENT"):
            return self.call()
        raise ts.error(["condition", "'!'", "'('"])

    def call(self) -> ConditionExpr:
        ts = self.ts
        predefined = False
        if ts.at_keyword("pc") and ts.peek().kind == "SYM" and ts.peek().value == ".":
            ts.advance()
            ts.advance()
            predefined = True
        name = ts.expect_ident("condition name").value
        args = self.args()
        return PredefinedCall(name, args) if predefined else UserCall(name, args)

    def args(self) -> tuple[str, ...]:
        ts = self.ts
        ts.expect_sym("(")
        out: list[str] = []
        if not ts.at_sym(")"):
            out.append(ts.expect_string("string argument").value)
            while ts.accept_sym(","):
                out.append(ts.expect_string("string argument").value)
        ts.expect_sym(")")
        return tuple(out)

    def rule_file(self) -> RuleSet:
        ts = self.ts
        rules: list[ImpactRuleDecl] = []
        seen: set[str] = set()
        while not ts.at("EOF"):
            start = ts.current
            if not ts.at_keyword("impactRule"):
                raise ts.error(["'impactRule'"])
            rule = self.rule()
            if rule.name in seen:
                raise self.fail(f"duplicate rule name {rule.name!r}", start)
            seen.add(rule.name)
            rules.append(rule)
        return RuleSet(tuple(rules))

    def rule(self) -> ImpactRuleDecl:
        ts = self.ts
        head = ts.expect_keyword("impactRule")
        name_tok = ts.expect_string("rule name")
        if not name_tok.value.strip():
            raise self.fail("rule name must not be empty", name_tok)
        ts.expect_sym("{")
        meta: dict[str, object] = {}
        while not ts.at_keyword("impact"):
            tok = ts.current
            if tok.kind != "IDENT":
                raise ts.error(["'description'", "'severity'", "'probability'",
                                "'relevantFor'", "'impact'"])
            if tok.value not in _META:
                raise self.fail(f"unknown metadata keyword '{tok.value}'; expected one of "
                                "description, severity, probability, relevantFor, impact", tok)
            if tok.value in meta:
                raise self.fail(f"'{tok.value}' given twice in rule {name_tok.value!r}", tok)
            ts.advance()
            ts.expect_sym("=")
            meta[tok.value] = self.meta_value(tok.value)
        if "description" not in meta:
            raise self.fail(f"rule {name_tok.value!r} lacks a description", ts.current)
        ts.expect_keyword("impact")
        ts.expect_sym("{")
        entries: list[ImpactEntry] = []
        while not ts.at_sym("}"):
            start = ts.current
            cond = self.or_expr()
            ts.expect_sym("=>")
            hint_tok = ts.expect_string("checklist hint")
            hint = HintTemplate.parse(hint_tok.raw, hint_tok.line, hint_tok.column, self.source)
            if not hint.segments:
                raise self.fail("checklist hint must not be empty", hint_tok)
            entries.append(ImpactEntry(cond, hint, start.line))
        ts.expect_sym("}")
        ts.expect_sym("}")
        return ImpactRuleDecl(name_tok.value, meta["description"], meta.get("severity"),
                              meta.get("probability"), meta.get("relevantFor"),
                              tuple(entries), head.line)

    def meta_value(self, key: str):
        ts = self.ts
        if key in ("description", "relevantFor"):
            return ts.expect_string(f"{key} string").value
        enum_cls = Severity if key == "severity" else Probability
        valid = "|".join(m.value for m in enum_cls)
        tok = ts.current
        if tok.kind != "IDENT":
            raise ts.error([valid])
        try:
            value = enum_cls(tok.value)
        except ValueError:
            raise self.fail(f"invalid {key} '{tok.value}'; valid values are {valid}", tok) from None
        ts.advance()
        return value

    def extension_file(self, known_providers: Iterable[str] | None) -> list[ExtensionDecl]:
        ts = self.ts
        known = set(known_providers) if known_providers is not None else None
        decls: list[ExtensionDecl] = []
        seen: set[tuple[ExtensionKind, str]] = set()
        while not ts.at("EOF"):
            head = ts.expect_keyword("define")
            kind_tok = ts.current
            if not (ts.at_keyword("condition") or ts.at_keyword("placeholder")):
                raise ts.error(["'condition'", "'placeholder'"])
            ts.advance()
            kind = ExtensionKind(kind_tok.value)
            name_tok = ts.expect_ident(f"{kind.value} name")
            ts.expect_sym("=")
            if kind is ExtensionKind.CONDITION:
                body: ConditionExpr | ProviderRef = self.or_expr()
            else:
                ptok = ts.current
                parts = [ts.expect_ident("provider name").value]
                while ts.accept_sym("."):
                    parts.append(ts.expect_ident("provider name").value)
                path = ".".join(parts)
                if known is not None and path not in known:
                    raise self.fail(f"unknown provider '{path}'", ptok)
                ts.expect_sym("(")
                args: list[str] = []
                while not ts.at_sym(")"):
                    args.append(ts.expect_string("string argument").value)
                    ts.accept_sym(",")
                ts.expect_sym(")")
                body = ProviderRef(path, tuple(args))
            ts.expect_sym(";")
            key = (kind, name_tok.value)
            if key in seen:
                raise self.fail(f"duplicate {kind.value} '{name_tok.value}'", name_tok)
            seen.add(key)
            decls.append(ExtensionDecl(kind, name_tok.value, body, head.line))
        self.check_cycles(decls)
        return decls

    def check_cycles(self, decls: list[ExtensionDecl]) -> None:
        graph = {d.name: [c.name for c in iter_calls(d.body) if isinstance(c, UserCall)]
                 for d in decls if d.kind is ExtensionKind.CONDITION}
        lines = {d.name: d.line for d in decls if d.kind is ExtensionKind.CONDITION}
        state: dict[str, int] = {}

        def visit(n: str, path: list[str]) -> None:
            state[n] = 1
            for m in graph.get(n, ()):
                if m not in graph:
                    continue
                if state.get(m) == 1:
                    cycle = path[path.index(m):] + [m] if m in path else [n, m]
                    raise ParseError("cyclic condition definition: " + " -> ".join(cycle),
                                     lines[n], 1, self.source)
                if m not in state:
                    visit(m, path + [m])
            state[n] = 2

        for name in graph:
            if name not in state:
                visit(name, [name])


def parse_rules(text: str, source: str | None = None) -> RuleSet:
    """Parse a ``.ir`` rule file."""
    return _Parser(text, source).rule_file()


def parse_condition(text: str) -> ConditionExpr:
    p = _Parser(text, None)
    expr = p.or_expr()
    if not p.ts.at("EOF"):
        raise p.ts.error(["'&&'", "'||'", "end of input"])
    return expr


def parse_extensions(text: str, source: str | None = None,
                     known_providers: Iterable[str] | None = None) -> list[ExtensionDecl]:
    """Parse a ``.irx`` extension file. Provider names are checked when
    ``known_providers`` is given; cyclic condition definitions are rejected."""
    return _Parser(text, source).extension_file(known_providers)


# ---------------------------------------------------------------------------
# printing

_PREC = {Or: 1, And: 2}


def format_condition(expr: ConditionExpr) -> str:
    if isinstance(expr, (And, Or)):
        op = " || " if isinstance(expr, Or) else " && "
        prec = _PREC[type(expr)]
        left = format_condition(expr.left)
        right = format_condition(expr.right)
        if isinstance(expr.left, (And, Or)) and _PREC[type(expr.left)] < prec:
            left = f"({left})"
        # both operators are left-associative: an equal-precedence right child needs parens
        if isinstance(expr.right, (And, Or)) and _PREC[type(expr.right)] <= prec:
            right = f"({right})"
        return left + op + right
    if isinstance(expr, Not):
        inner = format_condition(expr.operand)
        if isinstance(expr.operand, (And, Or)):
            inner = f"({inner})"
        return "!" + inner
    args = ", ".join(quote(a) for a in expr.args)
    prefix = "pc." if isinstance(expr, PredefinedCall) else ""
    return f"{prefix}{expr.name}({args})"


def format_rule(rule: ImpactRuleDecl) -> str:
    lines = [f"impactRule {quote(rule.name)} {{", f"    description = {quote(rule.description)}"]
    if rule.severity is not None:
        lines.append(f"    severity = {rule.severity.value}")
    if rule.probability is not None:
        lines.append(f"    probability = {rule.probability.value}")
    if rule.relevant_for is not None:
        lines.append(f"    relevantFor = {quote(rule.relevant_for)}")
    lines.append("    impact {")
    for e in rule.entries:
        lines.append(f"        {format_condition(e.condition)} =>")
        lines.append(f"            {e.hint.source_text()}")
    lines.append("    }")
    lines.append("}")
    return "\n".join(lines)


def format_rules(rs: RuleSet) -> str:
    return "".join(format_rule(r) + "\n" for r in rs)


def format_extensions(decls: Iterable[ExtensionDecl]) -> str:
    out = []
    for d in decls:
        if isinstance(d.body, ProviderRef):
            args = ", ".join(quote(a) for a in d.body.args)
            out.append(f"define placeholder {d.name} = {d.body.path}({args});")
        else:
            out.append(f"define condition {d.name} = {format_condition(d.body)};")
    return "".join(line + "\n" for line in out)


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    code: str
    message: str
    rule: str | None = None
    line: int = 0

    def __str__(self) -> str:
        where = f"rule {self.rule!r}" if self.rule else "extensions"
        at = f", line {self.line}" if self.line else ""
        return f"{self.severity}: {self.code}: {self.message} ({where}{at})"


UNRESOLVED_CONDITION = "UNRESOLVED_CONDITION"
UNRESOLVED_PLACEHOLDER = "UNRESOLVED_PLACEHOLDER"
UNKNOWN_PREDEFINED = "UNKNOWN_PREDEFINED"
ARITY_MISMATCH = "ARITY_MISMATCH"


def validate(rs: RuleSet, exts: Iterable[ExtensionDecl],
             known_predefined: Mapping[str, int] | Iterable[str],
             *, registered_conditions: Iterable[str] = (),
             registered_placeholders: Iterable[str] = (),
             builtin_placeholders: Iterable[str] = ()) -> list[Diagnostic]:
    """Check names and arities; returns diagnostics (empty when clean).

    ``known_predefined`` maps predefined condition names to their arity; a
    plain set of names skips arity checks.
    """
    exts = list(exts)
    arity = dict(known_predefined) if isinstance(known_predefined, Mapping) else \
        {n: None for n in known_predefined}
    declared_conds = {d.name for d in exts if d.kind is ExtensionKind.CONDITION}
    reg_conds = set(registered_conditions)
    placeholders = ({d.name for d in exts if d.kind is ExtensionKind.PLACEHOLDER}
                    | set(registered_placeholders) | set(builtin_placeholders))
    out: list[Diagnostic] = []

    def check_expr(expr: ConditionExpr, rule: str | None, line: int) -> None:
        for call in iter_calls(expr):
            if isinstance(call, PredefinedCall):
                if call.name not in arity:
                    out.append(Diagnostic("error", UNKNOWN_PREDEFINED,
                                          f"unknown predefined condition 'pc.{call.name}'", rule, line))
                elif arity[call.name] is not None and arity[call.name] != len(call.args):
                    out.append(Diagnostic(
                        "error", ARITY_MISMATCH,
                        f"'pc.{call.name}' takes {arity[call.name]} argument(s), got {len(call.args)}",
                        rule, line))
            elif call.name in reg_conds:
                continue
            elif call.name in declared_conds:
                if call.args:
                    out.append(Diagnostic("error", ARITY_MISMATCH,
                                          f"declared condition '{call.name}' takes no arguments",
                                          rule, line))
            else:
                out.append(Diagnostic("warning", UNRESOLVED_CONDITION,
                                      f"condition '{call.name}' has no implementation", rule, line))

    for d in exts:
        if d.kind is ExtensionKind.CONDITION:
            check_expr(d.body, None, d.line)
    for rule in rs:
        for e in rule.entries:
            check_expr(e.condition, rule.name, e.line)
            for name in e.hint.placeholders:
                if name not in placeholders:
                    out.append(Diagnostic("warning", UNRESOLVED_PLACEHOLDER,
                                          f"placeholder '{{{name}}}' has no provider", rule.name, e.line))
    return out
