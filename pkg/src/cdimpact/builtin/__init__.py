"""The shipped rule pack: XML migration, SQL query, ORM file and property file analyses.

The rules live in ``data/builtin.ir`` and ``data/builtin.irx`` and run through
the ordinary rule engine. This module only supplies the registered
conditions and placeholder providers they refer to.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

from ..differ import DiffKind, DiffModel, ModelDifference
from ..engine import (ChecklistHint, EngineConfig, EvaluationContext, ExtensionRegistry,
                      UnresolvedPolicy, evaluate_all)
from ..model import Cardinality
from ..rules import ExtensionDecl, RuleSet, parse_extensions, parse_rules
from .artifacts import (ArtifactError, OrmEntry, OrmMappingFile, PropertyFile, parse_orm_file,
                        parse_property_file)
from .naming import NamingConvention, to_column_name, to_table_name
from .sql import DEFAULT_EXTENSIONS, SqlScanHit, schema_identifier, sql_scan

XML_MIGRATION_RULE = "XML migration analysis"
SQL_RULE = "SQL query analysis"
ORM_RULE = "ORM file analysis"
PROPERTY_RULE = "Property file analysis"
DEFAULT_PROPERTY_FILE = "core.properties"

__all__ = [
    "XML_MIGRATION_RULE", "SQL_RULE", "ORM_RULE", "PROPERTY_RULE", "DEFAULT_PROPERTY_FILE",
    "BuiltinSettings", "builtin_registry", "load_builtin", "load_builtin_rules", "load_builtin_extensions",
    "builtin_rules_text", "builtin_extensions_text", "xml_migration_analysis", "sql_analysis",
    "orm_analysis", "property_key_analysis", "ArtifactError", "OrmEntry", "OrmMappingFile", "PropertyFile",
    "parse_orm_file", "parse_property_file", "NamingConvention", "to_table_name", "to_column_name",
    "SqlScanHit", "sql_scan",
]


def builtin_rules_text() -> str:
    return resources.files(__package__).joinpath("data/builtin.ir").read_text(encoding="utf-8")


def builtin_extensions_text() -> str:
    return resources.files(__package__).joinpath("data/builtin.irx").read_text(encoding="utf-8")


def load_builtin_rules() -> RuleSet:
    return parse_rules(builtin_rules_text(), "builtin.ir")


def load_builtin_extensions() -> list[ExtensionDecl]:
    return parse_extensions(builtin_extensions_text(), "builtin.irx")


@dataclass
class BuiltinSettings:
    """Artifacts and conventions the shipped providers consult."""

    orm: OrmMappingFile | None = None
    properties: PropertyFile | None = None
    property_file_name: str = DEFAULT_PROPERTY_FILE
    source_root: Path | None = None
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    naming: NamingConvention = NamingConvention.UPPER_SNAKE
    # property key for a class name and a suffix from the rule ("" or "S")
    key_for: Callable[[str, str], str] = lambda name, suffix: name.upper() + suffix
    _scan: tuple | None = field(default=None, repr=False)

    @property
    def property_file_label(self) -> str:
        if self.properties is not None and self.properties.name:
            return self.properties.name
        return self.property_file_name

    def hits_for(self, dm: DiffModel, persistent: str) -> dict[ModelDifference, list[SqlScanHit]]:
        # one scan per difference model, shared by all hints
        if self._scan is None or self._scan[0] is not dm:
            by_diff: dict[ModelDifference, list[SqlScanHit]] = {}
            for h in sql_scan(dm, self.source_root, self.extensions,
                              persistent=persistent, naming=self.naming):
                by_diff.setdefault(h.difference, []).append(h)
            self._scan = (dm, by_diff)
        return self._scan[1]


def _migration_stub(ctx: EvaluationContext) -> str | None:
    d = ctx.difference
    if d.kind is not DiffKind.RenamedAttribute:
        return None
    owner = d.subject.qname.container
    return (f'RenameElementMigration(owner="{owner}", from="{d.old_value}", '
            f'to="{d.new_value}")')


def builtin_registry(settings: BuiltinSettings | None = None) -> ExtensionRegistry:
    """Registry with every condition and provider the shipped pack needs."""
    s = settings or BuiltinSettings()
    reg = ExtensionRegistry()

    def key(ctx: EvaluationContext, suffix: str) -> str:
        return s.key_for(ctx.difference.subject.qname.name, suffix)

    def key_missing(ctx: EvaluationContext, suffix: str) -> bool:
        return s.properties is None or key(ctx, suffix) not in s.properties

    def key_present(ctx: EvaluationContext, suffix: str) -> bool:
        return s.properties is not None and key(ctx, suffix) in s.properties

    def affects_schema(ctx: EvaluationContext) -> bool:
        return schema_identifier(ctx.difference, ctx.diff_model,
                                 ctx.config.persistent_stereotype, s.naming) is not None

    def narrowed(ctx: EvaluationContext) -> bool:
        d = ctx.difference
        if d.kind is not DiffKind.ChangedAttributeCardinality:
            return False
        return Cardinality.parse(d.new_value).narrows(Cardinality.parse(d.old_value))

    def excerpt(ctx: EvaluationContext) -> str | None:
        if s.orm is None:
            return None
        entry = s.orm.lookup(ctx.difference.subject.qname)
        return entry.text if entry else None

    def sql_identifier(ctx: EvaluationContext) -> str | None:
        return schema_identifier(ctx.difference, ctx.diff_model,
                                 ctx.config.persistent_stereotype, s.naming)

    def sql_usages(ctx: EvaluationContext) -> list[str] | None:
        if s.source_root is None:
            return None
        hits = s.hits_for(ctx.diff_model, ctx.config.persistent_stereotype)
        return [h.location for h in hits.get(ctx.difference, [])]

    reg.register_condition("propertyKeyMissing", key_missing)
    reg.register_condition("propertyKeyPresent", key_present)
    reg.register_condition("affectsPersistentSchema", affects_schema)
    reg.register_condition("narrowedCardinality", narrowed)
    reg.register_condition("persistentElement", lambda ctx: ctx.is_persistent())
    reg.register_provider("orm.excerpt", excerpt)
    reg.register_provider("properties.fileName", lambda ctx: s.property_file_label)
    reg.register_provider("properties.key", key)
    reg.register_provider("sql.identifier", sql_identifier)
    reg.register_provider("sql.usages", sql_usages)
    reg.register_provider("migration.stub", _migration_stub)
    reg.register_provider("change.oldValue", lambda ctx: ctx.difference.old_value)
    reg.register_provider("change.newValue", lambda ctx: ctx.difference.new_value)
    return reg


def load_builtin(settings: BuiltinSettings | None = None) -> tuple[RuleSet, ExtensionRegistry]:
    reg = builtin_registry(settings)
    reg.load(load_builtin_extensions())
    return load_builtin_rules(), reg


def _run_single(rule_name: str, dm: DiffModel, settings: BuiltinSettings,
                config: EngineConfig | None) -> list[ChecklistHint]:
    rules, reg = load_builtin(settings)
    only = RuleSet((rules.get(rule_name),))
    return evaluate_all(only, dm, reg, UnresolvedPolicy.FLAG, config=config)


def xml_migration_analysis(dm: DiffModel, *, config: EngineConfig | None = None) -> list[ChecklistHint]:
    return _run_single(XML_MIGRATION_RULE, dm, BuiltinSettings(), config)


def sql_analysis(dm: DiffModel, source_root: str | Path | None,
                 extensions: tuple[str, ...] = DEFAULT_EXTENSIONS, *,
                 naming: NamingConvention = NamingConvention.UPPER_SNAKE,
                 config: EngineConfig | None = None) -> list[ChecklistHint]:
    settings = BuiltinSettings(source_root=Path(source_root) if source_root else None,
                               extensions=tuple(extensions), naming=naming)
    return _run_single(SQL_RULE, dm, settings, config)


def orm_analysis(dm: DiffModel, orm: OrmMappingFile | None = None, *,
                 config: EngineConfig | None = None) -> list[ChecklistHint]:
    return _run_single(ORM_RULE, dm, BuiltinSettings(orm=orm), config)


def property_key_analysis(dm: DiffModel, pf: PropertyFile | None = None, *,
                          config: EngineConfig | None = None) -> list[ChecklistHint]:
    return _run_single(PROPERTY_RULE, dm, BuiltinSettings(properties=pf), config)
