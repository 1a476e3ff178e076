"""Command line entry point: models in, checklist out."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .builtin import BuiltinSettings, builtin_registry, load_builtin_extensions, load_builtin_rules
from .builtin.artifacts import ArtifactError, parse_orm_file, parse_property_file
from .builtin.naming import NamingConvention
from .builtin.sql import DEFAULT_EXTENSIONS
from .checklist import RenderMode, build_checklist, checklist_to_json, render_text
from .differ import DEFAULT_THRESHOLD, DiffError, diff_models, diff_to_json, diff_to_lines, parse_presettings
from .engine import (BUILTIN_PLACEHOLDERS, PREDEFINED_ARITY, EngineConfig, EvaluationError,
                     UnresolvedNameError, UnresolvedPolicy, evaluate_all)
from .lexer import ParseError
from .model import ModelError, parse_model
from .rules import RuleSet, Severity, parse_extensions, parse_rules, validate
from .synthetic import generate_synthetic

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNRESOLVED = 2

log = logging.getLogger("cdimpact")


class UsageError(Exception):
    """Invalid combination of options."""


@dataclass
class RunConfig:
    old: Path | None = None
    new: Path | None = None
    presettings: Path | None = None
    rules: list[Path] = field(default_factory=list)
    extensions: Path | None = None
    builtin_rules: bool = False
    mode: RenderMode = RenderMode.SHORT
    out: Path | None = None
    json_out: Path | None = None
    diff_out: Path | None = None
    diff_format: str = "lines"
    unresolved: UnresolvedPolicy = UnresolvedPolicy.FLAG
    threshold: float = DEFAULT_THRESHOLD
    naming: NamingConvention = NamingConvention.UPPER_SNAKE
    orm_file: Path | None = None
    property_file: Path | None = None
    sources: Path | None = None
    source_extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    relevant_for: str | None = None
    min_severity: Severity | None = None
    persistent_stereotype: str = "persistent"
    gen_synthetic: tuple[int, int, int] | None = None

    def check(self) -> None:
        if self.old is None or self.new is None:
            raise UsageError("--old and --new are required")
        if self.old.resolve() == self.new.resolve():
            raise UsageError("--old and --new must name different files")
        if not 0.0 < self.threshold <= 1.0:
            raise UsageError(f"--threshold must be in (0, 1], got {self.threshold}")
        if self.gen_synthetic is None and not self.rules and not self.builtin_rules:
            raise UsageError("give at least one --rules file or --builtin-rules")


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _synthetic(cfg: RunConfig) -> int:
    classes, edits, seed = cfg.gen_synthetic
    case = generate_synthetic(classes, edits, seed)
    case.write(cfg.old, cfg.new)
    _write(cfg.out, case.manifest)
    return EXIT_OK


def _load_rules(cfg: RunConfig) -> RuleSet:
    rs = load_builtin_rules() if cfg.builtin_rules else RuleSet()
    for path in cfg.rules:
        rs = rs.concat(parse_rules(_read(path), str(path)))
    return rs


def run(cfg: RunConfig) -> int:
    """Run the whole pipeline; returns the process exit status."""
    try:
        cfg.check()
        if cfg.gen_synthetic is not None:
            return _synthetic(cfg)
        old = parse_model(_read(cfg.old), str(cfg.old))
        new = parse_model(_read(cfg.new), str(cfg.new))
        ps = parse_presettings(_read(cfg.presettings), str(cfg.presettings)) if cfg.presettings else None
        dm = diff_models(old, new, ps, cfg.threshold)
        if cfg.diff_out is not None:
            text = diff_to_json(dm) if cfg.diff_format == "json" else diff_to_lines(dm)
            cfg.diff_out.write_text(text, encoding="utf-8")

        settings = BuiltinSettings(
            orm=parse_orm_file(_read(cfg.orm_file), str(cfg.orm_file)) if cfg.orm_file else None,
            properties=(parse_property_file(_read(cfg.property_file), str(cfg.property_file))
                        if cfg.property_file else None),
            source_root=cfg.sources, extensions=cfg.source_extensions, naming=cfg.naming)
        reg = builtin_registry(settings)
        decls = load_builtin_extensions() if cfg.builtin_rules else []
        if cfg.extensions is not None:
            decls += parse_extensions(_read(cfg.extensions), str(cfg.extensions), reg.providers)
        reg.load(decls)
        rs = _load_rules(cfg)

        diags = validate(rs, decls, PREDEFINED_ARITY, registered_conditions=reg.conditions,
                         registered_placeholders=reg.placeholders,
                         builtin_placeholders=BUILTIN_PLACEHOLDERS)
        for d in diags:
            print(d, file=sys.stderr)
        if any(d.severity == "error" for d in diags):
            return EXIT_INPUT

        config = EngineConfig(persistent_stereotype=cfg.persistent_stereotype)
        hints = evaluate_all(rs, dm, reg, cfg.unresolved, relevant_for=cfg.relevant_for,
                             min_severity=cfg.min_severity, config=config)
        checklist = build_checklist(rs, hints)
        _write(cfg.out, render_text(checklist, cfg.mode))
        if cfg.json_out is not None:
            cfg.json_out.write_text(checklist_to_json(checklist), encoding="utf-8")
        return EXIT_OK
    except UnresolvedNameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    except (UsageError, ParseError, ModelError, DiffError, ArtifactError, EvaluationError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _triple(text: str) -> tuple[int, int, int]:
    try:
        n, e, seed = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,E,SEED, got {text!r}") from None
    if n <= 0 or e < 0:
        raise argparse.ArgumentTypeError("N must be positive and E non-negative")
    return n, e, seed


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cdimpact",
        description="Compare two class-diagram models and print a checklist of follow-up work.")
    p.add_argument("--old", type=Path, help="old model (.cd); output path with --gen-synthetic")
    p.add_argument("--new", type=Path, help="new model (.cd); output path with --gen-synthetic")
    p.add_argument("--presettings", type=Path, help="user presettings (.ups)")
    p.add_argument("--rules", type=Path, action="append", default=[], help="rule file (.ir), repeatable")
    p.add_argument("--extensions", type=Path, help="extension declarations (.irx)")
    p.add_argument("--builtin-rules", action="store_true", help="load the shipped rule pack")
    p.add_argument("--mode", choices=[m.value for m in RenderMode], default="short")
    p.add_argument("--out", type=Path, help="checklist output (default stdout)")
    p.add_argument("--json-out", type=Path, help="structured checklist output")
    p.add_argument("--diff-out", type=Path, help="write the difference model here")
    p.add_argument("--diff-format", choices=["lines", "json"], default="lines")
    p.add_argument("--unresolved", choices=[u.value for u in UnresolvedPolicy], default="flag")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="similarity threshold")
    p.add_argument("--naming", choices=[n.value for n in NamingConvention], default="upper_snake")
    p.add_argument("--orm-file", type=Path)
    p.add_argument("--property-file", type=Path)
    p.add_argument("--sources", type=Path, help="source tree scanned for SQL usages")
    p.add_argument("--source-ext", default=",".join(DEFAULT_EXTENSIONS),
                   help="comma separated file extensions to scan")
    p.add_argument("--relevant-for", help="keep only hints for this audience tag")
    p.add_argument("--min-severity", choices=[s.value for s in Severity])
    p.add_argument("--persistent-stereotype", default="persistent")
    p.add_argument("--gen-synthetic", type=_triple, metavar="N,E,SEED",
                   help="write a synthetic model pair to --old/--new and the manifest to --out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        old=args.old, new=args.new, presettings=args.presettings, rules=list(args.rules),
        extensions=args.extensions, builtin_rules=args.builtin_rules, mode=RenderMode(args.mode),
        out=args.out, json_out=args.json_out, diff_out=args.diff_out, diff_format=args.diff_format,
        unresolved=UnresolvedPolicy(args.unresolved), threshold=args.threshold,
        naming=NamingConvention(args.naming), orm_file=args.orm_file,
        property_file=args.property_file, sources=args.sources,
        source_extensions=tuple(e.strip() for e in args.source_ext.split(",") if e.strip()),
        relevant_for=args.relevant_for,
        min_severity=Severity(args.min_severity) if args.min_severity else None,
        persistent_stereotype=args.persistent_stereotype, gen_synthetic=args.gen_synthetic)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
