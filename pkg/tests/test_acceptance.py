"""Acceptance criteria; each test prints one ``PASS``/``FAIL`` line."""
import contextlib
import random
import statistics
import time
from pathlib import Path

import pytest

from cdimpact.builtin import load_builtin, sql_scan
from cdimpact.builtin.sql import schema_identifier
from cdimpact.checklist import RenderMode, build_checklist, render_text
from cdimpact.differ import DiffKind, canonicalize, diff_models, match_models, parse_presettings
from cdimpact.engine import EvaluationContext, eval_predefined, evaluate_all
from cdimpact.model import parse_model
from cdimpact.rules import (And, Literal, Placeholder, PredefinedCall, Severity, UserCall, format_rules,
                            parse_extensions, parse_rules)
from cdimpact.synthetic import generate_model, generate_synthetic, version_chain

from conftest import ADDED_ACTIVE_EXT, ECU_NEW, ECU_OLD, RENAME_PRESETTING, ORM_RULE_TEXT


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def run(number, title):
        info = {}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as exc:
            with capsys.disabled():
                print(f"\nACCEPTANCE {number} {title}: FAIL ({type(exc).__name__}: {str(exc)[:200]})")
            raise
        elapsed = time.perf_counter() - start
        detail = ", ".join(f"{k}={v}" for k, v in info.items())
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {title}: PASS ({elapsed:.2f}s{', ' + detail if detail else ''})")
    return run


def normalize(text):
    return [" ".join(line.split()) for line in text.splitlines() if line.strip()]


def test_1_ecu_checklist(criterion):
    with criterion(1, "checklist example reproduction") as info:
        start = time.perf_counter()
        old, new = parse_model(ECU_OLD), parse_model(ECU_NEW)
        rs, reg = load_builtin()
        reg.load(parse_extensions(ADDED_ACTIVE_EXT))
        dm = diff_models(old, new)
        hints = evaluate_all(rs, dm, reg)
        text = render_text(build_checklist(rs, hints), RenderMode.SHORT)
        elapsed = time.perf_counter() - start
        cause = "(Causing model change: Added class 'de.test.ECU')"
        assert normalize(text) == [
            "ORM file analysis:", "=====",
            f"- Add entry to mapping file for new class. {cause}",
            "Property file analysis:", "=====",
            f"- Add these entries to the property file core.properties: -ECU {cause}",
            f"- Add these entries to the property file core.properties: -ECUS {cause}",
        ]
        assert elapsed < 1.0
        info["pipeline_s"] = f"{elapsed:.3f}"


def test_2_grammar_goldens(criterion):
    with criterion(2, "rule and presetting grammar goldens"):
        start = time.perf_counter()
        (r,) = rs = parse_rules(ORM_RULE_TEXT)
        assert (r.name, r.description) == ("ORM File Analysis", "This rule checks ...")
        assert [e.condition for e in r.entries] == [
            And(PredefinedCall("addedPersistentClass"), UserCall("addedActiveClass")),
            PredefinedCall("renamedPersistentAttribute")]
        assert r.entries[0].hint.segments == (Literal("Add entry to mapping file for new class."),)
        assert r.entries[1].hint.segments == (Literal("Rename entry in mapping file. Excerpt from file: "),
                                              Placeholder("ORMFileExcerpt"))
        assert parse_rules(format_rules(rs)) == rs

        ps = parse_presettings(RENAME_PRESETTING)
        (p,) = ps
        assert (p.instruction.value, str(p.subject), p.target) == ("renamed", "de.TroubleCd#name", "newName")
        again = parse_presettings("\n".join(str(x) for x in ps))
        assert [(x.instruction, x.subject, x.target) for x in again] == [(p.instruction, p.subject, p.target)]
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0


def test_3_diff_oracle(criterion):
    with criterion(3, "diff oracle over random seeds") as info:
        seeds, edits_total = 1000, 0
        covered = set()
        for seed in range(seeds):
            rng = random.Random(seed)
            classes = rng.randint(5, 200)
            edits = rng.randint(0, max(1, classes // 4))
            case = generate_synthetic(classes, edits, seed)
            got = diff_models(case.old, case.new)
            assert canonicalize(got) == case.expected, f"seed {seed}"
            edits_total += len(case.edits)
            covered |= {d.kind for d in case.expected}
        assert {DiffKind.AddedClass, DiffKind.DeletedClass, DiffKind.RenamedClass, DiffKind.MovedClass,
                DiffKind.RenamedAttribute, DiffKind.ChangedAttributeType,
                DiffKind.ChangedAttributeCardinality} <= covered
        info.update(seeds=seeds, edits=edits_total, kinds=len(covered))


def test_4_presetting_precedence(criterion):
    with criterion(4, "presetting precedence") as info:
        # a rename to a dissimilar name is seen as delete + add by the heuristic
        old = parse_model("package de { <<persistent>> class TroubleCd { <<persistent>> name: String [1] } }")
        new = parse_model("package de { <<persistent>> class TroubleCd { <<persistent>> label: String [1] } }")
        plain = diff_models(old, new)
        assert sorted(d.kind.value for d in plain) == ["AddedAttribute", "DeletedAttribute"]
        preset = diff_models(old, new, parse_presettings('renamed "de.TroubleCd#name" to "label";'))
        assert [(d.kind, str(d.subject.qname), d.new_value) for d in preset] == [
            (DiffKind.RenamedAttribute, "de.TroubleCd#name", "label")]

        # the literal presetting pair also needs a retype to defeat the heuristic
        old = parse_model("package de { class TroubleCd { name: String [1] } }")
        new = parse_model("package de { class TroubleCd { newName: Integer [1] } }")
        plain = diff_models(old, new)
        assert sorted(d.kind.value for d in plain) == ["AddedAttribute", "DeletedAttribute"]
        preset = diff_models(old, new, parse_presettings(RENAME_PRESETTING))
        renamed = [d for d in preset if d.kind.value.startswith("Renamed")]
        assert len(renamed) == 1 and renamed[0].new_value == "newName"
        assert not any(d.kind in (DiffKind.AddedAttribute, DiffKind.DeletedAttribute) for d in preset)
        info["remaining"] = ",".join(d.kind.value for d in preset)


def full_pipeline(old, new, rs, reg):
    dm = diff_models(old, new)
    hints = evaluate_all(rs, dm, reg)
    return dm, render_text(build_checklist(rs, hints), RenderMode.SHORT)


def test_5_performance(criterion):
    with criterion(5, "performance analogue") as info:
        case = generate_synthetic(4000, 500, 2024)
        rs, reg = load_builtin()
        full_pipeline(case.old, case.new, rs, reg)  # warm-up, includes JIT compilation
        times = []
        for _ in range(10):
            start = time.perf_counter()
            dm, text = full_pipeline(case.old, case.new, rs, reg)
            times.append(time.perf_counter() - start)
        assert canonicalize(dm) == case.expected
        mean = statistics.mean(times)
        assert mean < 60.0

        start = time.perf_counter()
        comparisons = 0
        for diagram, classes in enumerate((100, 200, 300)):
            versions = version_chain(classes, 20, max(3, classes // 20), seed=diagram)
            for a, b in zip(versions, versions[1:]):
                full_pipeline(a, b, rs, reg)
                comparisons += 1
        chain = time.perf_counter() - start
        assert comparisons == 57
        assert chain < 150.0
        info.update(mean_4000_s=f"{mean:.2f}", comparisons=comparisons, chain_s=f"{chain:.2f}")


def test_6_invariants(criterion):
    with criterion(6, "invariant suites") as info:
        rng = random.Random(6)
        for i in range(500):
            m = generate_model(rng.randint(1, 80), random.Random(i))
            assert len(diff_models(m, m)) == 0, f"self diff {i}"

        rs, reg = load_builtin()
        checked = 0
        for seed in range(40):
            case = generate_synthetic(120, 60, 10_000 + seed)
            matching = match_models(case.old, case.new)
            olds = [p.old for p in matching.pairs]
            news = [p.new for p in matching.pairs]
            assert len(set(olds)) == len(olds) and len(set(news)) == len(news)
            assert all(p.old.kind is p.new.kind for p in matching.pairs)

            dm = diff_models(case.old, case.new)
            for d in dm:
                ctx = EvaluationContext(d, dm, dm.old, dm.new)
                for k in DiffKind:
                    name = k.value[0].lower() + k.value[1:]
                    assert eval_predefined(name, (), ctx) is (k is d.kind)
                checked += 1

            a = render_text(build_checklist(rs, evaluate_all(rs, dm, reg)), RenderMode.DETAILED)
            b = render_text(build_checklist(rs, evaluate_all(rs, dm, reg)), RenderMode.DETAILED)
            assert a.encode() == b.encode()

            everything = set(evaluate_all(rs, dm, reg))
            levels = [None, Severity.MINOR, Severity.NORMAL, Severity.CRITICAL]
            previous = everything
            for level in levels:
                current = set(evaluate_all(rs, dm, reg, min_severity=level))
                assert current <= previous
                previous = current
                for tag in ("ui", "backend", "persistence", "ops"):
                    assert set(evaluate_all(rs, dm, reg, relevant_for=tag, min_severity=level)) <= current
        info.update(self_diffs=500, catalog_checks=checked)


IDENT_CHARS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_"


def independent_occurrences(line, ident):
    """Word-boundary occurrences found by plain index scanning."""
    count, start = 0, 0
    while True:
        i = line.find(ident, start)
        if i < 0:
            return count
        before = line[i - 1] if i > 0 else ""
        after = line[i + len(ident)] if i + len(ident) < len(line) else ""
        # "" is a substring of every string, so edges need their own test
        if (before == "" or before not in IDENT_CHARS) and (after == "" or after not in IDENT_CHARS):
            count += 1
        start = i + 1


def build_corpus(root: Path, idents, rng, files=60):
    noise = ["SELECT", "FROM", "WHERE", "JOIN", "id", "value", "x_", "_y", "42"]
    exts = [".java", ".sql", ".xml", ".properties", ".txt", ".md"]
    for n in range(files):
        lines = []
        for _ in range(rng.randint(5, 30)):
            words = []
            for _ in range(rng.randint(1, 8)):
                r = rng.random()
                if r < 0.25:
                    words.append(rng.choice(idents))
                elif r < 0.45:
                    # near misses: identifier glued to other word characters
                    words.append(rng.choice(["X", "_", "9", ""]) + rng.choice(idents) + rng.choice(["", "S", "_1"]))
                else:
                    words.append(rng.choice(noise))
            sep = rng.choice([" ", ", ", ".", "(", "\"", "'"])
            lines.append(sep.join(words))
        sub = root / f"d{n % 5}"
        sub.mkdir(exist_ok=True)
        (sub / f"f{n}{exts[n % len(exts)]}").write_text("\n".join(lines) + "\n")


def test_7_scanner_verifiable(criterion, tmp_path):
    with criterion(7, "scanner verifiability") as info:
        case = generate_synthetic(150, 80, 77)
        dm = diff_models(case.old, case.new)
        idents = sorted({i for d in dm if (i := schema_identifier(d, dm)) is not None})
        assert idents
        rng = random.Random(7)
        build_corpus(tmp_path, idents, rng)
        files = [p for p in tmp_path.rglob("*") if p.is_file()]
        assert len(files) >= 50

        hits = sql_scan(dm, tmp_path)
        for h in hits:
            line = (tmp_path / h.path).read_text(encoding="utf-8").splitlines()[h.line - 1]
            assert independent_occurrences(line, h.identifier) > 0, h

        # completeness: every independent occurrence is reported
        scanned = {".java", ".sql", ".xml", ".properties", ".txt"}
        expected = set()
        for p in files:
            if p.suffix not in scanned:
                continue
            for n, line in enumerate(p.read_text().splitlines(), 1):
                for ident in idents:
                    if independent_occurrences(line, ident):
                        expected.add((p.relative_to(tmp_path).as_posix(), n, ident))
        assert {(h.path, h.line, h.identifier) for h in hits} == expected
        assert hits
        info.update(files=len(files), hits=len(hits), identifiers=len(idents))
