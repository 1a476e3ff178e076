import json

import pytest
from hypothesis import given, strategies as st

from cdimpact.builtin import load_builtin
from cdimpact.checklist import (SEPARATOR, UNRESOLVED_MARKER, Checklist, RenderMode, build_checklist,
                                checklist_from_json, checklist_from_structured, checklist_to_json,
                                render_structured, render_text)
from cdimpact.differ import diff_models
from cdimpact.engine import ChecklistHint, ExtensionRegistry, evaluate_all
from cdimpact.rules import RuleSet, parse_extensions, parse_rules
from cdimpact.synthetic import generate_synthetic

from conftest import ADDED_ACTIVE_EXT

ECU_CHECKLIST = """ORM file analysis:
=====
- Add entry to mapping file for new class. (Causing model change: Added class 'de.test.ECU')

Property file analysis:
=====
- Add these entries to the property file core.properties: -ECU (Causing model change: Added class 'de.test.ECU')
- Add these entries to the property file core.properties: -ECUS (Causing model change: Added class 'de.test.ECU')
"""


def ecu_checklist(models):
    rs, reg = load_builtin()
    hints = evaluate_all(rs, diff_models(*models), reg)
    return build_checklist(rs, hints)


def test_ecu_short(ecu_models):
    c = ecu_checklist(ecu_models)
    assert render_text(c) == ECU_CHECKLIST
    assert len(c) == 3


def test_empty():
    assert render_text(Checklist()) == ""
    assert render_text(Checklist(), RenderMode.DETAILED) == ""
    assert render_structured(Checklist()) == {"sections": []}


def test_detailed(ecu_models):
    text = render_text(ecu_checklist(ecu_models), RenderMode.DETAILED)
    lines = text.splitlines()
    i = lines.index("ORM file analysis:")
    assert lines[i + 1] == SEPARATOR
    assert lines[i + 2].startswith("Description: Reports entries of the ORM mapping file")
    assert lines[i + 3:i + 6] == ["Severity: critical", "Probability: -", "Relevant for: backend, persistence"]
    assert "Severity: minor" in lines


def test_short_lines_subset_of_detailed(ecu_models):
    c = ecu_checklist(ecu_models)
    short = render_text(c).splitlines()
    detailed = render_text(c, RenderMode.DETAILED).splitlines()
    assert set(short) <= set(detailed)


def test_unresolved_marker():
    rs = parse_rules('impactRule "r" { description = "d" impact { pc.addedClass() => "see {nope}" } }')
    from cdimpact.model import parse_model
    dm = diff_models(parse_model("package p { }"), parse_model("package p { class A { } }"))
    c = build_checklist(rs, evaluate_all(rs, dm, ExtensionRegistry()))
    assert UNRESOLVED_MARKER not in render_text(c)
    assert render_text(c, RenderMode.DETAILED).splitlines()[-1] == UNRESOLVED_MARKER


def test_sections_follow_rule_order_and_skip_empty():
    rs = parse_rules('''
        impactRule "b" { description = "d" impact { pc.deletedClass() => "del {element.name}" } }
        impactRule "none" { description = "d" impact { pc.renamedPackage() => "x" } }
        impactRule "a" { description = "d" impact { pc.addedClass() => "add {element.name}" } }
    ''')
    case = generate_synthetic(40, 15, 2)
    dm = diff_models(case.old, case.new)
    c = build_checklist(rs, reversed(evaluate_all(rs, dm, ExtensionRegistry())))
    names = [s.rule_name for s in c.sections]
    assert "none" not in names and names == sorted(names, key=["b", "a"].index)
    for s in c.sections:
        keys = [(h.cause.sort_key(), h.entry_index) for h in s.hints]
        assert keys == sorted(keys)


def test_unknown_rule_rejected(ecu_models):
    rs, reg = load_builtin()
    hints = evaluate_all(rs, diff_models(*ecu_models), reg)
    with pytest.raises(ValueError):
        build_checklist(RuleSet(), hints)


def test_structured_round_trip(ecu_models):
    c = ecu_checklist(ecu_models)
    assert checklist_from_structured(render_structured(c)) == c
    text = checklist_to_json(c)
    assert checklist_from_json(text) == c
    assert json.loads(text)["sections"][1]["hints"][0]["cause"]["kind"] == "AddedClass"


def test_synthetic_round_trip_and_byte_determinism():
    case = generate_synthetic(120, 60, 9)
    dm = diff_models(case.old, case.new)
    rs, reg = load_builtin()
    reg.load(parse_extensions(ADDED_ACTIVE_EXT))
    a = build_checklist(rs, evaluate_all(rs, dm, reg))
    rs2, reg2 = load_builtin()
    b = build_checklist(rs2, evaluate_all(rs2, diff_models(case.old, case.new), reg2))
    for mode in RenderMode:
        assert render_text(a, mode).encode() == render_text(b, mode).encode()
    assert checklist_from_json(checklist_to_json(a)) == a


def test_rendering_injective_on_structure(ecu_models):
    # distinct checklists render to distinct detailed text
    c = ecu_checklist(ecu_models)
    first = c.sections[0]
    h = first.hints[0]
    changed = ChecklistHint(h.rule_name, h.text + "!", h.cause, h.severity, h.probability, h.relevant_for,
                            h.unresolved, h.entry_index)
    other = Checklist((first.__class__(first.rule_name, first.description, first.severity, first.probability,
                                       first.relevant_for, (changed,)),) + c.sections[1:])
    assert render_text(other, RenderMode.DETAILED) != render_text(c, RenderMode.DETAILED)


@given(st.lists(st.text(alphabet="abcXYZ {}.", min_size=1, max_size=12), min_size=1, max_size=5))
def test_hint_text_preserved(texts):
    from cdimpact.model import parse_model
    dm = diff_models(parse_model("package p { }"), parse_model("package p { class A { } }"))
    rules = parse_rules('impactRule "r" { description = "d" impact { pc.addedClass() => "x" } }')
    hints = [ChecklistHint("r", t, dm[0], entry_index=i) for i, t in enumerate(texts)]
    c = build_checklist(rules, hints)
    lines = render_text(c).splitlines()[2:]
    assert lines == [f"- {t} (Causing model change: Added class 'p.A')" for t in texts]
    assert checklist_from_json(checklist_to_json(c)) == c
