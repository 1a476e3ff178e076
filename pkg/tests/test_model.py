import random

import pytest
from hypothesis import given, settings, strategies as st

from cdimpact.lexer import ParseError
from cdimpact.model import (AddAttribute, AddClass, AddStereotype, Attribute, Cardinality,
                            ClassDecl, DeleteClass, EditError, ElementKind, ElementRef, Model,
                            ModelError, MoveClass, QualifiedName, RenameAttribute, RenameClass,
                            apply_edit_script, parse_model, resolve_ref, serialize_model)
from cdimpact.synthetic import generate_model

TROUBLE = "package de { class TroubleCd { name: String [1] } }"


def qn(text):
    return QualifiedName.parse(text)


class TestQualifiedName:
    def test_render_and_parts(self):
        q = qn("de.TroubleCd#name")
        assert str(q) == "de.TroubleCd#name"
        assert q.name == "name"
        assert str(q.container) == "de.TroubleCd"
        assert str(qn("a.b.C").container) == "a.b"
        assert qn("A").container is None

    @pytest.mark.parametrize("bad", ["", "a..b", "a#b#c", "1a", "a.b#", "a-b"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ModelError):
            qn(bad)


class TestCardinality:
    @pytest.mark.parametrize("text,lower,upper,rendered", [
        ("[1]", 1, 1, "[1]"), ("[0..1]", 0, 1, "[0..1]"), ("[0..*]", 0, None, "[0..*]"),
        ("[2..5]", 2, 5, "[2..5]"),
    ])
    def test_parse_render(self, text, lower, upper, rendered):
        c = Cardinality.parse(text)
        assert (c.lower, c.upper) == (lower, upper)
        assert str(c) == rendered

    def test_lower_above_upper(self):
        with pytest.raises(ModelError):
            Cardinality(3, 2)

    @pytest.mark.parametrize("old,new,narrowed", [
        ("[0..*]", "[0..1]", True), ("[0..1]", "[0..*]", False), ("[0..1]", "[1]", True),
        ("[1]", "[0..1]", False), ("[1..*]", "[1..*]", False), ("[2..5]", "[0..*]", False),
    ])
    def test_narrows(self, old, new, narrowed):
        assert Cardinality.parse(new).narrows(Cardinality.parse(old)) is narrowed


class TestParse:
    def test_single_class(self):
        m = parse_model(TROUBLE)
        (q, c), = list(m.iter_classes())
        assert str(q) == "de.TroubleCd"
        assert [a.name for a in c.attributes] == ["name"]
        assert c.attributes[0].cardinality == Cardinality(1, 1)

    def test_empty_input(self):
        m = parse_model("")
        assert m.packages == () and m.associations == ()

    def test_default_cardinality(self):
        m = parse_model("package p { class A { x: Int } }")
        assert m.attribute(qn("p.A#x")).cardinality == Cardinality(1, 1)

    def test_comments_stereotypes_inheritance_associations(self):
        m = parse_model("""
            // line comment
            package p {
                <<persistent>> class A { <<persistent>> id: Long [1] }
                class B extends p.A { tags: String [0..*] }
            }
            association owns [1] p.A -> [0..*] p.B
        """)
        assert m.class_(qn("p.A")).stereotypes == frozenset({"persistent"})
        assert m.class_(qn("p.B")).superclass == qn("p.A")
        assoc = m.association("owns")
        assert (str(assoc.source), str(assoc.target)) == ("p.A", "p.B")
        assert assoc.target_card == Cardinality(0, None)

    def test_duplicate_class_reports_position(self):
        with pytest.raises(ParseError) as exc:
            parse_model("package de {\n class A { }\n class A { }\n}", "m.cd")
        assert exc.value.line == 3
        assert "duplicate" in str(exc.value) and "m.cd:3" in str(exc.value)

    def test_unresolved_superclass(self):
        with pytest.raises(ParseError, match="superclass"):
            parse_model("package de { class A extends de.B { } }")

    def test_unresolved_association_end(self):
        with pytest.raises(ParseError, match="does not resolve"):
            parse_model("package de { class A { } } association a [1] de.A -> [1] de.Z")

    def test_syntax_error_names_expected_token(self):
        with pytest.raises(ParseError, match="expected ':'"):
            parse_model("package de { class A { x Int } }")

    def test_duplicate_attribute(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_model("package de { class A { x: Int y: Int x: Int } }")

    def test_duplicate_association(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_model("package p { class A { } } association r [1] p.A -> [1] p.A "
                        "association r [1] p.A -> [1] p.A")


class TestSerialize:
    def test_empty_model(self):
        assert serialize_model(Model()) == "\n"

    def test_nested_packages(self):
        text = serialize_model(parse_model("package a { package b { class C { } } }"))
        assert "package a {\n    package b {\n        class C {" in text

    def test_round_trip_example(self):
        m = parse_model(TROUBLE)
        assert parse_model(serialize_model(m)) == m

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 10_000))
    def test_round_trip_generated(self, classes, seed):
        m = generate_model(classes, random.Random(seed))
        text = serialize_model(m)
        assert parse_model(text) == m
        assert serialize_model(parse_model(text)) == text


class TestResolveRef:
    def test_attribute(self):
        m = parse_model(TROUBLE)
        a = resolve_ref(m, ElementRef(ElementKind.ATTRIBUTE, qn("de.TroubleCd#name")))
        assert isinstance(a, Attribute) and a.name == "name"

    def test_missing(self):
        assert resolve_ref(parse_model(TROUBLE), ElementRef(ElementKind.CLASS, qn("de.Missing"))) is None

    def test_nested_class(self):
        m = parse_model("package a { package b { class C { } } }")
        c = resolve_ref(m, ElementRef(ElementKind.CLASS, qn("a.b.C")))
        assert isinstance(c, ClassDecl) and c.name == "C"

    def test_kind_mismatch_is_not_found(self):
        m = parse_model("package a { package b { class C { } } }")
        assert resolve_ref(m, ElementRef(ElementKind.PACKAGE, qn("a.b.C"))) is None
        assert resolve_ref(m, ElementRef(ElementKind.CLASS, qn("a.b"))) is None


class TestEditScript:
    def test_add_class(self):
        m = parse_model("package de { package test { } }")
        out = apply_edit_script(m, [AddClass(qn("de.test"), ClassDecl("ECU", stereotypes=frozenset({"persistent"})))])
        assert out.class_(qn("de.test.ECU")).stereotypes == frozenset({"persistent"})

    def test_empty_script_is_identity(self):
        m = parse_model(TROUBLE)
        assert apply_edit_script(m, []) == m

    def test_rename_attribute(self):
        out = apply_edit_script(parse_model(TROUBLE), [RenameAttribute(qn("de.TroubleCd#name"), "newName")])
        assert out.attribute(qn("de.TroubleCd#name")) is None
        assert out.attribute(qn("de.TroubleCd#newName")) is not None

    def test_input_untouched(self):
        m = parse_model(TROUBLE)
        before = serialize_model(m)
        apply_edit_script(m, [RenameClass(qn("de.TroubleCd"), "Code")])
        assert serialize_model(m) == before

    def test_references_follow_renames_and_moves(self):
        m = parse_model("package p { class A { } class B extends p.A { } } package q { }"
                        " association r [1] p.B -> [1] p.A")
        out = apply_edit_script(m, [RenameClass(qn("p.A"), "Base"), MoveClass(qn("p.Base"), qn("q"))])
        assert out.class_(qn("p.B")).superclass == qn("q.Base")
        assert out.association("r").target == qn("q.Base")

    def test_unresolved_target(self):
        with pytest.raises(EditError):
            apply_edit_script(parse_model(TROUBLE), [DeleteClass(qn("de.Nope"))])

    def test_delete_referenced_class_rejected(self):
        m = parse_model("package p { class A { } class B extends p.A { } }")
        with pytest.raises(EditError):
            apply_edit_script(m, [DeleteClass(qn("p.A"))])

    def test_duplicate_attribute_rejected(self):
        with pytest.raises(EditError):
            apply_edit_script(parse_model(TROUBLE),
                              [AddAttribute(qn("de.TroubleCd"), Attribute("name", "Int"))])

    def test_stereotype_edit(self):
        out = apply_edit_script(parse_model(TROUBLE), [AddStereotype(qn("de.TroubleCd#name"), "persistent")])
        assert "persistent" in out.attribute(qn("de.TroubleCd#name")).stereotypes
