from functools import lru_cache

import pytest
from hypothesis import given, strategies as st

from cdimpact.model import Attribute, ClassDecl
from cdimpact.similarity import (levenshtein, name_similarity, name_similarity_matrix,
                                 structural_similarity, structural_similarity_matrix)


def oracle_distance(a: str, b: str) -> int:
    """Textbook recursive definition, memoised."""
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


def cls(name, *attrs):
    return ClassDecl(name, tuple(Attribute(a, "String") for a in attrs))


words = st.text(alphabet="abcdeABC_", max_size=9)


@given(words, words)
def test_levenshtein_matches_oracle(a, b):
    assert levenshtein(a, b) == oracle_distance(a, b)


@given(words, words)
def test_name_similarity_symmetric_and_bounded(a, b):
    s = name_similarity(a, b)
    assert s == name_similarity(b, a)
    assert 0.0 <= s <= 1.0


def test_identity():
    assert name_similarity("ECU", "ECU") == 1.0


def test_empty_cases():
    assert name_similarity("", "") == 1.0
    assert name_similarity("a", "") == 0.0


def test_name_to_new_name():
    # insert "ew" after "n" and turn "n" into "N": three edits
    assert oracle_distance("name", "newName") == 3
    assert name_similarity("name", "newName") == pytest.approx(1 - 3 / 7)


def test_customer_client():
    assert oracle_distance("Customer", "Client") == 7
    assert name_similarity("Customer", "Client") == pytest.approx(0.125)


def test_structural_similarity():
    assert structural_similarity(cls("A", "id", "name"), cls("B", "id", "name")) == 1.0
    assert structural_similarity(cls("A", "id", "name"), cls("B", "id", "addr")) == pytest.approx(1 / 3)
    assert structural_similarity(cls("A"), cls("B")) == 1.0
    assert structural_similarity(cls("A", "x"), cls("B")) == 0.0


@given(st.lists(words, max_size=6), st.lists(words, max_size=6))
def test_matrix_agrees_with_scalar(a, b):
    m = name_similarity_matrix(a, b)
    assert m.shape == (len(a), len(b))
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            assert m[i, j] == pytest.approx(name_similarity(x, y))


def test_structural_matrix():
    a = [cls("A", "id", "name"), cls("B")]
    b = [cls("C", "id", "addr"), cls("D"), cls("E", "q")]
    m = structural_similarity_matrix(a, b)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            assert m[i, j] == pytest.approx(structural_similarity(x, y))
