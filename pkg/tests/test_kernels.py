import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdimpact import _kernels
from cdimpact.similarity import levenshtein

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")

names = st.lists(st.text(alphabet="abcxyzÄé_", max_size=12), max_size=8)


@pytest.fixture
def restore_backend():
    before = _kernels.backend()
    yield
    _kernels.set_backend(before)


def both(a, b):
    _kernels.set_backend("numba")
    x = _kernels.levenshtein_matrix(a, b)
    _kernels.set_backend("numpy")
    y = _kernels.levenshtein_matrix(a, b)
    return x, y


@settings(max_examples=80, deadline=None)
@given(names, names)
def test_backends_agree_with_each_other_and_scalar(a, b):
    before = _kernels.backend()
    try:
        x, y = both(a, b)
    finally:
        _kernels.set_backend(before)
    assert np.array_equal(x, y)
    for i, s in enumerate(a):
        for j, t in enumerate(b):
            assert x[i, j] == levenshtein(s, t)


def test_numpy_chunking(restore_backend):
    a = [f"name{i}" for i in range(40)]
    b = [f"nom{i}x" for i in range(30)]
    _kernels.set_backend("numpy")
    small = _kernels._lev_matrix_numpy(a, b, chunk_cells=50)
    assert np.array_equal(small, _kernels._lev_matrix_numpy(a, b))


def test_empty_inputs(restore_backend):
    for name in ("numba", "numpy"):
        _kernels.set_backend(name)
        assert _kernels.levenshtein_matrix([], ["a"]).shape == (0, 1)
        assert _kernels.levenshtein_matrix(["a", ""], ["", "ab"]).tolist() == [[1, 1], [0, 2]]


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")


def test_env_flag_selects_numpy():
    env = dict(os.environ, CDIMPACT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from cdimpact import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_jaccard_empty_sets():
    m = _kernels.jaccard_matrix([frozenset(), frozenset({"a"})], [frozenset(), frozenset({"a", "b"})])
    assert m.tolist() == [[1.0, 0.0], [0.0, 0.5]]
