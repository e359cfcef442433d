import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixedsurf.lorentz import CausalChar, causal_character, minkowski_cross, minkowski_inner

e1, e2, e3 = np.eye(3)


def test_inner_products():
    assert minkowski_inner(e1, e1) == 1
    assert minkowski_inner(e3, e3) == -1
    assert minkowski_inner((0, 1, 1), (0, 1, 1)) == 0


def test_cross_basis():
    c = minkowski_cross(e1, e2)
    assert np.array_equal(c, -e3)
    assert minkowski_inner(c, e1) == 0 and minkowski_inner(c, e2) == 0


def test_cross_with_lightlike():
    w = np.array([0.0, 1.0, 1.0])
    c = minkowski_cross(e1, w)
    assert np.allclose(c, w) or np.allclose(c, -w)


def test_cross_self_is_zero():
    v = np.array([0.3, -1.2, 2.0])
    assert np.array_equal(minkowski_cross(v, v), np.zeros(3))


def test_causal_character():
    assert causal_character(e1) is CausalChar.SPACELIKE
    assert causal_character(e3) is CausalChar.TIMELIKE
    assert causal_character((1, 0, 1)) is CausalChar.LIGHTLIKE


vec = st.lists(st.floats(-10, 10), min_size=3, max_size=3).map(np.array)


@settings(max_examples=100)
@given(vec, vec)
def test_cross_is_orthogonal(v, w):
    c = minkowski_cross(v, w)
    scale = 1 + np.linalg.norm(v) ** 2 * np.linalg.norm(w)
    assert abs(minkowski_inner(c, v)) <= 1e-12 * scale
    assert abs(minkowski_inner(c, w)) <= 1e-12 * scale


@settings(max_examples=100)
@given(vec, vec)
def test_lagrange_identity(v, w):
    c = minkowski_cross(v, w)
    lhs = minkowski_inner(c, c)
    rhs = minkowski_inner(v, w) ** 2 - minkowski_inner(v, v) * minkowski_inner(w, w)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * (1 + np.linalg.norm(v) ** 2 * np.linalg.norm(w) ** 2))
