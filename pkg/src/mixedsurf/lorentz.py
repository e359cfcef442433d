"""Minkowski 3-space with inner product x^2 + y^2 - z^2.

The helpers index components 0..2, so they work on numpy vectors, arrays of
shape (3, ...) and tuples of jets alike.
"""
from __future__ import annotations

import enum

import numpy as np


class CausalChar(enum.Enum):
    SPACELIKE = "S"
    TIMELIKE = "T"
    LIGHTLIKE = "L"


def minkowski_inner(v, w):
    return v[0] * w[0] + v[1] * w[1] - v[2] * w[2]


def minkowski_norm2(v):
    return minkowski_inner(v, v)


def minkowski_cross(v, w):
    x = v[1] * w[2] - v[2] * w[1]
    y = v[2] * w[0] - v[0] * w[2]
    z = -(v[0] * w[1] - v[1] * w[0])
    if isinstance(v, np.ndarray) and isinstance(w, np.ndarray):
        return np.array([x, y, z])
    return (x, y, z)


def causal_character(v, tol: float = 1e-12) -> CausalChar:
    q = minkowski_inner(v, v)
    scale = (abs(v[0]) + abs(v[1]) + abs(v[2])) ** 2
    if abs(q) <= tol * scale:
        return CausalChar.LIGHTLIKE
    return CausalChar.SPACELIKE if q > 0 else CausalChar.TIMELIKE


def combine(a, va, b, vb):
    """a*va + b*vb componentwise for 3-vectors of jets or floats."""
    return tuple(a * va[i] + b * vb[i] for i in range(3))
