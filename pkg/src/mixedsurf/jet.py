"""Truncated Taylor jets in one (Jet1) and two (Jet2) variables.

Coefficients are stored as an array of shape ``(n,) + batch`` so a single jet
object can carry many base points at once; every operation broadcasts over the
trailing batch axes.  Jet2 monomials are ordered by total degree, then by the
power of ``v``: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np


class JetError(ValueError):
    """Raised for degree mismatches and domain violations in jet arithmetic."""


@lru_cache(maxsize=None)
def monomials(degree: int) -> tuple[tuple[int, int], ...]:
    return tuple((t - b, b) for t in range(degree + 1) for b in range(t + 1))


def mono_index(a: int, b: int) -> int:
    t = a + b
    return t * (t + 1) // 2 + b


@lru_cache(maxsize=None)
def _product_matrix2(degree: int) -> np.ndarray:
    mons = monomials(degree)
    n = len(mons)
    P = np.zeros((n, n * n))
    for i, (a1, b1) in enumerate(mons):
        for j, (a2, b2) in enumerate(mons):
            if a1 + a2 + b1 + b2 <= degree:
                P[mono_index(a1 + a2, b1 + b2), i * n + j] = 1.0
    return P


@lru_cache(maxsize=None)
def _product_matrix1(degree: int) -> np.ndarray:
    n = degree + 1
    P = np.zeros((n, n * n))
    for i in range(n):
        for j in range(n - i):
            P[i + j, i * n + j] = 1.0
    return P


def _factorial_table(n: int) -> list[float]:
    return [float(math.factorial(k)) for k in range(n + 1)]


class _Jet:
    __slots__ = ("c", "degree")
    __array_priority__ = 1000

    def __init__(self, c, degree: int):
        self.c = np.asarray(c, dtype=float)
        self.degree = int(degree)
        if self.c.shape[0] != self._size(self.degree):
            raise JetError(f"coefficient array has {self.c.shape[0]} rows, expected {self._size(self.degree)}")

    # subclass hooks
    @staticmethod
    def _size(degree: int) -> int:
        raise NotImplementedError

    @staticmethod
    def _pmatrix(degree: int) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def constant(cls, value, degree: int):
        value = np.asarray(value, dtype=float)
        c = np.zeros((cls._size(degree),) + value.shape)
        c[0] = value
        return cls(c, degree)

    @property
    def value(self):
        v = self.c[0]
        return float(v) if v.ndim == 0 else v

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    def copy(self):
        return type(self)(self.c.copy(), self.degree)

    def _other(self, other) -> np.ndarray:
        if isinstance(other, _Jet):
            if type(other) is not type(self):
                raise JetError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
            if other.degree != self.degree:
                raise JetError(f"degree mismatch: {self.degree} vs {other.degree}")
            return other.c
        other = np.asarray(other, dtype=float)
        c = np.zeros((self._size(self.degree),) + other.shape)
        c[0] = other
        return c

    def _new(self, c):
        return type(self)(c, self.degree)

    def _pair(self, other):
        a, b = self.c, self._other(other)
        if a.ndim < b.ndim:
            a = a.reshape(a.shape[:1] + (1,) * (b.ndim - a.ndim) + a.shape[1:])
        elif b.ndim < a.ndim:
            b = b.reshape(b.shape[:1] + (1,) * (a.ndim - b.ndim) + b.shape[1:])
        return a, b

    def __add__(self, other):
        a, b = self._pair(other)
        return self._new(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        return self._new(a - b)

    def __rsub__(self, other):
        a, b = self._pair(other)
        return self._new(b - a)

    def __neg__(self):
        return self._new(-self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, _Jet):
            other = np.asarray(other, dtype=float)
            c = self.c
            if c.ndim - 1 < other.ndim:
                c = c.reshape(c.shape[:1] + (1,) * (other.ndim - c.ndim + 1) + c.shape[1:])
            return self._new(c * other)
        a, b = self._pair(other)
        n = a.shape[0]
        outer = a[:, None] * b[None, :]
        batch = outer.shape[2:]
        flat = outer.reshape((n * n, -1))
        out = self._pmatrix(self.degree) @ flat
        return self._new(out.reshape((n,) + batch))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, _Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise JetError("division by zero")
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        return power(self, exponent)

    def reciprocal(self):
        x0 = self.c[0]
        if np.any(x0 == 0):
            raise JetError("division by a jet with zero value")
        coeffs = [(-1.0) ** k / x0 ** (k + 1) for k in range(self.degree + 1)]
        return self.apply_series(coeffs)

    def apply_series(self, coeffs):
        """Compose with a univariate series sum_k coeffs[k] (x - x0)^k."""
        h = self.c.copy()
        h[0] = 0.0
        h = self._new(h)
        r = h * 0.0 + coeffs[self.degree]
        for k in range(self.degree - 1, -1, -1):
            r = r * h + coeffs[k]
        return r

    def truncate(self, degree: int):
        if degree > self.degree:
            raise JetError(f"cannot raise degree {self.degree} to {degree}")
        return type(self)(self.c[: self._size(degree)].copy(), degree)

    def batch_item(self, index):
        return type(self)(self.c[(slice(None),) + np.index_exp[index]], self.degree)

    def __repr__(self):
        return f"{type(self).__name__}(degree={self.degree}, c={self.c.tolist()})"


class Jet1(_Jet):
    """Univariate truncated Taylor polynomial in powers of (t - t0)."""

    __slots__ = ()

    @staticmethod
    def _size(degree):
        return degree + 1

    @staticmethod
    def _pmatrix(degree):
        return _product_matrix1(degree)

    @classmethod
    def variable(cls, value, degree: int) -> "Jet1":
        j = cls.constant(value, degree)
        if degree >= 1:
            j.c[1] = 1.0
        return j

    def coef(self, k: int):
        return self.c[k] if k <= self.degree else 0.0 * self.c[0]

    def deriv_value(self, k: int):
        """k-th derivative at the base point."""
        return math.factorial(k) * self.coef(k)

    def derivative(self) -> "Jet1":
        if self.degree == 0:
            raise JetError("cannot differentiate a degree-0 jet")
        k = np.arange(1, self.degree + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet1(self.c[1:] * k, self.degree - 1)

    def integral(self, value=0.0) -> "Jet1":
        k = np.arange(1, self.degree + 2).reshape((-1,) + (1,) * (self.c.ndim - 1))
        c = np.zeros((self.degree + 2,) + self.c.shape[1:])
        c[0] = value
        c[1:] = self.c / k
        return Jet1(c, self.degree + 1)

    def substitute(self, dt):
        """Evaluate sum_k c_k dt^k where dt is a jet with zero value."""
        if dt.degree > self.degree:
            raise JetError("substituted jet has higher degree than the outer jet")
        r = dt * 0.0 + self.c[dt.degree]
        for k in range(dt.degree - 1, -1, -1):
            r = r * dt + self.c[k]
        return r

    def compose(self, inner):
        """Jet of t -> self(inner(t)); inner's value must be this jet's base point."""
        h = inner - inner.value
        return self.substitute(h)

    def to_jet2(self, axis: int, degree: int | None = None) -> "Jet2":
        degree = self.degree if degree is None else degree
        c = np.zeros((Jet2._size(degree),) + self.c.shape[1:])
        for k in range(min(degree, self.degree) + 1):
            c[mono_index(k, 0) if axis == 0 else mono_index(0, k)] = self.c[k]
        return Jet2(c, degree)


class Jet2(_Jet):
    """Bivariate truncated Taylor polynomial in powers of (u - u0), (v - v0)."""

    __slots__ = ()

    @staticmethod
    def _size(degree):
        return (degree + 1) * (degree + 2) // 2

    @staticmethod
    def _pmatrix(degree):
        return _product_matrix2(degree)

    @classmethod
    def variable(cls, value, axis: int, degree: int) -> "Jet2":
        j = cls.constant(value, degree)
        if degree >= 1:
            j.c[1 + axis] = 1.0
        return j

    @classmethod
    def from_coeffs(cls, coeffs: dict, degree: int) -> "Jet2":
        """Build from {(a, b): coefficient}; terms above degree are dropped."""
        j = cls.constant(0.0, degree)
        for (a, b), val in coeffs.items():
            if a + b <= degree:
                j.c[mono_index(a, b)] = val
        return j

    def coef(self, a: int, b: int):
        if a + b > self.degree:
            return 0.0 * self.c[0]
        return self.c[mono_index(a, b)]

    def derivative(self, a: int, b: int):
        """Partial derivative d^(a+b)/du^a dv^b at the base point."""
        return math.factorial(a) * math.factorial(b) * self.coef(a, b)

    def partial(self, axis: int) -> "Jet2":
        if self.degree == 0:
            raise JetError("cannot differentiate a degree-0 jet")
        d = self.degree - 1
        c = np.zeros((self._size(d),) + self.c.shape[1:])
        for a, b in monomials(d):
            if axis == 0:
                c[mono_index(a, b)] = (a + 1) * self.c[mono_index(a + 1, b)]
            else:
                c[mono_index(a, b)] = (b + 1) * self.c[mono_index(a, b + 1)]
        return Jet2(c, d)

    @property
    def du(self) -> "Jet2":
        return self.partial(0)

    @property
    def dv(self) -> "Jet2":
        return self.partial(1)

    def substitute(self, du, dv):
        """Evaluate sum c_ab du^a dv^b for increment jets du, dv (zero value)."""
        d = du.degree
        if d > self.degree:
            raise JetError(f"inner degree {d} exceeds outer degree {self.degree}")
        if type(du) is not type(dv) or dv.degree != d:
            raise JetError("increment jets must share type and degree")
        one = du * 0.0 + 1.0
        pu, pv = [one], [one]
        for _ in range(d):
            pu.append(pu[-1] * du)
            pv.append(pv[-1] * dv)
        out = du * 0.0
        for a, b in monomials(d):
            cab = self.c[mono_index(a, b)]
            if a == 0:
                term = pv[b]
            elif b == 0:
                term = pu[a]
            else:
                term = pu[a] * pv[b]
            out = out + term * cab
        return out

    def eval_offset(self, du, dv):
        """Evaluate the polynomial at numeric offsets (du, dv) from the base point."""
        total = 0.0
        for a, b in monomials(self.degree):
            total = total + self.c[mono_index(a, b)] * du**a * dv**b
        return total


def compose_curve(F, curve):
    """Pull jets F (Jet2 or tuple of Jet2) back along curve = (u(t), v(t)) Jet1 pair.

    The curve's value must be the base point of F.
    """
    u, v = curve
    du, dv = u - u.value, v - v.value
    if isinstance(F, Jet2):
        return F.substitute(du, dv)
    return tuple(f.substitute(du, dv) for f in F)


def compose_map(F, X, Y):
    """Jets of F(X(u,v), Y(u,v)) for Jet2 maps X, Y valued at F's base point."""
    du, dv = X - X.value, Y - Y.value
    if isinstance(F, Jet2):
        return F.substitute(du, dv)
    return tuple(f.substitute(du, dv) for f in F)


# --- real powers and elementary functions ---------------------------------

def real_power(x, r: Fraction):
    """x**r with the real odd-root convention; raises for even roots of negatives."""
    r = Fraction(r)
    x = np.asarray(x, dtype=float)
    if r.denominator % 2 == 0 and np.any(x < 0):
        raise JetError(f"even root (exponent {r}) of a negative value")
    if r < 0 and np.any(x == 0):
        raise JetError(f"zero raised to negative exponent {r}")
    mag = np.abs(x) ** float(r)
    if r.denominator % 2 == 1 and r.numerator % 2 == 1:
        mag = np.sign(x) * mag
    return float(mag) if mag.ndim == 0 else mag


def _as_fraction(exponent) -> Fraction:
    if isinstance(exponent, Fraction):
        return exponent
    if isinstance(exponent, (int, np.integer)):
        return Fraction(int(exponent))
    f = Fraction(float(exponent)).limit_denominator(1000)
    if abs(float(f) - float(exponent)) > 1e-14 * max(1.0, abs(float(exponent))):
        raise JetError(f"exponent {exponent} is not a small rational")
    return f


def power(x, exponent):
    """x**exponent for a rational exponent; jets and plain numbers alike."""
    r = _as_fraction(exponent)
    if not isinstance(x, _Jet):
        return real_power(x, r)
    if r.denominator == 1 and r.numerator >= 0:
        n = r.numerator
        result = x.constant(np.ones(x.batch_shape), x.degree)
        base = x
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    x0 = x.c[0]
    coeffs = []
    binom = 1.0
    for k in range(x.degree + 1):
        if binom == 0.0:
            coeffs.append(np.zeros_like(x0))
        else:
            coeffs.append(binom * real_power(x0, r - k))
        binom *= float(r - k) / (k + 1)
    return x.apply_series(coeffs)


def sqrt(x):
    return power(x, Fraction(1, 2))


def cbrt(x):
    return power(x, Fraction(1, 3))


def exp(x):
    if not isinstance(x, _Jet):
        return np.exp(x)
    e = np.exp(x.c[0])
    fact = _factorial_table(x.degree)
    return x.apply_series([e / fact[k] for k in range(x.degree + 1)])


def log(x):
    if not isinstance(x, _Jet):
        if np.any(np.asarray(x) <= 0):
            raise JetError("log of a non-positive value")
        return np.log(x)
    x0 = x.c[0]
    if np.any(x0 <= 0):
        raise JetError("log of a non-positive value")
    coeffs = [np.log(x0)] + [(-1.0) ** (k + 1) / (k * x0**k) for k in range(1, x.degree + 1)]
    return x.apply_series(coeffs)


def _cyclic(x, values):
    fact = _factorial_table(x.degree)
    return x.apply_series([values[k % len(values)] / fact[k] for k in range(x.degree + 1)])


def sin(x):
    if not isinstance(x, _Jet):
        return np.sin(x)
    s, c = np.sin(x.c[0]), np.cos(x.c[0])
    return _cyclic(x, [s, c, -s, -c])


def cos(x):
    if not isinstance(x, _Jet):
        return np.cos(x)
    s, c = np.sin(x.c[0]), np.cos(x.c[0])
    return _cyclic(x, [c, -s, -c, s])


def sinh(x):
    if not isinstance(x, _Jet):
        return np.sinh(x)
    return _cyclic(x, [np.sinh(x.c[0]), np.cosh(x.c[0])])


def cosh(x):
    if not isinstance(x, _Jet):
        return np.cosh(x)
    return _cyclic(x, [np.cosh(x.c[0]), np.sinh(x.c[0])])


def tan(x):
    if not isinstance(x, _Jet):
        if np.any(np.cos(x) == 0):
            raise JetError("tan at a pole")
        return np.tan(x)
    return sin(x) / cos(x)


def tanh(x):
    if not isinstance(x, _Jet):
        return np.tanh(x)
    return sinh(x) / cosh(x)


def atan(x):
    if not isinstance(x, _Jet):
        return np.arctan(x)
    x0 = x.c[0]
    if x.degree == 0:
        return x.apply_series([np.arctan(x0)])
    h = Jet1.variable(x0, x.degree - 1)
    g = 1.0 / (1.0 + h * h)
    coeffs = [np.arctan(x0)] + [g.c[k - 1] / k for k in range(1, x.degree + 1)]
    return x.apply_series(coeffs)


ELEMENTARY = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "atan": atan,
}
