"""Normal-form (Monge) mixed type surfaces at a first-kind lightlike point.

    f(u, v) = ( u + u v a1 + u v^2 a3 + v^3 b1,
                v + u^2 a2,
                int_0^u t (a1 + 2 a2 + t a2') / sqrt(t^2 a1^2 + 1) dt
                    + v sqrt(u^2 a1^2 + 1) + v^2 b2 )

with polynomial a_i(u), b_i(u, v) and b2(0, 0) = 1/4.  The origin is a
lightlike point of the first kind and the u-axis is tangent to the locus.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import ExprError, SurfaceDef, parse_surface

MAX_DEGREE = 8


class MongeError(ValueError):
    pass


def _poly1(c) -> list[float]:
    return [float(x) for x in c] if len(c) else [0.0]


@dataclass(frozen=True)
class MongeCoeffs:
    a1: tuple[float, ...] = (0.0,)
    a2: tuple[float, ...] = (0.0,)
    a3: tuple[float, ...] = (0.0,)
    b1: tuple[tuple[float, ...], ...] = ((0.0,),)
    b2: tuple[tuple[float, ...], ...] = ((0.25,),)
    name: str = "monge"
    half_width: float = 0.2

    def __post_init__(self):
        for key in ("a1", "a2", "a3"):
            if len(getattr(self, key)) > MAX_DEGREE + 1:
                raise MongeError(f"{key} has degree above {MAX_DEGREE}")
        for key in ("b1", "b2"):
            rows = getattr(self, key)
            if len(rows) > MAX_DEGREE + 1 or any(len(r) > MAX_DEGREE + 1 for r in rows):
                raise MongeError(f"{key} has degree above {MAX_DEGREE}")
        if abs(self.b2[0][0] - 0.25) > 1e-15:
            raise MongeError("b2(0,0) must equal 1/4")

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 2, **kw) -> "MongeCoeffs":
        def uni(n):
            return tuple(float(x) for x in rng.uniform(-1, 1, n))

        def bi(n):
            return tuple(uni(n - i) for i in range(n))

        b2 = bi(degree + 1)
        b2 = ((0.25,) + b2[0][1:],) + b2[1:]
        return cls(uni(degree + 1), uni(degree + 1), uni(degree + 1), bi(degree + 1), b2, **kw)


def _num(x: float) -> str:
    s = repr(float(x))
    return f"({s})" if s.startswith("-") else s


def poly_text(c, var: str = "u") -> str:
    terms = []
    for k, ck in enumerate(c):
        if ck == 0:
            continue
        if k == 0:
            terms.append(_num(ck))
        elif k == 1:
            terms.append(f"{_num(ck)}*{var}")
        else:
            terms.append(f"{_num(ck)}*{var}^{k}")
    return "(" + (" + ".join(terms) if terms else "0") + ")"


def bipoly_text(rows) -> str:
    terms = []
    for i, row in enumerate(rows):
        for j, c in enumerate(row):
            if c == 0:
                continue
            mono = "*".join(
                ([f"u^{i}" if i > 1 else "u"] if i else []) + ([f"v^{j}" if j > 1 else "v"] if j else [])
            )
            terms.append(_num(c) + ("*" + mono if mono else ""))
    return "(" + (" + ".join(terms) if terms else "0") + ")"


def _deriv(c) -> list[float]:
    return [k * c[k] for k in range(1, len(c))] or [0.0]


def monge_text(c: MongeCoeffs) -> str:
    A1, A2, A3 = poly_text(c.a1), poly_text(c.a2), poly_text(c.a3)
    A2p = poly_text(_deriv(c.a2))
    B1, B2 = bipoly_text(c.b1), bipoly_text(c.b2)
    root = f"sqrt(u^2*{A1}^2 + 1)"
    w = repr(float(c.half_width))
    return "\n".join([
        f"name = {c.name}",
        f"x = u + u*v*{A1} + u*v^2*{A3} + v^3*{B1}",
        f"y = v + u^2*{A2}",
        f"z = intu(u*({A1} + 2*{A2} + u*{A2p})/sqrt(u^2*{A1}^2 + 1)) + v*{root} + v^2*{B2}",
        f"u_range = -{w}..{w}",
        f"v_range = -{w}..{w}",
        "u_periodic = false",
        "v_periodic = false",
    ]) + "\n"


def build_monge(c: MongeCoeffs) -> SurfaceDef:
    return parse_surface(monge_text(c))


def monge_origin_invariants(c: MongeCoeffs) -> tuple[float, float, float, float]:
    """(kappa_L, kappa_N, kappa_G, kappa_B) at the origin, closed form."""
    a1, a2 = c.a1[0], c.a2[0]
    b2u = c.b2[1][0] if len(c.b2) > 1 and len(c.b2[1]) else 0.0
    b2v = c.b2[0][1] if len(c.b2[0]) > 1 else 0.0
    kL = a1
    kN = -a1 / 2 - 2 * a2
    kG = 4.0 / 3.0 * b2u
    kB = -a2 + a1 / 5 * (-5 * a1 + 12 * b2v - 2)
    return kL, kN, kG, kB


def parse_coeffs(text: str) -> MongeCoeffs:
    """Parse ``a1 = c0, c1, ...`` lines; bivariate rows are separated by ';'
    with row i holding the coefficients of u^i v^0, u^i v^1, ..."""
    kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ExprError("expected 'key = value'", lineno, 1)
        key, value = (x.strip() for x in line.split("=", 1))
        try:
            if key in ("a1", "a2", "a3"):
                kw[key] = tuple(float(x) for x in value.split(","))
            elif key in ("b1", "b2"):
                kw[key] = tuple(tuple(float(x) for x in row.split(",")) for row in value.split(";"))
            elif key == "name":
                kw[key] = value
            elif key == "half_width":
                kw[key] = float(value)
            else:
                raise ExprError(f"unknown key {key!r}", lineno, 1)
        except ValueError as exc:
            if isinstance(exc, ExprError):
                raise
            raise ExprError(f"bad number in {key!r}: {exc}", lineno, len(key) + 2) from exc
    try:
        return MongeCoeffs(**kw)
    except MongeError as exc:
        raise ExprError(str(exc)) from exc


def coeffs_text(c: MongeCoeffs) -> str:
    def row(r):
        return ", ".join(repr(float(x)) for x in r)

    return "\n".join([
        f"name = {c.name}",
        f"a1 = {row(c.a1)}",
        f"a2 = {row(c.a2)}",
        f"a3 = {row(c.a3)}",
        f"b1 = {'; '.join(row(r) for r in c.b1)}",
        f"b2 = {'; '.join(row(r) for r in c.b2)}",
        f"half_width = {c.half_width!r}",
    ]) + "\n"
