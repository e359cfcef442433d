"""Curvature invariants of the lightlike curve at first-kind points.

Everything is computed from exact Taylor jets at the point: the lightlike
branch gamma(t) through p is solved as a Jet1 pair, the surface is pulled back
along it, and the null field is extended off the curve by the kernel formula.
Two independent routes are provided:

* extrinsic: the frame (e, L, N) along f o gamma and the general-parameter
  formulas for kappa_L, kappa_N, kappa_G, plus theta from f o gamma alone;
* intrinsic: an adapted chart phi(u, v) = gamma(u) + v*eta(gamma(u)) and the
  metric formulas for kappa_L and kappa_B.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classify import ClassifyError, beta_from_jets, null_field_jets
from .expr import SurfaceDef
from .jet import Jet1, Jet2, compose_curve, power, real_power, sqrt
from .locus import LocusCurve, local_branch
from .lorentz import minkowski_inner as ip
from .surface import MetricJet, khat_from_f, metric_from_f

THIRD = Fraction(1, 3)


class InvariantError(ValueError):
    pass


def _vec(j) -> np.ndarray:
    return np.array([c.value for c in j])


def _scale(jets, k):
    return tuple(c * k for c in jets)


@dataclass
class LocalJets:
    """Jets along the lightlike branch through p (parameter t, t = 0 at p)."""

    p: np.ndarray
    tangent: np.ndarray
    f: tuple[Jet2, Jet2, Jet2]  # surface jets at p, degree 4
    metric: MetricJet
    gamma: tuple[Jet1, Jet1]  # degree 3
    fhat: tuple[Jet1, Jet1, Jet1]  # f o gamma, degree 3
    eta: tuple[Jet1, Jet1]  # canonical null direction along gamma, degree 3
    L: tuple[Jet1, Jet1, Jet1]  # df(eta), degree 3
    beta: Jet1  # degree 2, > 0
    sign: float  # factor applied to the default kernel direction


def local_jets(s: SurfaceDef, p, tangent=None, degree: int = 3, flip: bool = False) -> LocalJets:
    p = np.asarray(p, dtype=float)
    f = s.eval_jet(p[0], p[1], degree + 1)
    metric = metric_from_f(f)
    gamma = local_branch(s, p, degree, tangent, metric)
    T = np.array([gamma[0].coef(1), gamma[1].coef(1)])
    f3 = tuple(c.truncate(degree) for c in f)
    fhat = compose_curve(f3, gamma)
    fu = compose_curve(tuple(c.du for c in f), gamma)
    fv = compose_curve(tuple(c.dv for c in f), gamma)
    eu, ev = null_field_jets(metric, -1.0 if flip else 1.0)
    eta = compose_curve((eu, ev), gamma)
    Q = metric.E * eu * eu + 2.0 * metric.F * eu * ev + metric.G * ev * ev
    b2 = Q.du * eu.truncate(degree - 1) + Q.dv * ev.truncate(degree - 1)
    g2 = tuple(c.truncate(degree - 1) for c in gamma)
    beta = compose_curve(b2, g2)
    if beta.value == 0:
        raise InvariantError("beta vanishes: not a first-kind point")
    sign = 1.0 if beta.value > 0 else -1.0
    eta = _scale(eta, sign)
    beta = beta * sign
    L = tuple(fu[i] * eta[0] + fv[i] * eta[1] for i in range(3))
    return LocalJets(p, T, f, metric, gamma, fhat, eta, L, beta, sign * (-1.0 if flip else 1.0))


def n_from_frame(e, L):
    """The lightlike N with <N,e> = 0, <N,N> = 0, <N,L> = 1 (closed form)."""
    Lbar = (L[0], L[1], -L[2])
    c = ip(Lbar, e)
    X = tuple(Lbar[i] - c * e[i] for i in range(3))
    a = ip(X, L)
    q = ip(X, X)
    k = q / (2.0 * a * a)
    return tuple(X[i] / a - k * L[i] for i in range(3))


@dataclass
class Frame:
    e: np.ndarray
    L: np.ndarray
    N: np.ndarray

    def residuals(self) -> dict[str, float]:
        e, L, N = self.e, self.L, self.N
        return {
            "ee": abs(ip(e, e) - 1.0),
            "LL": abs(ip(L, L)) / float(L @ L),
            "NL": abs(ip(N, L) - 1.0),
            "Ne": abs(ip(N, e)),
            "NN": abs(ip(N, N)),
        }


@dataclass
class Extrinsic:
    kappa_L: float
    kappa_N: float
    kappa_G: float
    theta: float
    frame: Frame
    speed2: float  # <fhat', fhat'>


def extrinsic(lj: LocalJets) -> Extrinsic:
    g1 = tuple(c.derivative() for c in lj.fhat)  # degree 2
    g2 = tuple(c.derivative() for c in g1)  # degree 1
    E1 = ip(g1, g1)
    if not E1.value > 0:
        raise InvariantError("image tangent is not spacelike: not a first-kind point")
    e = tuple(c / sqrt(E1) for c in g1)
    L2 = tuple(c.truncate(2) for c in lj.L)
    N = n_from_frame(e, L2)
    dN = tuple(c.derivative() for c in N)
    g1v, g2v = _vec(g1), _vec(g2)
    Lv, Nv = _vec(lj.L), _vec(N)
    b = lj.beta.value
    b13 = real_power(b, THIRD)
    E1v = E1.value
    kL = ip(g2v, Lv) / (E1v * b13)
    kN = b13 * ip(g2v, Nv) / E1v
    kG = (ip(Lv, _vec(dN)) + lj.beta.deriv_value(1) / (3.0 * b)) / np.sqrt(E1v)
    theta = (E1v * ip(g2v, g2v) - ip(g1v, g2v) ** 2) / E1v**3
    return Extrinsic(float(kL), float(kN), float(kG), float(theta), Frame(_vec(e), Lv, Nv), float(E1v))


def causal_theta(lj: LocalJets) -> float:
    """theta from the derivatives of f o gamma alone (no frame)."""
    g1 = np.array([c.deriv_value(1) for c in lj.fhat])
    g2 = np.array([c.deriv_value(2) for c in lj.fhat])
    E1 = ip(g1, g1)
    return float((E1 * ip(g2, g2) - ip(g1, g2) ** 2) / E1**3)


@dataclass
class AdaptedChart:
    """Chart phi(u, v) = p(u) + v q(u) around the base point (u, v) = (0, 0)."""

    p: tuple[Jet1, Jet1]
    q: tuple[Jet1, Jet1]
    f: tuple[Jet2, Jet2, Jet2]
    metric: MetricJet
    special: bool

    def residuals(self) -> dict[str, float]:
        m = self.metric
        scale = float(np.sqrt(m.E.value**2 + m.G.coef(0, 1) ** 2))
        out = {
            "F": abs(m.F.value) / scale,
            "G": abs(m.G.value) / scale,
            "F_u": abs(m.F.coef(1, 0)) / scale,
            "G_u": abs(m.G.coef(1, 0)) / scale,
        }
        if self.special:
            out["E-1"] = abs(m.E.value - 1.0)
            out["G_v-1"] = abs(m.G.coef(0, 1) - 1.0)
        return out


def _chart_map(p, q, degree, v_offset=0.0):
    """Increment jets of phi(u, v_offset + v) - phi(0, v_offset) in (u, v)."""
    V = Jet2.variable(0.0, 1, degree)
    out = []
    for i in range(2):
        P = p[i].to_jet2(0, degree) - p[i].value
        Q = q[i].to_jet2(0, degree)
        out.append(P + (Q - Q.value) * v_offset + V * Q)
    return out


def adapted_chart(s: SurfaceDef, lj: LocalJets, special: bool = False, degree: int = 3) -> AdaptedChart:
    if special:
        g1 = tuple(c.derivative() for c in lj.fhat)
        sigma = sqrt(ip(g1, g1))  # degree 2
        arc = sigma.integral()  # degree 3
        x = Jet1.variable(0.0, 3)
        t = x / sigma.value
        for _ in range(3):
            t = t - (arc.compose(t) - x) / sigma.value
        p = tuple(c.compose(t) for c in lj.gamma)
        nbar = tuple(c.truncate(2) * power(lj.beta, -THIRD) for c in lj.eta)
        t2 = t.truncate(2)
        q = tuple(c.compose(t2) for c in nbar)
    else:
        p, q = lj.gamma, lj.eta
    X, Y = _chart_map(p, q, degree)
    f = tuple(c.truncate(degree).substitute(X, Y) for c in lj.f)
    return AdaptedChart(p, q, f, metric_from_f(f), special)


def kappa_L_intrinsic(chart: AdaptedChart) -> float:
    m = chart.metric
    E, Ev, Gv = m.E.value, m.E.coef(0, 1), m.G.coef(0, 1)
    if Gv == 0:
        raise InvariantError("G_v vanishes: not a first-kind point")
    return float(-Ev / (2 * E * real_power(Gv, THIRD)))


def kappa_B(chart: AdaptedChart) -> float:
    m = chart.metric
    E = m.E.value
    Eu, Ev = m.E.derivative(1, 0), m.E.derivative(0, 1)
    Evv = m.E.derivative(0, 2)
    Fv, Fuv = m.F.derivative(0, 1), m.F.derivative(1, 1)
    Gv, Gvv = m.G.derivative(0, 1), m.G.derivative(0, 2)
    if Gv == 0:
        raise InvariantError("G_v vanishes: not a first-kind point")
    num = -5 * Gv * (E * Evv - 2 * E * Fuv + Eu * Fv) + Ev * (E * Gvv - 2 * Fv**2)
    return float(num / (10 * E**2 * real_power(Gv, Fraction(5, 3))))


def khat_in_chart(chart: AdaptedChart) -> Jet2:
    """lambda^2 K in chart coordinates (degree drops by two)."""
    return khat_from_f(chart.f)


def geodesic_curvature_term(s: SurfaceDef, chart: AdaptedChart, offset: float) -> float:
    """sqrt|lambda| * geodesic curvature of the u-curve v = offset in the chart."""
    X, Y = _chart_map(chart.p, chart.q, 3, offset)
    base = np.array([chart.p[0].value + offset * chart.q[0].value,
                     chart.p[1].value + offset * chart.q[1].value])
    f = s.eval_jet(base[0], base[1], 3)
    m = metric_from_f(tuple(c.substitute(X, Y) for c in f))
    E, F = m.E.value, m.F.value
    Eu, Ev, Fu = m.E.coef(1, 0), m.E.coef(0, 1), m.F.coef(1, 0)
    return float((-F * Eu + 2 * E * Fu - E * Ev) / (2 * E**1.5))


def geodesic_curvature_limit(s: SurfaceDef, chart: AdaptedChart, offset: float = 1e-3) -> float:
    """Richardson limit v -> 0 of the geodesic-curvature term on the spacelike side.

    The chart's v = 0 column is lightlike, so the term is sampled at v > 0
    and v < 0 only through offsets; the side is chosen by the sign of offset.
    """
    g1 = geodesic_curvature_term(s, chart, offset)
    g2 = geodesic_curvature_term(s, chart, offset / 2)
    return 2 * g2 - g1


@dataclass
class InvariantSample:
    t: float
    s: float
    u: float
    v: float
    kappa_L: float
    kappa_N: float
    kappa_G: float
    kappa_B: float
    theta: float
    khat: float
    kappa_L_intrinsic: float
    khat_v: float
    routes: tuple[tuple[str, str], ...] = (
        ("kappa_L", "extrinsic"),
        ("kappa_N", "extrinsic"),
        ("kappa_G", "extrinsic"),
        ("kappa_B", "intrinsic"),
        ("theta", "extrinsic"),
        ("khat", "intrinsic"),
    )


def invariants_at(s: SurfaceDef, p, tangent=None, t: float = 0.0, arc: float = 0.0) -> InvariantSample:
    lj = local_jets(s, p, tangent)
    ext = extrinsic(lj)
    chart = adapted_chart(s, lj, special=True)
    kh = khat_in_chart(chart)
    return InvariantSample(
        t=float(t), s=float(arc), u=float(lj.p[0]), v=float(lj.p[1]),
        kappa_L=ext.kappa_L, kappa_N=ext.kappa_N, kappa_G=ext.kappa_G,
        kappa_B=kappa_B(chart), theta=ext.theta,
        khat=float(kh.value), kappa_L_intrinsic=kappa_L_intrinsic(chart),
        khat_v=float(kh.coef(0, 1)),
    )


def frame_at(s: SurfaceDef, p, tangent=None) -> Frame:
    return extrinsic(local_jets(s, p, tangent)).frame


def kappa_LNG(s: SurfaceDef, p, tangent=None) -> tuple[float, float, float]:
    ext = extrinsic(local_jets(s, p, tangent))
    return ext.kappa_L, ext.kappa_N, ext.kappa_G


def invariant_table(s: SurfaceDef, curve: LocusCurve, first_kind: np.ndarray | None = None,
                    every: int = 1) -> list[InvariantSample]:
    """Invariants at the (first-kind) samples of a traced curve."""
    rows = []
    for i in range(0, len(curve), every):
        if first_kind is not None and not first_kind[i]:
            continue
        try:
            rows.append(invariants_at(s, curve.points[i], curve.tangent[i], curve.t[i], curve.s[i]))
        except (InvariantError, ClassifyError):
            continue
    return rows
