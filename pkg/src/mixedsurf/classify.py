"""Null directions, the tangency function delta and the lightlike-point taxonomy."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .expr import SurfaceDef
from .jet import Jet2, sqrt
from .locus import LocusCurve
from .surface import LIGHTLIKE_TOL, MetricJet, first_fundamental, metric_from_f

TOL_REL = 1e-6
FIT_DEGREE = 5
FIT_WINDOW = 11


class ClassifyError(ValueError):
    pass


class Kind(enum.Enum):
    FIRST_KIND = "FirstKind"
    LK = "Lk"
    ADMISSIBLE_SECOND_KIND = "AdmissibleSecondKind"
    L_INFINITY = "LInfinity"
    DEGENERATE = "Degenerate"


@dataclass
class PointClass:
    kind: Kind
    k: int | None = None
    witness: tuple[float, ...] = ()

    @property
    def label(self) -> str:
        return f"L{self.k}" if self.kind is Kind.LK else self.kind.value

    @property
    def second_kind(self) -> bool:
        return self.kind in (Kind.LK, Kind.ADMISSIBLE_SECOND_KIND, Kind.L_INFINITY)


def _kernel_pair(E, F, G):
    """Unnormalized Gram kernel (works on floats, arrays, and jets)."""
    return (-F, E), (G, -F)


def null_direction(E: float, F: float, G: float, tol: float = LIGHTLIKE_TOL) -> np.ndarray:
    """Unit kernel vector of [[E, F], [F, G]] with the first nonzero component positive."""
    scale = math.sqrt(E * E + 2 * F * F + G * G)
    if scale == 0:
        raise ClassifyError("Gram matrix has rank 0; not an immersion")
    if abs(E * G - F * F) > tol * scale**2:
        raise ClassifyError("point is not lightlike")
    a, b = _kernel_pair(E, F, G)
    vec = np.array(a if abs(E) >= abs(G) else b, dtype=float)
    vec /= np.linalg.norm(vec)
    first = vec[0] if abs(vec[0]) > 1e-14 else vec[1]
    return vec if first > 0 else -vec


def null_direction_at(s: SurfaceDef, p) -> np.ndarray:
    m = first_fundamental(s, p, 0)
    return null_direction(m.E.value, m.F.value, m.G.value)


def null_field_jets(metric: MetricJet, sign=1.0) -> tuple[Jet2, Jet2]:
    """Normalized kernel field extended off the locus by the same formula.

    The branch is chosen from the base values; works for batched jets too.
    """
    E, F, G = metric.E, metric.F, metric.G
    use_first = np.abs(np.asarray(E.value)) >= np.abs(np.asarray(G.value))
    a = np.where(use_first, (-F).c, G.c)
    b = np.where(use_first, E.c, (-F).c)
    eu, ev = Jet2(a, E.degree), Jet2(b, E.degree)
    norm = sqrt(eu * eu + ev * ev)
    return eu * (sign / norm), ev * (sign / norm)


def beta_from_jets(metric: MetricJet, eta: tuple[Jet2, Jet2]):
    """beta = eta <eta f, eta f> at the base point (needs degree >= 1)."""
    eu, ev = eta
    Q = metric.E * eu * eu + 2.0 * metric.F * eu * ev + metric.G * ev * ev
    return Q.du.value * eu.value + Q.dv.value * ev.value


@dataclass
class NullField:
    eta: np.ndarray  # (k, 2), Euclidean unit, sign continuous
    beta: np.ndarray  # (k,)
    lam_eta: np.ndarray  # (k,) derivative of lambda along eta
    gram_residual: np.ndarray
    flips_on_closure: bool = False


def compute_null_field(s: SurfaceDef, curve: LocusCurve) -> NullField:
    u, v = curve.points[:, 0], curve.points[:, 1]
    metric = metric_from_f(s.eval_jet(u, v, 2))
    eu, ev = null_field_jets(metric)
    eta = np.stack([eu.value, ev.value], axis=1)
    beta = np.atleast_1d(beta_from_jets(metric, (eu, ev)))
    # sign: first sample by the first-nonzero-positive rule, then continuity
    signs = np.ones(len(eta))
    e0 = eta[0]
    first = e0[0] if abs(e0[0]) > 1e-14 else e0[1]
    signs[0] = 1.0 if first > 0 else -1.0
    for i in range(1, len(eta)):
        signs[i] = signs[i - 1] * (1.0 if eta[i] @ eta[i - 1] >= 0 else -1.0)
    eta = eta * signs[:, None]
    beta = beta * signs
    E, F, G = metric.E.value, metric.F.value, metric.G.value
    res = np.hypot(E * eta[:, 0] + F * eta[:, 1], F * eta[:, 0] + G * eta[:, 1])
    res = res / np.sqrt(E**2 + 2 * F**2 + G**2)
    lam_eta = np.einsum("ij,ij->i", curve.grad, eta)
    flips = bool(curve.closed and eta[-1] @ eta[0] < 0)
    return NullField(eta, beta, lam_eta, res, flips)


@dataclass
class DeltaData:
    t: np.ndarray
    values: np.ndarray
    derivs: np.ndarray  # (k, 5): delta, delta', ..., delta''''
    coeffs: np.ndarray  # (k, FIT_DEGREE + 1) in the scaled offset x = (t - t_i)/h
    centers: np.ndarray  # (k,) fit centre used for sample i
    flagged: np.ndarray  # windows shrunk or shifted at open ends
    scale: float
    h: float
    closed: bool
    span: float

    def _nearest(self, t: float) -> int:
        if self.closed:
            t = self.t[0] + (t - self.t[0]) % self.span
        return int(np.argmin(np.abs(self.t - t))), t

    def derivatives_at(self, t: float, order: int = 4) -> np.ndarray:
        """delta and its derivatives at any parameter, from the nearest local fit."""
        i, t = self._nearest(t)
        x = (t - self.centers[i]) / self.h
        poly = np.polynomial.Polynomial(self.coeffs[i])
        out = []
        for m in range(order + 1):
            out.append(poly.deriv(m)(x) / self.h**m if m else poly(x))
        return np.array(out)


def delta_function(curve: LocusCurve, nf: NullField) -> DeltaData:
    """delta(t) = det[gamma'(t) | eta(t)] with windowed polynomial derivatives."""
    T, eta = curve.tangent, nf.eta
    values = T[:, 0] * eta[:, 1] - T[:, 1] * eta[:, 0]
    k = len(values)
    h = curve.h
    half = FIT_WINDOW // 2
    derivs = np.zeros((k, 5))
    coeffs = np.zeros((k, FIT_DEGREE + 1))
    centers = curve.t.copy()
    flagged = np.zeros(k, dtype=bool)
    pinv_cache: dict = {}
    for i in range(k):
        if curve.closed:
            idx = np.arange(i - half, i + half + 1)
            tt = curve.t[idx % k] + np.floor_divide(idx, k) * curve.span
            yy = values[idx % k]
        else:
            lo = max(0, min(i - half, k - FIT_WINDOW))
            hi = min(k, lo + FIT_WINDOW)
            tt, yy = curve.t[lo:hi], values[lo:hi]
            flagged[i] = lo != i - half or hi - lo < FIT_WINDOW
        x = (tt - curve.t[i]) / h
        deg = min(FIT_DEGREE, len(x) - 1)
        key = tuple(np.round(x, 9)) + (deg,)
        pinv = pinv_cache.get(key)
        if pinv is None:
            pinv = np.linalg.pinv(np.vander(x, deg + 1, increasing=True))
            pinv_cache[key] = pinv
        c = pinv @ yy
        coeffs[i, : deg + 1] = c
        for m in range(min(5, deg + 1)):
            derivs[i, m] = math.factorial(m) * c[m] / h**m
    derivs[:, 0] = values
    scale = float(np.sqrt(np.mean(np.sum(T**2, axis=1) * np.sum(eta**2, axis=1))))
    return DeltaData(curve.t.copy(), values, derivs, coeffs, centers, flagged, scale, h,
                     curve.closed, curve.span)


def _is_infinity(delta: DeltaData, tol_rel: float) -> bool:
    return bool(np.max(np.abs(delta.values)) <= tol_rel * delta.scale)


def classify_point(curve: LocusCurve, nf: NullField, delta: DeltaData, t: float,
                   tol_rel: float = TOL_REL) -> PointClass:
    if not curve.nondegenerate:
        return PointClass(Kind.DEGENERATE)
    d = delta.derivatives_at(t, 4)
    thr = tol_rel * delta.scale
    if abs(d[0]) > thr:
        return PointClass(Kind.FIRST_KIND, None, (float(d[0]),))
    if _is_infinity(delta, tol_rel):
        return PointClass(Kind.L_INFINITY, None, tuple(float(x) for x in d))
    # compare derivative terms at the window's length scale so units cancel
    w = (FIT_WINDOW // 2) * delta.h
    for m in range(1, 4):
        if abs(d[m]) * w**m / math.factorial(m) > thr:
            return PointClass(Kind.LK, m + 2, tuple(float(x) for x in d[: m + 1]))
    return PointClass(Kind.ADMISSIBLE_SECOND_KIND, None, tuple(float(x) for x in d))


@dataclass
class SecondKindPoint:
    t: float
    point: np.ndarray
    cls: PointClass


def _poly_at(delta: DeltaData, i: int):
    return np.polynomial.Polynomial(delta.coeffs[i])


def locate_second_kind(curve: LocusCurve, nf: NullField, delta: DeltaData,
                       tol_rel: float = TOL_REL) -> list[SecondKindPoint]:
    """Zeros of delta: sign changes and touching minima of |delta|."""
    if not curve.nondegenerate or _is_infinity(delta, tol_rel):
        return []
    vals = delta.values
    k = len(vals)
    h = delta.h
    thr = tol_rel * delta.scale
    found: list[float] = []
    last = k if curve.closed else k - 1
    for i in range(last):
        j = (i + 1) % k
        a, b = vals[i], vals[j]
        tj = delta.t[j] if j > i else delta.t[j] + delta.span
        if a == 0.0:
            found.append(float(delta.t[i]))
            continue
        if a * b < 0:
            p = _poly_at(delta, i)
            xb = (tj - delta.centers[i]) / h
            x0 = (delta.t[i] - delta.centers[i]) / h
            try:
                x = brentq(p, x0, xb, xtol=1e-14)
            except ValueError:
                x = x0 + (xb - x0) * a / (a - b)
            found.append(float(delta.centers[i] + x * h))
    for i in range(k):
        if not curve.closed and (i == 0 or i == k - 1):
            continue
        prev, nxt = abs(vals[i - 1]), abs(vals[(i + 1) % k])
        if abs(vals[i]) <= prev and abs(vals[i]) <= nxt and vals[i - 1] * vals[(i + 1) % k] > 0:
            p = _poly_at(delta, i)
            x0 = (delta.t[i] - delta.centers[i]) / h
            crit = [r.real for r in p.deriv().roots() if abs(r.imag) < 1e-9 and abs(r.real - x0) <= 1.0]
            if not crit:
                continue
            x = min(crit, key=lambda r: abs(p(r)))
            if abs(p(x)) <= thr:
                found.append(float(delta.centers[i] + x * h))
    found.sort()
    points: list[SecondKindPoint] = []
    for t in found:
        if points and abs(t - points[-1].t) < h:
            continue
        cls = classify_point(curve, nf, delta, t, tol_rel)
        if cls.kind is Kind.FIRST_KIND:
            continue
        points.append(SecondKindPoint(t, point_at(curve, t), cls))
    return points


def point_at(curve: LocusCurve, t: float) -> np.ndarray:
    """Parameter-plane point at trace parameter t (linear interpolation)."""
    tt = curve.t
    pts = curve.points
    if curve.closed:
        t = tt[0] + (t - tt[0]) % curve.span
        tt = np.append(tt, tt[0] + curve.span)
        pts = np.vstack([pts, pts[0] - curve.shift])
    return np.array([np.interp(t, tt, pts[:, 0]), np.interp(t, tt, pts[:, 1])])


@dataclass
class CurveClassification:
    samples: list[PointClass]
    second_kind: list[SecondKindPoint] = field(default_factory=list)

    def histogram(self) -> dict[str, int]:
        hist: dict[str, int] = {}
        for c in self.samples + [p.cls for p in self.second_kind]:
            hist[c.label] = hist.get(c.label, 0) + 1
        return dict(sorted(hist.items()))


def classify_curve(curve: LocusCurve, nf: NullField, delta: DeltaData,
                   tol_rel: float = TOL_REL) -> CurveClassification:
    samples = [classify_point(curve, nf, delta, float(t), tol_rel) for t in curve.t]
    return CurveClassification(samples, locate_second_kind(curve, nf, delta, tol_rel))


def first_kind_conditions(s: SurfaceDef, p, tangent) -> tuple[float, float, float]:
    """(delta, eta lambda, beta) at a lightlike point; all nonzero iff first kind."""
    metric = first_fundamental(s, p, 1)
    eu, ev = null_field_jets(metric)
    eta = np.array([eu.value, ev.value])
    sign = 1.0 if (eta[0] if abs(eta[0]) > 1e-14 else eta[1]) > 0 else -1.0
    eta = sign * eta
    beta = sign * beta_from_jets(metric, (eu, ev))
    grad = np.array([metric.lam.coef(1, 0), metric.lam.coef(0, 1)])
    delta = tangent[0] * eta[1] - tangent[1] * eta[0]
    return float(delta), float(grad @ eta), float(beta)
