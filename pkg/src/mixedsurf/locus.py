"""Locate and trace the lightlike set {lambda = 0} in the parameter plane."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .expr import SurfaceDef
from .jet import Jet1, compose_curve
from .surface import MetricJet, first_fundamental, grid_points, metric_from_f

NONDEG_TOL = 1e-6
MAX_NEWTON = 10
H_MIN = 1e-8
MAX_TURN = 0.2


class TraceError(RuntimeError):
    pass


@dataclass
class LocusCurve:
    t: np.ndarray
    points: np.ndarray  # (k, 2) on the universal cover
    grad: np.ndarray  # (k, 2) gradient of lambda
    tangent: np.ndarray  # (k, 2) unit tangent, CCW rotation of grad
    speed: np.ndarray  # Minkowski length of df(tangent)
    s: np.ndarray  # image arclength
    closed: bool
    nondegenerate: bool
    status: str
    h: float
    shift: np.ndarray = field(default_factory=lambda: np.zeros(2))  # period offset end -> start

    def __len__(self):
        return len(self.t)

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0]) + (self.h if self.closed else 0.0)


def _rot(g):
    return np.array([-g[1], g[0]])


def lambda_grad(s: SurfaceDef, p) -> tuple[float, np.ndarray, float]:
    """lambda, its gradient, and the lambda scale (squared Gram size) at p."""
    m = first_fundamental(s, p, 1)
    lam = m.lam
    scale2 = m.E.value**2 + 2 * m.F.value**2 + m.G.value**2
    return lam.value, np.array([lam.coef(1, 0), lam.coef(0, 1)]), scale2


def _wrap_delta(s: SurfaceDef, d):
    d = np.array(d, dtype=float)
    for i, per in enumerate(s.periods):
        if per:
            d[i] = d[i] - per * np.round(d[i] / per)
    return d


def scan_locus(s: SurfaceDef, n: int = 64, m: int = 64) -> list[np.ndarray]:
    """One seed per grid cell where lambda changes sign, refined on a cell edge."""
    if n < 8 or m < 8:
        raise ValueError("scan grid must be at least 8 x 8")
    U, V = grid_points(s, n, m)
    lam = metric_from_f(s.eval_jet(U, V, 1)).lam.value
    nu = n if s.u_periodic else n - 1
    nv = m if s.v_periodic else m - 1
    pu, pv = s.periods
    seeds = []

    def node(i, j):
        ii, jj = i % n, j % m
        return np.array([U[ii, jj] + (pu if i >= n else 0.0), V[ii, jj] + (pv if j >= m else 0.0)]), lam[ii, jj]

    for i in range(nu):
        for j in range(nv):
            corners = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]
            for k in range(4):
                (a, la), (b, lb) = corners[k], corners[(k + 1) % 4]
                if la == 0.0:
                    seeds.append(a)
                    break
                if la * lb < 0:
                    def f(x, a=a, b=b):
                        return lambda_grad(s, a + x * (b - a))[0]

                    x = brentq(f, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                    seeds.append(a + x * (b - a))
                    break
    return seeds


def _correct(s: SurfaceDef, y, normal, scale_hint=None):
    """Newton iteration for lambda = 0 along a fixed direction."""
    y = np.array(y, dtype=float)
    for _ in range(MAX_NEWTON):
        if not np.all(s.contains(y[0], y[1])):
            return None
        lam, g, scale2 = lambda_grad(s, y)
        slope = g @ normal
        if slope == 0:
            return None
        step = lam / slope
        y = y - step * normal
        if abs(step) <= 1e-15 * (1.0 + np.abs(y).max()):
            break
    if not np.all(s.contains(y[0], y[1])):
        return None
    lam, g, scale2 = lambda_grad(s, y)
    if abs(lam) > 1e-10 * scale2:
        return None
    return y, g


def _speed(s: SurfaceDef, p, T) -> float:
    m = first_fundamental(s, p, 0)
    q = m.E.value * T[0] ** 2 + 2 * m.F.value * T[0] * T[1] + m.G.value * T[1] ** 2
    return math.sqrt(abs(q))


def _march(s, x0, g0, h, sign, nondeg_tol, max_steps, allow_close):
    pts, grads, hs = [x0], [g0], []
    gnorm2 = [g0 @ g0]
    T0 = sign * _rot(g0) / np.linalg.norm(g0)
    status = "limit"
    x, g = x0, g0
    for _ in range(max_steps):
        T = sign * _rot(g) / np.linalg.norm(g)
        n = g / np.linalg.norm(g)
        step = h
        while True:
            res = _correct(s, x + step * T, n)
            if res is not None:
                y, gy = res
                Ty = sign * _rot(gy) / np.linalg.norm(gy)
                if np.linalg.norm(y - x) <= step * (1 + 1e-6) + 1e-12 and T @ Ty > math.cos(MAX_TURN):
                    break
            else:
                # corrector failed; distinguish leaving the domain from divergence
                pred = x + step * T
                if not np.all(s.contains(pred[0], pred[1])):
                    return pts, grads, hs, "exit"
            step /= 2
            if step < H_MIN:
                return pts, grads, hs, "failed"
        if allow_close and len(pts) >= 3:
            d = _wrap_delta(s, y - x0)
            if np.linalg.norm(d) < h / 2 and Ty @ T0 > math.cos(MAX_TURN):
                return pts, grads, hs, "closed"
        rms = math.sqrt(sum(gnorm2) / len(gnorm2))
        if np.linalg.norm(gy) < nondeg_tol * rms:
            return pts, grads, hs, "degenerate"
        pts.append(y)
        grads.append(gy)
        hs.append(step)
        gnorm2.append(gy @ gy)
        x, g = y, gy
    return pts, grads, hs, status


def _min_grad_norm(t: np.ndarray, grads: np.ndarray) -> float:
    """Smallest |grad lambda| along the curve, looking between samples.

    At each sampled local minimum both components are fitted by quadratics
    through the neighbouring samples; a degenerate point shows up as a
    common zero of the fits even when no sample lands on it.
    """
    norms = np.linalg.norm(grads, axis=1)
    best = float(norms.min())
    for i in range(1, len(t) - 1):
        if not (norms[i] <= norms[i - 1] and norms[i] <= norms[i + 1]):
            continue
        x = t[i - 1:i + 2] - t[i]
        coef = [np.polyfit(x, grads[i - 1:i + 2, k], 2) for k in (0, 1)]
        sq = np.polyadd(np.polymul(coef[0], coef[0]), np.polymul(coef[1], coef[1]))
        cands = [x[0], x[2]] + [r.real for r in np.roots(np.polyder(sq))
                                if abs(r.imag) < 1e-12 and x[0] <= r.real <= x[2]]
        best = min(best, math.sqrt(max(0.0, min(np.polyval(sq, c) for c in cands))))
    return best


def trace_locus(s: SurfaceDef, seed, h: float | None = None, nondeg_tol: float = NONDEG_TOL,
                max_steps: int | None = None) -> LocusCurve:
    """Predictor-corrector continuation of lambda = 0 from a seed point."""
    h = s.diagonal / 512 if h is None else h
    if max_steps is None:
        extent = 2 * (s.u_range[1] - s.u_range[0] + s.v_range[1] - s.v_range[0])
        max_steps = int(20 * extent / h) + 10
    lam, g, _ = lambda_grad(s, seed)
    if not np.linalg.norm(g) > 0:
        raise TraceError("gradient of lambda vanishes at the seed")
    res = _correct(s, seed, g / np.linalg.norm(g))
    if res is None:
        raise TraceError("could not project the seed onto lambda = 0")
    x0, g0 = res
    fp, fg, fh, status = _march(s, x0, g0, h, +1.0, nondeg_tol, max_steps, True)
    closed = status == "closed"
    if closed or status == "degenerate":
        pts, grads, hs = fp, fg, fh
        statuses = status
    else:
        bp, bg, bh, bstatus = _march(s, x0, g0, h, -1.0, nondeg_tol, max_steps, False)
        pts = bp[::-1] + fp[1:]
        grads = bg[::-1] + fg[1:]
        hs = bh[::-1] + fh
        statuses = f"{bstatus}/{status}"
    pts = np.array(pts)
    grads = np.array(grads)
    t = np.concatenate([[0.0], np.cumsum(hs)]) if hs else np.zeros(1)
    norms = np.linalg.norm(grads, axis=1)
    tangent = np.stack([-grads[:, 1], grads[:, 0]], axis=1) / norms[:, None]
    speed = np.array([_speed(s, p, T) for p, T in zip(pts, tangent)])
    sarc = np.zeros(len(t))
    if len(t) > 1:
        sarc[1:] = np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(t))
    rms = math.sqrt(np.mean(norms**2))
    nondeg = bool(_min_grad_norm(t, grads) > nondeg_tol * rms) and "degenerate" not in statuses
    shift = np.zeros(2)
    if closed:
        shift = x0 - pts[-1] - _wrap_delta(s, x0 - pts[-1])
    return LocusCurve(t, pts, grads, tangent, speed, sarc, closed, nondeg, statuses, h, shift)


def _near_curve(s: SurfaceDef, p, curve: LocusCurve, tol: float) -> bool:
    d = p[None, :] - curve.points
    for i, per in enumerate(s.periods):
        if per:
            d[:, i] -= per * np.round(d[:, i] / per)
    return bool(np.min(np.hypot(d[:, 0], d[:, 1])) <= tol)


def find_loci(s: SurfaceDef, grid: int = 64, h: float | None = None,
              nondeg_tol: float = NONDEG_TOL) -> list[LocusCurve]:
    """Trace every component reached by the scan seeds, skipping duplicates."""
    h = s.diagonal / 512 if h is None else h
    curves: list[LocusCurve] = []
    for seed in scan_locus(s, grid, grid):
        if any(_near_curve(s, seed, c, 2 * h) for c in curves):
            continue
        curves.append(trace_locus(s, seed, h, nondeg_tol))
    return curves


def local_branch(s: SurfaceDef, p, degree: int = 3, direction=None,
                 metric: MetricJet | None = None) -> tuple[Jet1, Jet1]:
    """Taylor jet of the lightlike curve through p, parametrized so that
    gamma(t) = p + t*T + w(t)*n with T the unit tangent and n = grad/|grad|.

    T defaults to the CCW rotation of grad lambda; pass ``direction`` to flip.
    """
    if metric is None:
        metric = first_fundamental(s, p, degree)
    lam = metric.lam.truncate(degree)
    g = np.array([lam.coef(1, 0), lam.coef(0, 1)], dtype=float)
    gn = np.linalg.norm(g)
    if gn == 0:
        raise TraceError("degenerate lightlike point: grad lambda = 0")
    n = g / gn
    T = _rot(n)
    if direction is not None and np.dot(direction, T) < 0:
        T = -T
    t = Jet1.variable(0.0, degree)
    w = Jet1.constant(0.0, degree)
    for _ in range(degree):
        val = lam.substitute(t * T[0] + w * n[0], t * T[1] + w * n[1])
        w = w - val / gn
    return p[0] + t * T[0] + w * n[0], p[1] + t * T[1] + w * n[1]


def curve_tangent_direction(curve: LocusCurve, i: int) -> np.ndarray:
    return curve.tangent[i]
