"""Verdicts built on the invariants: boundedness of K, local shape, divergence
rates near second-kind points, expansion checks and Gauss-Bonnet."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .classify import (CurveClassification, DeltaData, Kind, NullField, classify_point)
from .expr import SurfaceDef
from .invariants import (InvariantError, InvariantSample, adapted_chart, extrinsic,
                         geodesic_curvature_limit as _gk_limit, invariants_at, kappa_B,
                         khat_in_chart, local_jets)
from .locus import LocusCurve
from .surface import curvature_field, curvatures

TOL = 1e-6


class PreconditionError(ValueError):
    """A verdict was requested on input that does not meet its hypotheses."""


# --- boundedness and shape ----------------------------------------------------

@dataclass
class BoundednessVerdict:
    bounded: bool
    max_kappa_L: float | None
    max_kN_minus_kB: float | None
    offending: list[dict] = field(default_factory=list)
    reason: str = ""


def boundedness_verdict(tables: list[list[InvariantSample]], classes: list[CurveClassification],
                        tol: float = TOL) -> BoundednessVerdict:
    """K is bounded near the locus iff every point is first kind with
    kappa_L = 0 and kappa_N = kappa_B."""
    samples = [r for tab in tables for r in tab]
    max_kl = max((abs(r.kappa_L) for r in samples), default=None)
    max_nb = max((abs(r.kappa_N - r.kappa_B) for r in samples), default=None)
    offending: list[dict] = []
    reasons: list[str] = []
    for ci, cc in enumerate(classes):
        bad = [c for c in cc.samples if c.kind is not Kind.FIRST_KIND] + [p.cls for p in cc.second_kind]
        if bad:
            kinds = sorted({c.label for c in bad})
            reasons.append(f"curve {ci}: non-first-kind points ({', '.join(kinds)})")
            first = next((p for p in cc.second_kind), None)
            w = {"curve": ci, "class": bad[0].label}
            if first is not None:
                w.update(t=first.t, u=float(first.point[0]), v=float(first.point[1]))
            offending.append(w)
    scale = 1.0
    if samples:
        scale = max(1.0, max(abs(r.kappa_N) for r in samples), max(abs(r.kappa_B) for r in samples))
    thr = tol * scale
    if samples:
        worst_l = max(samples, key=lambda r: abs(r.kappa_L))
        if abs(worst_l.kappa_L) > thr:
            reasons.append(f"kappa_L = {worst_l.kappa_L:.6g} != 0")
            offending.append({"t": worst_l.t, "u": worst_l.u, "v": worst_l.v, "kappa_L": worst_l.kappa_L})
        worst_nb = max(samples, key=lambda r: abs(r.kappa_N - r.kappa_B))
        if abs(worst_nb.kappa_N - worst_nb.kappa_B) > thr:
            reasons.append(f"kappa_N - kappa_B = {worst_nb.kappa_N - worst_nb.kappa_B:.6g} != 0")
            offending.append({"t": worst_nb.t, "u": worst_nb.u, "v": worst_nb.v,
                              "kN_minus_kB": worst_nb.kappa_N - worst_nb.kappa_B})
    bounded = not reasons
    return BoundednessVerdict(bounded, max_kl, max_nb, offending, "; ".join(reasons) or "bounded")


class ShapeClass(enum.Enum):
    LOCALLY_CONVEX = "LocallyConvex"
    SADDLE = "Saddle"
    INCONCLUSIVE = "Inconclusive"


def shape_class(sample: InvariantSample, tol: float = TOL) -> ShapeClass:
    if sample.kappa_L > tol:
        return ShapeClass.LOCALLY_CONVEX
    if sample.kappa_L < -tol:
        return ShapeClass.SADDLE
    return ShapeClass.INCONCLUSIVE


# --- asymptotics near second-kind points ----------------------------------------

EXPONENTS = {"kappa_L": 4.0 / 3.0, "kappa_N": 8.0 / 3.0, "kappa_G": 2.0, "kappa_B": 8.0 / 3.0}


def _scaled(name: str, eps: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    c = np.cbrt(eps)
    if name == "kappa_L":
        return c**4 * kappa
    if name == "kappa_G":
        return eps * np.abs(eps) * kappa
    return c**8 * kappa


@dataclass
class ExponentFit:
    name: str
    expected: float
    exponent: float  # fitted e in |kappa| ~ C |eps|^(-e)
    rms: float  # log-log residual
    limit: float | None  # extrapolated scaled limit
    samples: int


@dataclass
class AsymptoticFit:
    t_star: float
    point: tuple[float, float]
    cls: str
    eps_range: tuple[float, float]
    fits: dict[str, ExponentFit]

    def as_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "u": self.point[0],
            "v": self.point[1],
            "class": self.cls,
            "eps_min": self.eps_range[0],
            "eps_max": self.eps_range[1],
            "fits": {
                k: {"expected_exponent": f.expected, "exponent": f.exponent, "rms": f.rms,
                    "limit": f.limit, "samples": f.samples}
                for k, f in self.fits.items()
            },
        }


def asymptotic_fit(s: SurfaceDef, curve: LocusCurve, nf: NullField, delta: DeltaData, t_star: float,
                   eps_min: float = 1e-5, eps_max: float = 1e-2, tol_rel: float = 1e-6) -> AsymptoticFit:
    """Fit |kappa| ~ C |eps|^(-e) on first-kind samples around t_star.

    eps is delta with eta oriented along the curve tangent; the regression
    also carries linear and quadratic terms in (t - t_star) to absorb the
    smooth correction factors, and scaled limits come from Richardson
    extrapolation on the two samples nearest t_star on each side.
    """
    cls = classify_point(curve, nf, delta, t_star, tol_rel)
    if cls.kind not in (Kind.LK, Kind.ADMISSIBLE_SECOND_KIND):
        raise PreconditionError(f"t* = {t_star} is {cls.label}, not an admissible second-kind point")
    tt = curve.t
    d = tt - t_star
    if curve.closed:
        d = (d + curve.span / 2) % curve.span - curve.span / 2
    orient = np.sign(np.einsum("ij,ij->i", curve.tangent, nf.eta))
    orient[orient == 0] = 1.0
    eps = orient * delta.values
    order = np.argsort(d)
    centre = int(np.searchsorted(d[order], 0.0))

    def window(hi):
        # walk outwards from t* on each side until |eps| leaves [.., hi]
        picked = []
        for step, start in ((-1, centre - 1), (1, centre)):
            k = start
            while 0 <= k < len(order):
                i = order[k]
                if abs(eps[i]) > hi:
                    break
                if abs(eps[i]) >= eps_min:
                    picked.append(i)
                k += step
        return sorted(picked, key=lambda i: d[i])

    idx = window(eps_max)
    while len(idx) < 12 and eps_max < 0.1:
        eps_max *= 2
        idx = window(eps_max)
    rows = []
    for i in idx:
        c = classify_point(curve, nf, delta, float(tt[i]), tol_rel)
        if c.kind is not Kind.FIRST_KIND:
            continue
        try:
            r = invariants_at(s, curve.points[i], curve.tangent[i], tt[i], curve.s[i])
        except InvariantError:
            continue
        rows.append((d[i], eps[i], r))
    if len(rows) < 6:
        raise PreconditionError(f"only {len(rows)} usable samples near t* (need 6)")
    dd = np.array([r[0] for r in rows])
    ee = np.array([r[1] for r in rows])
    fits: dict[str, ExponentFit] = {}
    for name, expected in EXPONENTS.items():
        kap = np.array([getattr(r[2], name) for r in rows])
        ok = np.abs(kap) > 0
        x = np.log(np.abs(ee[ok]))
        y = np.log(np.abs(kap[ok]))
        if ok.sum() < 6:
            fits[name] = ExponentFit(name, expected, float("nan"), float("nan"), None, int(ok.sum()))
            continue
        A = np.column_stack([np.ones_like(x), x, dd[ok], dd[ok] ** 2])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        g = _scaled(name, ee, kap)
        limits = []
        for side in (dd < 0, dd > 0):
            j = np.flatnonzero(side)
            if len(j) < 2:
                continue
            j = j[np.argsort(np.abs(dd[j]))][:2]
            d1, d2 = dd[j]
            g1, g2 = g[j]
            limits.append((d2 * g1 - d1 * g2) / (d2 - d1))
        fits[name] = ExponentFit(name, expected, float(-coef[1]), float(np.sqrt(np.mean(resid**2))),
                                 float(np.mean(limits)) if limits else None, int(ok.sum()))
    p = curve.points[np.argmin(np.abs(d))]
    return AsymptoticFit(float(t_star), (float(p[0]), float(p[1])), cls.label, (eps_min, eps_max), fits)


# --- expansion checks ---------------------------------------------------------

@dataclass
class ExpansionReport:
    residual0: float  # max |khat(u,0) + kappa_L/2|
    residual1: float | None  # max |2 khat_v(u,0) - (kappa_N - kappa_B)| where kappa_L ~ 0
    samples: int


def khat_expansion_check(rows: list[InvariantSample], tol: float = TOL) -> ExpansionReport:
    """Check the specially adapted expansion of khat along the locus."""
    if not rows:
        raise PreconditionError("no first-kind samples")
    r0 = max(abs(r.khat + r.kappa_L / 2) for r in rows)
    flat = [r for r in rows if abs(r.kappa_L) <= tol]
    r1 = max((abs(2 * r.khat_v - (r.kappa_N - r.kappa_B)) for r in flat), default=None)
    return ExpansionReport(float(r0), None if r1 is None else float(r1), len(rows))


def geodesic_limit_residual(s: SurfaceDef, points, tangents, offset: float = 1e-3) -> float:
    """max |lim sqrt|lambda| kappa_g^s - kappa_L| over the given locus points."""
    worst = 0.0
    for p, T in zip(points, tangents):
        lj = local_jets(s, p, T)
        ext = extrinsic(lj)
        chart = adapted_chart(s, lj, special=True)
        for off in (offset, -offset):
            worst = max(worst, abs(_gk_limit(s, chart, off) - ext.kappa_L))
    return worst


# --- sign law near the locus ---------------------------------------------------

def curvature_off_locus(s: SurfaceDef, p, grad, d: float) -> tuple[float | None, float | None]:
    """Gaussian curvature at p +- d * grad/|grad| (parameter-plane normal)."""
    n = np.asarray(grad, float) / np.linalg.norm(grad)
    out = []
    for sgn in (1.0, -1.0):
        q = np.asarray(p, float) + sgn * d * n
        out.append(curvatures(s, q).K)
    return out[0], out[1]


# --- Gauss-Bonnet -------------------------------------------------------------

@dataclass
class GaussBonnetResult:
    integral: float
    expected: float
    residual: float
    by_tau: dict[float, float]
    base_grid: int

    def as_dict(self) -> dict:
        return {"integral": self.integral, "expected": self.expected, "residual": self.residual,
                "by_tau": {repr(k): v for k, v in sorted(self.by_tau.items())}, "base_grid": self.base_grid}


def _tube_integral(s: SurfaceDef, tau: float, base: int, order: int, depth: int, threads: int) -> float:
    (a, b), (c, d) = s.u_range, s.v_range
    xg, wg = np.polynomial.legendre.leggauss(order)
    cells = [(a + (b - a) * i / base, a + (b - a) * (i + 1) / base,
              c + (d - c) * j / base, c + (d - c) * (j + 1) / base)
             for i in range(base) for j in range(base)]
    total = 0.0
    for level in range(depth + 1):
        if not cells:
            break
        C = np.array(cells)
        hu = (C[:, 1] - C[:, 0]) / 2
        hv = (C[:, 3] - C[:, 2]) / 2
        mu = (C[:, 1] + C[:, 0]) / 2
        mv = (C[:, 3] + C[:, 2]) / 2
        U = mu[:, None, None] + hu[:, None, None] * xg[None, :, None]
        V = mv[:, None, None] + hv[:, None, None] * xg[None, None, :]
        U, V = np.broadcast_arrays(U, V)
        fld = _field_chunks(s, U.reshape(len(cells), -1), V.reshape(len(cells), -1), threads)
        lam, kh = fld
        keep = np.abs(lam) >= tau
        integrand = np.where(keep, kh / np.where(keep, np.abs(lam), 1.0) ** 1.5, 0.0)
        W = (wg[:, None] * wg[None, :]).ravel()
        cell_int = (integrand * W[None, :]).sum(axis=1) * hu * hv
        mixed = keep.any(axis=1) & ~keep.all(axis=1)
        if level == depth:
            total += float(cell_int.sum())
            break
        total += float(cell_int[~mixed].sum())
        nxt = []
        for k in np.flatnonzero(mixed):
            u0, u1, v0, v1 = cells[k]
            um, vm = (u0 + u1) / 2, (v0 + v1) / 2
            nxt += [(u0, um, v0, vm), (um, u1, v0, vm), (u0, um, vm, v1), (um, u1, vm, v1)]
        cells = nxt
    return total


def _field_chunks(s: SurfaceDef, U, V, threads: int):
    from concurrent.futures import ThreadPoolExecutor

    rows = np.array_split(np.arange(U.shape[0]), max(1, min(threads, U.shape[0])))

    def work(ix):
        f = curvature_field(s, U[ix], V[ix])
        return f.lam, f.khat

    if threads > 1 and len(rows) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, rows))
    else:
        parts = [work(ix) for ix in rows]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def gauss_bonnet(s: SurfaceDef, verdict: BoundednessVerdict | None = None,
                 curves: list[LocusCurve] | None = None, base_grid: int = 32, order: int = 8,
                 depth: int = 4, taus=(1e-3, 1e-4, 1e-5), threads: int = 1) -> GaussBonnetResult:
    """Integral of K dA over a closed (doubly periodic) surface, tube-excluded."""
    if not (s.u_periodic and s.v_periodic):
        raise PreconditionError("Gauss-Bonnet needs a closed surface (both directions periodic)")
    if curves is not None and not all(c.nondegenerate for c in curves):
        raise PreconditionError("a lightlike curve is degenerate")
    if verdict is not None and not verdict.bounded:
        raise PreconditionError(f"Gaussian curvature is unbounded ({verdict.reason})")
    U, V = np.meshgrid(np.linspace(*s.u_range, 33), np.linspace(*s.v_range, 33), indexing="ij")
    lam_scale = float(np.sqrt(np.mean(curvature_field(s, U, V).lam ** 2)))
    by_tau = {}
    for tau in taus:
        by_tau[tau] = _tube_integral(s, tau * lam_scale, base_grid, order, depth, threads)
    t2, t3 = sorted(taus)[:2][::-1]
    i2, i3 = by_tau[t2], by_tau[t3]
    integral = i3 - (i2 - i3) * t3 / (t2 - t3)
    expected = 0.0  # Euler characteristic of the torus
    return GaussBonnetResult(float(integral), expected, float(abs(integral - expected)), by_tau, base_grid)
