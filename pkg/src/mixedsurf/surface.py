"""First fundamental form, discriminant and curvature fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import SurfaceDef
from .jet import Jet2
from .lorentz import CausalChar, minkowski_cross, minkowski_inner

LIGHTLIKE_TOL = 1e-9


@dataclass
class MetricJet:
    E: Jet2
    F: Jet2
    G: Jet2
    lam: Jet2

    @property
    def scale(self):
        """Size of the Gram matrix; lambda has units of scale**2."""
        return np.sqrt(self.E.value**2 + 2 * self.F.value**2 + self.G.value**2)


@dataclass
class CurvatureSample:
    lam: float
    khat: float
    K: float | None
    H: float | None
    causal: CausalChar


def metric_from_f(f: tuple[Jet2, Jet2, Jet2]) -> MetricJet:
    fu = tuple(c.du for c in f)
    fv = tuple(c.dv for c in f)
    E = minkowski_inner(fu, fu)
    F = minkowski_inner(fu, fv)
    G = minkowski_inner(fv, fv)
    return MetricJet(E, F, G, E * G - F * F)


def first_fundamental(s: SurfaceDef, p, degree: int = 2) -> MetricJet:
    """Metric jets of the given degree (uses f jets one degree higher)."""
    return metric_from_f(s.eval_jet(p[0], p[1], degree + 1))


def khat_from_f(f: tuple[Jet2, Jet2, Jet2]) -> Jet2:
    """lambda^2 K from unnormalized normals; degree drops by two."""
    fu = tuple(c.du for c in f)
    fv = tuple(c.dv for c in f)
    fuu = tuple(c.du for c in fu)
    fuv = tuple(c.dv for c in fu)
    fvv = tuple(c.dv for c in fv)
    d = fuu[0].degree
    n = minkowski_cross(tuple(c.truncate(d) for c in fu), tuple(c.truncate(d) for c in fv))
    h12 = minkowski_inner(fuv, n)
    return h12 * h12 - minkowski_inner(fuu, n) * minkowski_inner(fvv, n)


def khat(s: SurfaceDef, p) -> float:
    return khat_from_f(s.eval_jet(p[0], p[1], 2)).value


def khat_jet(s: SurfaceDef, p, degree: int = 1) -> Jet2:
    return khat_from_f(s.eval_jet(p[0], p[1], degree + 2))


def _field_arrays(f, lightlike_tol):
    fu = tuple(c.du for c in f)
    fv = tuple(c.dv for c in f)
    E = minkowski_inner(fu, fu).value
    F = minkowski_inner(fu, fv).value
    G = minkowski_inner(fv, fv).value
    lam = E * G - F * F
    kh = khat_from_f(f).value
    val = lambda vec: tuple(np.asarray(c.value) for c in vec)  # noqa: E731
    fu0, fv0 = val(fu), val(fv)
    fuu = val(tuple(c.du for c in fu))
    fuv = val(tuple(c.dv for c in fu))
    fvv = val(tuple(c.dv for c in fv))
    n = minkowski_cross(np.array(fu0), np.array(fv0))
    h11 = minkowski_inner(fuu, n)
    h12 = minkowski_inner(fuv, n)
    h22 = minkowski_inner(fvv, n)
    scale = np.sqrt(E**2 + 2 * F**2 + G**2)
    light = np.abs(lam) <= lightlike_tol * scale**2
    safe = np.where(light, 1.0, lam)
    K = kh / safe**2
    # h_ij with the unit normal are the unnormalized ones over sqrt|lambda|
    H = (E * h22 - 2 * F * h12 + G * h11) / (2 * safe * np.sqrt(np.abs(safe)))
    return np.asarray(lam), np.asarray(kh), np.asarray(K), np.asarray(H), np.asarray(light)


def curvatures(s: SurfaceDef, p, lightlike_tol: float = LIGHTLIKE_TOL) -> CurvatureSample:
    lam, kh, K, H, light = _field_arrays(s.eval_jet(p[0], p[1], 2), lightlike_tol)
    if light:
        return CurvatureSample(float(lam), float(kh), None, None, CausalChar.LIGHTLIKE)
    causal = CausalChar.SPACELIKE if lam > 0 else CausalChar.TIMELIKE
    return CurvatureSample(float(lam), float(kh), float(K), float(H), causal)


@dataclass
class CurvatureField:
    u: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    khat: np.ndarray
    K: np.ndarray
    H: np.ndarray
    defined: np.ndarray

    def causal_codes(self) -> np.ndarray:
        codes = np.where(self.lam > 0, "S", "T")
        return np.where(self.defined, codes, "L")


def curvature_field(s: SurfaceDef, u, v, lightlike_tol: float = LIGHTLIKE_TOL) -> CurvatureField:
    """Vectorized curvatures on arrays of parameter points (K, H valid where defined)."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    lam, kh, K, H, light = _field_arrays(s.eval_jet(u, v, 2), lightlike_tol)
    return CurvatureField(u, v, lam, kh, K, H, ~light)


def grid_points(s: SurfaceDef, n: int, m: int):
    """n x m nodes; periodic axes omit the duplicate endpoint."""
    (a, b), (c, d) = s.u_range, s.v_range
    us = np.linspace(a, b, n, endpoint=not s.u_periodic)
    vs = np.linspace(c, d, m, endpoint=not s.v_periodic)
    return np.meshgrid(us, vs, indexing="ij")
