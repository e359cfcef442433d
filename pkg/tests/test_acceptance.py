"""Acceptance criteria, one test each.

Each check returns (passed, detail); the detail line carries the measured
worst-case numbers so a FAIL explains itself.  Run this file directly to
print the summary without pytest.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from _support import ACCEPTANCE, CBRT2, FIXTURES, analysis, jet_fd_errors, spread, surface
from mixedsurf.analysis import (asymptotic_fit, boundedness_verdict, curvature_off_locus, gauss_bonnet,
                                geodesic_limit_residual, khat_expansion_check)
from mixedsurf.classify import Kind
from mixedsurf.invariants import invariants_at
from mixedsurf.monge import MongeCoeffs, build_monge, monge_origin_invariants
from mixedsurf.surface import first_fundamental


def _rows(name, k):
    """k invariant rows spread over all curves of a fixture."""
    out = []
    curves = analysis(name).curves
    for r in curves:
        out += [r.table[i] for i in spread(len(r.table), k // len(curves))]
    return out


def _worst(rows, want):
    return max(abs(getattr(r, key) - val) for r in rows for key, val in want.items())


def criterion_1():
    rows = _rows("sphere", 64)
    err = _worst(rows, {"kappa_L": 1 / CBRT2, "kappa_N": CBRT2, "kappa_G": 0.0})
    return len(rows) == 64 and err <= 1e-6, f"sphere, {len(rows)} samples, max abs error {err:.2e}"


def criterion_2():
    rows = _rows("pseudosphere", 64)
    err = _worst(rows, {"kappa_L": -1 / CBRT2, "kappa_N": -CBRT2, "kappa_G": 0.0, "kappa_B": -0.8 * CBRT2})
    return len(rows) == 64 and err <= 1e-6, f"pseudosphere, {len(rows)} samples, max abs error {err:.2e}"


def _rel(a, b, floor=1e-12):
    return abs(a - b) / max(abs(a), abs(b), floor)


def criterion_3():
    worst = {}
    for name in ("sphere", "pseudosphere", "cylinder"):
        rows = [row for r in analysis(name).curves for row in r.table]
        worst[name] = max(_rel(r.kappa_L, r.kappa_L_intrinsic) if max(abs(r.kappa_L), abs(r.kappa_L_intrinsic)) > 1e-12
                          else 0.0 for r in rows)
    rng = np.random.default_rng(3)
    monge = 0.0
    for _ in range(10):
        row = invariants_at(build_monge(MongeCoeffs.random(rng, degree=3)), np.zeros(2), (1.0, 0.0))
        monge = max(monge, _rel(row.kappa_L, row.kappa_L_intrinsic))
    worst["10 monge"] = monge
    ok = all(v <= 1e-6 for v in worst.values())
    return ok, "max rel diff extrinsic vs intrinsic: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def criterion_4():
    worst, where, n, bad = 0.0, "", 0, 0
    for name in FIXTURES:
        for r in analysis(name).curves:
            for row in r.table:
                ref = 2 * row.kappa_L * row.kappa_N
                err = abs(row.theta - ref) / max(abs(row.theta), abs(ref), 1.0)
                n += 1
                bad += err > 1e-8
                if err > worst:
                    worst, where = err, f"{name} t={row.t:.4f} kappa_L={row.kappa_L:.3g}"
    return bad == 0, f"{n} first-kind samples, {bad} over 1e-8, worst rel {worst:.2e} ({where})"


def criterion_5():
    r0 = {n: khat_expansion_check([row for r in analysis(n).curves for row in r.table]).residual0
          for n in ("sphere", "pseudosphere")}
    r1 = {n: khat_expansion_check([row for r in analysis(n).curves for row in r.table]).residual1
          for n in ("cylinder", "flat_torus")}
    rng = np.random.default_rng(5)
    m1 = 0.0
    for _ in range(5):
        c = MongeCoeffs.random(rng, degree=3)
        c = MongeCoeffs((0.0,), c.a2, c.a3, c.b1, c.b2)
        m1 = max(m1, khat_expansion_check([invariants_at(build_monge(c), np.zeros(2), (1.0, 0.0))]).residual1)
    r1["monge a1=0"] = m1
    ok = all(v <= 1e-6 for v in r0.values()) and all(v is not None and v <= 1e-5 for v in r1.values())
    return ok, ("khat+kappa_L/2: " + ", ".join(f"{k} {v:.1e}" for k, v in r0.items())
                + "; 2khat_v-(kN-kB): " + ", ".join(f"{k} {v:.1e}" for k, v in r1.items()))


def criterion_6():
    rng = np.random.default_rng(6)
    worst_rel, worst_abs = 0.0, 0.0
    for _ in range(20):
        c = MongeCoeffs.random(rng, degree=3)
        row = invariants_at(build_monge(c), np.zeros(2), (1.0, 0.0))
        for got, want in zip((row.kappa_L, row.kappa_N, row.kappa_G, row.kappa_B), monge_origin_invariants(c)):
            if want == 0:
                worst_abs = max(worst_abs, abs(got))
            else:
                worst_rel = max(worst_rel, abs(got - want) / abs(want))
    return worst_rel <= 1e-6 and worst_abs <= 1e-8, f"20 sets, max rel {worst_rel:.1e}, max abs at zeros {worst_abs:.1e}"


def _verdict(name):
    a = analysis(name)
    return boundedness_verdict([r.table for r in a.curves], [r.classes for r in a.curves])


def criterion_7():
    cyl, sph, hel = _verdict("cylinder"), _verdict("sphere"), _verdict("helicoid")
    sph_w = any(w.get("kappa_L", 0) > 0 for w in sph.offending)
    hel_w = any(w.get("class") == "LInfinity" for w in hel.offending)
    ok = cyl.bounded and not sph.bounded and sph_w and not hel.bounded and hel_w
    return ok, (f"cylinder bounded={cyl.bounded}; sphere bounded={sph.bounded} max kappa_L={sph.max_kappa_L:.6f}; "
                f"helicoid bounded={hel.bounded} witness={hel.offending[0]['class'] if hel.offending else None}")


def criterion_8():
    parts, ok = [], True
    for name in ("sphere", "pseudosphere", "cylinder"):
        kinds = {k for r in analysis(name).curves for k in r.classes.histogram()}
        ok &= kinds == {"FirstKind"}
        parts.append(f"{name} {sorted(kinds)}")
    (h,) = analysis("helicoid").curves
    ratio = float(np.max(np.abs(h.delta.values)) / h.delta.scale)
    ok &= set(h.classes.histogram()) == {"LInfinity"} and ratio <= 1e-10
    parts.append(f"helicoid max|delta|/scale {ratio:.1e}")
    for name, k in (("spiral_l3", 3), ("spiral_l4", 4)):
        sk = analysis(name).curves[0].classes.second_kind
        hit = [p for p in sk if np.linalg.norm(p.point) < 1e-6 and p.cls.kind is Kind.LK and p.cls.k == k]
        ok &= len(sk) == 1 and bool(hit)
        parts.append(f"{name} {[p.cls.label for p in sk]}")
    return bool(ok), "; ".join(parts)


def _spiral_identities(name, eps):
    s = surface(name)
    worst = 0.0
    for u in np.linspace(-0.55, 0.55, 23):
        m = first_fundamental(s, (u, 0.0), 1)
        e = eps(u)
        worst = max(worst, abs(m.E.value - e * e), abs(m.F.value + e), abs(m.G.value - 1),
                    abs(m.E.coef(0, 1) + 2), abs(m.lam.coef(0, 1) + 2))
    return worst


def criterion_9():
    ident = max(_spiral_identities("spiral_l3", lambda u: u), _spiral_identities("spiral_l4", lambda u: u * u))
    if ident > 1e-12:
        return False, f"fixture identities violated ({ident:.1e})"
    want = {"kappa_L": -1 / CBRT2, "kappa_N": -1 / CBRT2**2, "kappa_G": -1.0, "kappa_B": -(CBRT2**4) / 5}
    r = analysis("spiral_l4").curves[0]
    fit = asymptotic_fit(surface("spiral_l4"), r.curve, r.nf, r.delta, r.classes.second_kind[0].t)
    ok, parts = True, []
    for name, f in fit.fits.items():
        de = abs(f.exponent - f.expected)
        dl = abs(f.limit - want[name]) / abs(want[name])
        ok &= de <= 0.05 and dl <= 0.02
        parts.append(f"{name} -{f.exponent:.4f} (lim {f.limit:.5f})")
    r3 = analysis("spiral_l3").curves[0]
    f3 = asymptotic_fit(surface("spiral_l3"), r3.curve, r3.nf, r3.delta, r3.classes.second_kind[0].t)
    ok &= abs(f3.fits["kappa_L"].exponent - 4 / 3) <= 0.05
    parts.append(f"L3 kappa_L -{f3.fits['kappa_L'].exponent:.4f}")
    return bool(ok), f"identities {ident:.0e}; L4 " + ", ".join(parts)


def criterion_10():
    s = surface("sphere")
    worst_s = -math.inf
    for r in analysis("sphere").curves:
        for i in spread(len(r.curve), 16):
            worst_s = max(worst_s, *curvature_off_locus(s, r.curve.points[i], r.curve.grad[i], 1e-4))
    h = surface("helicoid")
    worst_h = min(curvature_off_locus(h, (u, 1.0), (0.0, 1.0), 1e-4)[0] for u in np.linspace(-3, 3, 13))
    return worst_s < -1e6 and worst_h > 1e6, f"sphere max K at d=1e-4: {worst_s:.3e}; helicoid min K at v=1+1e-4: {worst_h:.3e}"


def criterion_11():
    a = analysis("flat_torus")
    v = boundedness_verdict([r.table for r in a.curves], [r.classes for r in a.curves])
    s = surface("flat_torus")
    full = gauss_bonnet(s, v, [r.curve for r in a.curves], base_grid=32)
    half = gauss_bonnet(s, v, [r.curve for r in a.curves], base_grid=16)
    d = abs(full.integral - half.integral)
    ok = abs(full.integral - 2 * math.pi * 0) <= 1e-6 and d < 1e-6
    return ok, f"integral {full.integral:.3e} (expected 0), halving change {d:.1e}"


def criterion_12():
    errs = {name: jet_fd_errors(name, 125, seed=12) for name in FIXTURES}
    worst = max(errs.values())
    return worst <= 1e-5, f"{125 * len(FIXTURES)} points, 9 partials each, worst rel {worst:.1e}"


def criterion_13():
    res = {}
    for name in ("sphere", "pseudosphere"):
        c = analysis(name).curves[0].curve
        idx = spread(len(c), 16)
        res[name] = geodesic_limit_residual(surface(name), c.points[idx], c.tangent[idx])
    return all(v <= 1e-4 for v in res.values()), ", ".join(f"{k} max |limit - kappa_L| {v:.1e}" for k, v in res.items())


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 14)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
