import math

import numpy as np
import pytest

from _support import surface
from mixedsurf.expr import parse_surface
from mixedsurf.lorentz import CausalChar
from mixedsurf.surface import curvature_field, curvatures, first_fundamental, grid_points, khat


def test_sphere_metric_by_hand():
    # E = cos^2 v, F = 0, G = sin^2 v - cos^2 v
    s = surface("sphere")
    m = first_fundamental(s, (0.7, 0.3), 1)
    assert m.E.value == pytest.approx(math.cos(0.3) ** 2)
    assert m.F.value == pytest.approx(0.0, abs=1e-16)
    assert m.G.value == pytest.approx(-math.cos(0.6))
    assert m.lam.coef(0, 1) == pytest.approx(2 * math.cos(0.3) * math.sin(0.3) * math.cos(0.6)
                                             + 2 * math.cos(0.3) ** 2 * math.sin(0.6))


def test_sphere_equator_curvature():
    # f_uu = f_vv = (0,-1,0), f_uv = 0 and n = (0,-1,0) at (0,0): khat = -1, lam = -1
    c = curvatures(surface("sphere"), (0.0, 0.0))
    assert c.causal is CausalChar.TIMELIKE
    assert c.khat == pytest.approx(-1.0) and c.K == pytest.approx(-1.0)


def test_plane_is_flat():
    c = curvatures(surface("plane"), (0.2, -0.4))
    assert c.K == 0 and c.H == 0 and c.causal is CausalChar.SPACELIKE


@pytest.mark.parametrize("v", [0.1, 1.0, 2.0, 4.0])
def test_cylinder_is_flat(v):
    c = curvatures(surface("cylinder"), (0.3, v))
    assert c.khat == 0 and c.K == 0 and c.H is not None


def test_undefined_on_locus():
    c = curvatures(surface("sphere"), (0.1, math.pi / 4))
    assert c.causal is CausalChar.LIGHTLIKE and c.K is None and c.H is None


def test_helicoid_khat_positive_on_locus():
    assert khat(surface("helicoid"), (0.3, 1.0)) == pytest.approx(1.0)


def test_helicoid_divergence_rate():
    # lam = v^2 - 1 ~ 2d so K d^2 -> khat/4
    h = surface("helicoid")
    vals = [curvatures(h, (0.3, 1 + d)).K * d * d for d in (1e-3, 1e-4, 1e-5)]
    assert all(curvatures(h, (0.3, 1 + d)).K > 0 for d in (1e-3, 1e-4, 1e-5))
    assert vals[-1] == pytest.approx(0.25, rel=1e-4)


def test_cylinder_principal_curvatures_real():
    c = surface("cylinder")
    for lam in np.geomspace(1e-6, 1e-2, 9):
        v = 0.5 * math.acos(lam)  # G = -cos 2v, lambda = -lam
        cs = curvatures(c, (0.2, v))
        assert cs.causal is CausalChar.TIMELIKE
        assert cs.H**2 - cs.K > 0


def test_reparametrisation_scales_lambda():
    s = surface("sphere")
    s2 = parse_surface(s.to_text().replace("v", "(2*v)").replace("(2*v)_range", "v_range")
                       .replace("(2*v)_periodic", "v_periodic"))
    for u, v in [(0.1, 0.2), (1.0, -0.5), (2.0, 0.7)]:
        lam = first_fundamental(s, (u, v), 1).lam.value
        lam2 = first_fundamental(s2, (u, v / 2), 1).lam.value
        assert lam2 == pytest.approx(4 * lam, rel=1e-13)
        # K is a scalar: unchanged by the chart
        assert curvatures(s2, (u, v / 2)).K == pytest.approx(curvatures(s, (u, v)).K, rel=1e-12)


def test_field_matches_pointwise():
    s = surface("pseudosphere")
    U, V = grid_points(s, 8, 8)
    f = curvature_field(s, U.ravel(), V.ravel())
    for k in range(0, U.size, 7):
        c = curvatures(s, (U.ravel()[k], V.ravel()[k]))
        assert f.lam[k] == pytest.approx(c.lam) and f.khat[k] == pytest.approx(c.khat)
        if c.K is not None:
            assert f.K[k] == pytest.approx(c.K)


def test_grid_excludes_periodic_endpoint():
    U, V = grid_points(surface("flat_torus"), 8, 8)
    assert U.max() < 2 * math.pi - 0.5 and V.max() < 2 * math.pi - 0.5
