import math
from pathlib import Path

import numpy as np
import pytest

from _support import analysis, surface
from mixedsurf.expr import load_surface
from mixedsurf.locus import find_loci, lambda_grad, local_branch, scan_locus, trace_locus
from mixedsurf.surface import first_fundamental

DATA = Path(__file__).parent / "data"


def test_sphere_seeds_on_two_parallels():
    seeds = np.array(scan_locus(surface("sphere"), 64, 64))
    assert len(seeds) > 0
    assert np.allclose(np.abs(seeds[:, 1]), math.pi / 4, atol=0.06)


def test_plane_has_no_seeds():
    assert scan_locus(surface("plane"), 64, 64) == []


def test_cylinder_seeds():
    seeds = np.array(scan_locus(surface("cylinder"), 64, 64))
    targets = np.array([1, 3, 5, 7]) * math.pi / 4
    assert np.all(np.min(np.abs(seeds[:, 1:2] - targets[None, :]), axis=1) < 0.1)
    assert {int(np.argmin(np.abs(targets - v))) for v in seeds[:, 1]} == {0, 1, 2, 3}


def test_sphere_trace_closes():
    c = trace_locus(surface("sphere"), np.array([0.05, 0.8]))
    assert c.closed and c.nondegenerate and c.status == "closed"
    assert np.allclose(c.points[:, 1], math.pi / 4, atol=1e-10)
    assert c.span == pytest.approx(2 * math.pi, rel=1e-3)
    assert c.shift[0] == pytest.approx(2 * math.pi)


def test_helicoid_line():
    c = trace_locus(surface("helicoid"), np.array([0.0, 1.02]))
    assert not c.closed and c.nondegenerate
    assert np.allclose(c.points[:, 1], 1.0, atol=1e-12)
    assert np.allclose(c.grad[:, 1], 2.0)
    ends = sorted([c.points[0, 0], c.points[-1, 0]])
    assert ends == pytest.approx([-math.pi, math.pi], abs=c.h)


def test_pseudosphere_parallel():
    (r,) = analysis("pseudosphere").curves
    c = r.curve
    assert c.closed
    assert np.allclose(c.points[:, 1], math.log(math.sqrt(2) + 1), atol=1e-10)


def test_points_are_on_the_locus():
    s = surface("sphere")
    for c in (r.curve for r in analysis("sphere").curves):
        lam = np.array([lambda_grad(s, p)[0] for p in c.points[::17]])
        assert np.max(np.abs(lam)) < 1e-10


def test_image_arclength_of_sphere_parallel():
    # the parallel is a circle of Euclidean radius cos(pi/4), spacelike in the image
    c = analysis("sphere").curves[0].curve
    assert c.s[-1] + c.h * c.speed[-1] == pytest.approx(2 * math.pi * math.cos(math.pi / 4), rel=1e-4)


def test_find_loci_counts():
    assert len(analysis("sphere").curves) == 2
    assert len(analysis("cylinder").curves) == 4
    assert len(analysis("flat_torus").curves) == 4
    assert find_loci(surface("plane")) == []


def test_degenerate_point_detected():
    curves = find_loci(load_surface(DATA / "pinch.surf"))
    assert curves and not any(c.nondegenerate for c in curves)


def test_local_branch_stays_on_locus():
    s = surface("pseudosphere")
    p = np.array([0.4, math.asinh(1.0)])
    u, v = local_branch(s, p, 3)
    for dt in (0.05, 0.02):
        q = np.array([np.polyval(u.c[::-1], dt), np.polyval(v.c[::-1], dt)])
        lam = first_fundamental(s, q, 1).lam.value
        assert abs(lam) < 1e-6
