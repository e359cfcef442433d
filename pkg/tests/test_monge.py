import numpy as np
import pytest

from mixedsurf.classify import Kind, classify_curve, compute_null_field, delta_function
from mixedsurf.expr import ExprError, IntU
from mixedsurf.invariants import invariants_at
from mixedsurf.locus import find_loci, lambda_grad
from mixedsurf.monge import (MongeCoeffs, MongeError, build_monge, coeffs_text, monge_origin_invariants,
                             parse_coeffs)
from mixedsurf.surface import first_fundamental


def origin_invariants(c):
    r = invariants_at(build_monge(c), np.zeros(2), (1.0, 0.0))
    return r.kappa_L, r.kappa_N, r.kappa_G, r.kappa_B


def close(got, want):
    for g, w in zip(got, want):
        if w == 0:
            assert abs(g) <= 1e-8
        else:
            assert abs(g - w) <= 1e-6 * abs(w)


def test_minimal_form():
    s = build_monge(MongeCoeffs())
    x, y, z = s.evaluate(0.1, 0.05)
    assert (x, y) == pytest.approx((0.1, 0.05)) and z == pytest.approx(0.05 + 0.05**2 / 4)
    for u in np.linspace(-0.15, 0.15, 7):
        assert abs(first_fundamental(s, (u, 0.0), 1).lam.value) < 1e-15
    assert monge_origin_invariants(MongeCoeffs()) == (0.0, 0.0, 0.0, 0.0)
    close(origin_invariants(MongeCoeffs()), (0, 0, 0, 0))


def test_integral_term_uses_intu():
    assert isinstance(build_monge(MongeCoeffs(a1=(1.0,))).z.left.left, IntU)


def test_constant_a1():
    c = MongeCoeffs(a1=(1.0,))
    kl, kn, kg, kb = monge_origin_invariants(c)
    assert (kl, kn, kg) == (1.0, -0.5, 0.0)
    # -a2 + a1/5 (-5 a1 + 12 (b2)_v - 2) with (b2)_v = 0
    assert kb == pytest.approx(-7 / 5)
    close(origin_invariants(c), (1.0, -0.5, 0.0, -1.4))


def test_constant_a2():
    c = MongeCoeffs(a2=(1.0,))
    kl, kn, kg, kb = monge_origin_invariants(c)
    assert (kn, kb) == (-2.0, -1.0)
    close(origin_invariants(c), (0.0, -2.0, 0.0, -1.0))


def test_b2_derivatives():
    c = MongeCoeffs(a1=(0.5,), b2=((0.25, 0.3), (0.6,)))
    kl, kn, kg, kb = monge_origin_invariants(c)
    assert kg == pytest.approx(0.8) and kb == pytest.approx(0.1 * (-2.5 + 3.6 - 2))
    close(origin_invariants(c), (kl, kn, kg, kb))


def test_b2_pin_enforced():
    with pytest.raises(MongeError):
        MongeCoeffs(b2=((0.3,),))


def test_degree_limit():
    with pytest.raises(MongeError):
        MongeCoeffs(a1=tuple(range(10)))


@pytest.mark.parametrize("seed", range(20))
def test_random_oracle(seed):
    c = MongeCoeffs.random(np.random.default_rng(seed), degree=3)
    close(origin_invariants(c), monge_origin_invariants(c))


@pytest.mark.parametrize("seed", range(3))
def test_random_surface_locus_through_origin(seed):
    s = build_monge(MongeCoeffs.random(np.random.default_rng(100 + seed)))
    curves = find_loci(s, grid=32)
    hits = []
    for c in curves:
        d = np.linalg.norm(c.points, axis=1)
        i = int(np.argmin(d))
        if d[i] < 2 * c.h:
            hits.append((c, i))
    (c, i) = hits[0]
    assert abs(c.tangent[i][1]) < 0.05  # tangent to the u-axis near the origin
    lam = np.array([lambda_grad(s, p)[0] for p in c.points])
    assert np.max(np.abs(lam)) <= 1e-9
    nf = compute_null_field(s, c)
    cls = classify_curve(c, nf, delta_function(c, nf))
    assert cls.samples[i].kind is Kind.FIRST_KIND


def test_coeffs_round_trip():
    c = MongeCoeffs.random(np.random.default_rng(5), degree=2, name="demo")
    assert parse_coeffs(coeffs_text(c)) == c


@pytest.mark.parametrize("text", ["a1 = 1, x", "b2 = 0.3", "colour = red", "a1 1"])
def test_bad_coefficient_files(text):
    with pytest.raises(ExprError):
        parse_coeffs(text)
