import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pergrowth.trig import TrigPoly, eval_stack


def _random_poly(rng, D, scale=1.0):
    return TrigPoly(rng.normal() * scale, rng.normal(size=D) * scale, rng.normal(size=D) * scale)


def _direct(p, x):
    k = np.arange(1, p.a.size + 1)
    ph = 2 * np.pi * np.outer(x, k)
    return p.mean + np.cos(ph) @ p.a + np.sin(ph) @ p.b


def test_evaluation_matches_direct_sum(rng):
    for D in (1, 5, 40, 200):
        p = _random_poly(rng, D)
        x = rng.random(300)
        assert np.max(np.abs(p(x) - _direct(p, x))) <= 1e-13 * p.coeff_norm()


def test_periodic_and_complex_agree(rng):
    p = _random_poly(rng, 12)
    x = rng.random(50)
    assert np.max(np.abs(p(x) - p(x + 1.0))) <= 1e-13
    assert np.max(np.abs(p.eval_complex(x + 0j) - p(x))) <= 1e-13


def test_derivative_against_finite_differences(rng):
    p = _random_poly(rng, 6)
    x = rng.random(40)
    h = 1e-6
    fd = (p(x + h) - p(x - h)) / (2 * h)
    assert np.max(np.abs(p.deriv()(x) - fd)) <= 1e-6 * p.deriv().coeff_norm()


def test_antiderivative_roundtrip(rng):
    p = _random_poly(rng, 8)
    q = (p - p.mean).antideriv()
    assert q.mean == 0.0
    assert np.allclose(q.deriv().a, p.a) and np.allclose(q.deriv().b, p.b)


def test_product_and_shift(rng):
    p, q = _random_poly(rng, 4), _random_poly(rng, 7)
    x = rng.random(64)
    assert np.max(np.abs((p * q)(x) - p(x) * q(x))) <= 1e-12
    assert np.max(np.abs(p.shift(0.3)(x) - p(x + 0.3))) <= 1e-13


def test_from_samples_interpolates(rng):
    v = rng.normal(size=33)
    p = TrigPoly.from_samples(v)
    assert np.max(np.abs(p.samples(33) - v)) <= 1e-13


def test_eval_stack_shares_points(rng):
    ps = [_random_poly(rng, D) for D in (3, 64, 100)]
    x = rng.random(500)
    out = eval_stack(ps, x)
    for p, row in zip(ps, out):
        assert np.max(np.abs(row - _direct(p, x))) <= 1e-13 * p.coeff_norm()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=9), st.floats(-5, 5))
def test_property_period_one(coeffs, x):
    p = TrigPoly(0.1, coeffs, coeffs[::-1])
    assert abs(p(x) - p(x + 1.0)) <= 1e-12 * (1 + p.coeff_norm())
