import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pergrowth.errors import NotDiffeo, ValidationError
from pergrowth.flows import (FlowMap, IntegratorConfig, Quadratic, XOnly, bump_hamiltonian,
                             curve_following_hamiltonian, flow_map, integrate_flow, shear_flow,
                             transversality_field, transversality_flow)
from pergrowth.phase import Composition, circle_distance, map_from_dict
from pergrowth.trig import TrigPoly

TWO_PI = 2 * math.pi


def _h1():
    return curve_following_hamiltonian(TrigPoly(0.0, [0.05], [0.02]), TrigPoly(0.0, [0.03], [0.1]))


def test_shear_flow_examples():
    h = TrigPoly.cos_mode(1)
    assert shear_flow(h, 1.0).lift(0.25, 0.0) == pytest.approx((0.25, -TWO_PI))
    X, Y = shear_flow(h, 3.7).lift(np.array([0.0, 0.5]), np.array([0.1, 0.2]))
    assert np.max(np.abs(Y - [0.1, 0.2])) <= 1e-14
    assert shear_flow(h, 0.0).lift(0.3, 0.4) == (0.3, 0.4)


def test_transversality_flows():
    assert transversality_flow(1, 0.0).lift(0.3, 0.2) == (0.3, 0.2)
    assert transversality_flow(1, 1.0).lift(0.25, 0.0) == pytest.approx((0.25, TWO_PI))
    X, Y = transversality_flow(3, 1.0).lift(0.0, 0.25)
    assert circle_distance(X, -TWO_PI % 1.0) <= 1e-14 and Y == 0.25
    for k in (1, 2, 3, 4):
        f = transversality_flow(k, 0.3)
        _, _, J = f.lift_jac(np.array([0.1, 0.7]), np.array([0.2, -0.4]))
        assert np.max(np.abs(J[0] * J[3] - J[1] * J[2] - 1)) <= 1e-14
    with pytest.raises(ValidationError):
        transversality_flow(5, 0.1)


def test_curve_following_straight_circle():
    H = curve_following_hamiltonian(TrigPoly.constant(0.0), TrigPoly.constant(0.25))
    f = flow_map(H, 0.1)
    assert f.lift(0.5, 0.25) == pytest.approx((0.6, 0.25), abs=1e-15)
    assert f.lift(0.5, 0.5) == pytest.approx((0.5, 0.5), abs=1e-15)
    # the closed form agrees with the integrator
    g = integrate_flow(H, 0.1)
    x, y = np.linspace(0, 1, 17), np.linspace(-0.3, 0.3, 17)
    assert np.max(np.abs(np.array(f.lift(x, y)) - np.array(g.lift(x, y)))) <= 1e-12


def test_curve_following_slides_curve_along_itself():
    g = TrigPoly.sin_mode(1, 0.1)
    H = curve_following_hamiltonian(TrigPoly.constant(0.0), g)
    f = integrate_flow(H, 0.05)
    x0 = np.linspace(0, 1, 50, endpoint=False)
    X, Y = f.lift(x0, g(x0))
    assert np.max(np.abs(X - x0 - 0.05)) <= 1e-8
    assert np.max(np.abs(Y - g(x0 + 0.05))) <= 1e-8


def test_curve_following_tangent_for_warped_parametrisation():
    xi, g = TrigPoly(0.0, [0.05], [0.02]), TrigPoly(0.0, [0.03], [0.1])
    H = curve_following_hamiltonian(xi, g)
    z = np.linspace(0, 1, 40, endpoint=False)
    x = z + xi(z)
    vx, vy = H.vector_field(x, g(x))
    dx = 1 + xi.deriv()(z)
    assert np.max(np.abs(vx - dx)) <= 1e-12
    assert np.max(np.abs(vy - g.deriv()(x) * dx)) <= 1e-12


def test_curve_following_rejects_folded_diffeo():
    with pytest.raises(NotDiffeo):
        curve_following_hamiltonian(TrigPoly.sin_mode(1, 0.5), TrigPoly.constant(0.0))


def test_bump_hamiltonian_plateau_and_support(rng):
    h = TrigPoly(0.0, [0.3, 0.1], [0.0, 0.2])
    delta, width = 0.1, 0.02
    H = bump_hamiltonian(h, delta, width)
    t = delta / (4 * h.deriv().sup_norm())
    f, s = integrate_flow(H, t), shear_flow(h, t)
    x = rng.random(1000)
    a, b = np.array(f.lift(x, 0 * x)), np.array(s.lift(x, 0 * x))
    assert np.max(np.abs(a - b)) <= 1e-12
    for y0 in (delta, -delta, 1.5 * delta):
        X, Y = f.lift(x, np.full_like(x, y0))
        assert np.array_equal(X, x) and np.array_equal(Y, np.full_like(x, y0))
    z = integrate_flow(bump_hamiltonian(TrigPoly.constant(0.0), delta, width), 0.3)
    assert np.array_equal(np.array(z.lift(x, 0 * x + 0.01)), np.array([x, 0 * x + 0.01]))
    with pytest.raises(ValidationError):
        bump_hamiltonian(h, delta, 0.06)


def test_integrator_exact_on_quadratic():
    f = integrate_flow(Quadratic(0.0, 0.0, 1.0), 0.37)
    x, y = np.linspace(0, 1, 11), np.linspace(-1, 1, 11)
    X, Y = f.lift(x, y)
    assert np.max(np.abs(X - (x + 0.37 * y))) <= 1e-12 and np.max(np.abs(Y - y)) <= 1e-12


def test_integrator_matches_closed_form_separable(rng):
    H = transversality_field(1)
    f, g = integrate_flow(H, 0.4), transversality_flow(1, 0.4)
    x, y = rng.random(200), rng.uniform(-0.5, 0.5, 200)
    assert np.max(np.abs(np.array(f.lift(x, y)) - np.array(g.lift(x, y)))) <= 1e-12


def test_flow_map_det_and_energy(rng):
    H = _h1()
    f = integrate_flow(H, 0.3)
    x, y = rng.random(1000), rng.uniform(-0.5, 0.5, 1000)
    X, Y, J = f.lift_jac(x, y)
    assert np.max(np.abs(J[0] * J[3] - J[1] * J[2] - 1)) <= 1e-8
    assert np.max(np.abs(H.value(X, Y) - H.value(x, y))) <= 1e-8


def test_flow_property(rng):
    H = _h1()
    x, y = rng.random(100), rng.uniform(-0.4, 0.4, 100)
    for s, t in ((0.2, 0.3), (-0.5, 0.25)):
        a = np.array(integrate_flow(H, s + t).lift(x, y))
        b = np.array(Composition((integrate_flow(H, t), integrate_flow(H, s))).lift(x, y))
        assert np.max(np.abs(a - b)) <= 1e-8


def test_flow_jacobian_matches_finite_differences(rng):
    f = integrate_flow(_h1(), 0.2)
    x, y = rng.random(50), rng.uniform(-0.3, 0.3, 50)
    _, _, J = f.lift_jac(x, y)
    h = 1e-6
    fdx = (np.array(f.lift(x + h, y)) - np.array(f.lift(x - h, y))) / (2 * h)
    assert np.max(np.abs(J[0] - fdx[0])) <= 1e-6 and np.max(np.abs(J[2] - fdx[1])) <= 1e-6


def test_flow_map_serialization_roundtrip():
    f = integrate_flow(_h1(), 0.2, IntegratorConfig(step=2e-3))
    back = map_from_dict(f.to_dict())
    assert isinstance(back, FlowMap) and back.to_dict() == f.to_dict()
    assert back.lift(0.3, 0.1) == f.lift(0.3, 0.1)


def test_integrator_config_validation():
    with pytest.raises(ValidationError):
        IntegratorConfig(step=0.0)
    with pytest.raises(ValidationError):
        IntegratorConfig(tol=-1.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=6), st.floats(-3, 3))
def test_property_shear_fixes_critical_points(coeffs, t):
    h = TrigPoly(0.0, coeffs, [0.0] * len(coeffs))
    f = shear_flow(h, t)
    # sin-free cosine series: h'(0) = h'(1/2) = 0
    x = np.array([0.0, 0.5])
    X, Y = f.lift(x, np.array([0.2, -0.1]))
    assert np.max(np.abs(Y - [0.2, -0.1])) <= 1e-14 * (1 + abs(t) * h.deriv().coeff_norm())


def test_x_only_closed_form_is_vertical_shear():
    f = flow_map(XOnly(TrigPoly.sin_mode(2, 0.1)), 0.5)
    assert f.kind == "vertical_shear"
