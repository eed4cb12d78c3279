import json
import math

import numpy as np
import pytest

from conftest import golden_height, twist_map
from pergrowth.errors import NewtonDiverged, RationalDetected, ResonantEigenvalue, SmallDivisorResonance
from pergrowth.kam import (GOLDEN, adapted_coordinates, curve_residual, diophantine_certificate,
                          intersection_check, kam_smallness, rotation_number, scan_certificate,
                          solve_cohomological, solve_invariance, twist_coefficient)
from pergrowth.phase import (Composition, HorizontalShear, PolarTwist, Translation, VerticalShear,
                             standard_example)
from pergrowth.trig import TrigPoly


def shear_perturbed(mag):
    return Composition((standard_example(), VerticalShear(TrigPoly.sin_mode(1, mag))))


@pytest.fixture(scope="module")
def perturbed_curve():
    f = shear_perturbed(1e-3)
    return f, solve_invariance(f, GOLDEN, golden_height())


# rotation numbers

def test_rotation_of_translation():
    rho, err = rotation_number(Translation(0.25), (0.1, 0.0))
    assert rho == 0.25 and err == 0.0


def test_rotation_of_translation_exact_random(rng):
    for theta in rng.uniform(-2.0, 2.0, 1000):
        assert rotation_number(Translation(float(theta)), (0.3, 0.2))[0] == theta


def test_rotation_of_example_map_constant_increment():
    c = 0.07
    rho, _ = rotation_number(standard_example(), (0.2, c))
    assert abs(rho - math.sin(2 * math.pi * c)) <= 1e-12


def test_rotation_on_golden_height():
    rho, _ = rotation_number(standard_example(), (0.0, golden_height()))
    assert abs(rho - GOLDEN) <= 1e-8


def test_rotation_of_perturbed_map_settles(perturbed_curve):
    f, curve = perturbed_curve
    x, y = curve.point(0.0)
    rho, err = rotation_number(f, (float(x), float(y)), n_iter=4000)
    assert abs(rho - GOLDEN) <= 1e-8 and err <= 1e-8


# Diophantine certificates

def test_golden_certificate_tail_constant():
    cert = diophantine_certificate(GOLDEN, 0.0, 10_000)
    assert abs(cert.c_tail - 1 / math.sqrt(5)) <= 1e-3
    # the global minimum includes q = 1, where |theta - 1| = 0.382
    assert abs(cert.c - (1 - GOLDEN)) <= 1e-12


def test_sqrt2_certificate():
    cert = diophantine_certificate(math.sqrt(2) - 1, 0.0, 10_000)
    assert abs(cert.c_tail - 1 / (2 * math.sqrt(2))) <= 1e-3


def test_rational_detected():
    with pytest.raises(RationalDetected):
        diophantine_certificate(1 / 3, 0.0, 1000)


def test_certificate_sound_by_scan():
    for theta, tau in ((GOLDEN, 0.0), (math.sqrt(2) - 1, 0.0), (math.pi - 3, 0.5), (math.e - 2, 0.1)):
        cert = diophantine_certificate(theta, tau, 10_000)
        assert scan_certificate(cert) == []


def test_certificate_json_roundtrip():
    cert = diophantine_certificate(GOLDEN, 0.0, 1000)
    doc = json.loads(cert.to_json())
    assert float(doc["c"]) == cert.c
    assert [tuple(pq) for pq in doc["convergents"]] == [tuple(pq) for pq in cert.convergents]


# cohomological equation

def _cohom_residual(alpha, beta, abar, theta, n=1024):
    x = np.arange(n) / n
    return np.max(np.abs(beta(x + theta) - beta(x) + abar - alpha(x)))


def test_cohomological_constant():
    beta, abar = solve_cohomological(TrigPoly.constant(0.7), GOLDEN)
    assert abar == 0.7 and beta.coeff_norm() == 0.0


def test_cohomological_cosine():
    alpha = TrigPoly(0.0, [1.0], [0.0])
    beta, abar = solve_cohomological(alpha, GOLDEN)
    assert abar == 0.0
    assert _cohom_residual(alpha, beta, abar, GOLDEN) <= 1e-10


def test_cohomological_resonance_names_k():
    alpha = TrigPoly(0.0, [0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    with pytest.raises(SmallDivisorResonance) as exc:
        solve_cohomological(alpha, 1 / 3)
    assert exc.value.k == 3


def test_cohomological_random(rng):
    for _ in range(100):
        d = int(rng.integers(1, 33))
        alpha = TrigPoly(float(rng.normal()), rng.normal(size=d), rng.normal(size=d))
        beta, abar = solve_cohomological(alpha, GOLDEN)
        assert _cohom_residual(alpha, beta, abar, GOLDEN) <= 1e-10


# invariance equation

def test_translation_curve_is_exact():
    curve = solve_invariance(Translation(GOLDEN), GOLDEN, 0.0, check_twist=False)
    assert curve.residual == 0.0
    assert len(curve.history) == 1


def test_perturbed_curve_converges(perturbed_curve):
    f, curve = perturbed_curve
    assert curve.residual <= 1e-10
    assert curve.form == "graph"
    assert curve.twist_min > 0


def test_residual_recomputed_on_finer_grid(perturbed_curve):
    f, curve = perturbed_curve
    fine = curve_residual(f, curve, n=16 * curve.modes)
    assert fine <= 2 * curve.residual


def test_large_perturbation_diverges():
    with pytest.raises(NewtonDiverged) as exc:
        solve_invariance(shear_perturbed(10.0), GOLDEN, golden_height())
    assert len(exc.value.history) >= 1


# adapted coordinates

def test_adapted_twist_map():
    f = twist_map(GOLDEN)
    chart = adapted_coordinates(f, solve_invariance(f, GOLDEN, 0.0))
    assert abs(chart.alpha_star - 1.0) <= 1e-12
    assert chart.beta.coeff_norm() <= 1e-12


def test_adapted_example_map():
    f = standard_example()
    c = golden_height()
    chart = adapted_coordinates(f, solve_invariance(f, GOLDEN, c))
    assert abs(chart.alpha_star - 2 * math.pi * math.cos(2 * math.pi * c)) <= 1e-10
    assert abs(chart.alpha_star - 4.94) <= 0.01


def test_adapted_perturbed(perturbed_curve):
    f, curve = perturbed_curve
    chart = adapted_coordinates(f, curve)
    assert chart.derivative_error <= 1e-8
    assert chart.alpha_star > 0
    assert np.min(chart.alpha(np.linspace(0, 1, 200))) > 0


# hypothesis checks

def test_smallness_integrable_model():
    rep = kam_smallness(twist_map(GOLDEN), GOLDEN, 1.0, 0.1, 0.05)
    assert rep.sup == 0.0 and rep.passed and rep.complex_grid


def test_smallness_shear_displacement():
    s = 1e-3
    f = Composition((VerticalShear(TrigPoly.sin_mode(1, s)), twist_map(GOLDEN)))
    rep = kam_smallness(f, GOLDEN, 1.0, 0.0, 0.02)
    assert abs(rep.sup - s) <= 1e-15 and rep.passed
    # boundary case: s equals delta^{3/2}
    assert not kam_smallness(f, GOLDEN, 1.0, 0.0, 0.01).passed


def test_smallness_real_fallback():
    f = Composition((twist_map(GOLDEN), PolarTwist(0.0, 0.0)))
    rep = kam_smallness(f, GOLDEN, 1.0, 0.1, 0.05)
    assert not rep.complex_grid


def test_intersection_identity_and_lift():
    assert intersection_check(Translation(0.0), 0.0)
    assert not intersection_check(VerticalShear(TrigPoly.constant(0.1)), 0.0)


def test_intersection_zero_mean_flow():
    # shear by a zero-mean function moves C_0 up and down
    assert intersection_check(VerticalShear(TrigPoly.sin_mode(1, 0.05)), 0.0)
    assert intersection_check(Composition((HorizontalShear(TrigPoly.sin_mode(1)),
                                           VerticalShear(TrigPoly.sin_mode(2, 0.01)))), 0.02)


def test_intersection_invariant_curve(perturbed_curve):
    f, curve = perturbed_curve
    assert intersection_check(f, curve.graph())


# Birkhoff twist coefficient

def test_twist_coefficient_polar():
    a0, a1 = twist_coefficient(PolarTwist(1.0, 0.5), (0.0, 0.0))
    assert abs(a0 - 1.0) <= 1e-8 and abs(a1 - 0.5) <= 1e-8


def test_twist_coefficient_radial_fit():
    f = PolarTwist(1.0, 0.5)
    rs = np.linspace(0.02, 0.2, 10)
    rot = []
    for r in rs:
        x, y = r, 0.0
        ang = 0.0
        for _ in range(200):
            X, Y = f.lift(x, y)
            ang += math.atan2(x * Y - y * X, x * X + y * Y)
            x, y = X, Y
        rot.append(ang / 200)
    slope = np.polyfit(rs**2, rot, 1)[0]
    _, a1 = twist_coefficient(f, (0.0, 0.0))
    assert abs(slope - a1) <= 0.05 * abs(a1)


def test_twist_coefficient_order_four_resonance():
    # the shear vanishes to second order at 0, so the linear part stays a quarter turn
    bump = TrigPoly(0.01, [-0.01], [0.0])
    f = Composition((PolarTwist(math.pi / 2, 0.0), VerticalShear(bump)))
    with pytest.raises(ResonantEigenvalue):
        twist_coefficient(f, (0.0, 0.0))
