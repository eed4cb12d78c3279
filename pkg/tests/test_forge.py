import csv
import io
import math

import numpy as np
import pytest

from conftest import twist_map
from pergrowth.census import find_periodic
from pergrowth.errors import EmptyAdmissibleRange, NotLowestTerms, NoTwist, NotResonantCircle
from pergrowth.forge import build_bump, build_grid, forge, forge_with_budget, orbit_twists, select_t
from pergrowth.phase import (Composition, HorizontalShear, Translation, VerticalShear, cone_check,
                             iterate_arrays, twist_entry)
from pergrowth.trig import TrigPoly


def warped_map():
    """(x, y) -> (x + 1/3 + 0.5 sin(2 pi y), y): rotation 1/3 on y = 0, twist pi."""
    return HorizontalShear(TrigPoly(1.0 / 3.0, [0.0], [0.5]))


def test_grid_examples():
    g = build_grid(1, 3, 1)
    assert g.M == 6 and g.check_bijection()
    assert sorted(g.points.ravel()) == pytest.approx([0, 1 / 6, 1 / 3, 1 / 2, 2 / 3, 5 / 6], abs=1e-15)
    assert [[int(g.index(i, j)) for j in range(3)] for i in range(2)] == [[0, 2, 4], [1, 3, 5]]
    with pytest.raises(NotLowestTerms):
        build_grid(2, 4, 1)
    assert sorted(build_grid(0, 1, 1).points.ravel()) == [0.0, 0.5]


@pytest.mark.parametrize("p,N,gamma", [(1, 3, 2), (3, 5, 5), (8, 13, 3), (21, 34, 1)])
def test_grid_invariants(p, N, gamma):
    g = build_grid(p, N, gamma)
    pts = g.points
    assert np.max(np.abs(np.sort(pts.ravel()) - np.arange(g.M) / g.M)) <= 1e-15
    step = (pts[:, 1:] - pts[:, :-1] - p / N) % 1.0
    assert np.max(np.minimum(step, 1 - step)) <= 1e-15


def test_bump_examples():
    b = build_bump(build_grid(0, 1, 1))
    h2 = b.h.deriv(2)
    assert h2(0.0) == pytest.approx(1.0, abs=1e-12)
    assert h2(0.5) == pytest.approx(-1.0, abs=1e-12)
    b = build_bump(build_grid(1, 3, 1))
    assert abs(b.h.deriv(2)(1.0 / 3.0)) <= 1e-12
    assert b.dh.mean == 0.0


@pytest.mark.parametrize("p,N,gamma", [(1, 3, 2), (3, 5, 5), (8, 13, 13)])
def test_bump_constraints(p, N, gamma):
    g = build_grid(p, N, gamma)
    b = build_bump(g)
    assert b.residual_d1 <= 1e-10 and b.residual_d2 <= 1e-10
    d1, d2 = b.h.deriv(), b.h.deriv(2)
    for i in range(2 * gamma):
        xs = g.points[i]
        assert np.max(np.abs(d1(xs))) <= 1e-10
        assert abs(d2(xs[0]) - (-1) ** i) <= 1e-10
        assert np.max(np.abs(d2(xs[1:]))) <= 1e-10 if N > 1 else True
    assert b.c.degree < g.M


def test_forge_trace_oracle(twist_third):
    t = 1e-3
    res = forge(twist_third, build_grid(1, 3, 1), t)
    F = np.array([[1.0, 1.0], [0.0, 1.0]])
    for o in res.orbits:
        s = t if o.i % 2 == 0 else -t
        G = np.array([[1.0, 0.0], [s, 1.0]])
        exact = np.trace(np.linalg.matrix_power(F, 3) @ G)
        assert o.predicted_trace == pytest.approx(2 + 3 * s, abs=1e-15)
        assert np.max(np.abs(o.measured_trace - exact)) <= 1e-12
        assert o.type == ("hyperbolic" if s > 0 else "elliptic")
    zero = forge(twist_third, build_grid(1, 3, 1), 0.0)
    assert all(np.all(o.measured_trace == 2.0) for o in zero.orbits)


def test_forge_count_claim(twist_third):
    res = forge(twist_third, build_grid(1, 3, 2), 1e-3)
    cen = find_periodic(res.map, 3, region=(-0.05, 0.05), seed_density=4 * 12, y_levels=5)
    assert cen.hyperbolic >= 6 and cen.elliptic >= 6


def test_unipotent_base_point():
    F = warped_map()
    g = build_grid(1, 3, 4)
    x0 = g.points.ravel()
    _, _, J = iterate_arrays(F, x0, 0 * x0, 3)
    assert np.max(np.abs(J[0] + J[3] - 2.0)) <= 1e-8
    assert np.max(np.abs(J[2])) <= 1e-8


def test_forge_on_warped_map_predictions():
    F = warped_map()
    g = build_grid(1, 3, 2)
    res = forge(F, g, 1e-3)
    for o in res.orbits:
        assert np.max(np.abs(o.measured_trace - o.predicted_trace)) <= 1e-10
        assert o.residual <= 1e-10
        assert twist_entry(res.map, 0.0, o.xs[0], 3) == pytest.approx(o.twist, abs=1e-10)
        assert o.twist == pytest.approx(3 * math.pi, rel=1e-12)
    assert cone_check(res.map, 0.0, 3, xs=g.points.ravel()).passed


def test_negative_amplitude_swaps_types(twist_third):
    g = build_grid(1, 3, 2)
    b = build_bump(g)
    t = 1e-3
    for sign in (1.0, -1.0):
        fmap = Composition((VerticalShear(sign * t * b.dh), twist_third))
        x0 = g.points[:, 0]
        _, _, J = iterate_arrays(fmap, x0, 0 * x0, 3)
        tr = J[0] + J[3]
        hyper = np.abs(tr) > 2
        assert np.array_equal(hyper, (np.arange(4) % 2 == 0) == (sign > 0))


def test_forge_with_cutoff_is_local(twist_third):
    delta = 0.05
    res = forge(twist_third, build_grid(1, 3, 1), 1e-3, cutoff=(delta, 0.01))
    for o in res.orbits:
        assert np.max(np.abs(o.measured_trace - o.predicted_trace)) <= 1e-10
    x = np.linspace(0, 1, 200, endpoint=False)
    for y0 in (delta, -delta, 0.2):
        a = np.array(res.map.lift(x, np.full_like(x, y0)))
        b = np.array(twist_third.lift(x, np.full_like(x, y0)))
        assert np.array_equal(a, b)


def test_forge_preconditions():
    with pytest.raises(NoTwist):
        forge(Translation(1.0 / 3.0), build_grid(1, 3, 1), 1e-3)
    with pytest.raises(NotResonantCircle):
        forge(twist_map(0.3), build_grid(1, 3, 1), 1e-3)


def test_select_t_rules(twist_third):
    g = build_grid(1, 3, 1)
    w = orbit_twists(twist_third, g)
    b = build_bump(g)
    sel = select_t(w, b.dh_sup, 1e-2)
    assert sel.t == pytest.approx(min(1e-2 / b.dh_sup, 4.0 / (3 + 1.5) * (1 - 1e-9)))
    with pytest.raises(EmptyAdmissibleRange):
        select_t(w, b.dh_sup, 0.0)
    ts = [select_t(w, b.dh_sup, e).t for e in (1e-4, 2e-4, 4e-4, 1.0, 2.0)]
    assert all(a <= b for a, b in zip(ts, ts[1:]))
    res, sel = forge_with_budget(twist_third, g, 1e-3)
    assert res.perturbation_sup <= 1e-3 * (1 + 1e-12)


def test_orbit_csv_layout(twist_third):
    res = forge(twist_third, build_grid(1, 3, 2), 1e-3)
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert rows[0] == ["i", "j", "x", "y", "period", "predicted_trace", "measured_trace", "type"]
    body = rows[1:]
    assert len(body) == 12
    assert [(int(r[0]), int(r[1])) for r in body] == sorted((int(r[0]), int(r[1])) for r in body)
    assert body[1][2] == format(float(body[1][2]), ".17g")
