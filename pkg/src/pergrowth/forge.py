"""Resonant forging: turn an invariant circle of rotation p/N into 2*gamma
isolated N-periodic orbits, half hyperbolic and half elliptic.

The circle sits at y = 0 of the map handed to :func:`forge` (or of its
pullback through a :class:`~pergrowth.phase.CurveChart`).  The bump h is
built so that h' vanishes on the whole uniform grid of M = 2*gamma*N
points and h'' = (-1)^i at the orbit starts x_{i,0}; composing with the
shear G^t(x, y) = (x, y + t h'(x)) keeps every grid point N-periodic and
moves the trace of D(f^N) from 2 to 2 + (-1)^i t w_i.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyAdmissibleRange, InterpolationSingular, NotLowestTerms, NoTwist,
                     NotResonantCircle, ValidationError)
from .flows import bump_hamiltonian, integrate_flow
from .phase import (Composition, Conjugated, CurveChart, Pullback, SymplecticMap, VerticalShear,
                    _num, iterate_arrays)
from .trig import TrigPoly

RESONANCE_TOL = 1e-10


@dataclass(frozen=True)
class ResonantGrid:
    p: int
    N: int
    gamma: int

    def __post_init__(self):
        if self.N < 1 or self.gamma < 1:
            raise ValidationError("N and gamma must be positive", N=self.N, gamma=self.gamma)
        if math.gcd(self.p, self.N) != 1:
            raise NotLowestTerms(f"{self.p}/{self.N} is not in lowest terms", p=self.p, N=self.N)

    @property
    def theta(self):
        return self.p / self.N

    @property
    def M(self):
        return 2 * self.gamma * self.N

    def index(self, i, j):
        """Position of x_{i,j} on the uniform grid m/M."""
        return (np.asarray(i) + 2 * self.gamma * np.asarray(j) * self.p) % self.M

    @property
    def points(self):
        """x_{i,j} as a (2 gamma, N) array in [0, 1)."""
        i = np.arange(2 * self.gamma)[:, None]
        j = np.arange(self.N)[None, :]
        return self.index(i, j) / self.M

    def check_bijection(self):
        idx = self.index(np.arange(2 * self.gamma)[:, None], np.arange(self.N)[None, :]).ravel()
        return np.array_equal(np.sort(idx), np.arange(self.M))


def build_grid(p, N, gamma) -> ResonantGrid:
    g = ResonantGrid(int(p), int(N), int(gamma))
    if not g.check_bijection():
        raise NotLowestTerms("grid points collide", p=p, N=N)
    return g


@dataclass(frozen=True)
class BumpProfile:
    h: TrigPoly
    c: TrigPoly
    grid: ResonantGrid
    dh: TrigPoly
    residual_d1: float
    residual_d2: float

    @property
    def dh_sup(self):
        return self.dh.sup_norm(max(1024, 16 * self.grid.M))


def build_bump(grid: ResonantGrid) -> BumpProfile:
    """Bump with h'(m/M) = 0 for all m, h'' = (-1)^i at x_{i,0} and 0 elsewhere.

    h'(x) = c(x) sin(pi M x) with c the degree-M/2 trigonometric interpolant
    of 1/(pi M) at m = 0..2*gamma-1 (the positions of x_{i,0}) and 0 at the
    remaining grid points.  Then h''(m/M) = pi M c(m/M) (-1)^m, and since
    x_{i,0} = i/M the sign is (-1)^i.  The half-frequency sine keeps the
    orbit sum of h' equal to sin(pi M x)/(pi M), whose zeros are exactly
    the grid points, so no extra resonant orbits appear.
    """
    M = grid.M
    vals = np.zeros(M)
    vals[:2 * grid.gamma] = 1.0 / (np.pi * M)
    c = TrigPoly.from_samples(vals)
    back = c.samples(M)
    if not np.allclose(back, vals, atol=1e-14):
        raise InterpolationSingular("envelope interpolation failed", err=float(np.max(np.abs(back - vals))))
    dh = c * TrigPoly.sin_mode(M // 2)
    h = dh.antideriv(tol=1e-12)
    xs = np.arange(M) / M
    d2 = dh.deriv()(xs)
    target = np.zeros(M)
    target[:2 * grid.gamma] = (-1.0) ** np.arange(2 * grid.gamma)
    return BumpProfile(h, c, grid, dh, float(np.max(np.abs(dh(xs)))), float(np.max(np.abs(d2 - target))))


@dataclass(frozen=True)
class OrbitPrediction:
    i: int
    xs: np.ndarray  # x_{i,j}, j = 0..N-1, circle coordinate
    points: np.ndarray  # (N, 2) points in map coordinates
    twist: float  # w_i
    predicted_trace: float
    measured_trace: np.ndarray  # per point j
    residual: float

    @property
    def type(self):
        return "hyperbolic" if self.i % 2 == 0 else "elliptic"


@dataclass(frozen=True)
class ForgeResult:
    map: SymplecticMap
    t: float
    grid: ResonantGrid
    bump: BumpProfile
    orbits: list
    perturbation_sup: float
    chart: CurveChart | None = None
    config: dict = field(default_factory=dict)

    def predicted_types(self, sign=1.0):
        return {o.i: o.type for o in self.orbits}

    def to_json(self):
        doc = {
            "grid": {"p": self.grid.p, "N": self.grid.N, "gamma": self.grid.gamma, "M": self.grid.M},
            "t": _num(self.t),
            "perturbation_sup": _num(self.perturbation_sup),
            "bump_residuals": {"h1": _num(self.bump.residual_d1), "h2": _num(self.bump.residual_d2)},
            "orbits": [{
                "i": o.i, "type": o.type, "twist": _num(o.twist),
                "predicted_trace": _num(o.predicted_trace),
                "measured_trace": [_num(v) for v in o.measured_trace],
                "residual": _num(o.residual),
            } for o in self.orbits],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "x", "y", "period", "predicted_trace", "measured_trace", "type"])
        for o in sorted(self.orbits, key=lambda o: o.i):
            for j in range(self.grid.N):
                w.writerow([o.i, j, _num(o.points[j, 0]), _num(o.points[j, 1]), self.grid.N,
                            _num(o.predicted_trace), _num(o.measured_trace[j]), o.type])
        return buf.getvalue()


def _local(F, chart):
    return F if chart is None else Pullback(chart, F)


def check_resonant_circle(F, grid, chart=None, samples=256, tol=RESONANCE_TOL):
    """F maps (x, 0) to (x + p/N, 0) in chart coordinates."""
    Fz = _local(F, chart)
    xs = np.unique(np.concatenate([np.arange(samples) / samples, grid.points.ravel()]))
    X, Y = Fz.lift(xs, np.zeros_like(xs))
    dx = X - xs - grid.theta
    dx = dx - np.round(dx)
    err = float(max(np.max(np.abs(dx)), np.max(np.abs(Y))))
    if err > tol:
        raise NotResonantCircle(f"y=0 is not a circle of rotation {grid.p}/{grid.N}",
                                residual=err, p=grid.p, N=grid.N)
    return err


def orbit_twists(F, grid, chart=None, samples=256):
    """Check the one-step twist on a sample, return w_i = (D F^N)_{12} at x_{i,0}."""
    Fz = _local(F, chart)
    xs = np.arange(samples) / samples
    _, _, J = Fz.lift_jac(xs, np.zeros_like(xs))
    if np.min(J[1]) <= 0.0:
        k = int(np.argmin(J[1]))
        raise NoTwist("twist entry not positive on the circle", x=float(xs[k]), value=float(J[1][k]))
    x0 = grid.points[:, 0]
    _, _, JN = iterate_arrays(Fz, x0, np.zeros_like(x0), grid.N)
    return JN[1]


def _assemble(F, bump, t, chart, cutoff):
    if cutoff is not None:
        delta, width = cutoff
        G = integrate_flow(bump_hamiltonian(bump.h, delta, width), t)
    else:
        G = VerticalShear(t * bump.dh)
    if chart is not None:
        G = Conjugated(chart, G)
    return Composition((G, F))


def forge(F: SymplecticMap, grid: ResonantGrid, t: float, chart: CurveChart | None = None,
          bump: BumpProfile | None = None, cutoff=None, twists=None, tol=RESONANCE_TOL) -> ForgeResult:
    """Return f = F o G^t and the predicted orbits through x_{i,0}.

    ``chart`` places the circle: the construction happens in chart
    coordinates (where the circle is y = 0) and is pushed forward.
    ``cutoff = (delta, width)`` uses the y-localised bump flow instead of the
    global shear.  ``tol`` bounds the circle's resonance defect and the
    periodicity residual of the predicted orbits.
    """
    if t < 0:
        raise ValidationError("t must be non-negative", t=t)
    check_resonant_circle(F, grid, chart, tol=tol)
    w = orbit_twists(F, grid, chart) if twists is None else np.asarray(twists)
    bump = bump or build_bump(grid)
    fmap = _assemble(F, bump, t, chart, cutoff)
    fz = _local(fmap, chart)
    N = grid.N
    xs = grid.points
    x0 = xs.ravel()
    X, Y, J = iterate_arrays(fz, x0, np.zeros_like(x0), N)
    res = np.hypot(X - x0 - grid.p, Y)
    traces = (J[0] + J[3]).reshape(xs.shape)
    res = res.reshape(xs.shape)
    if chart is None:
        px, py = xs, np.zeros_like(xs)
    else:
        px, py = chart.forward(xs, np.zeros_like(xs))
    orbits = []
    for i in range(2 * grid.gamma):
        sgn = 1.0 if i % 2 == 0 else -1.0
        orbits.append(OrbitPrediction(
            i=i, xs=xs[i].copy(), points=np.stack([px[i] % 1.0, py[i]], axis=1),
            twist=float(w[i]), predicted_trace=2.0 + sgn * t * float(w[i]),
            measured_trace=traces[i].copy(), residual=float(np.max(res[i]))))
    worst = max(o.residual for o in orbits)
    if worst > tol:
        raise NotResonantCircle("forged orbits are not N-periodic", residual=worst)
    return ForgeResult(fmap, float(t), grid, bump, orbits, float(t * bump.dh_sup), chart)


@dataclass(frozen=True)
class TSelection:
    t: float
    budget_bound: float
    twist_bound: float
    hyperbolic_margin: float
    elliptic_margin: float


def select_t(twists, dh_sup, eps, cap=None) -> TSelection:
    """Largest admissible t for the budget ``eps``.

    Constraints: t * sup|h'| <= eps, and every elliptic trace 2 - t w_i stays
    inside (-2 + m, 2 - m) with m = t * min(w) / 2.  The second gives
    t * (w_i + min(w)/2) < 4.
    """
    w = np.asarray(twists, dtype=float)
    if eps <= 0:
        raise EmptyAdmissibleRange("budget must be positive", eps=eps)
    if w.size == 0 or np.min(w) <= 0:
        raise NoTwist("twist entries must be positive")
    wmin, wmax = float(np.min(w)), float(np.max(w))
    b_budget = eps / dh_sup
    b_twist = 4.0 / (wmax + 0.5 * wmin) * (1.0 - 1e-9)
    t = min(b_budget, b_twist)
    if cap is not None:
        t = min(t, cap)
    if t < 1e-13:
        raise EmptyAdmissibleRange("budget too small for a resolvable trace split", eps=eps, t=t)
    m = t * wmin / 2.0
    return TSelection(float(t), float(b_budget), float(b_twist), float(t * wmin), float(m))


def forge_with_budget(F, grid, eps, chart=None, cap=None, cutoff=None,
                      tol=RESONANCE_TOL) -> tuple[ForgeResult, TSelection]:
    check_resonant_circle(F, grid, chart, tol=tol)
    w = orbit_twists(F, grid, chart)
    bump = build_bump(grid)
    sel = select_t(w, bump.dh_sup, eps, cap)
    return forge(F, grid, sel.t, chart, bump, cutoff, twists=w, tol=tol), sel
