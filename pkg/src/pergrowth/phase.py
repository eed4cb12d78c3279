"""Phase-space points, the area-preserving map algebra, and twist checks.

Every map node works on *lifted* coordinates: x is a real number whose
integer part counts windings, y is left unwrapped.  Normalisation to the
circle/torus only happens in :func:`eval_map` and :func:`iterate`.

Composition children are applied in list order, so ``Composition([G, F])``
is ``F o G``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvarianceViolation, ValidationError
from .jets import jcos, jsin
from .smooth import plateau
from .trig import TrigPoly, eval_stack


class Space(str, enum.Enum):
    TORUS = "torus"
    CYLINDER = "cylinder"


def _frac(v):
    w = math.floor(v)
    r = v - w
    if r >= 1.0 - 4.0 * np.finfo(float).eps * max(1.0, abs(v)):
        return 0.0, w + 1
    return r, w


def circle_distance(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class CirclePoint:
    x: float

    def __post_init__(self):
        object.__setattr__(self, "x", _frac(float(self.x))[0])

    def __add__(self, other):
        return CirclePoint(self.x + float(getattr(other, "x", other)))

    def distance(self, other):
        return float(circle_distance(self.x, getattr(other, "x", other)))


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    space: Space = Space.CYLINDER

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        object.__setattr__(self, "x", _frac(float(self.x))[0])
        if self.space is Space.TORUS:
            object.__setattr__(self, "y", _frac(float(self.y))[0])
        else:
            object.__setattr__(self, "y", float(self.y))

    def distance(self, other):
        dx = circle_distance(self.x, other.x)
        dy = circle_distance(self.y, other.y) if self.space is Space.TORUS else abs(self.y - other.y)
        return float(math.hypot(dx, dy))


def phase_distance(x1, y1, x2, y2, space=Space.CYLINDER):
    dx = circle_distance(x1, x2)
    dy = circle_distance(y1, y2) if Space(space) is Space.TORUS else np.abs(np.asarray(y1) - y2)
    return np.hypot(dx, dy)


@dataclass(frozen=True)
class Jacobian2:
    m11: float
    m12: float
    m21: float
    m22: float

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def trace(self):
        return self.m11 + self.m22

    @property
    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    def matrix(self):
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def __matmul__(self, other):
        return Jacobian2.from_matrix(self.matrix() @ other.matrix())


# ---------------------------------------------------------------------------
# jacobian entry helpers on tuples of arrays


def _matmul(A, B):
    """A @ B for 2x2 matrices stored as 4-tuples of arrays."""
    a11, a12, a21, a22 = A
    b11, b12, b21, b22 = B
    return (a11 * b11 + a12 * b21, a11 * b12 + a12 * b22,
            a21 * b11 + a22 * b21, a21 * b12 + a22 * b22)


def _eye_like(x):
    one = np.ones_like(np.asarray(x, dtype=float))
    zero = np.zeros_like(one)
    return (one, zero, zero.copy(), one.copy())


# ---------------------------------------------------------------------------
# nodes

_REGISTRY = {}


def _register(cls):
    _REGISTRY[cls.kind] = cls
    return cls


class SymplecticMap:
    """Base class.  Subclasses implement ``lift`` and ``lift_jac``."""

    kind = "abstract"
    closed_form = True

    def lift(self, x, y):
        raise NotImplementedError

    def lift_jac(self, x, y):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def then(self, other):
        """``other o self``."""
        return Composition([self, other])

    def iter_nodes(self):
        yield self


@_register
@dataclass(frozen=True)
class Translation(SymplecticMap):
    theta: float
    kind = "translation"

    def lift(self, x, y):
        return x + self.theta, y + 0.0 * x

    def lift_jac(self, x, y):
        x = np.asarray(x, dtype=float)
        return x + self.theta, np.asarray(y, dtype=float) + 0.0 * x, _eye_like(x)

    def to_dict(self):
        return {"kind": self.kind, "theta": _num(self.theta)}


@_register
@dataclass(frozen=True)
class IntegrableTwist(SymplecticMap):
    """(x, y) -> (x + slope * y, y)."""

    slope: float
    kind = "integrable_twist"

    def lift(self, x, y):
        return x + self.slope * y, y

    def lift_jac(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        one, zero, _, _ = _eye_like(x)
        return x + self.slope * y, y + 0.0 * x, (one, self.slope * one, zero, one.copy())

    def to_dict(self):
        return {"kind": self.kind, "slope": _num(self.slope)}


@_register
@dataclass(frozen=True)
class VerticalShear(SymplecticMap):
    """(x, y) -> (x, y + v(x))."""

    v: TrigPoly
    kind = "vertical_shear"

    def __post_init__(self):
        object.__setattr__(self, "_dv", self.v.deriv())

    def lift(self, x, y):
        return x + 0.0 * y, y + self.v(x)

    def lift_jac(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        one, zero, _, _ = _eye_like(x)
        v, dv = eval_stack((self.v, self._dv), x)
        return x + 0.0 * y, y + v, (one, zero, dv * one, one.copy())

    def to_dict(self):
        return {"kind": self.kind, "v": trig_to_dict(self.v)}


@dataclass(frozen=True)
class PlateauProfile:
    """u(y) = amount * chi(y - center), chi = 1 on |s| <= half, 0 beyond half + width."""

    amount: float
    half: float
    width: float
    center: float = 0.0
    kind = "plateau"

    def __call__(self, y):
        return self.amount * plateau(np.asarray(y, dtype=float) - self.center, self.half, self.width)[0]

    def d1(self, y):
        return self.amount * plateau(np.asarray(y, dtype=float) - self.center, self.half, self.width)[1]

    def to_dict(self):
        return {"kind": self.kind, "amount": _num(self.amount), "half": _num(self.half),
                "width": _num(self.width), "center": _num(self.center)}


@_register
@dataclass(frozen=True)
class HorizontalShear(SymplecticMap):
    """(x, y) -> (x + u(y), y) with u a TrigPoly in y or a PlateauProfile."""

    u: object
    kind = "horizontal_shear"

    def __post_init__(self):
        if isinstance(self.u, TrigPoly):
            object.__setattr__(self, "_dup", self.u.deriv())

    def _du(self, y):
        if isinstance(self.u, TrigPoly):
            return self._dup(y)
        return self.u.d1(y)

    def lift(self, x, y):
        return x + self.u(y), y + 0.0 * x

    def lift_jac(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        one, zero, _, _ = _eye_like(x)
        return x + self.u(y), y + 0.0 * x, (one, self._du(y) * one, zero, one.copy())

    def to_dict(self):
        u = trig_to_dict(self.u) if isinstance(self.u, TrigPoly) else self.u.to_dict()
        return {"kind": self.kind, "u": u}


@_register
@dataclass(frozen=True)
class PolarTwist(SymplecticMap):
    """Rotation about the origin by alpha0 + alpha1 (x^2 + y^2) radians."""

    alpha0: float
    alpha1: float
    kind = "polar_twist"

    def lift(self, x, y):
        ang = self.alpha0 + self.alpha1 * (x * x + y * y)
        c, s = jcos(ang), jsin(ang)
        return c * x - s * y, s * x + c * y

    def lift_jac(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ang = self.alpha0 + self.alpha1 * (x * x + y * y)
        c, s = np.cos(ang), np.sin(ang)
        X, Y = c * x - s * y, s * x + c * y
        # d/dx of rotation angle = 2 alpha1 x
        ax, ay = 2 * self.alpha1 * x, 2 * self.alpha1 * y
        return X, Y, (c - Y * ax, -s - Y * ay, s + X * ax, c + X * ay)

    def to_dict(self):
        return {"kind": self.kind, "alpha0": _num(self.alpha0), "alpha1": _num(self.alpha1)}


@dataclass(frozen=True)
class CurveChart:
    """Area-preserving chart built on an embedded circle phi(z) = (z + xi(z), eta(z)).

    psi(z1, z2) = (z1 + xi(z1), z2 / (1 + xi'(z1)) + eta(z1)) maps the zero
    section onto the circle and verticals onto verticals; det D psi = 1.
    """

    xi: TrigPoly
    eta: TrigPoly

    def __post_init__(self):
        object.__setattr__(self, "_dxi", self.xi.deriv())
        object.__setattr__(self, "_ddxi", self.xi.deriv(2))
        object.__setattr__(self, "_deta", self.eta.deriv())

    def forward(self, z1, z2):
        z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
        xi, dxi, eta = eval_stack((self.xi, self._dxi, self.eta), z1)
        return z1 + xi, z2 / (1.0 + dxi) + eta

    def forward_jac(self, z1, z2):
        z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
        xi, dxi, pxx, eta, deta = eval_stack((self.xi, self._dxi, self._ddxi, self.eta, self._deta), z1)
        px = 1.0 + dxi
        J = (px, 0.0 * px, -z2 * pxx / px**2 + deta, 1.0 / px)
        return z1 + xi, z2 / px + eta, J

    def inverse(self, x, y, tol=1e-15, max_iter=50):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        z = x - self.xi(x)
        for _ in range(max_iter):
            xi, dxi = eval_stack((self.xi, self._dxi), z)
            dz = (z + xi - x) / (1.0 + dxi)
            z = z - dz
            if np.all(np.abs(dz) <= tol * np.maximum(1.0, np.abs(z))):
                break
        dxi, eta = eval_stack((self._dxi, self.eta), z)
        return z, (y - eta) * (1.0 + dxi)

    def to_dict(self):
        return {"xi": trig_to_dict(self.xi), "eta": trig_to_dict(self.eta)}


@_register
@dataclass(frozen=True)
class Conjugated(SymplecticMap):
    """psi o inner o psi^{-1} for a :class:`CurveChart` psi."""

    chart: CurveChart
    inner: SymplecticMap
    kind = "conjugated"

    @property
    def closed_form(self):
        return self.inner.closed_form

    def lift(self, x, y):
        z1, z2 = self.chart.inverse(x, y)
        w1, w2 = self.inner.lift(z1, z2)
        return self.chart.forward(w1, w2)

    def lift_jac(self, x, y):
        z1, z2 = self.chart.inverse(x, y)
        _, _, F = self.chart.forward_jac(z1, z2)
        Finv = (F[3], -F[1], -F[2], F[0])
        w1, w2, Ji = self.inner.lift_jac(z1, z2)
        X, Y, G = self.chart.forward_jac(w1, w2)
        return X, Y, _matmul(G, _matmul(Ji, Finv))

    def to_dict(self):
        return {"kind": self.kind, "chart": self.chart.to_dict(), "inner": self.inner.to_dict()}

    def iter_nodes(self):
        yield self
        yield from self.inner.iter_nodes()


@dataclass(frozen=True)
class Pullback(SymplecticMap):
    """psi^{-1} o outer o psi: the map seen in chart coordinates."""

    chart: CurveChart
    outer: SymplecticMap
    kind = "pullback"

    @property
    def closed_form(self):
        return self.outer.closed_form

    def lift(self, x, y):
        X, Y = self.outer.lift(*self.chart.forward(x, y))
        return self.chart.inverse(X, Y)

    def lift_jac(self, x, y):
        u, v, F = self.chart.forward_jac(x, y)
        X, Y, Jo = self.outer.lift_jac(u, v)
        z1, z2 = self.chart.inverse(X, Y)
        _, _, G = self.chart.forward_jac(z1, z2)
        Ginv = (G[3], -G[1], -G[2], G[0])
        return z1, z2, _matmul(Ginv, _matmul(Jo, F))

    def to_dict(self):
        return {"kind": self.kind, "chart": self.chart.to_dict(), "outer": self.outer.to_dict()}


@_register
@dataclass(frozen=True)
class Composition(SymplecticMap):
    children: tuple = field(default_factory=tuple)
    kind = "composition"

    def __post_init__(self):
        flat = []
        for c in self.children:
            flat.append(c)
        object.__setattr__(self, "children", tuple(flat))

    @property
    def closed_form(self):
        return all(c.closed_form for c in self.children)

    def lift(self, x, y):
        for c in self.children:
            x, y = c.lift(x, y)
        return x, y

    def lift_jac(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        J = _eye_like(x)
        for c in self.children:
            x, y, Jc = c.lift_jac(x, y)
            J = _matmul(Jc, J)
        return x, y + 0.0 * x, J

    def to_dict(self):
        return {"kind": self.kind, "children": [c.to_dict() for c in self.children]}

    def iter_nodes(self):
        yield self
        for c in self.children:
            yield from c.iter_nodes()


def compose(*maps):
    """Compose maps applied left to right."""
    return Composition(tuple(maps))


def standard_example():
    """The example map (x, y) -> (x + sin(2 pi y), y)."""
    return HorizontalShear(TrigPoly.sin_mode(1))


# ---------------------------------------------------------------------------
# serialization helpers


def _num(v):
    return format(float(v), ".17g")


def trig_to_dict(p: TrigPoly):
    return {"mean": _num(p.mean), "a": [_num(v) for v in p.a], "b": [_num(v) for v in p.b]}


def trig_from_dict(d):
    return TrigPoly(float(d["mean"]), [float(v) for v in d["a"]], [float(v) for v in d["b"]])


def map_from_dict(d):
    kind = d["kind"]
    if kind == "translation":
        return Translation(float(d["theta"]))
    if kind == "integrable_twist":
        return IntegrableTwist(float(d["slope"]))
    if kind == "vertical_shear":
        return VerticalShear(trig_from_dict(d["v"]))
    if kind == "horizontal_shear":
        u = d["u"]
        if u.get("kind") == "plateau":
            u = PlateauProfile(float(u["amount"]), float(u["half"]), float(u["width"]), float(u["center"]))
        else:
            u = trig_from_dict(u)
        return HorizontalShear(u)
    if kind == "polar_twist":
        return PolarTwist(float(d["alpha0"]), float(d["alpha1"]))
    if kind == "conjugated":
        chart = CurveChart(trig_from_dict(d["chart"]["xi"]), trig_from_dict(d["chart"]["eta"]))
        return Conjugated(chart, map_from_dict(d["inner"]))
    if kind == "pullback":
        chart = CurveChart(trig_from_dict(d["chart"]["xi"]), trig_from_dict(d["chart"]["eta"]))
        return Pullback(chart, map_from_dict(d["outer"]))
    if kind == "composition":
        return Composition(tuple(map_from_dict(c) for c in d["children"]))
    if kind == "flow":
        from .flows import flow_map_from_dict
        return flow_map_from_dict(d)
    raise ValidationError(f"unknown map kind {kind!r}")


# ---------------------------------------------------------------------------
# operations


def eval_map(fmap: SymplecticMap, p: PhasePoint) -> PhasePoint:
    x, y = fmap.lift(np.float64(p.x), np.float64(p.y))
    return PhasePoint(float(x), float(y), p.space)


def jacobian(fmap: SymplecticMap, p: PhasePoint) -> Jacobian2:
    _, _, J = fmap.lift_jac(np.float64(p.x), np.float64(p.y))
    return Jacobian2(*(float(v) for v in J))


def iterate_arrays(fmap, x, y, n, with_jac=True):
    """n-fold lifted iteration on arrays; returns (x_n, y_n, J) with J a 4-tuple."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) + 0.0 * x
    if not with_jac:
        for _ in range(n):
            x, y = fmap.lift(x, y)
        return x, y, None
    J = _eye_like(x)
    for _ in range(n):
        x, y, Jc = fmap.lift_jac(x, y)
        J = _matmul(Jc, J)
    return x, y, J


def iterate(fmap, p: PhasePoint, n: int):
    """Return (n-th image, Jacobian of the n-th iterate, (x winding, y winding))."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    x, y, J = iterate_arrays(fmap, np.float64(p.x), np.float64(p.y), n)
    xr, wx = _frac(float(x))
    wy = 0
    yv = float(y)
    if p.space is Space.TORUS:
        yv, wy = _frac(yv)
    return PhasePoint(xr, yv, p.space), Jacobian2(*(float(v) for v in J)), (wx, wy)


def _curve(g):
    if isinstance(g, TrigPoly):
        return g, g.deriv()
    return TrigPoly.constant(float(g)), TrigPoly.constant(0.0)


def check_graph_invariance(fmap, g, xs, tol=1e-8):
    gp, _ = _curve(g)
    X, Y = fmap.lift(np.asarray(xs, dtype=float), gp(xs))
    err = np.abs(Y - gp(X))
    worst = float(np.max(err))
    if worst > tol:
        i = int(np.argmax(err))
        raise InvarianceViolation(f"curve not invariant: |y' - g(x')| = {worst:.3e} at x = {xs[i]:.6f}",
                                  residual=worst, x=float(xs[i]))
    return worst


def twist_entry(fmap, g, x, n, tol=1e-8):
    """Entry (1,2) of D(map^n) at (x, g(x)) for an invariant graph y = g(x)."""
    gp, _ = _curve(g)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    check_graph_invariance(fmap, gp, xs, tol)
    _, _, J = iterate_arrays(fmap, xs, gp(xs), n)
    out = J[1]
    return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class ConeReport:
    passed: bool
    checked: int
    first_violation: dict | None = None


def cone_check(fmap, g, n, samples=256, xs=None, tol=1e-8):
    """Check D(map^k)(0, 1) lies in the half cone {s > 0, t > g'(x) s}, 1 <= k <= n."""
    gp, dg = _curve(g)
    xs = np.arange(samples) / samples if xs is None else np.asarray(xs, dtype=float)
    x, y = xs.copy(), gp(xs)
    check_graph_invariance(fmap, gp, xs, tol)
    J = _eye_like(x)
    for k in range(1, n + 1):
        x, y, Jc = fmap.lift_jac(x, y)
        J = _matmul(Jc, J)
        if np.max(np.abs(y - gp(x))) > tol:
            raise InvarianceViolation("orbit left the curve", step=k)
        s, t = J[1], J[3]
        bad = (s <= 0.0) | (t <= dg(x) * s)
        if np.any(bad):
            i = int(np.argmax(bad))
            return ConeReport(False, k * xs.size, {"k": k, "x": float(xs[i]), "s": float(s[i]), "t": float(t[i])})
    return ConeReport(True, n * xs.size)


def sup_distance(map_a, map_b, region: Sequence[float], density=64, space=Space.CYLINDER):
    """Sup of the phase-space distance of images over a grid of x in [0,1), y in region.

    The grid has ``density`` columns and ``density + 1`` rows, so doubling the
    density refines the previous grid and the sup can only grow.
    """
    y0, y1 = region
    xs = np.arange(density) / density
    ys = y0 + (y1 - y0) * np.arange(density + 1) / density
    X, Y = np.meshgrid(xs, ys)
    X, Y = X.ravel(), Y.ravel()
    ax, ay = map_a.lift(X, Y)
    bx, by = map_b.lift(X, Y)
    return float(np.max(phase_distance(ax, ay, bx, by, space)))
