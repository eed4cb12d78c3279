"""Hamiltonian fields and their time-t maps.

Sign convention: the vector field of H is (dH/dy, -dH/dx).  Fields whose
flow is known in closed form return exact shear nodes from
:func:`flow_map`; everything else goes through the implicit-midpoint
integrator in :func:`integrate_flow`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationFailure, NotDiffeo, ValidationError
from .phase import (HorizontalShear, SymplecticMap, Translation, VerticalShear, _eye_like,
                    _matmul, _num, _register, trig_from_dict, trig_to_dict)
from .smooth import plateau
from .trig import TWO_PI, TrigPoly, eval_stack

# ---------------------------------------------------------------------------
# fields


class HamiltonianField:
    kind = "abstract"

    def value(self, x, y):
        raise NotImplementedError

    def grad(self, x, y):
        """(H_x, H_y)."""
        raise NotImplementedError

    def hess(self, x, y):
        """(H_xx, H_xy, H_yy)."""
        raise NotImplementedError

    def vector_field(self, x, y):
        hx, hy = self.grad(x, y)
        return hy, -hx

    def grad_hess(self, x, y):
        """Gradient and Hessian together; fields override this to share work."""
        return self.grad(x, y), self.hess(x, y)

    def closed_form_flow(self, t):
        return None

    def to_dict(self):
        raise ValidationError(f"{type(self).__name__} is not serializable")


@dataclass(frozen=True)
class XOnly(HamiltonianField):
    h: TrigPoly
    kind = "x_only"

    def value(self, x, y):
        return self.h(x) + 0.0 * np.asarray(y)

    def grad(self, x, y):
        z = 0.0 * np.asarray(y, dtype=float)
        return self.h.deriv()(x) + z, z + 0.0 * np.asarray(x)

    def hess(self, x, y):
        z = 0.0 * (np.asarray(x, dtype=float) + np.asarray(y))
        return self.h.deriv(2)(x) + z, z, z

    def closed_form_flow(self, t):
        # xdot = 0, ydot = -h'(x)
        return VerticalShear(-t * self.h.deriv())

    def to_dict(self):
        return {"kind": self.kind, "h": trig_to_dict(self.h)}


@dataclass(frozen=True)
class YOnly(HamiltonianField):
    h: TrigPoly
    kind = "y_only"

    def value(self, x, y):
        return self.h(y) + 0.0 * np.asarray(x)

    def grad(self, x, y):
        z = 0.0 * (np.asarray(x, dtype=float) + np.asarray(y))
        return z, self.h.deriv()(y) + z

    def hess(self, x, y):
        z = 0.0 * (np.asarray(x, dtype=float) + np.asarray(y))
        return z, z, self.h.deriv(2)(y) + z

    def closed_form_flow(self, t):
        return HorizontalShear(t * self.h.deriv())

    def to_dict(self):
        return {"kind": self.kind, "h": trig_to_dict(self.h)}


@dataclass(frozen=True)
class Quadratic(HamiltonianField):
    """H = (a x^2 + 2 b x y + c y^2) / 2."""

    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    kind = "quadratic"

    def value(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return 0.5 * (self.a * x * x + 2 * self.b * x * y + self.c * y * y)

    def grad(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return self.a * x + self.b * y, self.b * x + self.c * y

    def hess(self, x, y):
        one = np.ones_like(np.asarray(x, dtype=float) + np.asarray(y))
        return self.a * one, self.b * one, self.c * one

    def to_dict(self):
        return {"kind": self.kind, "a": _num(self.a), "b": _num(self.b), "c": _num(self.c)}


@dataclass(frozen=True)
class CurveFollowing(HamiltonianField):
    """H1 = s(x)/(2 pi) * sin(2 pi (y - g(x))), s(x) = phi_x'(phi_x^{-1}(x)).

    ``xi`` is the periodic part of the circle diffeomorphism phi_x(z) = z + xi(z).
    On the graph y = g(x) the field is s(x) (1, g'(x)), i.e. the tangent of
    the parametrised curve, so the flow slides the curve along itself.
    """

    xi: TrigPoly
    g: TrigPoly
    kind = "curve_following"

    def __post_init__(self):
        d = self.xi.deriv()
        n = max(1024, 8 * self.xi.a.size + 8)
        if np.min(1.0 + d.samples(n)) <= 0.0:
            raise NotDiffeo("phi_x' must be positive")
        object.__setattr__(self, "_d1", d)
        object.__setattr__(self, "_d2", self.xi.deriv(2))
        object.__setattr__(self, "_d3", self.xi.deriv(3))
        object.__setattr__(self, "_g1", self.g.deriv())
        object.__setattr__(self, "_g2", self.g.deriv(2))

    @property
    def straight(self):
        return self.xi.degree == 0 and self.g.degree == 0

    def _speed(self, x):
        """s, s', s'' as functions of x."""
        x = np.asarray(x, dtype=float)
        if self.xi.degree == 0:
            one = np.ones_like(x)
            return one, 0.0 * one, 0.0 * one
        pair = (self.xi, self._d1)
        u = x - self.xi(x)
        for _ in range(60):
            v, d = eval_stack(pair, u)
            du = (u + v - x) / (1.0 + d)
            u = u - du
            if np.all(np.abs(du) < 1e-15):
                break
        d1, p2, p3 = eval_stack((self._d1, self._d2, self._d3), u)
        p1 = 1.0 + d1
        return p1, p2 / p1, (p3 * p1 - p2 * p2) / p1**3

    def value(self, x, y):
        s, _, _ = self._speed(x)
        return s / TWO_PI * np.sin(TWO_PI * (np.asarray(y) - self.g(x)))

    def grad(self, x, y):
        s, s1, _ = self._speed(x)
        ph = TWO_PI * (np.asarray(y) - self.g(x))
        sn, cs = np.sin(ph), np.cos(ph)
        hx = s1 / TWO_PI * sn - s * self._g1(x) * cs
        hy = s * cs
        return hx, hy

    def hess(self, x, y):
        return self.grad_hess(x, y)[1]

    def grad_hess(self, x, y):
        s, s1, s2 = self._speed(x)
        g0, g1, g2 = eval_stack((self.g, self._g1, self._g2), x)
        ph = TWO_PI * (np.asarray(y) - g0)
        sn, cs = np.sin(ph), np.cos(ph)
        grad = (s1 / TWO_PI * sn - s * g1 * cs, s * cs)
        hxx = (s2 / TWO_PI * sn - 2 * s1 * g1 * cs - s * g2 * cs - s * g1 * g1 * TWO_PI * sn)
        hxy = s1 * cs + s * g1 * TWO_PI * sn
        hyy = -s * TWO_PI * sn
        return grad, (hxx, hxy, hyy)

    def closed_form_flow(self, t):
        if self.straight:
            c = self.g.mean
            u = TrigPoly(0.0, [t * math.cos(TWO_PI * c)], [t * math.sin(TWO_PI * c)])
            return HorizontalShear(u)  # t cos(2 pi (y - c))
        return None

    def to_dict(self):
        return {"kind": self.kind, "xi": trig_to_dict(self.xi), "g": trig_to_dict(self.g)}


@dataclass(frozen=True)
class Bump(HamiltonianField):
    """H = -h(x) chi(y): chi = 1 on |y| <= delta/2, 0 on |y| >= delta/2 + width."""

    h: TrigPoly
    delta: float
    width: float
    kind = "bump"

    def _chi(self, y):
        return plateau(y, 0.5 * self.delta, self.width)

    def value(self, x, y):
        return -self.h(x) * self._chi(y)[0]

    def grad(self, x, y):
        c, c1, _ = self._chi(y)
        return -self.h.deriv()(x) * c, -self.h(x) * c1

    def hess(self, x, y):
        c, c1, c2 = self._chi(y)
        return -self.h.deriv(2)(x) * c, -self.h.deriv()(x) * c1, -self.h(x) * c2

    def closed_form_flow(self, t):
        if self.h.degree == 0:
            return Translation(0.0)
        return None

    def to_dict(self):
        return {"kind": self.kind, "h": trig_to_dict(self.h), "delta": _num(self.delta),
                "width": _num(self.width)}


@dataclass(frozen=True)
class Generic(HamiltonianField):
    """Arbitrary H given by callables (not serializable)."""

    H: object
    gradient: object
    hessian: object
    kind = "generic"

    def value(self, x, y):
        return self.H(x, y)

    def grad(self, x, y):
        return self.gradient(x, y)

    def hess(self, x, y):
        return self.hessian(x, y)


def field_from_dict(d):
    kind = d["kind"]
    if kind == "x_only":
        return XOnly(trig_from_dict(d["h"]))
    if kind == "y_only":
        return YOnly(trig_from_dict(d["h"]))
    if kind == "quadratic":
        return Quadratic(float(d["a"]), float(d["b"]), float(d["c"]))
    if kind == "curve_following":
        return CurveFollowing(trig_from_dict(d["xi"]), trig_from_dict(d["g"]))
    if kind == "bump":
        return Bump(trig_from_dict(d["h"]), float(d["delta"]), float(d["width"]))
    raise ValidationError(f"unknown field kind {kind!r}")


# ---------------------------------------------------------------------------
# constructors named after the constructions that use them


def shear_flow(h: TrigPoly, t: float) -> VerticalShear:
    """Flow of H = -h(x): (x, y) -> (x, y + t h'(x))."""
    return VerticalShear(t * h.deriv())


_TRANSVERSAL = {
    1: lambda: XOnly(TrigPoly.cos_mode(1)),
    2: lambda: XOnly(TrigPoly.sin_mode(1)),
    3: lambda: YOnly(TrigPoly.cos_mode(1)),
    4: lambda: YOnly(TrigPoly.sin_mode(1)),
}


def transversality_field(index):
    if index not in _TRANSVERSAL:
        raise ValidationError("index must be 1..4")
    return _TRANSVERSAL[index]()


def transversality_flow(index, t):
    """Closed-form flows of cos 2pi x, sin 2pi x, cos 2pi y, sin 2pi y."""
    return transversality_field(index).closed_form_flow(t)


def curve_following_hamiltonian(xi: TrigPoly, g: TrigPoly) -> CurveFollowing:
    return CurveFollowing(xi, g)


def bump_hamiltonian(h: TrigPoly, delta: float, width: float) -> Bump:
    if not 0.0 < width < 0.5 * delta:
        raise ValidationError("cutoff width must lie in (0, delta/2)")
    return Bump(h, delta, width)


# ---------------------------------------------------------------------------
# integrator

_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-3
    tol: float = 1e-14
    max_iter: int = 50
    order: int = 4  # 2: plain implicit midpoint; 4: symmetric triple-jump of midpoint steps

    def __post_init__(self):
        if self.step <= 0 or self.tol <= 0:
            raise ValidationError("step and tolerance must be positive")
        if self.order not in (2, 4):
            raise ValidationError("order must be 2 or 4")


def _midpoint_step(field, x, y, h, cfg, J=None):
    fx, fy = field.vector_field(x, y)
    x1, y1 = x + h * fx, y + h * fy
    for it in range(cfg.max_iter):
        mx, my = 0.5 * (x + x1), 0.5 * (y + y1)
        (gx, gy), (hxx, hxy, hyy) = field.grad_hess(mx, my)
        fx, fy = gy, -gx
        rx, ry = x1 - x - h * fx, y1 - y - h * fy
        # Df = [[hxy, hyy], [-hxx, -hxy]];  Newton matrix I - h/2 Df
        a11, a12 = 1.0 - 0.5 * h * hxy, -0.5 * h * hyy
        a21, a22 = 0.5 * h * hxx, 1.0 + 0.5 * h * hxy
        det = a11 * a22 - a12 * a21
        dx = (a22 * rx - a12 * ry) / det
        dy = (-a21 * rx + a11 * ry) / det
        x1, y1 = x1 - dx, y1 - dy
        if np.all(np.abs(dx) + np.abs(dy) <= cfg.tol * (1.0 + np.abs(x1) + np.abs(y1))):
            break
    else:
        raise IntegrationFailure("implicit midpoint Newton did not converge",
                                 step=h, residual=float(np.max(np.abs(dx) + np.abs(dy))))
    if J is None:
        return x1, y1, None
    mx, my = 0.5 * (x + x1), 0.5 * (y + y1)
    hxx, hxy, hyy = field.hess(mx, my)
    A = (hxy, hyy, -hxx, -hxy)
    L = (1.0 - 0.5 * h * A[0], -0.5 * h * A[1], -0.5 * h * A[2], 1.0 - 0.5 * h * A[3])
    R = (1.0 + 0.5 * h * A[0], 0.5 * h * A[1], 0.5 * h * A[2], 1.0 + 0.5 * h * A[3])
    det = L[0] * L[3] - L[1] * L[2]
    Linv = (L[3] / det, -L[1] / det, -L[2] / det, L[0] / det)
    return x1, y1, _matmul(_matmul(Linv, R), J)


def _integrate(field, t, cfg, x, y, with_jac):
    x = np.asarray(x, dtype=float).copy()
    y = np.asarray(y, dtype=float) + 0.0 * x
    J = _eye_like(x) if with_jac else None
    if t == 0.0:
        return x, y, J
    n = max(1, int(math.ceil(abs(t) / cfg.step - 1e-12)))
    h = t / n
    subs = (1.0,) if cfg.order == 2 else _YOSHIDA
    for _ in range(n):
        for w in subs:
            x, y, J = _midpoint_step(field, x, y, w * h, cfg, J)
    return x, y, J


@_register
@dataclass(frozen=True)
class FlowMap(SymplecticMap):
    field: HamiltonianField
    t: float
    config: IntegratorConfig = field(default_factory=IntegratorConfig)
    kind = "flow"
    closed_form = False

    def lift(self, x, y):
        if hasattr(x, "is_jet"):
            raise ValidationError("flow maps do not support jet evaluation")
        X, Y, _ = _integrate(self.field, self.t, self.config, x, y, False)
        return X, Y

    def lift_jac(self, x, y):
        return _integrate(self.field, self.t, self.config, x, y, True)

    def to_dict(self):
        c = self.config
        return {"kind": self.kind, "field": self.field.to_dict(), "t": _num(self.t),
                "config": {"step": _num(c.step), "tol": _num(c.tol), "max_iter": c.max_iter,
                           "order": c.order}}


def flow_map_from_dict(d):
    c = d.get("config", {})
    cfg = IntegratorConfig(float(c.get("step", 1e-3)), float(c.get("tol", 1e-14)),
                           int(c.get("max_iter", 50)), int(c.get("order", 4)))
    return FlowMap(field_from_dict(d["field"]), float(d["t"]), cfg)


def integrate_flow(field: HamiltonianField, t: float, config: IntegratorConfig | None = None) -> FlowMap:
    return FlowMap(field, float(t), config or IntegratorConfig())


def flow_map(field: HamiltonianField, t: float, config: IntegratorConfig | None = None) -> SymplecticMap:
    """Closed-form flow when available, else the integrator."""
    exact = field.closed_form_flow(t)
    return exact if exact is not None else integrate_flow(field, t, config)
