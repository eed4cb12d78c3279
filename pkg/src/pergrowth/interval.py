"""A smooth unimodal map of [-1, 1] whose iterates have plateaus of identity,
plateau perturbations that break them into hyperbolic periodic points, and an
exhaustive periodic-point census for interval maps.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .errors import BudgetTooSmall, DomainError, PartitionOverflow, ValidationError
from .phase import _num
from .smooth import plateau, smoothstep7, smoothstep7_d1

HYPERBOLIC_TOL = 1e-9

# smoothstep7 as a polynomial in u on [0, 1]
_S7 = Polynomial([0, 0, 0, 0, 35, -84, 70, -20])


def chi(t):
    return smoothstep7(t)


def chi_d1(t):
    return smoothstep7_d1(t)


class _SlopeConnector:
    """Monotone C^4 join on [a, b] with prescribed values and slopes at both ends.

    |f'| ramps (smoothstep7 in a fraction ``ramp`` of the interval at each end)
    from |s_a| to a middle level m, stays at m, then ramps to |s_b|.  m is fixed
    so that the exact integral gives f(b).  The ramps are flat to third order
    at the seams, so the second and third derivatives of f vanish there.
    """

    def __init__(self, a, b, fa, fb, sa, sb, ramp=0.2):
        self.a, self.b, self.fa, self.fb = a, b, fa, fb
        L = b - a
        sign = math.copysign(1.0, fb - fa)
        if sa * sign < 0 or sb * sign < 0:
            raise ValidationError("end slopes must agree with the direction of the join")
        s0, s1 = abs(sa), abs(sb)
        mean = abs(fb - fa) / L
        m = (mean - s0 * ramp / 2 - s1 * ramp / 2) / (1.0 - ramp)
        if m <= 0:
            raise ValidationError("connector cannot stay monotone", mean=mean, s0=s0, s1=s1)
        self.sign, self.L, self.m = sign, L, m
        # slope pieces as polynomials in the local variable t in [0, 1] of each piece
        self.knots = (0.0, ramp, 1.0 - ramp, 1.0)
        self.slopes = (m + (s0 - m) * (1 - _S7), Polynomial([m]), m + (s1 - m) * _S7)
        ints, c = [], 0.0
        for (u0, u1), p in zip(zip(self.knots[:-1], self.knots[1:]), self.slopes):
            P = p.integ() * (u1 - u0)
            ints.append(P + c)
            c = c + P(1.0)
        self.ints = tuple(ints)
        self.total = c

    def _local(self, x):
        u = (np.asarray(x, dtype=float) - self.a) / self.L
        k = np.clip(np.searchsorted(self.knots[1:-1], u, side="right"), 0, 2)
        lo = np.take(self.knots, k)
        w = np.take(np.diff(self.knots), k)
        return k, (u - lo) / w

    def __call__(self, x):
        k, t = self._local(x)
        out = np.empty_like(t)
        for i in range(3):
            sel = k == i
            out[sel] = self.ints[i](t[sel])
        # normalized so the far end is hit exactly
        return self.fa + (self.fb - self.fa) * out / self.total

    def deriv(self, x):
        k, t = self._local(x)
        out = np.empty_like(t)
        for i in range(3):
            sel = k == i
            out[sel] = self.slopes[i](t[sel])
        return (self.fb - self.fa) * out / (self.L * self.total)


@dataclass(frozen=True)
class PlateauSpec:
    k: int
    lo: float  # x_k
    hi: float  # x'_k

    @property
    def period(self):
        return self.k + 1


@dataclass(frozen=True)
class Bump:
    k: int
    gamma: int
    amplitude: float
    lo: float
    hi: float

    @property
    def L(self):
        return self.hi - self.lo

    def _s(self, x):
        c = 0.5 * (self.lo + self.hi)
        return plateau(np.asarray(x, dtype=float) - c, self.L / 4, 0.9 * self.L / 4)

    def __call__(self, x):
        s, _, _ = self._s(x)
        return self.amplitude * s * np.sin(2 * np.pi * self.gamma * (np.asarray(x) - self.lo) / self.L)

    def deriv(self, x):
        s, s1, _ = self._s(x)
        ph = 2 * np.pi * self.gamma * (np.asarray(x) - self.lo) / self.L
        return self.amplitude * (s1 * np.sin(ph) + s * np.cos(ph) * 2 * np.pi * self.gamma / self.L)

    def unit_slope_bound(self):
        """sup |w'| / amplitude."""
        return 2 * np.pi * self.gamma / self.L + 1.0 / (0.9 * self.L / 4) * 2.1875


class IntervalMap:
    """Base: callable with ``deriv`` and a list of critical points."""

    critical_points = (0.0,)
    domain = (-1.0, 1.0)

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError


class TentMap(IntervalMap):
    def __call__(self, x):
        return 1.0 - 2.0 * np.abs(np.asarray(x, dtype=float))

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 2.0, -2.0)


class CascadeMap(IntervalMap):
    """The unimodal map with identity plateaus for f^{k+1} on [x_k, x'_k]."""

    def __init__(self, delta, kmax, bumps=()):
        if not 0.0 < delta < 0.25:
            raise DomainError("delta must lie in (0, 1/4)", delta=delta)
        if kmax < 2:
            raise ValidationError("kmax must be >= 2", kmax=kmax)
        self.delta, self.kmax = float(delta), int(kmax)
        self.bumps = tuple(bumps)
        self.xk = np.array([delta / (2 * k + 1) for k in range(kmax + 1)])  # x_0 = delta
        self.xpk = np.array([np.inf] + [delta / (2 * k) for k in range(1, kmax + 1)])
        xp1, xK = self.xpk[1], self.xk[kmax]
        self.left = _SlopeConnector(-1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0, 2.0, 0.0)
        fK = 1.0 - 2.0 ** (-kmax) * (1.0 + xK)
        self.mid = _SlopeConnector(0.0, xK, 1.0, fK, 0.0, -(2.0 ** (-kmax)))
        self.right = _SlopeConnector(xp1, 1.0 / 3.0, 1.0 - 0.5 * (1.0 + xp1), 1.0 / 3.0, -0.5, -2.0)

    # pieces -----------------------------------------------------------
    def g(self, k, x):
        x = np.asarray(x, dtype=float)
        return 2.0 ** (-k) * (1.0 + chi((2 * k - 1) * (2 * k * x / self.delta - 1.0))) * (1.0 + x)

    def g_deriv(self, k, x):
        x = np.asarray(x, dtype=float)
        t = (2 * k - 1) * (2 * k * x / self.delta - 1.0)
        dt = (2 * k - 1) * 2 * k / self.delta
        return 2.0 ** (-k) * ((1.0 + chi(t)) + chi_d1(t) * dt * (1.0 + x))

    def plateau(self, k) -> PlateauSpec:
        if not 1 <= k <= self.kmax:
            raise ValidationError("plateau index out of range", k=k, kmax=self.kmax)
        return PlateauSpec(k, float(self.xk[k]), float(self.xpk[k]))

    def _piece(self, x):
        """Index of the cascade piece containing x (0 if none)."""
        k = np.zeros(x.shape, dtype=int)
        for j in range(2, self.kmax + 1):
            k[(x >= self.xk[j]) & (x < self.xk[j - 1])] = j
        k[(x >= self.xk[1]) & (x <= self.xpk[1])] = 1
        return k

    def base(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        k = self._piece(x)
        a = x <= -1.0 / 3.0
        out[a] = 1.0 + 2.0 * x[a]
        b = (x > -1.0 / 3.0) & (x <= 0.0)
        out[b] = self.left(x[b])
        c = (x > 0.0) & (x < self.xk[self.kmax])
        out[c] = self.mid(x[c])
        for j in range(1, self.kmax + 1):
            s = k == j
            out[s] = 1.0 - self.g(j, x[s])
        d = (x > self.xpk[1]) & (x < 1.0 / 3.0)
        out[d] = self.right(x[d])
        e = x >= 1.0 / 3.0
        out[e] = 1.0 - 2.0 * x[e]
        return out

    def base_deriv(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        k = self._piece(x)
        a = x <= -1.0 / 3.0
        out[a] = 2.0
        b = (x > -1.0 / 3.0) & (x <= 0.0)
        out[b] = self.left.deriv(x[b])
        c = (x > 0.0) & (x < self.xk[self.kmax])
        out[c] = self.mid.deriv(x[c])
        for j in range(1, self.kmax + 1):
            s = k == j
            out[s] = -self.g_deriv(j, x[s])
        d = (x > self.xpk[1]) & (x < 1.0 / 3.0)
        out[d] = self.right.deriv(x[d])
        e = x >= 1.0 / 3.0
        out[e] = -2.0
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.base(np.atleast_1d(x))
        for w in self.bumps:
            out = out + w(np.atleast_1d(x))
        out = np.clip(out, -1.0, 1.0)
        return out if x.ndim else float(out[0])

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        out = self.base_deriv(np.atleast_1d(x))
        for w in self.bumps:
            out = out + w.deriv(np.atleast_1d(x))
        return out if x.ndim else float(out[0])

    def with_bump(self, bump):
        return CascadeMap(self.delta, self.kmax, self.bumps + (bump,))

    def to_dict(self):
        return {"kind": "cascade_interval", "delta": _num(self.delta), "kmax": self.kmax,
                "bumps": [{"k": b.k, "gamma": b.gamma, "amplitude": _num(b.amplitude)} for b in self.bumps]}


def build_f0(delta, kmax, sharpness=None) -> CascadeMap:
    """``sharpness`` is accepted for interface compatibility; chi is the fixed
    order-7 smoothstep."""
    return CascadeMap(delta, kmax)


def plateau_identity_check(fmap: CascadeMap, k, grid=1001) -> float:
    spec = fmap.plateau(k)
    xs = np.linspace(spec.lo, spec.hi, grid)
    y = xs
    for _ in range(k + 1):
        y = fmap(y)
    return float(np.max(np.abs(y - xs)))


@dataclass(frozen=True)
class PerturbResult:
    map: CascadeMap
    bump: Bump
    amplitude: float
    requested: float
    margin: float  # min |(f^{k+1})' - 1| at the zeros of the bump's sine inside its core


def perturb_plateau(fmap: CascadeMap, k, gamma, eps, slope_fraction=0.5) -> PerturbResult:
    """Add w(x) = a s(x) sin(2 pi gamma (x - x_k) / L) on the plateau [x_k, x'_k].

    a = min(eps, derivative-safe amplitude): w' may use at most
    ``slope_fraction`` of |f'| = 2^{-k} on the plateau so the map keeps its
    single critical point.  On the plateau f^{k+1}(x) = x - 2^k w(x).
    """
    if gamma < 1:
        raise ValidationError("gamma must be positive", gamma=gamma)
    if eps < 0:
        raise ValidationError("eps must be non-negative", eps=eps)
    spec = fmap.plateau(k)
    probe = Bump(k, int(gamma), 1.0, spec.lo, spec.hi)
    a_safe = slope_fraction * 2.0 ** (-k) / probe.unit_slope_bound()
    a = min(float(eps), a_safe)
    if a == 0.0:
        return PerturbResult(fmap, Bump(k, int(gamma), 0.0, spec.lo, spec.hi), 0.0, float(eps), 0.0)
    bump = Bump(k, int(gamma), a, spec.lo, spec.hi)
    margin = 2.0 ** k * a * 2 * np.pi * gamma / bump.L
    if margin < HYPERBOLIC_TOL:
        raise BudgetTooSmall("perturbation too small for a resolvable hyperbolicity margin",
                             margin=margin, amplitude=a)
    return PerturbResult(fmap.with_bump(bump), bump, a, float(eps), float(margin))


# ---------------------------------------------------------------------------
# census


@dataclass(frozen=True)
class IntervalPoint:
    x: float
    n: int
    least_period: int
    derivative: float

    @property
    def hyperbolic(self):
        return abs(abs(self.derivative) - 1.0) > HYPERBOLIC_TOL

    @property
    def type(self):
        return "hyperbolic" if self.hyperbolic else "nonhyperbolic"


@dataclass
class IntervalCensus:
    n: int
    points: list
    continua: list  # [(lo, hi)] intervals of fixed points of f^n
    laps: int
    meta: dict = field(default_factory=dict)

    @property
    def fixed_count(self):
        return len(self.points)

    def least(self, hyperbolic_only=False):
        out = [p for p in self.points if p.least_period == self.n]
        if hyperbolic_only:
            out = [p for p in out if p.hyperbolic]
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "x", "derivative", "type"])
        for p in sorted(self.least(), key=lambda p: p.x):
            w.writerow([p.least_period, _num(p.x), _num(p.derivative), p.type])
        return buf.getvalue()

    def summary(self):
        least = self.least()
        return {"n": self.n, "fixed_points_of_iterate": self.fixed_count, "least_period": len(least),
                "hyperbolic": sum(p.hyperbolic for p in least), "continua": len(self.continua),
                "laps": self.laps}

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _iterate(f, x, n):
    y = np.asarray(x, dtype=float)
    d = np.ones_like(y)
    for _ in range(n):
        d = d * f.deriv(y)
        y = f(y)
    return y, d


def _monotone_partition(f, n, max_laps):
    """Break points of [-1, 1] where some f^j (j < n) hits a critical point."""
    lo, hi = f.domain
    frontier = [(lo, hi)]
    # pieces on which f^j is monotone; refine by preimages of critical points
    for j in range(n):
        new = []
        for a, b in frontier:
            cuts = [a]
            ya, _ = _iterate(f, a, j)
            yb, _ = _iterate(f, b, j)
            for c in f.critical_points:
                if (ya - c) * (yb - c) < 0:
                    r = brentq(lambda t: float(_iterate(f, t, j)[0]) - c, a, b, xtol=1e-15, rtol=1e-15)
                    cuts.append(r)
            cuts.append(b)
            cuts.sort()
            new.extend(zip(cuts[:-1], cuts[1:]))
            if len(new) > max_laps:
                raise PartitionOverflow("lap count exceeds limit", laps=len(new), limit=max_laps)
        frontier = new
    return frontier


def interval_census(f: IntervalMap, n: int, max_laps=1 << 16, samples_per_lap=64,
                    continuum_tol=1e-12, max_depth=40, max_spacing=5e-6) -> IntervalCensus:
    """All fixed points of f^n on [-1, 1], with plateaus reported as continua."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    laps = _monotone_partition(f, n, max_laps)
    roots, continua, flat_x, flat_d = [], [], [], []
    h0 = 0.0
    for a, b in laps:
        if b - a <= 0:
            continue
        ya, da = _iterate(f, a, n)
        yb, db = _iterate(f, b, n)
        decreasing = float(yb) < float(ya)
        if decreasing:
            ga, gb = float(ya) - a, float(yb) - b
            if ga == 0.0:
                roots.append(a)
            elif gb == 0.0:
                roots.append(b)
            elif ga * gb < 0:
                roots.append(brentq(lambda t: float(_iterate(f, t, n)[0]) - t, a, b, xtol=1e-15, rtol=1e-15))
            continue
        # increasing lap: G = f^n - id may wiggle; bisect where the local slope
        # bound cannot rule out a root between two same-sign samples
        m = max(samples_per_lap, int(math.ceil((b - a) / max_spacing)))
        xs = np.linspace(a, b, m + 1)
        y, d = _iterate(f, xs, n)
        G = y - xs
        # slope bound over a window of neighbouring samples
        s1 = np.abs(d - 1.0)
        win = np.max(np.stack([np.roll(s1, k) for k in range(-3, 4)]), axis=0)
        flat_x.extend(xs[np.abs(G) <= continuum_tol])
        flat_d.extend(d[np.abs(G) <= continuum_tol])
        xa, xb, Ga, Gb, da, db = xs[:-1], xs[1:], G[:-1], G[1:], d[:-1], d[1:]
        wa = np.maximum(win[:-1], win[1:])
        for _ in range(max_depth):
            sc = (Ga * Gb < 0) & (np.abs(Ga) > continuum_tol) & (np.abs(Gb) > continuum_tol)
            for u, v in zip(xa[sc], xb[sc]):
                roots.append(brentq(lambda t: float(_iterate(f, t, n)[0]) - t, u, v, xtol=1e-15, rtol=1e-15))
            lip = 2.0 * np.maximum(wa, np.maximum(np.abs(da - 1.0), np.abs(db - 1.0)))
            risky = (~sc & (np.abs(Ga) > continuum_tol) & (np.abs(Gb) > continuum_tol)
                     & (np.abs(Ga) + np.abs(Gb) < lip * (xb - xa)))
            if not np.any(risky):
                break
            xa, xb, Ga, Gb, da, db, wa = (v[risky] for v in (xa, xb, Ga, Gb, da, db, wa))
            xm = 0.5 * (xa + xb)
            ym, dm = _iterate(f, xm, n)
            Gm = ym - xm
            fl = np.abs(Gm) <= continuum_tol
            flat_x.extend(xm[fl])
            flat_d.extend(dm[fl])
            xa, xb = np.concatenate([xa, xm]), np.concatenate([xm, xb])
            Ga, Gb = np.concatenate([Ga, Gm]), np.concatenate([Gm, Gb])
            da, db = np.concatenate([da, dm]), np.concatenate([dm, db])
            wa = np.concatenate([wa, wa])
        h0 = max(h0, (b - a) / m)
    # samples lying on the identity: plateaus if the slope of f^n is 1 there
    fx, fd = np.asarray(flat_x), np.asarray(flat_d)
    cont = np.abs(fd - 1.0) < 1e-6
    roots.extend(fx[~cont].tolist())
    cx = np.sort(fx[cont])
    if cx.size:
        start = prev = cx[0]
        for v in cx[1:]:
            if v - prev > 1.01 * h0:
                continua.append((float(start), float(prev)))
                start = v
            prev = v
        continua.append((float(start), float(prev)))
    roots = sorted(roots)
    uniq = []
    for r in roots:
        if uniq and abs(r - uniq[-1]) <= 1e-12:
            continue
        if any(lo - h0 <= r <= hi + h0 for lo, hi in continua):
            continue
        uniq.append(r)
    pts = []
    divs = [d for d in range(1, n) if n % d == 0]
    for r in uniq:
        _, der = _iterate(f, r, n)
        least = n
        for dv in divs:
            y, _ = _iterate(f, r, dv)
            if abs(float(y) - r) <= 1e-10:
                least = dv
                break
        pts.append(IntervalPoint(float(r), n, least, float(der)))
    return IntervalCensus(n, pts, continua, len(laps))
