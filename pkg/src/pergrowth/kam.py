"""Invariant circles with Diophantine rotation, and the tools around them.

The invariance solver is a parameterization method: the circle is
K(z) = (z + xi(z), eta(z)) sampled on a uniform grid, and each Newton
step solves two cohomological equations in the frame P = [DK, N] where the
linearized map is upper triangular up to quadratic errors.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (GraphFolded, NewtonDiverged, NonConvergent, NotElliptic, RationalDetected,
                     ResonantEigenvalue, SmallDivisorResonance, TwistLost, ValidationError)
from .jets import Jet
from .phase import (Composition, CurveChart, HorizontalShear, IntegrableTwist, Pullback,
                    SymplecticMap, Translation, VerticalShear, _curve, _num, trig_to_dict)
from .trig import TWO_PI, TrigPoly

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# rotation numbers


def das_weights(n):
    t = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def _rigid_shift(fmap):
    """Total shift if every leaf of the map is a Translation, else None."""
    total = 0.0
    for node in fmap.iter_nodes():
        if isinstance(node, Translation):
            total += node.theta
        elif not isinstance(node, Composition):
            return None
    return total


def rotation_number(fmap: SymplecticMap, start, n_iter=2000, tol=1e-8):
    """Weighted Birkhoff average of lifted x-increments.

    Returns (rho, err) with err the gap between the averages over the full
    orbit and over its first half.  Maps made only of translations return
    their shift exactly.
    """
    rigid = _rigid_shift(fmap)
    if rigid is not None:
        return rigid, 0.0
    x = np.float64(start[0])
    y = np.float64(start[1])
    inc = np.empty(n_iter)
    for k in range(n_iter):
        X, y = fmap.lift(x, y)
        inc[k] = X - x
        x = X - math.floor(X)  # keep x small so increments carry no lift roundoff
    if np.ptp(inc) == 0.0:
        return float(inc[0]), 0.0
    full = float(np.dot(das_weights(n_iter), inc))
    half = float(np.dot(das_weights(n_iter // 2), inc[:n_iter // 2]))
    err = abs(full - half)
    if err > tol:
        raise NonConvergent("rotation number average did not settle", estimate=full, error=err)
    return full, err


# ---------------------------------------------------------------------------
# Diophantine certificates


def continued_fraction(theta, max_terms=60, qmax=None):
    """Partial quotients and convergents (p_k, q_k) of theta (float)."""
    a, conv = [], []
    p0, q0, p1, q1 = 1, 0, int(math.floor(theta)), 1
    x = theta
    a.append(p1)
    conv.append((p1, 1))
    frac = x - math.floor(x)
    for _ in range(max_terms):
        if frac < 1e-15:
            break
        x = 1.0 / frac
        ak = int(math.floor(x))
        frac = x - ak
        p0, q0, p1, q1 = p1, q1, ak * p1 + p0, ak * q1 + q0
        if qmax is not None and q1 > qmax:
            break
        a.append(ak)
        conv.append((p1, q1))
    return a, conv


@dataclass(frozen=True)
class DiophantineCert:
    theta: float
    tau: float
    c: float
    qmax: int
    convergents: list
    argmin_q: int
    c_tail: float  # same minimum restricted to sqrt(qmax) <= q <= qmax

    def holds(self, p, q, slack=1e-12):
        # |theta - p/q| >= c / q^(2+tau), multiplied through by q
        return abs(q * self.theta - p) >= self.c / q ** (1.0 + self.tau) * (1.0 - slack)

    def to_json(self):
        return json.dumps({
            "theta": _num(self.theta), "tau": _num(self.tau), "c": _num(self.c),
            "c_tail": _num(self.c_tail), "qmax": self.qmax, "argmin_q": self.argmin_q,
            "convergents": [[p, q] for p, q in self.convergents],
        }, indent=2, sort_keys=True)


def diophantine_certificate(theta, tau=0.0, qmax=10_000) -> DiophantineCert:
    """c = min over q <= qmax of q^(1+tau) ||q theta||.

    For q_k <= q < q_{k+1} one has ||q theta|| >= ||q_k theta||, so the
    minimum is attained at a convergent denominator.
    """
    if tau < 0 or qmax < 2:
        raise ValidationError("need tau >= 0 and qmax >= 2", tau=tau, qmax=qmax)
    _, conv = continued_fraction(theta, qmax=qmax)
    vals = []
    for p, q in conv:
        d = abs(q * theta - p)
        if d < 1e-12 * max(q, 1):
            raise RationalDetected(f"theta is {p}/{q} to working precision", p=p, q=q)
        if q >= 1:
            vals.append((q ** (1.0 + tau) * d, q))
    c, qarg = min(vals)
    tail = [v for v, q in vals if q * q >= qmax] or [vals[-1][0]]
    if c < 1e-9:
        raise RationalDetected("Diophantine constant below 1e-9", c=c, q=qarg)
    return DiophantineCert(float(theta), float(tau), float(c), int(qmax), conv, int(qarg), float(min(tail)))


def scan_certificate(cert: DiophantineCert):
    """Exhaustive check of |theta - p/q| >= c / q^(2+tau) for q <= qmax; returns violations."""
    q = np.arange(1, cert.qmax + 1, dtype=float)
    p = np.round(q * cert.theta)
    lhs = np.abs(q * cert.theta - p)
    rhs = cert.c / q ** (1.0 + cert.tau) * (1.0 - 1e-12)
    bad = np.nonzero(lhs < rhs)[0]
    return [(int(p[k]), int(q[k])) for k in bad]


# ---------------------------------------------------------------------------
# cohomological equation


def solve_cohomological(alpha: TrigPoly, theta: float, divisor_floor=1e-8):
    """beta(x + theta) - beta(x) + abar = alpha(x); beta has zero mean."""
    D = alpha.a.size
    k = np.arange(1, D + 1)
    div = np.exp(1j * TWO_PI * k * theta) - 1.0
    ck = 0.5 * (alpha.a - 1j * alpha.b)
    live = np.hypot(alpha.a, alpha.b) > 0
    small = live & (np.abs(div) < divisor_floor)
    if np.any(small):
        kk = int(k[np.argmax(small)])
        raise SmallDivisorResonance(f"divisor at k={kk} below floor", k=kk,
                                    divisor=float(np.abs(div[kk - 1])))
    bk = np.where(live, ck / np.where(live, div, 1.0), 0.0)
    return TrigPoly(0.0, 2.0 * bk.real, -2.0 * bk.imag), float(alpha.mean)


def _cohom_grid(v, theta, n):
    """xi(z) - xi(z + theta) = v(z) - mean(v) on samples; returns mean-free xi."""
    F = np.fft.rfft(v)
    k = np.arange(F.size)
    div = 1.0 - np.exp(1j * TWO_PI * k * theta)
    F[0] = 0.0
    if n % 2 == 0:
        F[-1] = 0.0
    F[1:] = F[1:] / div[1:]
    return np.fft.irfft(F, n)


def _deriv_grid(v, n):
    F = np.fft.rfft(v)
    k = np.arange(F.size)
    F = F * (1j * TWO_PI * k)
    if n % 2 == 0:
        F[-1] = 0.0
    return np.fft.irfft(F, n)


def _shift_grid(v, theta, n):
    F = np.fft.rfft(v)
    k = np.arange(F.size)
    F = F * np.exp(1j * TWO_PI * k * theta)
    if n % 2 == 0:
        F[-1] = 0.0
    return np.fft.irfft(F, n)


def _lowpass(v, n):
    F = np.fft.rfft(v)
    if n % 2 == 0:
        F[-1] = 0.0
    return np.fft.irfft(F, n)


def _resample(v, n_new):
    n = v.size
    F = np.fft.rfft(v) / n
    if n % 2 == 0:
        F[-1] = 0.0
    G = np.zeros(n_new // 2 + 1, dtype=complex)
    m = min(F.size, G.size)
    G[:m] = F[:m]
    return np.fft.irfft(G * n_new, n_new)


def _tail_fraction(v):
    """Share of spectral energy in the top decile of modes."""
    F = np.abs(np.fft.rfft(v)[1:]) ** 2
    tot = F.sum()
    if tot == 0.0:
        return 0.0
    cut = max(1, int(0.9 * F.size))
    return float(F[cut:].sum() / tot)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class KamCurve:
    xi: TrigPoly
    eta: TrigPoly
    theta: float
    residual: float
    twist_min: float
    strip_radius: float
    modes: int
    history: tuple = ()
    form: str = "graph"

    @property
    def chart(self):
        return CurveChart(self.xi, self.eta)

    def point(self, z):
        z = np.asarray(z, dtype=float)
        return z + self.xi(z), self.eta(z)

    def graph(self, n=None) -> TrigPoly:
        """y = g(x) by inverting x = z + xi(z) on a uniform x grid."""
        n = n or max(64, 4 * self.modes)
        xs = np.arange(n) / n
        z, _ = self.chart.inverse(xs, np.zeros_like(xs))
        return TrigPoly.from_samples(self.eta(z)).truncate_degree((n - 1) // 2)

    def offset(self, dy) -> "KamCurve":
        return KamCurve(self.xi, self.eta + dy, self.theta, math.inf, self.twist_min,
                        self.strip_radius, self.modes, (), self.form)

    def to_dict(self):
        return {"form": self.form, "xi": trig_to_dict(self.xi), "eta": trig_to_dict(self.eta),
                "theta": _num(self.theta), "residual": _num(self.residual),
                "twist_min": _num(self.twist_min), "strip_radius": _num(self.strip_radius),
                "modes": self.modes, "history": [_num(h) for h in self.history]}


def graph_curve(g, theta, modes=64) -> KamCurve:
    gp, _ = _curve(g)
    return KamCurve(TrigPoly.constant(0.0), gp, float(theta), math.inf, math.nan, math.inf, modes)


def curve_residual(fmap, curve: KamCurve, n=None):
    """sup_z |f(K(z)) - K(z + theta)| on n points (x compared in the lift)."""
    n = n or 4 * curve.modes
    z = np.arange(n) / n
    x, y = curve.point(z)
    X, Y = fmap.lift(x, y)
    x1, y1 = curve.point(z + curve.theta)
    return float(np.max(np.hypot(X - x1, Y - y1)))


def _strip_radius(*vs):
    """Analyticity width from the exponential decay rate of the spectrum."""
    rates = []
    for v in vs:
        F = np.abs(np.fft.rfft(v))[1:] / v.size
        k = np.arange(1, F.size + 1)
        sig = F > 1e-14
        if np.count_nonzero(sig) < 3:
            continue
        slope = np.polyfit(k[sig], np.log(F[sig]), 1)[0]
        rates.append(-slope / TWO_PI)
    return float(min(rates)) if rates else math.inf


def solve_invariance(fmap: SymplecticMap, cert_or_theta, guess, modes=64, max_iter=40, tol=1e-10,
                     max_modes=1024, tail_tol=1e-12, check_twist=True) -> KamCurve:
    """Newton iteration for f(K(z)) = K(z + theta).

    ``guess`` is a KamCurve, a TrigPoly graph or a constant height.
    ``modes`` is the initial grid size; it doubles while the top decile of
    the spectrum holds more than ``tail_tol`` of the energy.
    """
    theta = cert_or_theta.theta if isinstance(cert_or_theta, DiophantineCert) else float(cert_or_theta)
    if not isinstance(guess, KamCurve):
        guess = graph_curve(guess, theta, modes)
    n = int(modes)
    z = np.arange(n) / n
    xi, eta = guess.xi(z), guess.eta(z)
    history = []
    level_start = 0  # divergence is judged within one grid resolution
    S = None
    it = 0
    while True:
        x = z + xi
        xp, ep = _deriv_grid(xi, n), _deriv_grid(eta, n)
        xis, etas = _shift_grid(xi, theta, n), _shift_grid(eta, theta, n)
        X, Y, J = fmap.lift_jac(x, eta)
        Ex, Ey = X - (z + theta + xis), Y - etas
        res = float(np.max(np.hypot(Ex, Ey)))
        if not np.isfinite(res):
            raise NewtonDiverged("invariance residual is not finite", history=history)
        history.append(res)
        tail = max(_tail_fraction(xi), _tail_fraction(eta))
        if res <= tol and tail <= tail_tol:
            break
        if tail > tail_tol and n < max_modes:
            level_start = len(history)
            n *= 2
            z = np.arange(n) / n
            xi, eta = _resample(xi, n), _resample(eta, n)
            continue
        if it >= max_iter:
            raise NewtonDiverged("invariance Newton did not reach tolerance", history=history)
        level = history[level_start:]
        if len(level) > 3 and res > 1e3 * min(level) or res > 1.0:
            raise NewtonDiverged("invariance Newton diverged", history=history)
        it += 1
        # frames
        L = (1.0 + xp) ** 2 + ep**2
        P = (1.0 + xp, -ep / L, ep, (1.0 + xp) / L)
        xps, eps_ = _shift_grid(xp, theta, n), _shift_grid(ep, theta, n)
        Ls = (1.0 + xps) ** 2 + eps_**2
        Ps = (1.0 + xps, -eps_ / Ls, eps_, (1.0 + xps) / Ls)
        Psi = (Ps[3], -Ps[1], -Ps[2], Ps[0])
        e1 = -(Psi[0] * Ex + Psi[1] * Ey)
        e2 = -(Psi[2] * Ex + Psi[3] * Ey)
        # M = Ps^{-1} Df P, only the (1,2) entry is used
        DfP12 = J[0] * P[1] + J[1] * P[3]
        DfP22 = J[2] * P[1] + J[3] * P[3]
        S = Psi[0] * DfP12 + Psi[1] * DfP22
        Sbar = float(np.mean(S))
        if abs(Sbar) < 1e-14:
            raise TwistLost("averaged twist vanishes; Newton step undefined", history=history)
        w2 = _cohom_grid(e2, theta, n)
        c2 = (np.mean(e1) - np.mean(S * w2)) / Sbar
        w2 = w2 + c2
        w1 = _cohom_grid(e1 - S * w2, theta, n)
        xi = _lowpass(xi + P[0] * w1 + P[1] * w2 - w1 * 0.0, n)
        eta = _lowpass(eta + P[2] * w1 + P[3] * w2, n)
    # twist along the converged curve
    xp, ep = _deriv_grid(xi, n), _deriv_grid(eta, n)
    if np.min(1.0 + xp) <= 0.0:
        raise GraphFolded("x-projection of the curve is not a diffeomorphism")
    X, Y, J = fmap.lift_jac(z + xi, eta)
    L = (1.0 + xp) ** 2 + ep**2
    P = (1.0 + xp, -ep / L, ep, (1.0 + xp) / L)
    xps, eps_ = _shift_grid(xp, theta, n), _shift_grid(ep, theta, n)
    Ls = (1.0 + xps) ** 2 + eps_**2
    Ps = (1.0 + xps, -eps_ / Ls, eps_, (1.0 + xps) / Ls)
    S = Ps[3] * (J[0] * P[1] + J[1] * P[3]) - Ps[1] * (J[2] * P[1] + J[3] * P[3])
    tmin = float(np.min(S))
    if check_twist and tmin <= 0.0:
        raise TwistLost("twist not positive along the curve", twist_min=tmin, history=history)
    xi_p = TrigPoly.from_samples(xi).truncate_degree((n - 1) // 2)
    eta_p = TrigPoly.from_samples(eta).truncate_degree((n - 1) // 2)
    curve = KamCurve(xi_p, eta_p, theta, history[-1], tmin, _strip_radius(xi, eta), n, tuple(history))
    # report the residual of the stored polynomials, not of the grid values
    return replace(curve, residual=max(history[-1], curve_residual(fmap, curve)))


# ---------------------------------------------------------------------------
# adapted coordinates


@dataclass(frozen=True)
class AdaptedChart:
    beta: TrigPoly
    alpha_star: float
    alpha: TrigPoly
    chart: CurveChart
    theta: float
    derivative_error: float

    def psi2(self, z1, z2):
        return z1 + self.beta(z1) * z2, z2


def adapted_coordinates(fmap: SymplecticMap, curve: KamCurve, n=None, divisor_floor=1e-8) -> AdaptedChart:
    """Straighten the curve with its area-preserving chart, then remove the
    z-dependence of the on-circle twist with psi2(z1, z2) = (z1 + beta(z1) z2, z2).
    """
    if not (curve.residual <= 1e-8):
        raise ValidationError("curve residual must be <= 1e-8", residual=curve.residual)
    n = n or max(64, 4 * curve.modes)
    chart = curve.chart
    fz = Pullback(chart, fmap)
    z = np.arange(n) / n
    _, _, J = fz.lift_jac(z, np.zeros_like(z))
    a_samp = J[1]
    if np.min(a_samp) <= 0.0:
        raise TwistLost("twist not positive on the circle", twist_min=float(np.min(a_samp)))
    alpha = TrigPoly.from_samples(a_samp).truncate_degree((n - 1) // 2)
    beta, astar = solve_cohomological(alpha, curve.theta, divisor_floor)
    # [[1, -beta(z+theta)], [0, 1]] J [[1, beta(z)], [0, 1]]
    b0, b1 = beta(z), beta(z + curve.theta)
    m11 = J[0] - b1 * J[2]
    m12 = J[0] * b0 + J[1] - b1 * (J[2] * b0 + J[3])
    m21 = J[2]
    m22 = J[2] * b0 + J[3]
    err = float(max(np.max(np.abs(m11 - 1)), np.max(np.abs(m12 - astar)), np.max(np.abs(m21)),
                    np.max(np.abs(m22 - 1))))
    if err > 1e-8:
        log.warning("event=adapted_frame_mismatch err=%.3e", err)
    return AdaptedChart(beta, astar, alpha, chart, curve.theta, err)


# ---------------------------------------------------------------------------
# hypothesis checks

_COMPLEX_NODES = (Translation, IntegrableTwist, VerticalShear)


def complex_capable(fmap) -> bool:
    for node in fmap.iter_nodes():
        if isinstance(node, Composition) or isinstance(node, _COMPLEX_NODES):
            continue
        if isinstance(node, HorizontalShear) and isinstance(node.u, TrigPoly):
            continue
        return False
    return True


@dataclass(frozen=True)
class SmallnessReport:
    sup: float
    threshold: float
    passed: bool
    complex_grid: bool


def kam_smallness(fmap, theta, alpha_star, r, delta, grid=64) -> SmallnessReport:
    """sup over V(r, delta) of |F(z1, z2) - (z1 + theta + alpha* z2, z2)|."""
    xs = np.arange(grid) / grid
    zs = np.linspace(-delta, delta, 9)
    cx = complex_capable(fmap) and r > 0
    if cx:
        ims = np.linspace(-r, r, 5)
        Z1 = (xs[:, None, None] + 1j * ims[None, :, None]) + 0.0 * zs[None, None, :]
        Z2 = 0.0 * Z1 + zs[None, None, :]
        Z1, Z2 = Z1.ravel(), Z2.ravel().astype(complex)
    else:
        if r > 0:
            log.info("event=smallness_real_fallback reason=non_trig_nodes")
        Z1, Z2 = np.meshgrid(xs, zs)
        Z1, Z2 = Z1.ravel(), Z2.ravel()
    X, Y = fmap.lift(Z1, Z2)
    dev = np.maximum(np.abs(X - (Z1 + theta + alpha_star * Z2)), np.abs(Y - Z2))
    s = float(np.max(dev))
    thr = delta ** 1.5
    return SmallnessReport(s, thr, s < thr, bool(cx))


def intersection_check(fmap, g, samples=512) -> bool:
    """True if f(C_g) meets C_g at sample resolution."""
    gp, _ = _curve(g)
    xs = np.arange(samples) / samples
    X, Y = fmap.lift(xs, gp(xs))
    dX = np.diff(np.concatenate([X, [X[0] + 1.0]]))
    if np.any(dX <= 0.0):
        raise GraphFolded("image of the curve is not a graph over x at sample resolution")
    d = Y - gp(X)
    if np.any(np.abs(d) <= 1e-14):
        return True
    return bool(np.any(np.sign(d) != np.sign(d[0])))


# ---------------------------------------------------------------------------
# Birkhoff twist coefficient


def _conj_jet(j: Jet) -> Jet:
    """Coefficients of conj(P(w, wbar)) as a polynomial in (w, wbar)."""
    return Jet(np.conj(j.c).T)


def twist_coefficient(fmap, point, period=1, resonance_tol=1e-6):
    """(alpha0, alpha1) of the normal form z -> z exp(i (alpha0 + alpha1 |z|^2)).

    The order-3 jet of f^period at the fixed point is taken in symplectic
    coordinates where the linear part is a rotation, then the quadratic
    terms are removed by a near-identity change and alpha1 = Im(c1 conj(mu)).
    """
    p0, q0 = float(point[0]), float(point[1])

    def jet_map(a, b):
        X, Y = a, b
        for _ in range(period):
            X, Y = fmap.lift(X, Y)
        return X, Y

    u, v = Jet.variable(0), Jet.variable(1)
    X, Y = jet_map(u + p0, v + q0)
    A = np.array([[X.coeff(1, 0).real, X.coeff(0, 1).real], [Y.coeff(1, 0).real, Y.coeff(0, 1).real]])
    fx, fy = X.value.real - p0, Y.value.real - q0
    if math.hypot(fx - round(fx), fy) > 1e-8:
        raise ValidationError("point is not fixed", residual=math.hypot(fx - round(fx), fy))
    tr = float(np.trace(A))
    if abs(tr) >= 2.0:
        raise NotElliptic(f"|trace| = {abs(tr):.6g} >= 2", trace=tr)
    omega = math.acos(tr / 2.0)
    mu = complex(math.cos(omega), math.sin(omega))
    for k in range(1, 5):
        if abs(mu**k - 1.0) < resonance_tol:
            raise ResonantEigenvalue(f"eigenvalue is a root of unity of order {k}", order=k)
    vals, vecs = np.linalg.eig(A)
    e = vecs[:, int(np.argmin(np.abs(vals - mu)))]
    T = np.column_stack([e.real, -e.imag])
    d = np.linalg.det(T)
    if d < 0:
        omega, mu = -omega, mu.conjugate()
        e = e.conj()
        T = np.column_stack([e.real, -e.imag])
        d = -d
    T = T / math.sqrt(d)
    Ti = np.linalg.inv(T)
    # jet of the map in rotated coordinates zeta = T^{-1}(x - p)
    X, Y = jet_map(p0 + T[0, 0] * u + T[0, 1] * v, q0 + T[1, 0] * u + T[1, 1] * v)
    X, Y = X - X.value, Y - Y.value
    z1 = X * Ti[0, 0] + Y * Ti[0, 1]
    z2 = X * Ti[1, 0] + Y * Ti[1, 1]
    P = z1 + z2 * 1j  # z' as a polynomial in (u, v)
    # substitute u = (w + wb)/2, v = (w - wb)/(2i)
    W, Wb = Jet.variable(0), Jet.variable(1)
    U = (W + Wb) * 0.5
    V = (W - Wb) * (-0.5j)
    Zp = Jet.const(0.0)
    for a in range(4):
        for b in range(4 - a):
            c = P.coeff(a, b)
            if c != 0:
                Zp = Zp + (U**a) * (V**b) * c
    # quadratic normalization z = w + H(w, wb)
    H = Jet.const(0.0)
    for j in range(3):
        k = 2 - j
        a_jk = Zp.coeff(j, k)
        den = mu**j * mu.conjugate() ** k - mu
        H.c[j, k] = a_jk / den
    Hc = _conj_jet(H)

    def H_of(w, wb):
        out = Jet.const(0.0)
        for j in range(3):
            out = out + (w**j) * (wb ** (2 - j)) * H.c[j, 2 - j]
        return out

    def Hc_of(w, wb):
        out = Jet.const(0.0)
        for j in range(3):
            out = out + (w**j) * (wb ** (2 - j)) * Hc.c[j, 2 - j]
        return out

    zz = W + H_of(W, Wb)
    zb = Wb + Hc_of(W, Wb)
    Zc = _conj_jet(Zp)

    def compose(poly, a, b):
        out = Jet.const(0.0)
        for i in range(4):
            for j in range(4 - i):
                c = poly.coeff(i, j)
                if c != 0:
                    out = out + (a**i) * (b**j) * c
        return out

    zp = compose(Zp, zz, zb)
    zbp = compose(Zc, zz, zb)
    # invert z = w + H(w): w' = z' - H(w', wb') by fixed point (order 3 after 2 passes)
    wp, wbp = zp, zbp
    for _ in range(3):
        wp, wbp = zp - H_of(wp, wbp), zbp - Hc_of(wp, wbp)
    c1 = complex(wp.coeff(2, 1))
    alpha1 = (c1 * mu.conjugate()).imag
    return float(omega), float(alpha1)
