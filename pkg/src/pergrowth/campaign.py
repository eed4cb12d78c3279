"""Multi-stage growth campaigns on the cylinder.

Each stage takes the current map f and its invariant circle of Diophantine
rotation theta and

1. shifts the rotation of that circle to p/N with a horizontal plateau shear
   written in the chart of the circle (the circle is z2 = 0 there and the
   shear is constant on a thin band around it),
2. forges 2*gamma period-N orbits on the now resonant circle,
3. counts them with an independent census,
4. re-solves the theta circle of the new map, which moved off by about
   -(p/N - theta)/alpha* in the chart.

Maps are kept as growing composition trees; nothing is refit.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

import numpy as np

from .census import find_periodic, polish
from .errors import (BudgetExceeded, CampaignHalted, CensusShortfall, ConfigError, NewtonDiverged,
                     PergrowthError, TwistLost)
from .forge import build_grid, forge, forge_with_budget
from .kam import GOLDEN, KamCurve, das_weights, continued_fraction, diophantine_certificate, solve_invariance
from .phase import (Composition, Conjugated, HorizontalShear, PlateauProfile, Pullback, SymplecticMap,
                    _num, map_from_dict, standard_example, sup_distance)

log = logging.getLogger(__name__)

PERSIST_TOL = 1e-8


def _event(name, **kv):
    parts = [f"event={name}"] + [f"{k}={_fmt(v)}" for k, v in kv.items()]
    log.info(" ".join(parts))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _dec(v, name):
    """Numbers in configs may be decimal strings; parse them exactly, then round once."""
    if isinstance(v, bool):
        raise ConfigError(f"{name} must be a number", field=name)
    try:
        return float(Decimal(str(v)))
    except (InvalidOperation, ValueError):
        raise ConfigError(f"{name} is not a number", field=name, value=str(v)) from None


def parse_theta(v):
    if isinstance(v, str) and v.strip().lower() == "golden":
        return GOLDEN
    return _dec(v, "theta")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class StageSpec:
    p: int
    N: int
    gamma: int
    eps: float


@dataclass(frozen=True)
class CampaignConfig:
    """Validated campaign settings.

    ``base`` is a map dictionary (see :func:`pergrowth.phase.map_from_dict`)
    or the string ``"standard"``.  Budgets default to eps0 * ratio^k.
    """

    base: object
    theta: float
    stages: tuple
    eps0: float
    tau: float = 0.0
    qmax: int = 10_000
    curve_guess: float | None = None
    search: tuple = (-0.24, 0.24)
    forge_cap: float = 1e-5
    cap_decay: float = 0.1
    kam_modes: int = 64
    kam_max_modes: int = 8192
    kam_tol: float = 1e-10
    resonance_tol: float = 1e-6
    census_band: float = 1e-4
    seed_density: int = 16
    sup_density: int = 64
    seed: int = 0

    def base_map(self) -> SymplecticMap:
        if isinstance(self.base, str):
            if self.base != "standard":
                raise ConfigError("unknown base map", base=self.base)
            return standard_example()
        return map_from_dict(self.base)

    def to_dict(self):
        return {
            "base": self.base, "theta": _num(self.theta), "eps0": _num(self.eps0),
            "stages": [{"p": s.p, "N": s.N, "gamma": s.gamma, "eps": _num(s.eps)} for s in self.stages],
            "tau": _num(self.tau), "qmax": self.qmax,
            "curve_guess": None if self.curve_guess is None else _num(self.curve_guess),
            "search": [_num(v) for v in self.search], "forge_cap": _num(self.forge_cap),
            "cap_decay": _num(self.cap_decay), "kam_modes": self.kam_modes,
            "kam_max_modes": self.kam_max_modes, "kam_tol": _num(self.kam_tol),
            "resonance_tol": _num(self.resonance_tol), "census_band": _num(self.census_band),
            "seed_density": self.seed_density, "sup_density": self.sup_density, "seed": self.seed,
        }


def auto_stages(theta, count, min_N=2, step=2):
    """Continued-fraction convergents p/q of theta with q >= min_N, every ``step``-th one."""
    _, conv = continued_fraction(theta, max_terms=80)
    conv = [(p, q) for p, q in conv if q >= min_N]
    picked = conv[::step][:count]
    if len(picked) < count:
        raise ConfigError("not enough convergents for the requested stage count", count=count)
    return picked


def _gamma_for(rule, N):
    if rule == "N":
        return N
    return int(rule)


def load_config(doc: dict) -> CampaignConfig:
    """Build and validate a :class:`CampaignConfig` from a JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {"base", "theta", "stages", "auto", "gamma", "eps0", "eps", "eps_ratio", "tau", "qmax",
             "curve_guess", "search", "forge_cap", "cap_decay", "kam_modes", "kam_max_modes", "kam_tol",
             "resonance_tol", "census_band", "seed_density", "sup_density", "seed"}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError("unknown config keys", keys=extra)
    theta = parse_theta(doc.get("theta", "golden"))
    eps0 = _dec(doc.get("eps0", "0.05"), "eps0")
    ratio = _dec(doc.get("eps_ratio", "0.3"), "eps_ratio")
    gamma_rule = doc.get("gamma", "N")
    if "stages" in doc:
        raw = []
        for k, s in enumerate(doc["stages"]):
            try:
                raw.append((int(s["p"]), int(s["N"]), _gamma_for(s.get("gamma", gamma_rule), int(s["N"]))))
            except (KeyError, TypeError, ValueError):
                raise ConfigError("stage needs integer p, N and gamma", stage=k) from None
    elif "auto" in doc:
        a = doc["auto"]
        pairs = auto_stages(theta, int(a.get("count", 3)), int(a.get("min_N", 2)), int(a.get("step", 2)))
        raw = [(p, q, _gamma_for(gamma_rule, q)) for p, q in pairs]
    else:
        raise ConfigError("config needs 'stages' or 'auto'")
    if not raw:
        raise ConfigError("at least one stage is required")
    if "eps" in doc:
        eps = [_dec(v, "eps") for v in doc["eps"]]
        if len(eps) != len(raw):
            raise ConfigError("eps list length must match the stage count", stages=len(raw), eps=len(eps))
    else:
        eps = [eps0 * ratio**k for k in range(len(raw))]
    cfg = CampaignConfig(
        base=doc.get("base", "standard"), theta=theta,
        stages=tuple(StageSpec(p, N, g, e) for (p, N, g), e in zip(raw, eps)), eps0=eps0,
        tau=_dec(doc.get("tau", 0), "tau"), qmax=int(doc.get("qmax", 10_000)),
        curve_guess=None if doc.get("curve_guess") is None else _dec(doc["curve_guess"], "curve_guess"),
        search=tuple(_dec(v, "search") for v in doc.get("search", ("-0.24", "0.24"))),
        forge_cap=_dec(doc.get("forge_cap", "1e-5"), "forge_cap"),
        cap_decay=_dec(doc.get("cap_decay", "0.1"), "cap_decay"),
        kam_modes=int(doc.get("kam_modes", 64)), kam_max_modes=int(doc.get("kam_max_modes", 8192)),
        kam_tol=_dec(doc.get("kam_tol", "1e-10"), "kam_tol"),
        resonance_tol=_dec(doc.get("resonance_tol", "1e-6"), "resonance_tol"),
        census_band=_dec(doc.get("census_band", "1e-4"), "census_band"),
        seed_density=int(doc.get("seed_density", 16)), sup_density=int(doc.get("sup_density", 64)),
        seed=int(doc.get("seed", 0)),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: CampaignConfig):
    if not (0.0 < cfg.theta < 1.0):
        raise ConfigError("theta must lie in (0, 1)", theta=cfg.theta)
    if cfg.eps0 <= 0:
        raise ConfigError("eps0 must be positive", eps0=cfg.eps0)
    prev_N, prev_eps = 0, None
    for k, s in enumerate(cfg.stages):
        if s.gamma < 1:
            raise ConfigError("gamma must be >= 1", stage=k, gamma=s.gamma)
        if s.N <= prev_N:
            raise ConfigError("stage denominators must increase strictly", stage=k, N=s.N, previous=prev_N)
        if math.gcd(s.p, s.N) != 1:
            raise ConfigError("p/N must be in lowest terms", stage=k, p=s.p, N=s.N)
        bound = cfg.eps0 if prev_eps is None else prev_eps / 3.0
        if prev_eps is None:
            if not (0 < s.eps <= cfg.eps0):
                raise ConfigError("first budget must lie in (0, eps0]", stage=k, eps=s.eps)
        elif not (0 < s.eps < bound):
            raise ConfigError("budgets must satisfy eps_k < eps_{k-1}/3", stage=k, eps=s.eps, bound=bound)
        prev_N, prev_eps = s.N, s.eps
    for name in ("forge_cap", "kam_tol", "resonance_tol", "census_band"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be positive", field=name)
    if not (0 < cfg.cap_decay <= 1):
        raise ConfigError("cap_decay must lie in (0, 1]")
    if cfg.seed < 0 or cfg.seed >= 1 << 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", seed=cfg.seed)


# ---------------------------------------------------------------------------
# state and reports


@dataclass
class StoredOrbits:
    stage: int
    N: int
    p: int
    points: np.ndarray  # (k, 2) in map coordinates
    types: list

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "type", "x", "y", "winding"])
        for (x, y), t in zip(self.points, self.types):
            w.writerow([self.N, t, _num(x), _num(y), self.p])
        return buf.getvalue()


@dataclass
class CampaignState:
    map: SymplecticMap
    curve: KamCurve
    theta: float
    orbits: list = field(default_factory=list)  # StoredOrbits per finished stage


@dataclass(frozen=True)
class StageReport:
    stage: int
    p: int
    N: int
    gamma: int
    eps: float
    shift: float
    alpha_star: float
    band: tuple
    t: float
    hyperbolic: int
    elliptic: int
    ambiguous: int
    degenerate: int
    sup_distance: float
    forge_residual: float

    @property
    def target(self):
        return self.N * self.gamma

    @property
    def ratio(self):
        return min(self.hyperbolic, self.elliptic) / self.gamma


def _rotation_scan(fmap, ys, n_iter=2000, tol=1e-6):
    """Rotation numbers of the orbits of (0, y) for an array of heights; NaN where unsettled."""
    x = np.zeros(len(ys))
    y = np.asarray(ys, dtype=float).copy()
    inc = np.empty((n_iter, x.size))
    for k in range(n_iter):
        X, y = fmap.lift(x, y)
        inc[k] = X - x
        x = X - np.floor(X)
    full = das_weights(n_iter) @ inc
    half = das_weights(n_iter // 2) @ inc[:n_iter // 2]
    flat = np.ptp(inc, axis=0) == 0.0
    rho = np.where(flat, inc[0], full)
    return np.where(flat | (np.abs(full - half) <= tol), rho, np.nan)


def locate_circle(fmap, theta, search=(-0.24, 0.24), iters=14, n_iter=2000):
    """Height y with rotation number theta at (0, y); twist makes rho monotone in y."""
    lo, hi = search
    ys = np.linspace(lo, hi, 33)
    rs = _rotation_scan(fmap, ys, n_iter)
    ok = np.isfinite(rs[:-1]) & np.isfinite(rs[1:]) & (rs[:-1] <= theta) & (theta < rs[1:])
    if not np.any(ok):
        raise ConfigError("theta is not bracketed by the search interval",
                          rho_min=float(np.nanmin(rs)) if np.any(np.isfinite(rs)) else None,
                          rho_max=float(np.nanmax(rs)) if np.any(np.isfinite(rs)) else None)
    i = int(np.argmax(ok))
    lo, hi = ys[i], ys[i + 1]
    # each round scans 17 heights inside the bracket, shrinking it 16-fold
    for _ in range(iters):
        if hi - lo <= 1e-15:
            break
        ys = np.linspace(lo, hi, 17)
        rs = _rotation_scan(fmap, ys, n_iter)
        ok = np.isfinite(rs[:-1]) & np.isfinite(rs[1:]) & (rs[:-1] <= theta) & (theta < rs[1:])
        if not np.any(ok):
            break
        i = int(np.argmax(ok))
        lo, hi = ys[i], ys[i + 1]
    return 0.5 * (lo + hi)


def initial_state(cfg: CampaignConfig) -> CampaignState:
    f = cfg.base_map()
    diophantine_certificate(cfg.theta, cfg.tau, cfg.qmax)
    guess = cfg.curve_guess
    if guess is None:
        guess = locate_circle(f, cfg.theta, cfg.search)
    curve = solve_invariance(f, cfg.theta, guess, modes=cfg.kam_modes, tol=cfg.kam_tol,
                             max_modes=cfg.kam_max_modes)
    _event("initial_curve", residual=curve.residual, modes=curve.modes, twist_min=curve.twist_min)
    return CampaignState(f, curve, cfg.theta)


def _alpha_star(fmap, curve, n=256):
    z = np.arange(n) / n
    _, _, J = Pullback(curve.chart, fmap).lift_jac(z, np.zeros_like(z))
    if np.min(J[1]) <= 0:
        raise TwistLost("twist not positive on the circle", twist_min=float(np.min(J[1])))
    return float(np.mean(J[1]))


def _shift_band(off, previous):
    """Plateau half-width and ramp width for the rotation shift.

    The band must contain the displaced circle (|z2| = off) and stay clear
    of earlier orbits (|z2| >= previous).
    """
    half, width = 2.0 * off, 2.0 * off
    if previous is not None and half + width >= 0.8 * previous:
        half = 1.25 * off
        width = 0.8 * previous - half
        if width <= 0.25 * off:
            raise BudgetExceeded("rotation shift band would overlap earlier orbits",
                                 offset=off, clearance=previous)
    return half, width


def run_stage(state: CampaignState, spec: StageSpec, cfg: CampaignConfig, index=0, t=None, strict=True):
    """One stage: rotation shift, forge, census.  Returns (new map, StageReport, StoredOrbits).

    ``t`` forces the forge amplitude instead of selecting it from the budget.
    With ``strict=False`` a budget overrun or a census shortfall is logged
    instead of raised, so deliberately odd stages can still be inspected.
    """
    curve = state.curve
    if not (curve.residual <= 1e-8):
        raise PergrowthError("current circle residual exceeds 1e-8", residual=curve.residual)
    shift = spec.p / spec.N - state.theta
    if abs(shift) > spec.eps / 2.0:
        raise BudgetExceeded("rotation shift exceeds half the stage budget", stage=index,
                             shift=abs(shift), eps=spec.eps)
    chart = curve.chart
    astar = _alpha_star(state.map, curve)
    off = abs(shift) / astar
    previous = None
    if state.orbits:
        pts = np.concatenate([o.points for o in state.orbits])
        _, z2 = chart.inverse(pts[:, 0], pts[:, 1])
        previous = float(np.min(np.abs(z2)))
    half, width = _shift_band(off, previous)
    S = Conjugated(chart, HorizontalShear(PlateauProfile(shift, half, width)))
    F1 = Composition((state.map, S))
    grid = build_grid(spec.p, spec.N, spec.gamma)
    cap = cfg.forge_cap * cfg.cap_decay**index
    if t is None:
        res, sel = forge_with_budget(F1, grid, spec.eps / 2.0, chart, cap=cap, tol=cfg.resonance_tol)
    else:
        res = forge(F1, grid, t, chart, tol=cfg.resonance_tol)
    fmap = res.map
    _event("forged", stage=index, p=spec.p, N=spec.N, gamma=spec.gamma, t=res.t, shift=shift)
    band = min(cfg.census_band, 0.5 * half)
    hints = np.stack([grid.points.ravel(), np.zeros(grid.M)], 1)
    cen = find_periodic(Pullback(chart, fmap), spec.N, region=(-band, band), seed_density=cfg.seed_density,
                        y_levels=1, hints=hints, windings=[spec.p])
    nh, ne = cen.hyperbolic, cen.elliptic
    lo_y = float(np.min(curve.eta.samples(256))) - 0.1
    hi_y = float(np.max(curve.eta.samples(256))) + 0.1
    dist = sup_distance(state.map, fmap, (lo_y, hi_y), density=cfg.sup_density)
    rep = StageReport(index, spec.p, spec.N, spec.gamma, spec.eps, shift, astar, (half, width), res.t,
                      nh, ne, cen.ambiguous, cen.degenerate_points, dist,
                      max(o.residual for o in res.orbits))
    _event("census", stage=index, hyperbolic=nh, elliptic=ne, target=rep.target, sup_distance=dist)
    if dist > spec.eps and not strict:
        _event("budget_exceeded", stage=index, sup_distance=dist, eps=spec.eps)
    elif dist > spec.eps:
        raise BudgetExceeded("stage moved the map farther than its budget", stage=index,
                             sup_distance=dist, eps=spec.eps)
    if min(nh, ne) < rep.target and not strict:
        _event("census_shortfall", stage=index, hyperbolic=nh, elliptic=ne, target=rep.target)
    elif min(nh, ne) < rep.target:
        raise CensusShortfall("census found fewer orbits than N * gamma", stage=index,
                              hyperbolic=nh, elliptic=ne, target=rep.target)
    recs = [r for r in cen.records if r.nondegenerate]
    zx = np.array([r.x for r in recs])
    zy = np.array([r.y for r in recs])
    px, py = chart.forward(zx, zy)
    stored = StoredOrbits(index, spec.N, spec.p, np.stack([px, py], 1), [r.type.value for r in recs])
    return fmap, rep, stored


def resolve_next_curve(fmap, theta, curve: KamCurve, shift, alpha_star, cfg: CampaignConfig, stage=0):
    """Re-find the theta circle after a stage; divergence halts the campaign."""
    guess = curve.offset(-shift / alpha_star)
    try:
        new = solve_invariance(fmap, theta, guess, modes=curve.modes, tol=cfg.kam_tol,
                               max_modes=cfg.kam_max_modes)
    except NewtonDiverged as e:
        raise CampaignHalted(f"circle lost after stage {stage}", stage=stage, history=e.history) from e
    except PergrowthError as e:
        raise CampaignHalted(f"circle lost after stage {stage}: {e}", stage=stage,
                             history=e.details.get("history", ())) from e
    _event("curve", stage=stage, residual=new.residual, modes=new.modes, twist_min=new.twist_min)
    return new


def check_persistence(fmap, stored: StoredOrbits):
    """Newton-polish stored orbit points on the current map."""
    pts, res, tr = polish(fmap, stored.points, stored.N, np.full(len(stored.points), float(stored.p)))
    ok = res <= PERSIST_TOL
    still = np.where(np.abs(tr) > 2.0, "hyperbolic", "elliptic")
    same = ok & (still == np.array(stored.types))
    return {"total": int(len(res)), "persisted": int(np.sum(same)),
            "max_residual": float(np.max(res)) if res.size else 0.0}


# ---------------------------------------------------------------------------
# ledger


@dataclass
class GrowthLedger:
    config: dict
    stages: list = field(default_factory=list)
    status: str = "running"
    error: dict | None = None
    curve_histories: list = field(default_factory=list)
    orbit_tables: list = field(default_factory=list)
    state: CampaignState | None = field(default=None, repr=False)

    @property
    def total_sup_distance(self):
        return float(sum(float(s["sup_distance"]) for s in self.stages))

    def to_dict(self):
        eps0 = float(self.config["eps0"])
        return {
            "status": self.status,
            "error": self.error,
            "config": self.config,
            "stages": self.stages,
            "total_sup_distance": _num(self.total_sup_distance),
            "budget_bound": _num(1.5 * eps0),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def ratios(self):
        """min(counts)/gamma recomputed from the stored counts."""
        return [min(s["hyperbolic"], s["elliptic"]) / s["gamma"] for s in self.stages]


def _stage_entry(rep: StageReport, curve: KamCurve | None, persistence):
    return {
        "stage": rep.stage, "p": rep.p, "N": rep.N, "gamma": rep.gamma,
        "hyperbolic": rep.hyperbolic, "elliptic": rep.elliptic, "ambiguous": rep.ambiguous,
        "degenerate": rep.degenerate, "target": rep.target, "ratio": _num(rep.ratio),
        "eps": _num(rep.eps), "t": _num(rep.t), "shift": _num(rep.shift),
        "alpha_star": _num(rep.alpha_star), "band": [_num(v) for v in rep.band],
        "sup_distance": _num(rep.sup_distance), "forge_residual": _num(rep.forge_residual),
        "kam_residual": None if curve is None else _num(curve.residual),
        "kam_modes": None if curve is None else curve.modes,
        "persistence": persistence,
    }


def run_cascade(cfg: CampaignConfig, state: CampaignState | None = None) -> GrowthLedger:
    """Run every stage in order; stop at the first failure with a partial ledger."""
    ledger = GrowthLedger(cfg.to_dict())
    t0 = time.perf_counter()
    try:
        state = state or initial_state(cfg)
    except PergrowthError as e:
        ledger.status = "halted"
        ledger.error = {"stage": None, "type": type(e).__name__, "message": str(e)}
        _event("halted", stage="init", error=type(e).__name__)
        return ledger
    for k, spec in enumerate(cfg.stages):
        try:
            fmap, rep, stored = run_stage(state, spec, cfg, k)
        except PergrowthError as e:
            ledger.status = "halted"
            ledger.error = {"stage": k, "type": type(e).__name__, "message": str(e),
                            "details": _jsonable(e.details)}
            _event("halted", stage=k, error=type(e).__name__)
            return ledger
        state = CampaignState(fmap, state.curve, state.theta, state.orbits + [stored])
        persistence = {}
        for old in state.orbits:
            info = check_persistence(fmap, old)
            persistence[str(old.stage)] = {"total": info["total"], "persisted": info["persisted"],
                                           "max_residual": _num(info["max_residual"])}
            if info["persisted"] < info["total"]:
                _event("persistence_lost", stage=k, origin=old.stage,
                       lost=info["total"] - info["persisted"])
        ledger.orbit_tables.append(stored.to_csv())
        curve = None
        err = None
        try:
            curve = resolve_next_curve(fmap, state.theta, state.curve, rep.shift, rep.alpha_star, cfg, k)
            ledger.curve_histories.append(list(curve.history))
            state = CampaignState(fmap, curve, state.theta, state.orbits)
        except CampaignHalted as e:
            err = e
            ledger.curve_histories.append(list(e.history))
        ledger.stages.append(_stage_entry(rep, curve, persistence))
        _event("stage_done", stage=k, seconds=time.perf_counter() - t0)
        if err is not None:
            last = k == len(cfg.stages) - 1
            ledger.status = "completed_without_final_curve" if last else "halted"
            ledger.error = {"stage": k, "type": "CampaignHalted", "message": str(err),
                            "details": _jsonable(err.details)}
            return ledger
    ledger.status = "completed"
    ledger.state = state
    return ledger


def _jsonable(d):
    return json.loads(json.dumps(d, default=lambda v: _num(v) if isinstance(v, (float, np.floating)) else str(v)))


def residual_history_csv(histories):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "iteration", "residual"])
    for k, h in enumerate(histories):
        for i, r in enumerate(h):
            w.writerow([k, i, _num(r)])
    return buf.getvalue()
