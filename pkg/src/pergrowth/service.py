"""Job layer shared by the HTTP app and the CLI.

Every job takes a validated request model and returns a :class:`JobResult`
with a JSON-friendly summary and named text files (CSV/JSON) to persist.
"""

from __future__ import annotations

import json
import logging
import math

import numpy as np
import pydantic

from .api.schemas import (CascadeRequest, CensusRequest, CertifyRequest, ErrorBody, ErrorReport,
                          ForgeRequest, IntervalRequest, JobResult, KamRequest)
from .campaign import load_config, locate_circle, residual_history_csv, run_cascade
from .census import find_periodic
from .errors import NumericFailure, PergrowthError, ValidationError
from .forge import build_grid, forge, forge_with_budget
from .interval import build_f0, interval_census, perturb_plateau, plateau_identity_check
from .kam import GOLDEN, diophantine_certificate, scan_certificate, solve_invariance
from .phase import (Composition, IntegrableTwist, SymplecticMap, Translation, VerticalShear, _num,
                    map_from_dict, standard_example)
from .trig import TrigPoly

log = logging.getLogger(__name__)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _result(kind, summary, files):
    return JobResult(kind=kind, summary=_clean(summary), files=files)


def resolve_map(spec) -> SymplecticMap:
    if isinstance(spec, str):
        if spec == "standard":
            return standard_example()
        raise ValidationError(f"unknown map name {spec!r}")
    return map_from_dict(spec)


def _theta(v):
    return GOLDEN if v == "golden" else float(v)


def _det_error(fmap, region, seed, n=1000):
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    y = region[0] + (region[1] - region[0]) * rng.random(n)
    _, _, J = fmap.lift_jac(x, y)
    return float(np.max(np.abs(J[0] * J[3] - J[1] * J[2] - 1.0)))


def forge_job(req: ForgeRequest) -> JobResult:
    if req.map == "integrable_twist":
        F = Composition((IntegrableTwist(req.slope), Translation(req.p / req.N)))
    else:
        F = resolve_map(req.map)
    grid = build_grid(req.p, req.N, req.gamma)
    if req.t is not None:
        res = forge(F, grid, req.t)
        sel = None
    else:
        res, sel = forge_with_budget(F, grid, req.eps)
    opts = req.census
    density = opts.seed_density or 4 * grid.M
    cen = find_periodic(res.map, req.N, region=opts.region, seed_density=density, y_levels=opts.y_levels,
                        windings=opts.windings, tol_h=opts.tol_h, tol_e=opts.tol_e)
    trace_err = max(float(np.max(np.abs(o.measured_trace - o.predicted_trace))) for o in res.orbits)
    summary = {
        "p": req.p, "N": req.N, "gamma": req.gamma, "M": grid.M, "t": res.t,
        "perturbation_sup": res.perturbation_sup,
        "max_trace_error": trace_err,
        "predicted": {"hyperbolic": req.N * req.gamma, "elliptic": req.N * req.gamma, "orbits": 2 * req.gamma},
        "census": {"hyperbolic": cen.hyperbolic, "elliptic": cen.elliptic, "ambiguous": cen.ambiguous,
                   "orbits": cen.orbits, "degenerate_families": cen.degenerate_families},
        "det_error": _det_error(res.map, opts.region, req.seed),
        "seed": req.seed,
    }
    if sel is not None:
        summary["t_selection"] = {"budget_bound": sel.budget_bound, "twist_bound": sel.twist_bound}
    files = {
        "forge_orbits.csv": res.to_csv(),
        "forge.json": res.to_json(),
        "census.csv": cen.to_csv(),
        "map.json": json.dumps(res.map.to_dict(), indent=2, sort_keys=True),
    }
    return _result(kind="forge", summary=summary, files=files)


def census_job(req: CensusRequest) -> JobResult:
    fmap = resolve_map(req.map)
    cen = find_periodic(fmap, req.n, region=req.region, seed_density=req.seed_density,
                        y_levels=req.y_levels, windings=req.windings, hints=req.hints,
                        tol_h=req.tol_h, tol_e=req.tol_e)
    summary = {"n": req.n, "hyperbolic": cen.hyperbolic, "elliptic": cen.elliptic,
               "ambiguous": cen.ambiguous, "orbits": cen.orbits,
               "degenerate_families": cen.degenerate_families, "degenerate_points": cen.degenerate_points,
               "seeds": cen.seeds, "dropped_seeds": cen.dropped_seeds, "seed": req.seed}
    return _result(kind="census", summary=summary,
                   files={"census.csv": cen.to_csv(), "census.json": cen.to_json()})


def kam_job(req: KamRequest) -> JobResult:
    fmap = resolve_map(req.map)
    if req.shear_amplitude:
        fmap = Composition((fmap, VerticalShear(TrigPoly.sin_mode(1, req.shear_amplitude))))
    theta = _theta(req.theta)
    cert = diophantine_certificate(theta)
    guess = req.guess if req.guess is not None else locate_circle(fmap, theta, req.search)
    curve = solve_invariance(fmap, cert, guess, modes=req.modes, max_modes=req.max_modes, tol=req.tol)
    summary = {"theta": theta, "residual": curve.residual, "twist_min": curve.twist_min,
               "modes": curve.modes, "strip_radius": curve.strip_radius,
               "iterations": len(curve.history), "guess": guess, "seed": req.seed}
    files = {"curve.json": json.dumps(curve.to_dict(), indent=2, sort_keys=True),
             "kam_history.csv": "iteration,residual\n" + "".join(
                 f"{i},{_num(r)}\n" for i, r in enumerate(curve.history))}
    return _result(kind="kam", summary=summary, files=files)


def interval_job(req: IntervalRequest) -> JobResult:
    f0 = build_f0(req.delta, req.kmax)
    identity = {str(k): plateau_identity_check(f0, k) for k in range(1, req.kmax + 1)}
    rows = ["n,x,derivative,type"]
    per_k = {}
    for job in req.plateaus:
        if job.k > req.kmax:
            raise ValidationError("plateau index exceeds kmax", k=job.k, kmax=req.kmax)
        pr = perturb_plateau(f0, job.k, job.gamma, job.eps)
        cen = interval_census(pr.map, job.k + 1, max_laps=req.max_laps)
        least = cen.least()
        hyp = [p for p in least if p.hyperbolic]
        per_k[str(job.k)] = {
            "n": job.k + 1, "gamma": job.gamma, "amplitude": pr.amplitude, "requested": pr.requested,
            "predicted_margin": pr.margin, "least_period_points": len(least), "hyperbolic": len(hyp),
            "min_margin": min((abs(abs(p.derivative) - 1.0) for p in hyp), default=math.nan),
            "continua": len(cen.continua), "laps": cen.laps,
        }
        rows.extend(cen.to_csv().splitlines()[1:])
    summary = {"delta": req.delta, "kmax": req.kmax, "plateau_identity": identity, "plateaus": per_k,
               "seed": req.seed}
    return _result(kind="interval", summary=summary,
                   files={"interval_orbits.csv": "\n".join(rows) + "\n",
                          "interval.json": json.dumps(_clean(summary), indent=2, sort_keys=True)})


def certify_job(req: CertifyRequest) -> JobResult:
    cert = diophantine_certificate(_theta(req.theta), req.tau, req.qmax)
    summary = {"theta": cert.theta, "tau": cert.tau, "qmax": cert.qmax, "c": cert.c, "c_tail": cert.c_tail,
               "argmin_q": cert.argmin_q, "inverse_sqrt5": 5 ** -0.5,
               "convergents": [[p, q] for p, q in cert.convergents[:12]]}
    if req.scan:
        summary["violations"] = len(scan_certificate(cert))
    summary["seed"] = req.seed
    return _result(kind="certify", summary=summary, files={"certificate.json": cert.to_json()})


def cascade_job(req: CascadeRequest | dict) -> JobResult:
    doc = req.model_dump() if isinstance(req, CascadeRequest) else dict(req)
    cfg = load_config(doc)
    ledger = run_cascade(cfg)
    files = {"ledger.json": ledger.to_json(), "kam_history.csv": residual_history_csv(ledger.curve_histories)}
    for k, table in enumerate(ledger.orbit_tables):
        files[f"stage_{k}_orbits.csv"] = table
    summary = {"status": ledger.status, "error": ledger.error,
               "stages": [{key: s[key] for key in ("N", "gamma", "hyperbolic", "elliptic", "target", "ratio")}
                          for s in ledger.stages],
               "total_sup_distance": ledger.total_sup_distance, "budget_bound": 1.5 * cfg.eps0}
    return _result(kind="cascade", summary=summary, files=files)


JOBS = {
    "forge": (ForgeRequest, forge_job),
    "census": (CensusRequest, census_job),
    "kam": (KamRequest, kam_job),
    "interval": (IntervalRequest, interval_job),
    "certify": (CertifyRequest, certify_job),
    "cascade": (CascadeRequest, cascade_job),
}


def run_job(kind: str, payload: dict) -> JobResult:
    model, fn = JOBS[kind]
    return fn(model.model_validate(payload))


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ValidationError, pydantic.ValidationError)):
        return EXIT_VALIDATION
    if isinstance(exc, (NumericFailure, PergrowthError)):
        return EXIT_NUMERIC
    return EXIT_NUMERIC


def error_report(exc: BaseException) -> ErrorReport:
    if isinstance(exc, pydantic.ValidationError):
        details = {"errors": json.loads(exc.json(include_url=False))}
        message = "request failed validation"
    elif isinstance(exc, PergrowthError):
        details = _clean(exc.details)
        message = str(exc)
    else:
        details, message = {}, str(exc)
    return ErrorReport(error=ErrorBody(type=type(exc).__name__, message=message,
                                       exit_code=exit_code_for(exc), details=details))


def _clean(obj):
    """Make numpy scalars and non-finite floats JSON-safe."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else _num(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, BaseException):
        return str(obj)
    return obj
