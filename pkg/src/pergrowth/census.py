"""Periodic-orbit census for area-preserving maps of the cylinder/torus.

Roots of f^n(z) - z - (p, 0) are found by vectorized Newton from a
deterministic seed grid (plus optional hints), polished, filtered by
minimal period, deduplicated and classified by the trace of D(f^n).
"""

from __future__ import annotations

import csv
import enum
import io
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import NotPeriodic, ValidationError
from .phase import SymplecticMap, _num, iterate_arrays

DEGENERATE_COND = 1e11
DEDUPE_TOL = 1e-8


class OrbitType(str, enum.Enum):
    HYPERBOLIC = "hyperbolic"
    ELLIPTIC = "elliptic"
    AMBIGUOUS = "parabolic_ambiguous"


def classify(trace, tol_h=1e-9, tol_e=1e-9) -> OrbitType:
    if tol_h <= 0 or tol_e <= 0:
        raise ValidationError("classification tolerances must be positive")
    a = abs(trace)
    if a > 2.0 + tol_h:
        return OrbitType.HYPERBOLIC
    if a < 2.0 - tol_e:
        return OrbitType.ELLIPTIC
    return OrbitType.AMBIGUOUS


@dataclass(frozen=True)
class OrbitRecord:
    x: float
    y: float
    period: int
    winding: int
    trace: float
    type: OrbitType
    residual: float
    cond: float
    orbit: int = -1

    @property
    def nondegenerate(self):
        return self.type is not OrbitType.AMBIGUOUS


@dataclass
class Census:
    n: int
    region: tuple
    records: list
    degenerate_families: int = 0
    degenerate_points: int = 0
    dropped_seeds: int = 0
    seeds: int = 0
    meta: dict = field(default_factory=dict)

    def count(self, kind: OrbitType | str):
        kind = OrbitType(kind)
        return sum(1 for r in self.records if r.type is kind)

    @property
    def hyperbolic(self):
        return self.count(OrbitType.HYPERBOLIC)

    @property
    def elliptic(self):
        return self.count(OrbitType.ELLIPTIC)

    @property
    def ambiguous(self):
        return self.count(OrbitType.AMBIGUOUS)

    @property
    def orbits(self):
        return len({r.orbit for r in self.records})

    def counts(self):
        c = Counter((r.period, r.type.value) for r in self.records)
        return {k: v for k, v in sorted(c.items())}

    def summary(self):
        return {str(self.n): {"hyperbolic": self.hyperbolic, "elliptic": self.elliptic,
                              "ambiguous": self.ambiguous,
                              "degenerate_families": self.degenerate_families}}

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "type", "x", "y", "trace", "residual", "winding"])
        for r in sorted(self.records, key=lambda r: (r.period, r.type.value, r.x, r.y)):
            w.writerow([r.period, r.type.value, _num(r.x), _num(r.y), _num(r.trace),
                        _num(r.residual), r.winding])
        return buf.getvalue()


def _newton(fmap, n, x, y, p, max_iter=40, tol=1e-13):
    """Vectorized Newton on f^n(z) - z - (p, 0).  Returns arrays and a mask."""
    ok = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        X, Y, J = iterate_arrays(fmap, x, y, n)
        rx, ry = X - x - p, Y - y
        a, b, c, d = J[0] - 1.0, J[1], J[2], J[3] - 1.0
        det = a * d - b * c
        fro = a * a + b * b + c * c + d * d
        finite = np.isfinite(det) & np.isfinite(rx) & np.isfinite(ry)
        # rank-deficient systems (circles of periodic points) take the
        # minimum-norm step A^T r / |A|^2, exact for rank one
        singular = finite & (np.abs(det) <= 1e-14 * fro)
        on_root = finite & (np.hypot(rx, ry) <= tol) & singular
        good = finite & (~singular | (fro > 0) | on_root)
        det = np.where(singular, 1.0, det)
        fro = np.where(fro > 0, fro, 1.0)
        dx = np.where(singular, (a * rx + c * ry) / fro, (d * rx - b * ry) / det)
        dy = np.where(singular, (b * rx + d * ry) / fro, (-c * rx + a * ry) / det)
        dx = np.where(on_root, 0.0, dx)
        dy = np.where(on_root, 0.0, dy)
        step = np.hypot(dx, dy)
        step = np.where(good, step, np.inf)
        big = step > 0.25  # let a diverging seed go rather than jump across the band
        ok &= good & ~big
        x = np.where(ok, x - dx, x)
        y = np.where(ok, y - dy, y)
        if np.all(~ok | (step <= tol)):
            break
    X, Y, J = iterate_arrays(fmap, x, y, n)
    res = np.hypot(X - x - p, Y - y)
    a, b, c, d = J[0] - 1.0, J[1], J[2], J[3] - 1.0
    s = np.linalg.svd(np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2), compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(s[:, 1] > 0, s[:, 0] / s[:, 1], np.inf)
        inv_norm = np.where(s[:, 1] > 0, 1.0 / s[:, 1], np.inf)
    return x, y, J[0] + J[3], res, cond, inv_norm, ok & np.isfinite(res)


def _divisors(n):
    return [d for d in range(1, n) if n % d == 0]


def _is_periodic(fmap, x, y, d, tol):
    X, Y, _ = iterate_arrays(fmap, x, y, d, with_jac=False)
    dx = X - x
    return (np.abs(dx - np.round(dx)) <= tol) & (np.abs(Y - y) <= tol)


def minimal_period(fmap: SymplecticMap, point, n: int, tol=1e-9) -> int:
    """Least d | n with f^d(point) = point (x taken mod 1)."""
    x = np.atleast_1d(np.float64(point[0]))
    y = np.atleast_1d(np.float64(point[1]))
    if not _is_periodic(fmap, x, y, n, tol)[0]:
        raise NotPeriodic(f"point is not {n}-periodic", n=n)
    for d in _divisors(n):
        if _is_periodic(fmap, x, y, d, tol)[0]:
            return d
    return n


def _tree(xs, ys, pad):
    """KD-tree on the cylinder: periodic in x, y shifted so nothing wraps."""
    ys = np.asarray(ys, dtype=float)
    lo = float(np.min(ys))
    span = float(np.max(ys)) - lo + 2.0 * pad + 1.0
    pts = np.stack([np.mod(xs, 1.0) % 1.0, ys - lo + pad], 1)
    return cKDTree(pts, boxsize=[1.0, span]), lo - pad


def _cluster(xs, ys, radius):
    """Connected clusters of points on the cylinder (x mod 1) within ``radius`` (sup norm)."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return np.zeros(0, dtype=int)
    tree, _ = _tree(xs, ys, radius)
    pairs = tree.query_pairs(radius, p=np.inf, output_type="ndarray")
    m = xs.size
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    return connected_components(g, directed=False)[1]


def find_periodic(fmap: SymplecticMap, n: int, region=(-0.05, 0.05), seed_density=64,
                  y_levels=5, windings=None, hints=None, tol_h=1e-9, tol_e=1e-9,
                  residual_tol=1e-10, x_range=(0.0, 1.0)) -> Census:
    """Census of points of least period n with y in ``region``.

    Seeds: ``seed_density`` x-values times ``y_levels`` y-values on the
    region, plus ``hints`` (an (k, 2) array).  Windings default to the
    rounded lifted displacement of each seed after n steps.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    y0, y1 = map(float, region)
    xa, xb = x_range
    sx = xa + (xb - xa) * np.arange(seed_density) / seed_density
    sy = np.array([0.5 * (y0 + y1)]) if y_levels <= 1 else np.linspace(y0, y1, y_levels)
    X0, Y0 = np.meshgrid(sx, sy)
    x0, y0s = X0.ravel(), Y0.ravel()
    if hints is not None and len(hints):
        h = np.asarray(hints, dtype=float).reshape(-1, 2)
        x0 = np.concatenate([x0, h[:, 0]])
        y0s = np.concatenate([y0s, h[:, 1]])
    nseeds = x0.size
    if windings is None:
        Xn, _, _ = iterate_arrays(fmap, x0, y0s, n, with_jac=False)
        pw = np.round(Xn - x0)
        xs_all, ys_all, ps_all = x0, y0s, pw
    else:
        ws = np.asarray(list(windings), dtype=float)
        xs_all = np.repeat(x0[None, :], ws.size, 0).ravel()
        ys_all = np.repeat(y0s[None, :], ws.size, 0).ravel()
        ps_all = np.repeat(ws[:, None], nseeds, 1).ravel()
    x, y, tr, res, cond, inv_norm, ok = _newton(fmap, n, xs_all, ys_all, ps_all)
    lo, hi = min(y0, y1), max(y0, y1)
    keep = ok & (res <= residual_tol) & (y >= lo - 1e-12) & (y <= hi + 1e-12)
    dropped = int(np.sum(~keep))
    x, y, tr, res, cond, inv_norm, p = (a[keep] for a in (x, y, tr, res, cond, inv_norm, ps_all))
    # minimal period
    if x.size:
        prim = np.ones(x.shape, dtype=bool)
        for d in _divisors(n):
            prim &= ~_is_periodic(fmap, x, y, d, 1e-9)
        x, y, tr, res, cond, inv_norm, p = (a[prim] for a in (x, y, tr, res, cond, inv_norm, p))
    xm = x - np.floor(x)
    xm = np.where(xm >= 1.0, 0.0, xm)
    # dedupe: roots of an ill-conditioned system are located only to about
    # |(Df^n - I)^{-1}| * residual, so merge within that radius (at least 1e-8)
    loc = np.clip(inv_norm * np.maximum(res, 1e-16) * 10.0, DEDUPE_TOL, 1e-3)
    records = []
    degenerate_points = 0
    families = 0
    if xm.size:
        order = np.lexsort((y, xm, p))
        x, xm, y, tr, res, cond, loc, p = (a[order] for a in (x, xm, y, tr, res, cond, loc, p))
        lab = _cluster(xm, y, float(np.max(loc)))
        reps = {}
        for k, l in enumerate(lab):
            if l not in reps or res[k] < res[reps[l]]:
                reps[l] = k
        idx = np.array(sorted(reps.values()))
        x, xm, y, tr, res, cond, p = (a[idx] for a in (x, xm, y, tr, res, cond, p))
        # degenerate families: ill-conditioned roots that crowd each other
        spacing = (xb - xa) / seed_density
        if xm.size:
            fam = _cluster(xm, y, 2.5 * spacing)
            sizes = Counter(fam)
            degen = (cond > DEGENERATE_COND) & np.array([sizes[f] > 1 for f in fam])
            families = len({f for f, d in zip(fam, degen) if d})
            degenerate_points = int(np.sum(degen))
            for k in np.nonzero(~degen)[0]:
                records.append(OrbitRecord(float(xm[k]), float(y[k]), n, int(p[k]), float(tr[k]),
                                           classify(tr[k], tol_h, tol_e), float(res[k]), float(cond[k])))
    records = _label_orbits(fmap, records)
    return Census(n, (lo, hi), records, families, degenerate_points, dropped, nseeds)


def _label_orbits(fmap, records, tol=1e-7):
    """Group records into orbits: link each point to the record nearest its image."""
    if not records:
        return records
    xs = np.array([r.x for r in records])
    ys = np.array([r.y for r in records])
    X, Y = fmap.lift(xs, ys)
    tree, off = _tree(xs, ys, 1.0)
    inside = (Y - off > 0.0) & (Y - off < tree.boxsize[1])
    q = np.stack([np.mod(X, 1.0) % 1.0, np.where(inside, Y - off, 0.0)], 1)
    d, j = tree.query(q, p=np.inf, distance_upper_bound=tol)
    hit = inside & np.isfinite(d)
    m = len(records)
    g = coo_matrix((np.ones(int(hit.sum())), (np.nonzero(hit)[0], j[hit])), shape=(m, m))
    _, comp = connected_components(g, directed=False)
    # number orbits by first appearance
    first = {}
    label = [first.setdefault(c, len(first)) for c in comp]
    return [OrbitRecord(**{**r.__dict__, "orbit": int(l)}) for r, l in zip(records, label)]


def polish(fmap, points, n, windings, tol=1e-8, max_iter=40):
    """Newton-polish stored orbit points; returns (points, residuals, traces)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y, tr, res, _, _, ok = _newton(fmap, n, pts[:, 0].copy(), pts[:, 1].copy(),
                                      np.asarray(windings, dtype=float), max_iter=max_iter)
    res = np.where(ok, res, np.inf)
    return np.stack([x % 1.0, y], 1), res, tr
