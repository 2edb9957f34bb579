"""Sufficient-condition certificates for ambient isotopy.

Two routes are covered.  An inscribed polyline is certified against its
source curve by checking, window by window, that the sub-curve turns less
than pi/2, that the polyline stays inside the tube, and that the normal
plane at each shared vertex separates the adjacent windows.  An arbitrary
approximant is certified against a partition of the target curve: per
window, the approximant's restriction must turn less than pi/2, its convex
hull must sit inside the (extended) tube, and its boundary points and chord
must track the curve within half the tube radius.

All checks are conservative sampling surrogates; a certificate that passes
vouches for the isotopy, a failure reports signed margins.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import CurveSource, ParamWindow, Polyline, eval_point
from .curvature import END, advance_by_budget, exterior_angle, piecewise_total_curvature
from .errors import CriteriaNotMetError, CurveValidationError
from .metric import convex_hull, hausdorff_distance, normal_plane_margin, point_to_curve

DEFAULT_PARTITION_BUDGET = 0.45 * math.pi
MAX_WINDOW_SPLITS = 20
CERTIFICATE_SCHEMA_VERSION = "1"
PARAM_SLACK = 1e-9


def _radius(r) -> float:
    val = float(getattr(r, "r", r))
    if not (val > 0.0 and math.isfinite(val)):
        raise CurveValidationError("tube radius must be a positive finite length")
    return val


def _pool_size() -> int:
    env = os.environ.get("ISOKNOT_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _parallel_map(fn, items):
    items = list(items)
    workers = _pool_size()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# partition of the target curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """Consecutive parameter windows covering [0, 1], each turning < pi/2.

    `extended` widens every window by eps_w on both sides (clipped to the
    unit interval; membership tests treat closed curves modularly), and
    eps_w is a quarter of the shortest window so extended windows overlap
    neighbors only.
    """

    windows: tuple
    extended: tuple
    eps_w: float

    @property
    def knots(self) -> np.ndarray:
        return np.asarray([w.lo for w in self.windows] + [self.windows[-1].hi])


def _window_bounds(window_ext) -> tuple:
    if hasattr(window_ext, "lo"):
        return float(window_ext.lo), float(window_ext.hi)
    lo, hi = window_ext
    return float(lo), float(hi)


def _param_in_window(curve: CurveSource, lo: float, hi: float, p: float) -> bool:
    if lo - PARAM_SLACK <= p <= hi + PARAM_SLACK:
        return True
    if curve.closed:
        return (lo - PARAM_SLACK <= p - 1.0 <= hi + PARAM_SLACK
                or lo - PARAM_SLACK <= p + 1.0 <= hi + PARAM_SLACK)
    return False


def _hull_probe(samples, curve: CurveSource, lo: float, hi: float, r: float,
                grid: int = 128):
    """Check hull vertices and edge midpoints against the tube.

    Returns (ok, margin): margin is r minus the largest probe distance, and
    ok additionally requires every probe's nearest curve parameter to fall
    inside [lo, hi] (modulo 1 on closed curves).
    """
    hull = convex_hull(samples)
    probes = hull.hull_points()
    mids = hull.edge_midpoints()
    if mids.shape[0]:
        probes = np.vstack([probes, mids])
    worst = 0.0
    ok = True
    for q in probes:
        rep = point_to_curve(q, curve, grid=grid)
        worst = max(worst, rep.value)
        if not (rep.value < r and _param_in_window(curve, lo, hi, rep.param)):
            ok = False
    return ok, r - worst


def hull_in_extended_tube(samples, curve: CurveSource, window_ext, r: float,
                          grid: int = 128) -> bool:
    """True when the convex hull of the samples sits inside the tube of the
    given window: every hull vertex and hull-edge midpoint lies within r of
    the curve, with its nearest parameter inside the window."""
    lo, hi = _window_bounds(window_ext)
    ok, _ = _hull_probe(samples, curve, lo, hi, float(r), grid=grid)
    return ok


def _window_samples(curve: CurveSource, lo: float, hi: float, count: int) -> np.ndarray:
    ts = np.linspace(lo, hi, count)
    if curve.closed:
        ts = np.where(ts >= 1.0, ts - 1.0, ts)
    return np.atleast_2d(np.asarray(curve.eval(ts), dtype=float))


def partition_curve(curve: CurveSource, r, budget: float = DEFAULT_PARTITION_BUDGET,
                    quad_tol: float = 1e-11, samples_per_window: int = 65) -> Partition:
    """Split the curve into windows turning at most `budget` each, with every
    window's sampled convex hull verified inside the tube of radius r.

    A window whose hull escapes the tube is halved and retried, up to 20
    splits; eps_w is set to a quarter of the shortest final window.
    """
    rr = _radius(r)
    if not (0.0 < budget < math.pi / 2):
        raise CurveValidationError("partition budget must lie in (0, pi/2)")
    knots = [0.0]
    t = 0.0
    while True:
        nxt = advance_by_budget(curve, t, budget, quad_tol=quad_tol)
        if nxt is END:
            break
        knots.append(nxt)
        t = nxt
    if curve.closed:
        if len(knots) > 1 and knots[-1] >= 1.0 - 1e-9:
            knots.pop()
        bounds = knots + [1.0]
    else:
        if knots[-1] < 1.0:
            knots.append(1.0)
        bounds = knots
    work = [(bounds[k], bounds[k + 1], 0) for k in range(len(bounds) - 1)]
    accepted = []
    while work:
        lo, hi, splits = work.pop(0)
        pts = _window_samples(curve, lo, hi, samples_per_window)
        ok, margin = _hull_probe(pts, curve, lo, hi, rr)
        if ok:
            accepted.append((lo, hi))
            continue
        if splits >= MAX_WINDOW_SPLITS:
            raise CriteriaNotMetError(
                "window hull containment unachievable after "
                f"{MAX_WINDOW_SPLITS} splits on [{lo:.6g}, {hi:.6g}] "
                f"(margin {margin:.3g})")
        mid = 0.5 * (lo + hi)
        work.insert(0, (mid, hi, splits + 1))
        work.insert(0, (lo, mid, splits + 1))
    accepted.sort()
    windows = tuple(ParamWindow(lo, hi) for lo, hi in accepted)
    eps_w = min(w.length for w in windows) / 4.0
    extended = tuple(
        ParamWindow(max(0.0, w.lo - eps_w), min(1.0, w.hi + eps_w)) for w in windows)
    return Partition(windows, extended, eps_w)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentRecord:
    """Outcome of the four checks on one window."""

    window: ParamWindow
    budget_ok: bool
    containment_ok: bool
    endpoint_ok: bool
    hausdorff_ok: bool
    budget_margin: float
    containment_margin: float
    endpoint_margin: float
    hausdorff_margin: float

    @property
    def ok(self) -> bool:
        return (self.budget_ok and self.containment_ok
                and self.endpoint_ok and self.hausdorff_ok)

    def min_margin(self) -> float:
        vals = [self.budget_margin, self.containment_margin,
                self.endpoint_margin, self.hausdorff_margin]
        finite = [v for v in vals if math.isfinite(v)]
        return min(finite) if finite else math.inf


@dataclass(frozen=True)
class Certificate:
    passed: bool
    per_segment: tuple
    r_used: float
    curve_id: str
    kind: str

    def min_margin(self) -> float:
        return min((s.min_margin() for s in self.per_segment), default=math.inf)

    def to_json_dict(self) -> dict:
        def num(v):
            return float(v) if math.isfinite(v) else None

        return {
            "version": CERTIFICATE_SCHEMA_VERSION,
            "curve": self.curve_id,
            "kind": self.kind,
            "r": self.r_used,
            "passed": self.passed,
            "segments": [
                {
                    "window": [s.window.lo, s.window.hi],
                    "budget_ok": s.budget_ok,
                    "containment_ok": s.containment_ok,
                    "endpoint_ok": s.endpoint_ok,
                    "hausdorff_ok": s.hausdorff_ok,
                    "margins": {
                        "budget": num(s.budget_margin),
                        "containment": num(s.containment_margin),
                        "endpoint": num(s.endpoint_margin),
                        "hausdorff": num(s.hausdorff_margin),
                    },
                }
                for s in self.per_segment
            ],
        }


def _finish(records, r: float, curve: CurveSource, kind: str) -> Certificate:
    passed = all(s.ok for s in records)
    return Certificate(passed, tuple(records), r, curve.name or "curve", kind)


def _chord_samples(a: np.ndarray, b: np.ndarray, count: int = 33) -> np.ndarray:
    u = np.linspace(0.0, 1.0, count)[:, None]
    return a[None, :] * (1.0 - u) + b[None, :] * u


def _max_dist_to_curve(points, curve: CurveSource, grid: int = 128) -> float:
    return max(point_to_curve(q, curve, grid=grid).value for q in np.atleast_2d(points))


# ---------------------------------------------------------------------------
# inscribed route
# ---------------------------------------------------------------------------

def _check_inscribed(curve: CurveSource, p: Polyline) -> None:
    pts = np.atleast_2d(np.asarray(curve.eval(p.params), dtype=float))
    scale = max(1.0, float(np.abs(p.vertices).max()))
    if np.max(np.linalg.norm(pts - p.vertices, axis=1)) > 1e-9 * scale:
        raise CurveValidationError("polyline is not inscribed in the curve")


def _vertex_windows(p: Polyline):
    """Inter-vertex windows: (lo, hi) pairs, seam window last when closed."""
    t = p.params
    wins = [(float(t[k]), float(t[k + 1])) for k in range(len(t) - 1)]
    if p.closed:
        wins.append((float(t[-1]), 1.0))
    return wins


def certify_inscribed(curve: CurveSource, p: Polyline, r,
                      quad_tol: float = 1e-9, samples: int = 33) -> Certificate:
    """Certificate for an inscribed polyline: per window, the sub-curve turns
    less than pi/2, the chord stays within r of the curve, the normal planes
    at the window's vertices separate the neighboring windows, and the
    chord-to-subcurve Hausdorff distance is below r."""
    rr = _radius(r)
    _check_inscribed(curve, p)
    wins = _vertex_windows(p)
    n = len(p.params)

    # separation margin at each vertex between its two adjacent windows
    sep = {}
    idx = range(n) if p.closed else range(1, n - 1)
    for j in idx:
        t0 = float(p.params[j])
        left_lo = float(p.params[j - 1]) if j > 0 else wins[-1][0]
        left = ParamWindow(left_lo, t0 if t0 > left_lo else 1.0)
        if j + 1 < n:
            right = ParamWindow(t0, float(p.params[j + 1]))
        else:
            right = ParamWindow(t0, 1.0)
        sep[j] = normal_plane_margin(curve, t0, left, right)

    def vertex_margin(j: int) -> float:
        return sep.get(j % n, math.inf)

    def check(item):
        k, (lo, hi) = item
        win = ParamWindow(lo, hi)
        budget = piecewise_total_curvature(curve, win, tol=quad_tol).value
        budget_margin = math.pi / 2 - budget
        a = p.vertices[k]
        b = p.vertices[(k + 1) % p.vertices.shape[0]]
        chord = _chord_samples(a, b, samples)
        containment_margin = rr - _max_dist_to_curve(chord, curve)
        endpoint_margin = min(vertex_margin(k), vertex_margin(k + 1))
        sub = _window_samples(curve, lo, hi, 2 * samples - 1)
        hausdorff_margin = rr - hausdorff_distance(chord, sub).value
        return SegmentRecord(
            win, budget_margin > 0.0, containment_margin > 0.0,
            endpoint_margin > 0.0, hausdorff_margin > 0.0,
            budget_margin, containment_margin, endpoint_margin, hausdorff_margin)

    records = _parallel_map(check, enumerate(wins))
    return _finish(records, rr, curve, "inscribed")


# ---------------------------------------------------------------------------
# approximant route
# ---------------------------------------------------------------------------

def _restriction(approx: Polyline, lo: float, hi: float) -> np.ndarray:
    """Approximant vertices inside (lo, hi), sandwiched by the boundary
    points; near-duplicate neighbors collapse."""
    inner = [approx.vertices[j] for j in range(len(approx.params))
             if lo < approx.params[j] < hi]
    pts = [np.asarray(approx.eval(float(lo)), dtype=float)]
    pts.extend(np.asarray(v, dtype=float) for v in inner)
    pts.append(np.asarray(approx.eval(float(hi)), dtype=float))
    scale = max(1.0, max(float(np.abs(q).max()) for q in pts))
    out = [pts[0]]
    for q in pts[1:]:
        if np.linalg.norm(q - out[-1]) > 1e-12 * scale:
            out.append(q)
    return np.asarray(out)


def _arc_turning(pts: np.ndarray) -> float:
    if pts.shape[0] < 3:
        return 0.0
    d = np.diff(pts, axis=0)
    return float(sum(exterior_angle(d[j], d[j + 1]) for j in range(d.shape[0] - 1)))


def certify_approximant(partition: Partition, curve: CurveSource, approx: Polyline,
                        r, fast: bool = False, samples: int = 33) -> Certificate:
    """Certificate for an arbitrary approximant against a partitioned curve.

    Per window: the approximant's restriction turns less than pi/2; its
    convex hull sits in the extended tube; the boundary points track the
    curve within r/2; the boundary chord is within Hausdorff r/2 of the
    sub-curve.  Correspondence is by shared parameter.  With fast=True the
    remaining checks of a failing window are skipped (flags false, margins
    NaN); the verdict is unchanged.
    """
    rr = _radius(r)
    if approx.closed != curve.closed:
        raise CurveValidationError(
            "parameter mismatch: approximant and curve must share closedness")

    def check(k: int) -> SegmentRecord:
        w = partition.windows[k]
        ext_lo, ext_hi = w.lo - partition.eps_w, w.hi + partition.eps_w
        nan = math.nan

        rest = _restriction(approx, w.lo, w.hi)
        budget = _arc_turning(rest)
        budget_margin = math.pi / 2 - budget
        budget_ok = budget_margin > 0.0
        if fast and not budget_ok:
            return SegmentRecord(w, False, False, False, False,
                                 budget_margin, nan, nan, nan)

        containment_ok, containment_margin = _hull_probe(
            rest, curve, ext_lo, ext_hi, rr)
        if fast and not containment_ok:
            return SegmentRecord(w, budget_ok, False, False, False,
                                 budget_margin, containment_margin, nan, nan)

        u_lo, u_hi = rest[0], rest[-1]
        v_lo = np.asarray(eval_point(curve, w.lo), dtype=float)
        v_hi = np.asarray(eval_point(curve, w.hi), dtype=float)
        endpoint_margin = rr / 2 - max(float(np.linalg.norm(u_lo - v_lo)),
                                       float(np.linalg.norm(u_hi - v_hi)))
        endpoint_ok = endpoint_margin > 0.0
        if fast and not endpoint_ok:
            return SegmentRecord(w, budget_ok, containment_ok, False, False,
                                 budget_margin, containment_margin,
                                 endpoint_margin, nan)

        chord = _chord_samples(u_lo, u_hi, samples)
        sub = _window_samples(curve, w.lo, w.hi, 2 * samples - 1)
        hausdorff_margin = rr / 2 - hausdorff_distance(chord, sub).value
        return SegmentRecord(
            w, budget_ok, containment_ok, endpoint_ok, hausdorff_margin > 0.0,
            budget_margin, containment_margin, endpoint_margin, hausdorff_margin)

    records = _parallel_map(check, range(len(partition.windows)))
    return _finish(records, rr, curve, "approximant")


# ---------------------------------------------------------------------------
# sequence driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsotopyIndexResult:
    """Outcome of the sequence test: the first certified index, or the best
    margins seen when no index up to i_max passes."""

    index: Optional[int]
    certificate: Optional[Certificate]
    best_index: int
    best_margin: float
    tried: int

    @property
    def found(self) -> bool:
        return self.index is not None


def find_isotopy_index(partition: Partition, curve: CurveSource, sequence,
                       i_max: int, r, fast: bool = False,
                       on_certificate=None) -> IsotopyIndexResult:
    """Smallest i <= i_max whose approximant certificate passes.

    `sequence` maps a 1-based index to a Polyline (a callable, or an
    indexable taken as sequence[i-1]).  `on_certificate(i, cert)` is invoked
    for every index tried, in order."""
    if i_max < 1:
        raise CurveValidationError("i_max must be at least 1")
    if callable(sequence):
        fetch = sequence
    else:
        def fetch(i):
            return sequence[i - 1]
    best_margin = -math.inf
    best_index = 0
    for i in range(1, int(i_max) + 1):
        cert = certify_approximant(partition, curve, fetch(i), r, fast=fast)
        if on_certificate is not None:
            on_certificate(i, cert)
        if cert.passed:
            return IsotopyIndexResult(i, cert, i, cert.min_margin(), i)
        m = cert.min_margin()
        if m > best_margin:
            best_margin, best_index = m, i
    return IsotopyIndexResult(None, None, best_index, best_margin, int(i_max))
