"""Metric-geometry primitives: Hausdorff distance, point-to-curve distance,
convex hulls with degenerate-rank handling, a brute-force polyline simplicity
oracle, and the normal-plane separation test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import directed_hausdorff

from .curves import CurveSource, ParamWindow, Polyline, sample_curve
from .curvature import exterior_angle
from .errors import CurveValidationError

COPLANAR_TOL = 1e-10
DEFAULT_CLEARANCE = 1e-9

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class DistanceReport:
    """A distance value with the witness pair that attains it."""

    value: float
    witness_a: np.ndarray
    witness_b: np.ndarray
    param: Optional[float] = None  # parameter of witness_b when b is a curve


# ---------------------------------------------------------------------------
# Hausdorff distance between sampled point sets
# ---------------------------------------------------------------------------

def hausdorff_distance(points_a, points_b) -> DistanceReport:
    """Symmetric Hausdorff distance between two sampled point sets."""
    a = np.atleast_2d(np.asarray(points_a, dtype=float))
    b = np.atleast_2d(np.asarray(points_b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise CurveValidationError("Hausdorff distance of an empty set")
    d_ab, ia, ib = directed_hausdorff(a, b)
    d_ba, jb, ja = directed_hausdorff(b, a)
    if d_ab >= d_ba:
        return DistanceReport(float(d_ab), a[ia].copy(), b[ib].copy())
    return DistanceReport(float(d_ba), a[ja].copy(), b[jb].copy())


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-10) -> tuple:
    """Golden-section minimization of a scalar function on [lo, hi]."""
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    xm = 0.5 * (lo + hi)
    return xm, f(xm)


def point_to_curve(point, curve: CurveSource, grid: int = 64,
                   window: Optional[ParamWindow] = None) -> DistanceReport:
    """Distance from a point to the curve: coarse grid plus golden-section.

    The witness parameter is reported; the bracket spans one grid cell on
    each side of the best coarse sample (modular for closed curves on the
    full window).
    """
    p = np.asarray(point, dtype=float)
    grid = max(int(grid), 64)
    lo, hi = (0.0, 1.0) if window is None else (window.lo, window.hi)
    wrap = curve.closed and window is None
    ts = np.linspace(lo, hi, grid, endpoint=not wrap)
    pts = np.atleast_2d(curve.eval(ts))
    d2 = np.einsum("ij,ij->i", pts - p, pts - p)
    k = int(np.argmin(d2))
    step = (hi - lo) / (grid if wrap else grid - 1)

    def f(t):
        if wrap:
            t = t % 1.0
        q = curve.eval(float(np.clip(t, lo, hi)))
        return float(np.linalg.norm(np.asarray(q) - p))

    t_lo = ts[k] - step
    t_hi = ts[k] + step
    if not wrap:
        t_lo, t_hi = max(lo, t_lo), min(hi, t_hi)
    t_star, d_star = golden_section_min(f, t_lo, t_hi)
    if wrap:
        t_star %= 1.0
    t_star = float(np.clip(t_star, lo, hi))
    return DistanceReport(d_star, p.copy(), np.asarray(curve.eval(t_star), dtype=float),
                          param=t_star)


# ---------------------------------------------------------------------------
# convex hulls (degenerate ranks handled uniformly)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HullSet:
    """Convex hull of a point set.

    rank 0: single point; rank 1: extreme segment; rank 2: planar polygon
    (faces = one vertex loop); rank 3: triangulated boundary.  `vertices`
    indexes into `points`; `edges` are index pairs of hull edges.
    """

    points: np.ndarray
    vertices: np.ndarray
    edges: np.ndarray
    faces: np.ndarray
    rank: int

    def hull_points(self) -> np.ndarray:
        return self.points[self.vertices]

    def edge_midpoints(self) -> np.ndarray:
        if self.edges.shape[0] == 0:
            return np.empty((0, 3))
        return 0.5 * (self.points[self.edges[:, 0]] + self.points[self.edges[:, 1]])


def _rank_basis(pts: np.ndarray):
    center = pts.mean(axis=0)
    q = pts - center
    scale = max(float(np.abs(q).max()), 1.0)
    u, s, vt = np.linalg.svd(q / scale, full_matrices=False)
    rank = int(np.sum(s > COPLANAR_TOL * max(len(pts), 1) ** 0.5))
    return rank, center, vt


def convex_hull(points) -> HullSet:
    """Convex hull with uniform handling of degenerate inputs."""
    pts = np.unique(np.round(np.atleast_2d(np.asarray(points, dtype=float)), 15), axis=0)
    if pts.shape[0] == 0 or pts.shape[1] != 3:
        raise CurveValidationError("convex hull needs (n, 3) points")
    rank, center, vt = _rank_basis(pts)
    no_faces = np.empty((0, 3), dtype=int)
    if rank == 0:
        return HullSet(pts, np.array([0]), np.empty((0, 2), dtype=int), no_faces, 0)
    if rank == 1:
        axis = vt[0]
        proj = (pts - center) @ axis
        i, j = int(np.argmin(proj)), int(np.argmax(proj))
        return HullSet(pts, np.array([i, j]), np.array([[i, j]]), no_faces, 1)
    if rank == 2:
        basis = vt[:2]
        flat = (pts - center) @ basis.T
        try:
            hull2 = ConvexHull(flat)
        except QhullError:
            hull2 = ConvexHull(flat, qhull_options="QJ")
        verts = np.asarray(hull2.vertices, dtype=int)  # counterclockwise loop
        edges = np.stack([verts, np.roll(verts, -1)], axis=1)
        return HullSet(pts, verts, edges, verts.reshape(1, -1), 2)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        hull = ConvexHull(pts, qhull_options="QJ")
    faces = np.asarray(hull.simplices, dtype=int)
    edge_set = set()
    for tri in faces:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            e = (min(tri[a], tri[b]), max(tri[a], tri[b]))
            edge_set.add(e)
    edges = np.array(sorted(edge_set), dtype=int)
    return HullSet(pts, np.asarray(hull.vertices, dtype=int), edges, faces, 3)


# ---------------------------------------------------------------------------
# segment distances and the simplicity oracle
# ---------------------------------------------------------------------------

def segment_distance(p1, q1, p2, q2) -> float:
    """Minimum distance between segments [p1, q1] and [p2, q2]."""
    p1 = np.asarray(p1, float)
    q1 = np.asarray(q1, float)
    p2 = np.asarray(p2, float)
    q2 = np.asarray(q2, float)
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a <= 1e-300 and e <= 1e-300:
        return float(np.linalg.norm(r))
    if a <= 1e-300:
        s, t = 0.0, float(np.clip(f / e, 0.0, 1.0))
    else:
        c = float(d1 @ r)
        if e <= 1e-300:
            t, s = 0.0, float(np.clip(-c / a, 0.0, 1.0))
        else:
            b = float(d1 @ d2)
            denom = a * e - b * b
            s = float(np.clip((b * f - c * e) / denom, 0.0, 1.0)) if denom > 1e-300 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, float(np.clip(-c / a, 0.0, 1.0))
            elif t > 1.0:
                t, s = 1.0, float(np.clip((b - c) / a, 0.0, 1.0))
    closest1 = p1 + s * d1
    closest2 = p2 + t * d2
    return float(np.linalg.norm(closest1 - closest2))


def polyline_is_simple_oracle(p: Polyline, clearance: float = DEFAULT_CLEARANCE) -> bool:
    """Brute-force O(n^2) embeddedness check.

    True iff no pair of non-adjacent segments comes within `clearance` and
    every adjacent pair meets only at the shared vertex (no fold-back).
    """
    v = p.vertices
    dirs = p.segment_dirs()
    m = dirs.shape[0]
    starts = v if p.closed else v[:-1]
    ends = np.roll(v, -1, axis=0) if p.closed else v[1:]
    # adjacent pairs: a turn of pi means the next segment doubles back
    for i in range(m - 1 + (1 if p.closed else 0)):
        j = (i + 1) % m
        if exterior_angle(dirs[i], dirs[j]) >= np.pi - 1e-12:
            return False
    for i in range(m):
        for j in range(i + 2, m):
            if p.closed and i == 0 and j == m - 1:
                continue  # seam-adjacent pair
            if segment_distance(starts[i], ends[i], starts[j], ends[j]) < clearance:
                return False
    return True


# ---------------------------------------------------------------------------
# normal-plane separation
# ---------------------------------------------------------------------------

def normal_plane_margin(curve: CurveSource, t0: float, left: ParamWindow,
                        right: ParamWindow, samples: int = 256) -> float:
    """Worst signed clearance of the normal plane at C(t0) between two windows.

    The plane passes through C(t0) with normal C'(t0).  Samples of the left
    window should fall on the negative side, samples of the right window on
    the positive side; the returned value is the smallest distance-to-plane
    over all samples, negated when a sample sits on the wrong side.  Samples
    coinciding with C(t0) itself are exempt.
    """
    c0 = np.asarray(curve.eval(float(t0)), dtype=float)
    n = np.asarray(curve.deriv1(float(t0)), dtype=float)
    nn = float(np.linalg.norm(n))
    if nn < 1e-12:
        raise CurveValidationError("normal plane at a zero-speed point")
    n = n / nn
    scale = max(float(np.linalg.norm(c0)), 1.0)

    def signed(window: ParamWindow):
        ts = np.linspace(window.lo, window.hi, max(int(samples), 8))
        pts = np.atleast_2d(curve.eval(ts))
        keep = np.linalg.norm(pts - c0, axis=1) > 1e-12 * scale
        return (pts[keep] - c0) @ n

    margin = np.inf
    lv = signed(left)
    if lv.size:
        margin = min(margin, float(np.min(-lv)))
    rv = signed(right)
    if rv.size:
        margin = min(margin, float(np.min(rv)))
    return margin


def normal_plane_separates(curve: CurveSource, t0: float, left: ParamWindow,
                           right: ParamWindow, samples: int = 256) -> bool:
    """Does the normal plane at C(t0) strictly separate the two windows?"""
    return normal_plane_margin(curve, t0, left, right, samples=samples) > 0.0


# ---------------------------------------------------------------------------
# distance from many points to a densely sampled curve
# ---------------------------------------------------------------------------

def points_to_curve_samples(points, curve: CurveSource, max_spacing: float,
                            window: Optional[ParamWindow] = None):
    """Nearest-sample distance and parameter for a batch of query points.

    Sampling at max_spacing bounds the overshoot by about max_spacing/2;
    callers absorb that in their margins.  Returns (distances, params).
    """
    ts, pts = sample_curve(curve, max_spacing, window=window)
    tree = cKDTree(pts)
    d, idx = tree.query(np.atleast_2d(np.asarray(points, dtype=float)))
    return d, ts[idx]
