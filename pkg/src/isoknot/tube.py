"""Embedded-tube radius for smooth and piecewise-smooth space curves.

The certified radius is safety * min(1/kappa_max, d_min/2, r_end):

* kappa_max: largest curvature over the smooth pieces (grid + golden refine);
* d_min: minimum over doubly-critical chords, i.e. interior local minima
  of |C(s) - C(t)| away from a diagonal parameter band (infinity when no
  such local minimum exists, as for short open arcs);
* r_end: open curves only, how far an endpoint ball can grow before it
  captures a returning stretch of the curve (infinity for closed curves,
  far-end distance when the curve never turns back).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import CurveSource, ParamWindow
from .curvature import curvature_at
from .errors import CurveValidationError, NotSimpleError
from .metric import golden_section_min

SELF_INTERSECTION_TOL = 1e-9
DEFAULT_BAND = 0.01


@dataclass(frozen=True)
class TubeRadius:
    """Certified radius with the three bounds that produced it."""

    r: float
    kappa_max: float
    d_min: float
    r_end: float
    safety: float


# ---------------------------------------------------------------------------
# kappa_max
# ---------------------------------------------------------------------------

def _smooth_piece_windows(curve: CurveSource):
    cuts = [0.0] + sorted(b for b in curve.breakpoints if 1e-12 < b < 1.0 - 1e-12) + [1.0]
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b - a > 1e-12]


def max_curvature(curve: CurveSource, grid: int = 2048) -> float:
    """Largest curvature over the curve's smooth pieces."""
    if curve.piecewise_linear:
        raise CurveValidationError(
            "tube bounds are defined for smooth curves; a polyline has no curvature maximum")
    grid = max(int(grid), 64)
    best_k = -1.0
    for a, b in _smooth_piece_windows(curve):
        inset = 1e-9 * (b - a)  # keep evaluations off the breakpoints
        ts = np.linspace(a + inset, b - inset, grid)
        ks = np.asarray(curvature_at(curve, ts))
        j = int(np.argmax(ks))
        lo = ts[max(j - 1, 0)]
        hi = ts[min(j + 1, grid - 1)]
        _, neg = golden_section_min(lambda t: -curvature_at(curve, float(t)), lo, hi)
        best_k = max(best_k, -neg)
    return float(best_k)


# ---------------------------------------------------------------------------
# d_min
# ---------------------------------------------------------------------------

def _wrap_sep(s: float, t: float, closed: bool) -> float:
    sep = abs(s - t)
    return min(sep, 1.0 - sep) if closed else sep


def _descent_refine(curve: CurveSource, s0: float, t0: float, h: float,
                    band: float, closed: bool) -> float:
    """Coordinate-descent refinement of a grid local minimum of the chord
    length.  Needs no tangent information, so it also pins down minima that
    sit on corners of a piecewise curve."""

    def dist(s, t):
        if closed:
            s %= 1.0
            t %= 1.0
        else:
            s = float(np.clip(s, 0.0, 1.0))
            t = float(np.clip(t, 0.0, 1.0))
        if _wrap_sep(s, t, closed) <= band:
            return np.inf
        return float(np.linalg.norm(np.asarray(curve.eval(s)) - np.asarray(curve.eval(t))))

    s, t = float(s0), float(t0)
    for _ in range(6):
        s, _ = golden_section_min(lambda x: dist(x, t), s - h, s + h, tol=1e-9)
        t, _ = golden_section_min(lambda x: dist(s, x), t - h, t + h, tol=1e-9)
        h *= 0.35
    return dist(s, t)


def _critical_refine(curve: CurveSource, s0: float, t0: float, h: float,
                     band: float, closed: bool):
    """Polish a candidate doubly-critical pair by alternating bisection.

    Solves (C(s) - C(t)) . C'(s) = 0 in s, then the matching condition in t,
    repeatedly.  Handles degenerate critical ridges (every diameter of a
    circle) where a Newton step would see a singular system.  Returns the
    chord length, or None when the candidate fails to converge to a genuine
    perpendicular foot on both ends.
    """

    def clamp(x):
        return x % 1.0 if closed else float(np.clip(x, 0.0, 1.0))

    def point(x):
        return np.asarray(curve.eval(clamp(x)), dtype=float)

    def g(x_s, x_t, along_s):
        w = point(x_s) - point(x_t)
        d1 = np.asarray(curve.deriv1(clamp(x_s if along_s else x_t)), dtype=float)
        return float(np.dot(w, d1))

    def bisect(f, lo, hi):
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo * fhi > 0.0:
            return None
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0:
                return mid
            if flo * fm < 0.0:
                hi = mid
            else:
                lo, flo = mid, fm
        return 0.5 * (lo + hi)

    s, t = float(s0), float(t0)
    for _ in range(24):
        s_new = bisect(lambda x: g(x, t, True), s - h, s + h)
        if s_new is None:
            s_new = bisect(lambda x: g(x, t, True), s - 2 * h, s + 2 * h)
        if s_new is not None:
            s = s_new
        t_new = bisect(lambda x: g(s, x, False), t - h, t + h)
        if t_new is None:
            t_new = bisect(lambda x: g(s, x, False), t - 2 * h, t + 2 * h)
        if t_new is not None:
            t = t_new
        if s_new is None and t_new is None:
            break
        if abs(g(s, t, True)) < 1e-11 and abs(g(s, t, False)) < 1e-11:
            break
    s, t = clamp(s), clamp(t)
    if _wrap_sep(s, t, closed) <= band:
        return None
    w = point(s) - point(t)
    d = float(np.linalg.norm(w))
    scale = max(1.0, d) * max(1.0, float(np.linalg.norm(curve.deriv1(s))),
                              float(np.linalg.norm(curve.deriv1(t))))
    if abs(g(s, t, True)) > 1e-7 * scale or abs(g(s, t, False)) > 1e-7 * scale:
        return None
    return d


def min_separation_distance(curve: CurveSource, grid: int = 512,
                            band: float = DEFAULT_BAND) -> float:
    """Minimum over doubly-critical chords |C(s) - C(t)|.

    A chord is doubly critical when it is perpendicular to the curve at
    both feet, i.e. both partial derivatives of the squared chord length
    vanish; the critical point may be a minimum, a saddle, or a flat ridge
    (every diameter of a circle qualifies).  Candidates come from a grid
    scan with the diagonal band masked (modular separation for closed
    curves): cells where both perpendicularity residuals straddle zero,
    plus plain grid local minima of the chord length, which also catch
    pinches at corners of piecewise curves where tangents jump.  Returns
    infinity when no doubly-critical pair exists; raises NotSimpleError
    when a refined chord collapses below the self-intersection tolerance.
    """
    grid = max(int(grid), 128)
    if curve.closed:
        ts = np.linspace(0.0, 1.0, grid, endpoint=False)
    else:
        ts = np.linspace(0.0, 1.0, grid)
    pts = np.atleast_2d(curve.eval(ts))
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    sep = np.abs(ts[:, None] - ts[None, :])
    if curve.closed:
        sep = np.minimum(sep, 1.0 - sep)
    banned = sep <= band
    masked = np.where(banned, np.inf, d)

    def rolled(a, di, dj):
        return np.roll(np.roll(a, -di, axis=0), -dj, axis=1)

    # residuals of the two perpendicularity conditions at every grid pair
    derivs = np.atleast_2d(np.asarray(curve.deriv1(ts), dtype=float))
    if derivs.shape != pts.shape:
        derivs = np.array([curve.deriv1(float(u)) for u in ts], dtype=float)
    g_s = np.einsum("ijk,ik->ij", diff, derivs)
    g_t = np.einsum("ijk,jk->ij", diff, derivs)

    # a cell qualifies when both residuals change sign among its corners
    corner_stacks = [rolled(g_s, di, dj) for di in (0, 1) for dj in (0, 1)]
    smin = np.minimum.reduce(corner_stacks)
    smax = np.maximum.reduce(corner_stacks)
    corner_stacks = [rolled(g_t, di, dj) for di in (0, 1) for dj in (0, 1)]
    tmin = np.minimum.reduce(corner_stacks)
    tmax = np.maximum.reduce(corner_stacks)
    off_band = np.logical_and.reduce([rolled(~banned, di, dj)
                                      for di in (0, 1) for dj in (0, 1)])
    crit_cells = (smin <= 0.0) & (smax >= 0.0) & (tmin <= 0.0) & (tmax >= 0.0) & off_band
    if not curve.closed:
        crit_cells[-1, :] = False
        crit_cells[:, -1] = False

    # plain local minima of the masked chord length
    if curve.closed:
        local_min = ~banned
    else:
        local_min = ~banned
        local_min[[0, -1], :] = False
        local_min[:, [0, -1]] = False
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = np.roll(np.roll(masked, di, axis=0), dj, axis=1)
            shifted_ok = np.roll(np.roll(~banned, di, axis=0), dj, axis=1)
            local_min &= shifted_ok & (masked <= shifted)

    h = 1.5 / grid
    best = np.inf
    for cells, refine in ((crit_cells, _critical_refine), (local_min, _descent_refine)):
        idx = np.argwhere(cells)
        if idx.shape[0] == 0:
            continue
        vals = masked[cells]
        order = np.argsort(vals)
        idx = idx[order][:128]  # refine the shallowest candidates only
        for i, j in idx:
            got = refine(curve, ts[i], ts[j], h, band, curve.closed)
            if got is not None:
                best = min(best, got)
    if best < SELF_INTERSECTION_TOL:
        raise NotSimpleError("curve self-intersects: doubly-critical chord collapsed")
    return float(best)


# ---------------------------------------------------------------------------
# r_end
# ---------------------------------------------------------------------------

def end_radius(curve: CurveSource, grid: int = 4096) -> float:
    """Largest radius an endpoint ball can reach while meeting the curve in a
    single arc (infinity for closed curves or when the curve never returns).

    Walk h(t) = |C(t) - e| away from each endpoint; past the first local
    maximum of h every sample is a returning stretch, and the smallest h
    there caps the ball.  Monotone recession means the cap is the far-end
    distance.
    """
    if curve.closed:
        return np.inf
    grid = max(int(grid), 256)
    ts = np.linspace(0.0, 1.0, grid)
    pts = np.atleast_2d(curve.eval(ts))
    best = np.inf
    for endpoint, ordered in ((pts[0], pts), (pts[-1], pts[::-1])):
        h = np.linalg.norm(ordered - endpoint, axis=1)
        scale = max(float(h.max()), 1.0)
        drops = np.nonzero(np.diff(h) < -1e-12 * scale)[0]
        peak = int(drops[0]) if drops.size else grid - 1
        tail = h[peak:]
        j = peak + int(np.argmin(tail))
        # refine around the discrete minimum (stays within the tail)
        lo = max(peak, j - 1)
        hi = min(grid - 1, j + 1)
        if hi > lo:
            frac_lo, frac_hi = lo / (grid - 1), hi / (grid - 1)

            def f(u, _e=endpoint, _flip=(ordered is not pts)):
                t = 1.0 - u if _flip else u
                q = np.asarray(curve.eval(float(np.clip(t, 0.0, 1.0))))
                return float(np.linalg.norm(q - _e))

            _, val = golden_section_min(f, frac_lo, frac_hi)
        else:
            val = float(h[j])
        best = min(best, val)
    return float(best)


# ---------------------------------------------------------------------------
# certified radius
# ---------------------------------------------------------------------------

def tube_radius(curve: CurveSource, safety: float = 0.9, grid: int = 2048,
                sep_grid: int = 512, band: float = DEFAULT_BAND) -> TubeRadius:
    """Certified embedded-tube radius safety * min(1/kappa_max, d_min/2, r_end)."""
    if not (0.0 < safety < 1.0):
        raise CurveValidationError("safety factor must lie in (0, 1)")
    kappa = max_curvature(curve, grid=grid)
    bend_bound = np.inf if kappa < 1e-15 else 1.0 / kappa
    d_min = min_separation_distance(curve, grid=sep_grid, band=band)
    r_end = end_radius(curve)
    r = safety * min(bend_bound, d_min / 2.0, r_end)
    if not np.isfinite(r) or r <= 0.0:
        raise CurveValidationError("no finite positive tube radius for this curve")
    return TubeRadius(r=float(r), kappa_max=float(kappa), d_min=float(d_min),
                      r_end=float(r_end), safety=float(safety))


# ---------------------------------------------------------------------------
# cross-section disk witness
# ---------------------------------------------------------------------------

def disks_intersect(c1, n1, c2, n2, r: float, tol: float = 1e-12) -> bool:
    """Do two radius-r disks with centers c and unit-ish normals n intersect?"""
    c1 = np.asarray(c1, float)
    c2 = np.asarray(c2, float)
    n1 = np.asarray(n1, float) / np.linalg.norm(n1)
    n2 = np.asarray(n2, float) / np.linalg.norm(n2)
    scale = max(np.linalg.norm(c2 - c1), 1.0)
    cross = np.cross(n1, n2)
    cn = np.linalg.norm(cross)
    if cn < tol:
        # parallel planes: disjoint unless coplanar
        if abs(float((c2 - c1) @ n1)) > tol * scale:
            return False
        return float(np.linalg.norm(c2 - c1)) <= 2.0 * r
    d = cross / cn
    w = n2 - float(n1 @ n2) * n1
    t = float((c2 - c1) @ n2) / float(w @ n2)
    p0 = c1 + t * w  # a point on the plane intersection line
    spans = []
    for c in (c1, c2):
        off = c - p0
        along = float(off @ d)
        perp2 = float(off @ off) - along * along
        if perp2 > r * r:
            return False  # this disk never reaches the line
        half = np.sqrt(max(r * r - perp2, 0.0))
        spans.append((along - half, along + half))
    return max(spans[0][0], spans[1][0]) <= min(spans[0][1], spans[1][1])


def disk_pair_witness(curve: CurveSource, r: float, pairs: int = 10000,
                      band: float = DEFAULT_BAND, seed: int = 0) -> int:
    """Sample random parameter pairs past the band and count cross-section
    disk intersections at radius r (0 for a sound tube radius)."""
    rng = np.random.default_rng(seed)
    bad = 0
    got = 0
    while got < pairs:
        m = (pairs - got) * 2
        s = rng.uniform(0.0, 1.0, m)
        t = rng.uniform(0.0, 1.0, m)
        sep = np.abs(s - t)
        if curve.closed:
            sep = np.minimum(sep, 1.0 - sep)
        keep = sep > band
        s, t = s[keep], t[keep]
        take = min(pairs - got, s.size)
        c1s = np.atleast_2d(curve.eval(s[:take]))
        c2s = np.atleast_2d(curve.eval(t[:take]))
        n1s = np.atleast_2d(curve.deriv1(s[:take]))
        n2s = np.atleast_2d(curve.deriv1(t[:take]))
        for k in range(take):
            if disks_intersect(c1s[k], n1s[k], c2s[k], n2s[k], r):
                bad += 1
        got += take
    return bad
