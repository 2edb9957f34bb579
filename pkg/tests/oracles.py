"""Slow, independent recomputation routes used to pin expected test values.

The library is checked against these rather than against itself: dense
grids instead of adaptive refinement, freshly written symbolic derivatives
instead of the catalog's closures, and a from-scratch evaluation of the
certificate criteria at ten times the sampling density.

One deliberate exception to independence: turning sums reuse the library's
exterior-angle primitive, its restriction-vertex selection, and its
left-to-right summation order.  A window whose turning lands exactly on
the pi/2 threshold must present the identical float to both routes or a
strict comparison becomes a coin flip.  Every other quantity here has a
real margin and is recomputed from scratch.
"""

import numpy as np
import sympy as sp
from scipy.spatial import cKDTree, ConvexHull, QhullError

from isoknot.curvature import exterior_angle

# Matches the slack the certifier allows when deciding whether a foot
# parameter lies inside a window.
PARAM_SLACK = 1e-9


def kd_hausdorff(a, b):
    """Symmetric Hausdorff distance between two point clouds."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ta = cKDTree(a)
    tb = cKDTree(b)
    d_ab = tb.query(a)[0].max()
    d_ba = ta.query(b)[0].max()
    return float(max(d_ab, d_ba))


def curve_cloud(curve, n):
    """n points on a curve, dropping the duplicate seam sample when closed."""
    ts = np.linspace(0.0, 1.0, n, endpoint=not curve.closed)
    return np.array([curve.eval(float(t)) for t in ts])


def polyline_cloud(poly, n):
    ts = np.linspace(0.0, 1.0, n)
    return np.array([poly.eval(float(t)) for t in ts])


def torus_knot_kappa_max_oracle(p, q, big_r, small_r, n=100_000):
    """Max curvature of a (p, q) torus knot from scratch.

    Builds the parametrization symbolically, differentiates twice with
    sympy, and takes the max of |C' x C''| / |C'|^3 on a dense grid with
    one parabolic refinement around the winning sample.
    """
    t = sp.Symbol("t", real=True)
    thp = 2 * sp.pi * p * t
    thq = 2 * sp.pi * q * t
    rad = big_r + small_r * sp.cos(thq)
    comps = sp.Matrix([rad * sp.cos(thp), rad * sp.sin(thp), small_r * sp.sin(thq)])
    d1 = comps.diff(t)
    d2 = d1.diff(t)
    cross = d1.cross(d2)
    kappa_expr = sp.sqrt(cross.dot(cross)) / sp.Pow(d1.dot(d1), sp.Rational(3, 2))
    f = sp.lambdify(t, kappa_expr, "numpy")
    ts = np.linspace(0.0, 1.0, n, endpoint=False)
    vals = np.asarray(f(ts), dtype=float)
    j = int(np.argmax(vals))
    # three-point parabolic peak through the winning grid cell
    tj = ts[j]
    h = 1.0 / n
    y0, y1, y2 = f(tj - h), f(tj), f(tj + h)
    denom = y0 - 2.0 * y1 + y2
    shift = 0.0 if abs(denom) < 1e-30 else 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    refined = float(f(tj + shift * h))
    return max(float(vals[j]), refined)


def helix_offset_total_curvature(a, b, d, turns=1.0):
    """Closed form: the normal offset of a helix is again a helix.

    Pushing (a cos, a sin, b theta) a distance d along the inward normal
    leaves a helix of radius a - d and the same pitch, so the total
    curvature over `turns` turns is 2 pi turns (a-d) / sqrt((a-d)^2 + b^2).
    """
    rr = a - d
    return 2.0 * np.pi * turns * rr / float(np.hypot(rr, b))


def dense_point_to_curve(point, curve, n, window=None):
    """Distance from a point to a curve by dense sampling plus refinement.

    Returns (distance, parameter).  Written as a plain grid walk with a
    ternary-search polish so it shares nothing with the library's
    bracketed golden-section routine.
    """
    q = np.asarray(point, dtype=float)
    if window is None:
        lo, hi = 0.0, 1.0
        wrap = curve.closed
    else:
        lo, hi = window
        wrap = False
    ts = np.linspace(lo, hi, n, endpoint=not wrap)
    pts = np.array([curve.eval(float(t) % 1.0 if wrap else float(t)) for t in ts])
    d2 = np.sum((pts - q) ** 2, axis=1)
    j = int(np.argmin(d2))
    if wrap:
        a = ts[(j - 1) % n]
        b = ts[(j + 1) % n]
        if b < a:
            b += 1.0
        if a > ts[j]:
            a -= 1.0
    else:
        a = ts[max(j - 1, 0)]
        b = ts[min(j + 1, n - 1)]

    def f(t):
        u = t % 1.0 if wrap else min(max(t, lo), hi)
        return float(np.sum((np.asarray(curve.eval(u)) - q) ** 2))

    for _ in range(90):
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if f(m1) <= f(m2):
            b = m2
        else:
            a = m1
    tm = 0.5 * (a + b)
    if wrap:
        tm %= 1.0
    else:
        tm = min(max(tm, lo), hi)
    return float(np.sqrt(f(tm))), float(tm)


def _in_window(t, lo, hi, closed):
    """Foot-parameter membership with the certifier's modular slack."""
    for shift in (0.0, 1.0, -1.0) if closed else (0.0,):
        u = t + shift
        if lo - PARAM_SLACK <= u <= hi + PARAM_SLACK:
            return True
    return False


def restriction_points(approx, lo, hi):
    """The approximant's vertex chain over [lo, hi].

    Mirrors the certifier's rule exactly (strict interior vertices between
    evaluated endpoints, deduplicated at 1e-12 relative): the turning sum
    over these points must be bitwise identical between the two routes.
    """
    inner = [approx.vertices[j] for j in range(approx.n)
             if lo < approx.params[j] < hi]
    pts = [np.asarray(approx.eval(lo), dtype=float)]
    pts.extend(np.asarray(v, dtype=float) for v in inner)
    pts.append(np.asarray(approx.eval(hi), dtype=float))
    scale = max(1.0, max(float(np.max(np.abs(p))) for p in pts))
    out = [pts[0]]
    for q in pts[1:]:
        if float(np.linalg.norm(q - out[-1])) > 1e-12 * scale:
            out.append(q)
    return np.array(out)


def chain_turning(points):
    """Exterior-angle sum along a vertex chain, left to right.

    Shares the library's angle primitive on purpose; see module docstring.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 3:
        return 0.0
    d = np.diff(pts, axis=0)
    return float(sum(exterior_angle(d[j], d[j + 1]) for j in range(d.shape[0] - 1)))


def _hull_probe_points(points):
    """Probe set for the containment check: every chain point plus every
    pairwise midpoint.  A superset of any hull's vertices and edge
    midpoints, so a clean pass here implies the hull passes too."""
    pts = np.asarray(points, dtype=float)
    probes = [pts]
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            probes.append(0.5 * (pts[i] + pts[j]))
    mids = [p for p in probes[1:]]
    if mids:
        return np.vstack([pts, np.array(mids)])
    return pts


def recheck_window(curve, approx, window, eps_w, r, density=10):
    """Re-evaluate one window's four certificate criteria from scratch.

    density scales every sampling grid tenfold by default.  Returns a dict
    of booleans plus the turning float (for bitwise comparison).
    """
    lo, hi = window.lo, window.hi
    ext_lo = lo - eps_w
    ext_hi = hi + eps_w
    rest = restriction_points(approx, lo, hi)
    turning = chain_turning(rest)
    budget_ok = turning < np.pi / 2.0

    n_p2c = 128 * density
    containment_ok = True
    for q in _hull_probe_points(rest):
        dist, t_foot = dense_point_to_curve(q, curve, n_p2c)
        if dist >= r:
            containment_ok = False
            break
        if not _in_window(t_foot, ext_lo, ext_hi, curve.closed):
            containment_ok = False
            break

    c_lo = np.asarray(curve.eval(lo % 1.0 if curve.closed and lo >= 1.0 else lo))
    hi_t = hi % 1.0 if curve.closed and hi >= 1.0 else hi
    c_hi = np.asarray(curve.eval(hi_t))
    end_dist = max(float(np.linalg.norm(rest[0] - c_lo)),
                   float(np.linalg.norm(rest[-1] - c_hi)))
    endpoints_ok = end_dist < r / 2.0

    n_chord = 33 * density
    n_win = 65 * density
    chord = np.linspace(0.0, 1.0, n_chord)[:, None] * (rest[-1] - rest[0]) + rest[0]
    ts = np.linspace(lo, hi, n_win)
    if curve.closed:
        ts = np.where(ts >= 1.0, ts - 1.0, ts)
    sub = np.array([curve.eval(float(t)) for t in ts])
    hausdorff_ok = kd_hausdorff(chord, sub) < r / 2.0

    return {
        "turning": turning,
        "budget_ok": budget_ok,
        "containment_ok": containment_ok,
        "endpoints_ok": endpoints_ok,
        "hausdorff_ok": hausdorff_ok,
        "ok": budget_ok and containment_ok and endpoints_ok and hausdorff_ok,
    }


def recheck_approximant(curve, approx, partition, r, density=10):
    """Independent verdict on a full certificate: (passed, per-window list)."""
    rows = [recheck_window(curve, approx, w, partition.eps_w, r, density)
            for w in partition.windows]
    return all(row["ok"] for row in rows), rows


def brute_min_separation(curve, n=2000, band=0.01, max_cells=256):
    """Doubly-critical chord search by brute force on an n x n grid.

    A chord C(s)C(t) is doubly critical when it is perpendicular to the
    curve at both feet.  Scans the two perpendicularity residuals
    w . C'(s) and w . C'(t) (w = C(s) - C(t)) over the full grid, keeps
    cells where both straddle zero away from the diagonal band, and
    refines each by recursive quadrant subdivision.  Grid local minima of
    the chord length are polished too (compass search), covering pinches
    at tangent discontinuities.  Returns inf when nothing qualifies.
    """
    closed = curve.closed
    ts = np.linspace(0.0, 1.0, n, endpoint=not closed)
    pts = np.array([curve.eval(float(t)) for t in ts])
    der = np.array([curve.deriv1(float(t)) for t in ts])

    pd_diag = np.einsum("ij,ij->i", pts, der)
    g_s = pd_diag[:, None] - der @ pts.T          # (C(s)-C(t)) . C'(s)
    g_t = pts @ der.T - pd_diag[None, :]          # (C(s)-C(t)) . C'(t)
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)

    gap = np.abs(ts[:, None] - ts[None, :])
    if closed:
        gap = np.minimum(gap, 1.0 - gap)
    banned = gap <= band
    masked = np.where(banned, np.inf, d2)

    def rolled(a, di, dj):
        return np.roll(np.roll(a, -di, axis=0), -dj, axis=1)

    corners = [(0, 0), (0, 1), (1, 0), (1, 1)]
    smin = np.minimum.reduce([rolled(g_s, *c) for c in corners])
    smax = np.maximum.reduce([rolled(g_s, *c) for c in corners])
    tmin = np.minimum.reduce([rolled(g_t, *c) for c in corners])
    tmax = np.maximum.reduce([rolled(g_t, *c) for c in corners])
    off_band = np.logical_and.reduce([rolled(~banned, *c) for c in corners])
    crit = (smin <= 0) & (smax >= 0) & (tmin <= 0) & (tmax >= 0) & off_band
    if not closed:
        crit[-1, :] = False
        crit[:, -1] = False

    local_min = ~banned
    if not closed:
        local_min[[0, -1], :] = False
        local_min[:, [0, -1]] = False
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            local_min &= rolled(~banned, di, dj) & (masked <= rolled(masked, di, dj))

    def clamp(x):
        return x % 1.0 if closed else min(max(x, 0.0), 1.0)

    def w_of(s, t):
        return np.asarray(curve.eval(clamp(s))) - np.asarray(curve.eval(clamp(t)))

    def residuals(s, t):
        w = w_of(s, t)
        return (float(w @ np.asarray(curve.deriv1(clamp(s)))),
                float(w @ np.asarray(curve.deriv1(clamp(t)))))

    h0 = ts[1] - ts[0]

    def refine_critical(i, j):
        s_lo, t_lo, h = float(ts[i]), float(ts[j]), h0
        for _ in range(40):
            hh = h / 2.0
            found = None
            for ds in (0.0, hh):
                for dt in (0.0, hh):
                    cs = [residuals(s_lo + ds + a, t_lo + dt + b)
                          for a in (0.0, hh) for b in (0.0, hh)]
                    rs = [c[0] for c in cs]
                    rt = [c[1] for c in cs]
                    if min(rs) <= 0 <= max(rs) and min(rt) <= 0 <= max(rt):
                        found = (s_lo + ds, t_lo + dt)
                        break
                if found:
                    break
            if not found:
                break
            s_lo, t_lo = found
            h = hh
            if h < 1e-13:
                break
        s, t = s_lo + h / 2.0, t_lo + h / 2.0
        if (min(abs(s - t), 1.0 - abs(s - t)) if closed else abs(s - t)) <= band:
            return None
        w = w_of(s, t)
        d = float(np.linalg.norm(w))
        r1, r2 = residuals(s, t)
        scale = max(1.0, d) * max(1.0, float(np.linalg.norm(curve.deriv1(clamp(s)))),
                                  float(np.linalg.norm(curve.deriv1(clamp(t)))))
        if abs(r1) > 1e-6 * scale or abs(r2) > 1e-6 * scale:
            return None
        return d

    def refine_local(i, j):
        s, t = float(ts[i]), float(ts[j])
        v = float(np.sum(w_of(s, t) ** 2))
        h = 1.5 * h0
        for _ in range(80):
            moved = False
            for ds, dt in ((h, 0), (-h, 0), (0, h), (0, -h)):
                s2, t2 = clamp(s + ds), clamp(t + dt)
                g = abs(s2 - t2)
                if closed:
                    g = min(g, 1.0 - g)
                if g <= band:
                    continue
                vv = float(np.sum(w_of(s2, t2) ** 2))
                if vv < v:
                    v, s, t, moved = vv, s2, t2, True
            if not moved:
                h *= 0.5
                if h < 1e-13:
                    break
        return float(np.sqrt(v))

    best = np.inf
    for cells, refine in ((crit, refine_critical), (local_min, refine_local)):
        idx = np.argwhere(cells)
        if idx.shape[0] == 0:
            continue
        vals = masked[cells]
        idx = idx[np.argsort(vals)][:max_cells]
        for i, j in idx:
            got = refine(int(i), int(j))
            if got is not None:
                best = min(best, got)
    return best


def inscribed_hausdorff(curve, poly, per_seg=17):
    """Hausdorff distance from a curve to an inscribed polyline.

    Samples each parameter interval between consecutive vertices and takes
    exact point-to-segment distances against the few segments that can be
    nearest.  Because the samples live on the same parameter lattice as the
    chords, the sampling error scales with the sag itself, so the strict
    decrease under midpoint refinement survives discretization.  The
    opposite direction (polyline to curve) is dominated by this one for
    inscribed polylines and is not sampled.
    """
    verts = np.asarray(poly.vertices, dtype=float)
    n = len(verts)
    if poly.closed:
        a_idx = np.arange(n)
        b_idx = (a_idx + 1) % n
        lows = np.asarray(poly.params, dtype=float)
        highs = np.append(poly.params[1:], 1.0)
    else:
        a_idx = np.arange(n - 1)
        b_idx = a_idx + 1
        lows = np.asarray(poly.params[:-1], dtype=float)
        highs = np.asarray(poly.params[1:], dtype=float)
    seg_a = verts[a_idx]
    seg_b = verts[b_idx]
    nseg = len(seg_a)

    # all samples at once: group k of per_seg samples belongs to segment k
    frac = np.linspace(0.0, 1.0, per_seg)
    ts = lows[:, None] * (1.0 - frac[None, :]) + highs[:, None] * frac[None, :]
    flat = ts.reshape(-1)
    if poly.closed:
        flat = np.where(flat >= 1.0, flat - 1.0, flat)
    pts = np.atleast_2d(np.asarray(curve.eval(flat), dtype=float))

    if nseg <= 16:
        offsets = np.arange(nseg)
    else:
        offsets = np.arange(-2, 3)
    owner = np.repeat(np.arange(nseg), per_seg)
    cand = owner[:, None] + offsets[None, :]
    if poly.closed:
        cand %= nseg
    else:
        cand = np.clip(cand, 0, nseg - 1)

    a = seg_a[cand]
    d = seg_b[cand] - a
    ap = pts[:, None, :] - a
    denom = np.einsum("ijk,ijk->ij", d, d)
    denom[denom == 0.0] = 1.0
    u = np.clip(np.einsum("ijk,ijk->ij", ap, d) / denom, 0.0, 1.0)
    foot = a + u[:, :, None] * d
    dist = np.linalg.norm(pts[:, None, :] - foot, axis=2)
    return float(np.max(np.min(dist, axis=1)))


def hull_contains(points, probe, tol=1e-9):
    """Whether probe lies in the convex hull of points (any rank)."""
    pts = np.asarray(points, dtype=float)
    q = np.asarray(probe, dtype=float)
    c = pts.mean(axis=0)
    a = pts - c
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # degenerate: fall back to a least-squares membership test
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if len(s) else 1.0)))
        if rank == 0:
            return bool(np.linalg.norm(q - c) <= tol)
        basis = vt[:rank]
        resid = (q - c) - basis.T @ (basis @ (q - c))
        if np.linalg.norm(resid) > tol:
            return False
        proj_pts = a @ basis.T
        proj_q = basis @ (q - c)
        if rank == 1:
            return proj_pts[:, 0].min() - tol <= proj_q[0] <= proj_pts[:, 0].max() + tol
        try:
            hull2 = ConvexHull(proj_pts)
        except QhullError:
            return True
        eqs = hull2.equations
        return bool(np.all(eqs[:, :-1] @ proj_q + eqs[:, -1] <= tol))
    eqs = hull.equations
    return bool(np.all(eqs[:, :-1] @ q + eqs[:, -1] <= tol))
