"""Total curvature of polylines, smooth curves, and piecewise-smooth curves.

Polylines turn only at vertices: total curvature is the sum of exterior
angles.  Smooth arcs accumulate integral |kappa| ds, computed here as
integral |C' x C''| / |C'|^2 dt by adaptive Simpson quadrature.  Piecewise
curves get both contributions, with a corner term wherever the one-sided
tangents disagree (including the seam of a closed curve).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import CurveSource, ParamWindow, Polyline, one_sided_tangents
from .errors import CurveValidationError, QuadratureError

DEGENERATE_TANGENT = 1e-12
DEFAULT_QUAD_TOL = 1e-9


class _End:
    """Sentinel: the remaining curvature never reaches the requested budget."""

    def __repr__(self):
        return "END"


END = _End()


# ---------------------------------------------------------------------------
# exterior angles / polylines
# ---------------------------------------------------------------------------

def exterior_angle(v1, v2) -> float:
    """Turning angle in [0, pi] from direction v1 to direction v2.

    atan2 of (|v1 x v2|, v1.v2) rather than acos, so near-parallel pairs do
    not lose precision.  Degenerate inputs are an error, never a silent zero.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 < DEGENERATE_TANGENT or n2 < DEGENERATE_TANGENT:
        raise CurveValidationError("exterior angle of a numerically zero direction")
    cross = np.linalg.norm(np.cross(v1, v2))
    dot = float(np.dot(v1, v2))
    return float(np.arctan2(cross, dot))


def _exterior_angles_batch(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    nu = np.linalg.norm(u, axis=1)
    nw = np.linalg.norm(w, axis=1)
    if np.any(nu < DEGENERATE_TANGENT) or np.any(nw < DEGENERATE_TANGENT):
        raise CurveValidationError("exterior angle of a numerically zero direction")
    cross = np.linalg.norm(np.cross(u, w), axis=1)
    dot = np.einsum("ij,ij->i", u, w)
    return np.arctan2(cross, dot)


def pl_total_curvature(p: Polyline) -> "TotalCurvature":
    """Sum of exterior angles: interior vertices, plus the two seam-adjacent
    angles when the polyline is closed.  All the turning is corner turning."""
    dirs = p.segment_dirs()
    if p.closed:
        u = dirs
        w = np.roll(dirs, -1, axis=0)
    else:
        if p.n < 3:
            return TotalCurvature(0.0, 0.0, 0.0)
        u = dirs[:-1]
        w = dirs[1:]
    total = float(np.sum(_exterior_angles_batch(u, w)))
    return TotalCurvature(value=total, smooth_part=0.0, corner_part=total)


# ---------------------------------------------------------------------------
# pointwise curvature and adaptive quadrature
# ---------------------------------------------------------------------------

def curvature_at(curve: CurveSource, t):
    """Curvature |C' x C''| / |C'|^3 at parameter(s) t."""
    d1 = np.asarray(curve.deriv1(t), dtype=float)
    d2 = np.asarray(curve.deriv2(t), dtype=float)
    if d1.ndim == 1:
        speed = np.linalg.norm(d1)
        if speed < DEGENERATE_TANGENT:
            raise CurveValidationError("curvature at a point with zero speed")
        return float(np.linalg.norm(np.cross(d1, d2)) / speed ** 3)
    speed = np.linalg.norm(d1, axis=1)
    if np.any(speed < DEGENERATE_TANGENT):
        raise CurveValidationError("curvature at a point with zero speed")
    return np.linalg.norm(np.cross(d1, d2), axis=1) / speed ** 3


def _turn_density(curve: CurveSource):
    """Vectorized integrand |C' x C''| / |C'|^2 (curvature times speed)."""

    def f(t):
        d1 = np.atleast_2d(np.asarray(curve.deriv1(t), dtype=float))
        d2 = np.atleast_2d(np.asarray(curve.deriv2(t), dtype=float))
        sp2 = np.einsum("ij,ij->i", d1, d1)
        if np.any(sp2 < DEGENERATE_TANGENT ** 2):
            raise CurveValidationError("zero-speed point inside a smooth piece")
        return np.linalg.norm(np.cross(d1, d2), axis=1) / sp2

    return f


MAX_ACTIVE_INTERVALS = 1 << 20


def adaptive_simpson(f, a: float, b: float, tol: float,
                     max_depth: int = 45) -> float:
    """Adaptive Simpson quadrature of a vectorized integrand over [a, b].

    Keeps a worklist of active intervals and evaluates every point a
    refinement level needs in one vectorized call.  Richardson-corrected;
    raises QuadratureError if an interval fails to converge before max_depth,
    or if the worklist outgrows MAX_ACTIVE_INTERVALS (a tolerance below what
    the arithmetic supports would otherwise double the worklist every level).
    """
    if not b > a:
        raise CurveValidationError("quadrature needs b > a")
    a = float(a)
    b = float(b)
    xs = np.array([a, 0.5 * (a + b), b])
    f0 = np.asarray(f(xs), dtype=float)
    lo, hi = np.array([a]), np.array([b])
    fl, fc, fr = f0[0:1], f0[1:2], f0[2:3]
    s = (hi - lo) / 6.0 * (fl + 4.0 * fc + fr)
    tols = np.array([float(tol)])
    total = 0.0
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        fvals = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        flm, frm = fvals[: lm.size], fvals[lm.size:]
        s_left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fc)
        s_right = (hi - mid) / 6.0 * (fc + 4.0 * frm + fr)
        err = s_left + s_right - s
        done = np.abs(err) <= 15.0 * tols
        total += float(np.sum((s_left + s_right + err / 15.0)[done]))
        if bool(np.all(done)):
            return total
        k = ~done
        if 2 * int(np.sum(k)) > MAX_ACTIVE_INTERVALS:
            raise QuadratureError(
                f"quadrature worklist exceeded {MAX_ACTIVE_INTERVALS} intervals "
                f"at tol={tol}; the tolerance is below what the integrand supports")
        lo, hi = (np.concatenate([lo[k], mid[k]]), np.concatenate([mid[k], hi[k]]))
        fl, fc, fr, s = (
            np.concatenate([fl[k], fc[k]]),
            np.concatenate([flm[k], frm[k]]),
            np.concatenate([fc[k], fr[k]]),
            np.concatenate([s_left[k], s_right[k]]),
        )
        tols = np.concatenate([tols[k] / 2.0, tols[k] / 2.0])
    raise QuadratureError(f"quadrature did not converge to tol={tol} within depth {max_depth}")


# ---------------------------------------------------------------------------
# total curvature of smooth / piecewise-smooth windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TotalCurvature:
    """Total curvature split into the smooth integral and the corner sum."""

    value: float
    smooth_part: float
    corner_part: float


def _piece_integral(density, a: float, b: float, tol: float) -> float:
    """Quadrature of one smooth piece.

    Evaluators follow the right-side convention at a breakpoint, so a sample
    landing exactly on b would read the next piece's density and a jump there
    stalls the adaptive refinement.  Sampling is therefore pulled a relative
    1e-12 inside the piece, which perturbs the integral far below tol.
    """
    shrink = 1e-12 * (b - a)
    aa, bb = a + shrink, b - shrink

    def f(x):
        return density(np.clip(np.asarray(x, dtype=float), aa, bb))

    return adaptive_simpson(f, a, b, tol)


def _interior_breakpoints(curve: CurveSource, lo: float, hi: float,
                          include_lo: bool = False) -> list:
    """Breakpoints inside (lo, hi); optionally include one sitting at lo."""
    eps = 1e-12
    out = []
    for b in curve.breakpoints:
        if lo + eps < b < hi - eps:
            out.append(float(b))
        elif include_lo and abs(b - lo) <= eps and b < hi - eps:
            out.append(float(b))
    return sorted(out)


def _corner_angle(curve: CurveSource, t0: float) -> float:
    vm, vp = one_sided_tangents(curve, t0)
    return exterior_angle(vm, vp)


def smooth_total_curvature(curve: CurveSource, window: Optional[ParamWindow] = None,
                           tol: float = DEFAULT_QUAD_TOL) -> float:
    """Integral of |kappa| ds over a window containing no breakpoints."""
    lo, hi = (0.0, 1.0) if window is None else (window.lo, window.hi)
    if _interior_breakpoints(curve, lo, hi):
        raise CurveValidationError("window contains breakpoints; use piecewise_total_curvature")
    return _piece_integral(_turn_density(curve), lo, hi, tol)


def piecewise_total_curvature(curve: CurveSource, window: Optional[ParamWindow] = None,
                              tol: float = DEFAULT_QUAD_TOL) -> TotalCurvature:
    """Total curvature over a window: smooth integral plus interior corners.

    Corners strictly inside the window count; window endpoints do not.  The
    seam of a closed curve counts exactly when the window is the full curve.
    """
    lo, hi = (0.0, 1.0) if window is None else (window.lo, window.hi)
    cuts = [lo] + _interior_breakpoints(curve, lo, hi) + [hi]
    n_pieces = len(cuts) - 1
    smooth = 0.0
    density = _turn_density(curve)
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a > 1e-14:
            smooth += _piece_integral(density, a, b, tol / n_pieces)
    corners = sum(_corner_angle(curve, b) for b in cuts[1:-1])
    if curve.closed and lo <= 1e-12 and hi >= 1.0 - 1e-12:
        corners += _corner_angle(curve, 0.0)
    return TotalCurvature(value=smooth + corners, smooth_part=smooth,
                          corner_part=corners)


def cumulative_total_curvature(curve: CurveSource, t: float,
                               tol: float = DEFAULT_QUAD_TOL) -> float:
    """Total curvature accumulated over [0, t] (corners strictly inside)."""
    if not (0.0 <= t <= 1.0):
        raise CurveValidationError("parameter outside [0, 1]")
    if t <= 1e-14:
        return 0.0
    return piecewise_total_curvature(curve, ParamWindow(0.0, float(t)), tol=tol).value


def _increment(curve: CurveSource, a: float, b: float, include_a_corner: bool,
               tol: float) -> float:
    """Curvature over [a, b]: smooth part, corners in (a, b), optionally at a."""
    if b - a <= 1e-15:
        return 0.0
    bps = _interior_breakpoints(curve, a, b, include_lo=include_a_corner)
    cuts = [a] + [x for x in bps if x > a + 1e-15] + [b]
    density = _turn_density(curve)
    smooth = sum(_piece_integral(density, u, v, tol) for u, v in zip(cuts[:-1], cuts[1:])
                 if v - u > 1e-14)
    return smooth + sum(_corner_angle(curve, x) for x in bps)


def advance_by_budget(curve: CurveSource, t_start: float, budget: float,
                      param_tol: float = 1e-10,
                      quad_tol: float = 1e-11):
    """Smallest t >= t_start at which the curvature over [t_start, t] reaches
    `budget`, or the END sentinel when the remaining curvature falls short.

    Bisection on the monotone cumulative function; each step integrates only
    the half-interval below the midpoint, so the total quadrature work stays
    near twice one full-window integral.  When a corner jumps the cumulative
    past the budget the returned t is the corner parameter.
    """
    if budget <= 0:
        raise CurveValidationError("budget must be positive")
    if not (0.0 <= t_start < 1.0):
        raise CurveValidationError("t_start must lie in [0, 1)")
    remaining = _increment(curve, t_start, 1.0, include_a_corner=False, tol=quad_tol)
    if remaining < budget - 1e-12:
        return END
    lo, hi = float(t_start), 1.0
    f_lo = 0.0
    while hi - lo > param_tol:
        mid = 0.5 * (lo + hi)
        f_mid = f_lo + _increment(curve, lo, mid,
                                  include_a_corner=(lo > t_start), tol=quad_tol)
        if f_mid >= budget:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return hi
