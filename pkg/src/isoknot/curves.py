"""Curve sources, polylines, and the parametric curve catalog.

Every curve lives on the normalized parameter interval [0, 1].  A CurveSource
bundles vectorized evaluators for the point and its first three derivatives
with the list of non-smooth parameters (breakpoints) and the closed flag.
Polylines are the piecewise-linear counterpart: vertex array plus strictly
increasing vertex parameters.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp

from .errors import CurveValidationError

PARAM_TOL = 1e-12


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamWindow:
    """Closed parameter interval [lo, hi] inside [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise CurveValidationError(
                f"parameter window must satisfy 0 <= lo < hi <= 1, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float, tol: float = PARAM_TOL) -> bool:
        return self.lo - tol <= t <= self.hi + tol


@dataclass(frozen=True, eq=False)
class CurveSource:
    """Parametric space curve on [0, 1] with vectorized evaluators.

    eval/deriv1/deriv2 (and deriv3 when available) accept a scalar or an
    array of parameters and return shape (3,) or (n, 3).  `breakpoints` are
    the interior parameters where the curve is only C^0; the evaluators are
    two-sided limits away from them and `one_sided` supplies the directional
    derivatives at them.  `sym` carries sympy component expressions in the
    symbol `t` for curves built from closed-form formulas.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    deriv1: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple = ()
    closed: bool = False
    deriv3: Optional[Callable[[np.ndarray], np.ndarray]] = None
    one_sided: Optional[Callable[[float], tuple]] = None
    sym: Optional[tuple] = None
    piecewise_linear: bool = False
    name: str = ""

    def point(self, t):
        return self.eval(t)


@dataclass(frozen=True, eq=False)
class Polyline:
    """Piecewise-linear curve: vertices (n, 3) at strictly increasing params.

    Open polylines interpolate vertex to vertex over [params[0], params[-1]].
    Closed polylines store each vertex once (params in [0, 1), params[0] = 0)
    and close with the segment from the last vertex back to vertex 0 over
    [params[-1], 1].
    """

    vertices: np.ndarray
    params: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.params, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise CurveValidationError(f"vertices must be (n, 3), got {v.shape}")
        if t.shape != (v.shape[0],):
            raise CurveValidationError("params length must match vertex count")
        n = v.shape[0]
        if n < 2:
            raise CurveValidationError("a polyline needs at least 2 vertices")
        if np.any(np.diff(t) <= 0):
            raise CurveValidationError("params must be strictly increasing")
        if t[0] < -PARAM_TOL or t[-1] > 1.0 + PARAM_TOL:
            raise CurveValidationError("params must lie in [0, 1]")
        seg = np.diff(v, axis=0)
        if np.any(np.linalg.norm(seg, axis=1) == 0.0):
            raise CurveValidationError("consecutive vertices must be distinct")
        if self.closed:
            if n < 3:
                raise CurveValidationError("a closed polyline needs at least 3 vertices")
            if abs(t[0]) > PARAM_TOL:
                raise CurveValidationError("closed polyline params must start at 0")
            if t[-1] >= 1.0 - PARAM_TOL:
                raise CurveValidationError(
                    "closed polyline params must stay below 1 (the seam segment spans [params[-1], 1])")
            if np.linalg.norm(v[-1] - v[0]) == 0.0:
                raise CurveValidationError("closed polyline seam vertices must be distinct")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "params", t)

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    def segment_count(self) -> int:
        return self.n if self.closed else self.n - 1

    def segment_dirs(self) -> np.ndarray:
        """Direction vectors of each segment (closing segment last when closed)."""
        seg = np.diff(self.vertices, axis=0)
        if self.closed:
            seg = np.vstack([seg, self.vertices[0] - self.vertices[-1]])
        return seg

    def eval(self, t):
        """Piecewise-linear interpolation at parameter(s) t."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tp = self.params
        vp = self.vertices
        if self.closed:
            tp = np.append(tp, 1.0)
            vp = np.vstack([vp, self.vertices[:1]])
        lo, hi = tp[0], tp[-1]
        if np.any(t_arr < lo - 1e-9) or np.any(t_arr > hi + 1e-9):
            raise CurveValidationError("parameter outside the polyline's domain")
        tc = np.clip(t_arr, lo, hi)
        out = np.empty((t_arr.size, 3))
        for k in range(3):
            out[:, k] = np.interp(tc, tp, vp[:, k])
        return out[0] if np.isscalar(t) or np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# basic operations
# ---------------------------------------------------------------------------

def eval_point(curve: CurveSource, t: float) -> np.ndarray:
    """Point on the curve at parameter t in [0, 1]."""
    if not (-PARAM_TOL <= t <= 1.0 + PARAM_TOL):
        raise CurveValidationError(f"parameter {t} outside [0, 1]")
    return np.asarray(curve.eval(float(np.clip(t, 0.0, 1.0))), dtype=float)


def one_sided_tangents(curve: CurveSource, t0: float) -> tuple:
    """Directional derivatives (C'(t0-), C'(t0+)).

    At a breakpoint (or the seam of a closed curve) the two sides come from
    the adjoining smooth pieces; anywhere else both sides equal deriv1(t0).
    """
    t0 = float(t0)
    at_seam = curve.closed and (abs(t0) <= PARAM_TOL or abs(t0 - 1.0) <= PARAM_TOL)
    at_break = any(abs(t0 - b) <= PARAM_TOL for b in curve.breakpoints)
    if (at_seam or at_break) and curve.one_sided is not None:
        vm, vp = curve.one_sided(t0)
        return np.asarray(vm, dtype=float), np.asarray(vp, dtype=float)
    if at_seam:
        return (np.asarray(curve.deriv1(1.0), dtype=float),
                np.asarray(curve.deriv1(0.0), dtype=float))
    v = np.asarray(curve.deriv1(t0), dtype=float)
    return v, v


def uniform_parametrize(vertices, closed: bool = False) -> Polyline:
    """Polyline over the given vertices with equally spaced parameters.

    Open: params j/(n-1).  Closed: params j/n, so the closing segment gets the
    same parameter share as every other segment.
    """
    v = np.asarray(vertices, dtype=float)
    n = v.shape[0]
    if closed:
        t = np.arange(n) / n
    else:
        if n < 2:
            raise CurveValidationError("need at least 2 vertices")
        t = np.arange(n) / (n - 1)
    return Polyline(v, t, closed=closed)


def restrict(curve: CurveSource, window: ParamWindow) -> CurveSource:
    """Sub-curve over `window`, reparametrized onto [0, 1].

    The full window of a closed curve returns the curve itself; any proper
    sub-window is an open curve.  Derivatives pick up the chain-rule factor
    (hi - lo)^k.
    """
    lo, hi = window.lo, window.hi
    if lo <= PARAM_TOL and hi >= 1.0 - PARAM_TOL:
        return curve
    scale = hi - lo
    ev, d1, d2, d3 = curve.eval, curve.deriv1, curve.deriv2, curve.deriv3

    def _map(s):
        return lo + np.asarray(s, dtype=float) * scale

    bps = tuple((b - lo) / scale for b in curve.breakpoints
                if lo + PARAM_TOL < b < hi - PARAM_TOL)

    one_sided = None
    if curve.one_sided is not None:
        parent = curve.one_sided

        def one_sided(s0, _parent=parent, _lo=lo, _scale=scale):
            vm, vp = _parent(_lo + s0 * _scale)
            return np.asarray(vm) * _scale, np.asarray(vp) * _scale

    sym = None
    if curve.sym is not None:
        t = sp.Symbol("t", real=True)
        sym = tuple(expr.subs(t, lo + t * scale) for expr in curve.sym)

    return CurveSource(
        eval=lambda s: ev(_map(s)),
        deriv1=lambda s: np.asarray(d1(_map(s))) * scale,
        deriv2=lambda s: np.asarray(d2(_map(s))) * scale ** 2,
        deriv3=(None if d3 is None else (lambda s: np.asarray(d3(_map(s))) * scale ** 3)),
        breakpoints=bps,
        closed=False,
        one_sided=one_sided,
        sym=sym,
        piecewise_linear=curve.piecewise_linear,
        name=f"{curve.name}[{lo:.6g},{hi:.6g}]",
    )


# ---------------------------------------------------------------------------
# catalog construction from sympy expressions
# ---------------------------------------------------------------------------

_T = sp.Symbol("t", real=True)


def _stack_components(fns, t):
    t_arr = np.asarray(t, dtype=float)
    vals = [np.broadcast_to(np.asarray(f(t_arr), dtype=float), t_arr.shape) for f in fns]
    out = np.stack(vals, axis=-1)
    return out if t_arr.ndim else out.reshape(3)


def from_expressions(exprs, closed: bool, name: str) -> CurveSource:
    """CurveSource from three sympy expressions in t, with exact derivatives."""
    # strings must bind to the same symbol the derivatives use
    exprs = tuple(sp.sympify(e, locals={"t": _T}) for e in exprs)
    levels = []
    cur = exprs
    for _ in range(4):
        levels.append([sp.lambdify(_T, e, "numpy") for e in cur])
        cur = tuple(sp.diff(e, _T) for e in cur)
    return CurveSource(
        eval=lambda t, _f=levels[0]: _stack_components(_f, t),
        deriv1=lambda t, _f=levels[1]: _stack_components(_f, t),
        deriv2=lambda t, _f=levels[2]: _stack_components(_f, t),
        deriv3=lambda t, _f=levels[3]: _stack_components(_f, t),
        closed=closed,
        sym=exprs,
        name=name,
    )


def circle(radius: float = 1.0) -> CurveSource:
    """Planar circle of the given radius, starting at (radius, 0, 0)."""
    if radius <= 0:
        raise CurveValidationError("circle radius must be positive")
    r = sp.Float(radius)
    th = 2 * sp.pi * _T
    return from_expressions((r * sp.cos(th), r * sp.sin(th), sp.Integer(0)),
                            closed=True, name=f"circle(r={radius:g})")


def helix(a: float = 2.0, b: float = 1.0, turns: float = 1.0) -> CurveSource:
    """Circular helix (a cos th, a sin th, b th), th = 2*pi*turns*t."""
    if a <= 0 or turns <= 0:
        raise CurveValidationError("helix needs a > 0 and turns > 0")
    th = 2 * sp.pi * sp.Float(turns) * _T
    return from_expressions(
        (sp.Float(a) * sp.cos(th), sp.Float(a) * sp.sin(th), sp.Float(b) * th),
        closed=False, name=f"helix(a={a:g},b={b:g},turns={turns:g})")


def torus_knot(p: int = 2, q: int = 3, R: float = 2.0, rho: float = 0.5) -> CurveSource:
    """(p, q) torus knot on the torus with radii (R, rho)."""
    p, q = int(p), int(q)
    if p < 1 or q < 1:
        raise CurveValidationError("torus knot needs positive integers p, q")
    if not (0 < rho < R):
        raise CurveValidationError("torus knot needs 0 < rho < R")
    thp = 2 * sp.pi * p * _T
    thq = 2 * sp.pi * q * _T
    rad = sp.Float(R) + sp.Float(rho) * sp.cos(thq)
    return from_expressions(
        (rad * sp.cos(thp), rad * sp.sin(thp), sp.Float(rho) * sp.sin(thq)),
        closed=True, name=f"torus_knot(p={p},q={q},R={R:g},rho={rho:g})")


def line_segment(a, b) -> CurveSource:
    """Straight segment from point a to point b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.linalg.norm(b - a) == 0.0:
        raise CurveValidationError("segment endpoints must be distinct")
    exprs = tuple(sp.Float(a[k]) + (sp.Float(b[k]) - sp.Float(a[k])) * _T for k in range(3))
    return from_expressions(exprs, closed=False, name="segment")


# ---------------------------------------------------------------------------
# piecewise assembly
# ---------------------------------------------------------------------------

def concat_pieces(pieces: Sequence[CurveSource], closed: bool = False,
                  name: str = "piecewise") -> CurveSource:
    """Join open C^2 pieces end to end into one piecewise-C^2 curve.

    Each piece keeps an equal parameter share.  Junction parameters become
    breakpoints; the one-sided derivatives there come from the adjoining
    pieces' own evaluators.  For a closed result the last piece must return
    to the first piece's start point.
    """
    m = len(pieces)
    if m < 1:
        raise CurveValidationError("need at least one piece")
    for k in range(m - 1):
        gap = np.linalg.norm(np.asarray(pieces[k].eval(1.0)) - np.asarray(pieces[k + 1].eval(0.0)))
        if gap > 1e-9:
            raise CurveValidationError(f"pieces {k} and {k + 1} do not meet (gap {gap:.3g})")
    if closed:
        gap = np.linalg.norm(np.asarray(pieces[-1].eval(1.0)) - np.asarray(pieces[0].eval(0.0)))
        if gap > 1e-9:
            raise CurveValidationError("closed piecewise curve must return to its start")

    bounds = np.arange(m + 1) / m
    scale = float(m)  # d/dt = m * d/ds on each piece

    def _locate(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(bounds, t_arr, side="right") - 1, 0, m - 1)
        local = t_arr * m - idx
        return t_arr, idx, np.clip(local, 0.0, 1.0)

    def _apply(t, which):
        t_arr, idx, local = _locate(t)
        out = np.empty((t_arr.size, 3))
        for k in range(m):
            mask = idx == k
            if np.any(mask):
                fn = getattr(pieces[k], which)
                out[mask] = np.atleast_2d(np.asarray(fn(local[mask]), dtype=float))
        out *= scale ** {"eval": 0, "deriv1": 1, "deriv2": 2}[which]
        return out if np.ndim(t) else out.reshape(3)

    def one_sided(t0):
        if closed and (abs(t0) <= PARAM_TOL or abs(t0 - 1.0) <= PARAM_TOL):
            return (np.asarray(pieces[-1].deriv1(1.0)) * scale,
                    np.asarray(pieces[0].deriv1(0.0)) * scale)
        k = int(round(t0 * m))
        if not (0 < k < m) or abs(t0 - k / m) > 1e-9:
            v = _apply(t0, "deriv1")
            return v, v
        return (np.asarray(pieces[k - 1].deriv1(1.0)) * scale,
                np.asarray(pieces[k].deriv1(0.0)) * scale)

    return CurveSource(
        eval=lambda t: _apply(t, "eval"),
        deriv1=lambda t: _apply(t, "deriv1"),
        deriv2=lambda t: _apply(t, "deriv2"),
        breakpoints=tuple(bounds[1:-1]),
        closed=closed,
        one_sided=one_sided,
        name=name,
    )


def polyline_as_curve(p: Polyline) -> CurveSource:
    """Wrap a polyline as a piecewise-linear CurveSource.

    Interior vertices (and the seam of a closed polyline) are breakpoints;
    deriv2 is identically zero.
    """
    tp = p.params
    vp = p.vertices
    if p.closed:
        tp = np.append(tp, 1.0)
        vp = np.vstack([vp, p.vertices[:1]])
    seg_dt = np.diff(tp)
    seg_dir = np.diff(vp, axis=0) / seg_dt[:, None]
    nseg = len(seg_dt)

    def _ev(t):
        return p.eval(t)

    def _d1(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(tp, t_arr, side="right") - 1, 0, nseg - 1)
        out = seg_dir[idx]
        return out if np.ndim(t) else out.reshape(3)

    def _d2(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t_arr.size, 3))
        return out if np.ndim(t) else out.reshape(3)

    def one_sided(t0):
        if p.closed and (abs(t0) <= PARAM_TOL or abs(t0 - 1.0) <= PARAM_TOL):
            return seg_dir[-1].copy(), seg_dir[0].copy()
        j = int(np.argmin(np.abs(tp - t0)))
        if abs(tp[j] - t0) <= 1e-9 and 0 < j < nseg:
            return seg_dir[j - 1].copy(), seg_dir[j].copy()
        return _d1(t0), _d1(t0)

    bps = tuple(float(b) for b in tp[1:-1])
    return CurveSource(eval=_ev, deriv1=_d1, deriv2=_d2, breakpoints=bps,
                       closed=p.closed, one_sided=one_sided,
                       piecewise_linear=True, name="polyline")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_curve(curve: CurveSource, max_spacing: float,
                 window: Optional[ParamWindow] = None,
                 min_count: int = 64, max_count: int = 1 << 21):
    """Sample points so consecutive samples are at most max_spacing apart.

    Returns (params, points).  Uniform in parameter, count doubled until the
    spatial gap bound holds.  For a closed curve sampled over the full window
    the wrap gap is included in the check and the params stay in [0, 1).
    """
    if max_spacing <= 0:
        raise CurveValidationError("max_spacing must be positive")
    full_closed = curve.closed and window is None
    lo, hi = (0.0, 1.0) if window is None else (window.lo, window.hi)
    m = int(min_count)
    while True:
        if full_closed:
            ts = np.linspace(0.0, 1.0, m, endpoint=False)
            pts = np.atleast_2d(curve.eval(ts))
            gaps = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        else:
            ts = np.linspace(lo, hi, m)
            pts = np.atleast_2d(curve.eval(ts))
            gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if gaps.max() <= max_spacing or m >= max_count:
            return ts, pts
        m *= 2


# ---------------------------------------------------------------------------
# delimited IO
# ---------------------------------------------------------------------------

def save_polyline_csv(p: Polyline, path) -> None:
    """Write a polyline as CSV: a closed-flag header line, then x,y,z rows."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# closed={'true' if p.closed else 'false'}\n")
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z"])
        for v in p.vertices:
            writer.writerow([repr(float(c)) for c in v])


def load_polyline_csv(path) -> Polyline:
    """Read a polyline CSV written by save_polyline_csv (or hand-authored).

    The first line may be `# closed=true|false` (default false); a header row
    of column names is optional.  Vertex parameters are assigned uniformly.
    """
    if not os.path.exists(path):
        raise CurveValidationError(f"no such polyline file: {path}")
    with open(path, "r", newline="") as fh:
        text = fh.read()
    closed = False
    rows = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            flag = line.lstrip("#").strip().lower().replace(" ", "")
            if flag.startswith("closed="):
                closed = flag.split("=", 1)[1] == "true"
            continue
        parts = [s.strip() for s in line.split(",")]
        if parts[0].lower() in ("x", '"x"'):
            continue
        if len(parts) != 3:
            raise CurveValidationError(f"bad CSV row (need x,y,z): {line!r}")
        try:
            rows.append([float(s) for s in parts])
        except ValueError as exc:
            raise CurveValidationError(f"bad numeric value in row {line!r}") from exc
    if len(rows) < 2:
        raise CurveValidationError("polyline CSV needs at least 2 vertices")
    return uniform_parametrize(np.asarray(rows, dtype=float), closed=closed)
