"""Inscribed polyline approximations of a space curve.

An inscription keeps its vertices on the source curve, at strictly increasing
parameter values.  The polyline inherits those parameters, so vertex k of the
inscription and the curve point at the same parameter coincide; the
certification layer leans on that shared parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .curves import CurveSource, Polyline
from .curvature import END, advance_by_budget
from .certify import Certificate, certify_inscribed
from .errors import CriteriaNotMetError, CurveValidationError
from .metric import hausdorff_distance

DEFAULT_EPS = 0.1
DEFAULT_MAX_ROUNDS = 24


@dataclass(frozen=True)
class InscriptionState:
    """An inscribed polyline, its source curve, and the refinement round."""

    source: CurveSource
    polyline: Polyline
    generation: int = 0

    @property
    def params(self) -> np.ndarray:
        return self.polyline.params

    @property
    def n(self) -> int:
        return len(self.polyline.params)


def _build(curve: CurveSource, params, generation: int = 0) -> InscriptionState:
    params = np.asarray(params, dtype=float)
    verts = np.atleast_2d(np.asarray(curve.eval(params), dtype=float))
    poly = Polyline(verts, params, closed=curve.closed)
    return InscriptionState(curve, poly, generation)


def inscribe_at(curve: CurveSource, params: Sequence[float]) -> InscriptionState:
    """Inscription with vertices at the given strictly increasing params."""
    return _build(curve, np.asarray(list(params), dtype=float))


def seed_inscription(curve: CurveSource) -> InscriptionState:
    """Coarsest admissible inscription.

    Open curves start from both endpoints plus any breakpoints.  A closed
    curve needs at least three vertices for a nondegenerate polyline: with no
    breakpoints it starts from params 0, 1/3, 2/3, otherwise the largest
    parameter gap is bisected until three knots exist.
    """
    bps = [float(b) for b in curve.breakpoints]
    if not curve.closed:
        return _build(curve, np.array([0.0] + bps + [1.0], dtype=float))
    if not bps:
        return _build(curve, np.array([0.0, 1.0 / 3.0, 2.0 / 3.0]))
    knots = sorted(set([0.0] + bps))
    while len(knots) < 3:
        ext = knots + [knots[0] + 1.0]
        widths = [(ext[j + 1] - ext[j], j) for j in range(len(knots))]
        _, j = max(widths)
        knots.append((ext[j] + ext[j + 1]) / 2.0 % 1.0)
        knots.sort()
    return _build(curve, np.asarray(knots, dtype=float))


def refine_midpoints(state: InscriptionState) -> InscriptionState:
    """Insert the parameter midpoint of every inter-vertex window.

    Takes n vertices to 2n-1 on an open curve and to 2n on a closed one (the
    seam window gets a midpoint too).
    """
    p = state.params
    mids = (p[:-1] + p[1:]) / 2.0
    if state.source.closed:
        # closed params start at 0, so the seam midpoint never wraps
        seam_mid = (p[-1] + 1.0) / 2.0
        out = np.empty(2 * len(p), dtype=float)
        out[0::2] = p
        out[1:-1:2] = mids
        out[-1] = seam_mid
    else:
        out = np.empty(2 * len(p) - 1, dtype=float)
        out[0::2] = p
        out[1::2] = mids
    return _build(state.source, out, state.generation + 1)


def knots_by_budget(curve: CurveSource, eps: float = DEFAULT_EPS,
                    quad_tol: float = 1e-11) -> np.ndarray:
    """Knot parameters chosen so each inter-knot window carries total
    curvature at most pi/2 - eps."""
    if not (0.0 < eps < math.pi / 2):
        raise CurveValidationError("eps must lie in (0, pi/2)")
    budget = math.pi / 2 - eps
    knots = [0.0]
    t = 0.0
    while True:
        nxt = advance_by_budget(curve, t, budget, quad_tol=quad_tol)
        if nxt is END:
            break
        knots.append(nxt)
        t = nxt
    if not curve.closed:
        if knots[-1] < 1.0:
            knots.append(1.0)
    else:
        # drop a terminal knot that collided with the seam
        if len(knots) > 1 and knots[-1] >= 1.0 - 1e-9:
            knots.pop()
        while len(knots) < 3:
            ext = knots + [knots[0] + 1.0]
            mids = [(ext[j] + ext[j + 1]) / 2.0 for j in range(len(knots))]
            knots = sorted(set(knots) | {m % 1.0 for m in mids})
    return np.asarray(knots, dtype=float)


def _hausdorff_to_curve(state: InscriptionState, samples_per_window: int = 33) -> float:
    p = state.params
    if state.source.closed:
        lo = p
        hi = np.concatenate([p[1:], [p[0] + 1.0]])
    else:
        lo = p[:-1]
        hi = p[1:]
    u = np.linspace(0.0, 1.0, samples_per_window)
    grid = (lo[:, None] + (hi - lo)[:, None] * u[None, :]).ravel()
    if state.source.closed:
        grid = grid % 1.0
    grid = np.unique(np.concatenate([grid, p]))
    curve_pts = np.atleast_2d(state.source.eval(grid))
    poly_pts = np.atleast_2d(state.polyline.eval(grid))
    return hausdorff_distance(curve_pts, poly_pts).value


def pl_representation(curve: CurveSource, r, eps: float = DEFAULT_EPS,
                      max_rounds: int = DEFAULT_MAX_ROUNDS,
                      quad_tol: float = 1e-11) -> Tuple[Polyline, Certificate]:
    """Certified PL representation of a curve inside a tube of radius r.

    Knots are first placed so every inter-knot window turns less than
    pi/2 - eps; midpoint refinement then runs until the polyline lies within
    Hausdorff distance r of the curve.  Returns the polyline and its
    inscribed-route certificate.
    """
    rr = float(getattr(r, "r", r))
    if not (rr > 0.0):
        raise CurveValidationError("tube radius must be positive")
    state = _build(curve, knots_by_budget(curve, eps=eps, quad_tol=quad_tol))
    achieved = math.inf
    for _ in range(max_rounds + 1):
        achieved = _hausdorff_to_curve(state)
        if achieved < rr:
            return state.polyline, certify_inscribed(curve, state.polyline, rr)
        state = refine_midpoints(state)
    raise CriteriaNotMetError(
        f"refinement did not reach the tube: Hausdorff {achieved:.6g} "
        f"after {max_rounds} rounds against radius {rr:.6g}")
