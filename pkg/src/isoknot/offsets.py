"""Frenet frames and principal-normal offset curves.

The offset of a curve C at distance d is Omega(t) = C(t) + d N(t) with N the
unit principal normal.  For catalog curves the offset is built symbolically
(exact derivative closures), which keeps downstream curvature and quadrature
at full precision.  The construction requires kappa bounded away from 0 (N
undefined) and d*kappa bounded away from 1 (Omega would be singular).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import sympy as sp

from .curves import CurveSource, from_expressions
from .curvature import curvature_at
from .errors import CurveValidationError

KAPPA_GATE = 1e-6
FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class FrenetData:
    """Frenet frame data at one or many parameters."""

    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    speed: np.ndarray


def frenet_frame(curve: CurveSource, t) -> FrenetData:
    """Frenet frame (T, N, B), curvature, torsion, and speed at t.

    Torsion uses the analytic third derivative when the curve carries one and
    falls back to a central difference of the binormal (step 1e-5) otherwise.
    Vectorized over arrays of parameters; raises where kappa vanishes.
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    d1 = np.atleast_2d(np.asarray(curve.deriv1(ts), dtype=float))
    d2 = np.atleast_2d(np.asarray(curve.deriv2(ts), dtype=float))
    speed = np.linalg.norm(d1, axis=1)
    if np.any(speed < 1e-12):
        raise CurveValidationError("Frenet frame at a zero-speed point")
    cr = np.cross(d1, d2)
    crn = np.linalg.norm(cr, axis=1)
    if np.any(crn < 1e-12 * speed ** 3):
        raise CurveValidationError("Frenet frame undefined where curvature vanishes")
    T = d1 / speed[:, None]
    B = cr / crn[:, None]
    N = np.cross(B, T)
    kappa = crn / speed ** 3
    if curve.deriv3 is not None:
        d3 = np.atleast_2d(np.asarray(curve.deriv3(ts), dtype=float))
        tau = np.einsum("ij,ij->i", cr, d3) / crn ** 2
    else:
        # tau = -(dB/ds) . N, central difference in the parameter
        h = FD_STEP
        tm = np.clip(ts - h, 0.0, 1.0)
        tp = np.clip(ts + h, 0.0, 1.0)

        def binormal(u):
            a = np.atleast_2d(np.asarray(curve.deriv1(u), dtype=float))
            b = np.atleast_2d(np.asarray(curve.deriv2(u), dtype=float))
            c = np.cross(a, b)
            return c / np.linalg.norm(c, axis=1)[:, None]

        dB = (binormal(tp) - binormal(tm)) / (tp - tm)[:, None]
        tau = -np.einsum("ij,ij->i", dB, N) / speed
    if scalar:
        return FrenetData(T[0], N[0], B[0], float(kappa[0]), float(tau[0]), float(speed[0]))
    return FrenetData(T, N, B, kappa, tau, speed)


def _check_offset_regular(curve: CurveSource, dist: float, scan: int = 1000) -> None:
    ts = np.linspace(0.0, 1.0, max(int(scan), 100), endpoint=not curve.closed)
    kappa = np.asarray(curvature_at(curve, ts))
    if np.min(np.abs(kappa)) < KAPPA_GATE:
        raise CurveValidationError(
            "offset undefined: curvature vanishes somewhere (normal direction lost)")
    if dist != 0.0 and np.min(np.abs(dist * kappa - 1.0)) < KAPPA_GATE:
        raise CurveValidationError(
            "offset singular: distance times curvature passes through 1")


def _as_sympy_dist(dist):
    if isinstance(dist, sp.Expr):
        return dist
    if isinstance(dist, Fraction):
        return sp.Rational(dist.numerator, dist.denominator)
    if isinstance(dist, int):
        return sp.Integer(dist)
    frac = Fraction(dist).limit_denominator(1 << 24)
    if abs(float(frac) - float(dist)) < 1e-15:
        return sp.Rational(frac.numerator, frac.denominator)
    return sp.Float(dist, 17)


def offset_curve(curve: CurveSource, dist=1.0, scan: int = 1000) -> CurveSource:
    """Principal-normal offset Omega = C + dist * N as a new CurveSource.

    Requires a smooth catalog curve (symbolic components, no breakpoints).
    The regularity scan rejects curves whose curvature approaches 0 or whose
    dist*kappa approaches 1 anywhere on a 1000-point grid.
    """
    if curve.sym is None:
        raise CurveValidationError("offset construction needs a closed-form curve")
    if curve.breakpoints:
        raise CurveValidationError("offset construction needs a breakpoint-free curve")
    _check_offset_regular(curve, float(dist), scan=scan)
    t = sp.Symbol("t", real=True)
    C = sp.Matrix([sp.sympify(e) for e in curve.sym])
    d1 = C.diff(t)
    d2 = d1.diff(t)
    cr = d1.cross(d2)
    # N = (cr x d1) / (|cr| |d1|)
    num = cr.cross(d1)
    den = sp.sqrt(cr.dot(cr)) * sp.sqrt(d1.dot(d1))
    N = num / den
    omega = C + _as_sympy_dist(dist) * N
    omega = omega.applyfunc(lambda e: sp.simplify(sp.trigsimp(e)))
    return from_expressions(tuple(omega), closed=curve.closed,
                            name=f"offset({curve.name},d={float(dist):g})")


def offset_approximant(curve: CurveSource, i: int, scan: int = 1000) -> CurveSource:
    """The i-th member Omega_i = C + ((i-1)/i) N of the offset approximant
    sequence converging to the unit offset (sup distance exactly 1/i)."""
    i = int(i)
    if i < 1:
        raise CurveValidationError("offset approximant index must be >= 1")
    return offset_curve(curve, dist=sp.Rational(i - 1, i), scan=scan)
