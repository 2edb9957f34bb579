"""Shared fixtures and random-geometry generators.

Property tests draw from seeded numpy Generators so every run sees the same
curves.  The generators here produce the three families the suite leans on:
generic closed polylines, planar convex polygons posed arbitrarily in space,
and open polylines with an exactly prescribed total turning.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from isoknot.curves import circle, helix, torus_knot, uniform_parametrize
from isoknot.offsets import offset_curve


def random_closed_polyline(rng, n_lo=4, n_hi=16):
    """Closed polyline on Gaussian vertices, consecutive points kept apart."""
    n = int(rng.integers(n_lo, n_hi))
    while True:
        verts = rng.normal(size=(n, 3))
        keep = [verts[0]]
        for v in verts[1:]:
            if np.linalg.norm(v - keep[-1]) > 1e-3:
                keep.append(v)
        if len(keep) >= 3 and np.linalg.norm(keep[-1] - keep[0]) > 1e-3:
            return uniform_parametrize(np.asarray(keep), closed=True)


def random_open_polyline(rng, n_lo=4, n_hi=16):
    n = int(rng.integers(n_lo, n_hi))
    while True:
        verts = rng.normal(size=(n, 3))
        keep = [verts[0]]
        for v in verts[1:]:
            if np.linalg.norm(v - keep[-1]) > 1e-3:
                keep.append(v)
        if len(keep) >= 3:
            return uniform_parametrize(np.asarray(keep), closed=False)


def convex_planar_polygon(rng):
    """Convex polygon inscribed in a circle, rotated and translated in R^3.

    Vertex angles are cumulative sums of positive increments normalized to
    2 pi, so the polygon is strictly convex by construction.
    """
    n = int(rng.integers(3, 12))
    incs = rng.uniform(0.2, 1.0, size=n)
    angles = np.cumsum(incs) * (2.0 * math.pi / incs.sum())
    radius = float(rng.uniform(0.5, 3.0))
    flat = np.stack([radius * np.cos(angles), radius * np.sin(angles),
                     np.zeros(n)], axis=1)
    m = rng.normal(size=(3, 3))
    q, _ = np.linalg.qr(m)
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return uniform_parametrize(flat @ q.T + rng.normal(size=3), closed=True)


def open_polyline_with_turning(rng, n, target):
    """Open polyline whose total turning equals `target` to rounding.

    Each step rotates the walk direction by an exact angle alpha_i about a
    random axis perpendicular to it; the alphas are scaled to sum to target.
    """
    alphas = rng.uniform(0.2, 1.0, size=n - 2)
    alphas *= target / alphas.sum()
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    pts = [np.zeros(3), d.copy()]
    for a in alphas:
        axis = np.cross(d, rng.normal(size=3))
        while np.linalg.norm(axis) < 1e-8:
            axis = np.cross(d, rng.normal(size=3))
        axis /= np.linalg.norm(axis)
        d = d * math.cos(a) + np.cross(axis, d) * math.sin(a)
        d /= np.linalg.norm(d)
        pts.append(pts[-1] + d * float(rng.uniform(0.5, 1.5)))
    return uniform_parametrize(np.asarray(pts), closed=False)


@pytest.fixture(scope="session")
def unit_circle():
    return circle(1.0)


@pytest.fixture(scope="session")
def helix_one_turn():
    return helix(2.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def helix_two_turns():
    return helix(2.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def trefoil():
    return torus_knot(2, 3, 2.0, 0.5)


@pytest.fixture(scope="session")
def offset_helix_unit():
    """Unit-distance inward offset of the one-turn helix: a unit helix."""
    return offset_curve(helix(2.0, 1.0, 1.0), 1.0)
