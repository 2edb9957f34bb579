"""Inscribed polylines: seeding, budget knots, refinement, certified output."""

import math

import numpy as np
import pytest

from isoknot.curves import circle, concat_pieces, helix, line_segment, torus_knot
from isoknot.curvature import pl_total_curvature
from isoknot.errors import CriteriaNotMetError, CurveValidationError
from isoknot.inscribe import (
    InscriptionState,
    inscribe_at,
    knots_by_budget,
    pl_representation,
    refine_midpoints,
    seed_inscription,
)
from isoknot.metric import polyline_is_simple_oracle
from isoknot.tube import tube_radius

import oracles


def test_inscribe_at_keeps_vertices_on_curve():
    h = helix(2.0, 1.0, 1.0)
    params = [0.0, 0.3, 0.55, 1.0]
    state = inscribe_at(h, params)
    assert isinstance(state, InscriptionState)
    assert state.n == 4 and state.generation == 0
    assert np.allclose(state.params, params)
    for k, t in enumerate(params):
        assert np.allclose(state.polyline.vertices[k], h.eval(t), atol=1e-12)


def test_seed_inscription_shapes():
    assert seed_inscription(helix(2.0, 1.0, 1.0)).n == 2
    assert np.allclose(seed_inscription(circle(1.0)).params, [0, 1 / 3, 2 / 3])
    wedge = concat_pieces([line_segment((0, 0, 0), (1, 0, 0)),
                           line_segment((1, 0, 0), (1, 1, 0))])
    assert np.allclose(seed_inscription(wedge).params, [0.0, 0.5, 1.0])


def test_refine_midpoints_open_and_closed():
    h = helix(2.0, 1.0, 1.0)
    s0 = inscribe_at(h, [0.0, 0.5, 1.0])
    s1 = refine_midpoints(s0)
    assert s1.n == 5 and s1.generation == 1
    assert np.allclose(s1.params, [0.0, 0.25, 0.5, 0.75, 1.0])
    c0 = seed_inscription(circle(1.0))
    c1 = refine_midpoints(c0)
    assert c1.n == 6  # the seam window is refined too
    assert np.allclose(c1.params, [0, 1 / 6, 1 / 3, 1 / 2, 2 / 3, 5 / 6])


def test_knots_by_budget_circle():
    knots = knots_by_budget(circle(1.0), eps=0.1)
    # full turn 2 pi split into windows of at most pi/2 - 0.1 radians
    assert len(knots) == 5
    assert knots[0] == 0.0
    assert np.allclose(knots, [0.0, 0.23408501, 0.46816943, 0.70225366, 0.93633785],
                       atol=1e-6)
    gaps = np.diff(np.append(knots, 1.0))
    assert np.all(gaps * 2 * math.pi <= math.pi / 2 - 0.1 + 1e-6)
    with pytest.raises(CurveValidationError):
        knots_by_budget(circle(1.0), eps=2.0)


def test_knots_by_budget_straight_curve_has_no_interior_knots():
    seg = line_segment((0, 0, 0), (1, 2, 3))
    assert np.allclose(knots_by_budget(seg), [0.0, 1.0])


def test_midpoint_refinement_turning_climbs_toward_smooth_total():
    state = inscribe_at(circle(1.0), knots_by_budget(circle(1.0)))
    prev = pl_total_curvature(state.polyline).value
    for _ in range(8):
        state = refine_midpoints(state)
        cur = pl_total_curvature(state.polyline).value
        assert cur >= prev - 1e-12
        prev = cur
    assert prev == pytest.approx(2 * math.pi, abs=1e-4)


def test_midpoint_refinement_hausdorff_shrinks():
    state = inscribe_at(circle(1.0), knots_by_budget(circle(1.0)))
    prev = oracles.inscribed_hausdorff(circle(1.0), state.polyline)
    for _ in range(6):
        state = refine_midpoints(state)
        cur = oracles.inscribed_hausdorff(circle(1.0), state.polyline)
        assert cur < prev
        prev = cur


def test_pl_representation_circle():
    c = circle(1.0)
    tr = tube_radius(c)
    poly, cert = pl_representation(c, tr)
    assert cert.passed
    assert cert.kind == "inscribed"
    assert polyline_is_simple_oracle(poly)
    assert oracles.inscribed_hausdorff(c, poly) < tr.r
    # every certified window turns less than a right angle
    for seg in cert.per_segment:
        assert seg.budget_margin > 0.0
    # a bare float radius works the same as the bundle
    poly2, cert2 = pl_representation(c, tr.r)
    assert cert2.passed and poly2.n == poly.n


def test_pl_representation_rejects_bad_radius():
    with pytest.raises(CurveValidationError):
        pl_representation(circle(1.0), 0.0)


def test_pl_representation_unreachable_tube_reports_failure():
    with pytest.raises(CriteriaNotMetError):
        pl_representation(circle(1.0), 1e-9, max_rounds=2)
