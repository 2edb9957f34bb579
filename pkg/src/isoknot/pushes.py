"""Median pushes and chord reduction for polylines.

A median push slides one vertex along the median of the triangle formed with
its two neighbors, ending at the midpoint of the opposite side.  Pushing
never increases the total curvature of an open polyline, which is what makes
it usable for reducing a low-curvature sub-polyline to its chord without ever
breaking simplicity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .curves import Polyline, uniform_parametrize
from .curvature import exterior_angle, pl_total_curvature
from .errors import CurveValidationError, InternalInvariantError
from .metric import polyline_is_simple_oracle

DEFAULT_FRAMES = 50
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class PushTrace:
    """Snapshots of a polyline along push fractions s = 0, ..., 1."""

    frames: tuple

    def __len__(self) -> int:
        return len(self.frames)


def _neighbors(p: Polyline, vertex: int) -> Tuple[int, int]:
    n = p.vertices.shape[0]
    if p.closed:
        vertex %= n
        return (vertex - 1) % n, (vertex + 1) % n
    if not (0 < vertex < n - 1):
        raise CurveValidationError("median push needs an interior vertex")
    return vertex - 1, vertex + 1


def _push_target(p: Polyline, vertex: int) -> Tuple[int, np.ndarray]:
    ia, ic = _neighbors(p, vertex)
    a, b, c = p.vertices[ia], p.vertices[vertex % p.vertices.shape[0]], p.vertices[ic]
    scale = max(1.0, float(np.abs(np.stack([a, b, c])).max()))
    if np.linalg.norm(np.cross(a - b, c - b)) <= 1e-12 * scale ** 2:
        raise CurveValidationError("median push needs a non-collinear vertex triple")
    return vertex % p.vertices.shape[0], 0.5 * (a + c)


def median_push(p: Polyline, vertex: int, s: float) -> Polyline:
    """Move the vertex a fraction s along its median: (1-s) B + s mid(A, C)."""
    if not (0.0 <= s <= 1.0):
        raise CurveValidationError("push fraction must lie in [0, 1]")
    j, target = _push_target(p, vertex)
    verts = np.array(p.vertices)
    verts[j] = (1.0 - s) * verts[j] + s * target
    return Polyline(verts, np.array(p.params), closed=p.closed)


def push_trace(p: Polyline, vertex: int, steps: int = DEFAULT_FRAMES) -> PushTrace:
    """Trace of a full median push in `steps` frames (s from 0 to 1)."""
    if steps < 2:
        raise CurveValidationError("a trace needs at least 2 frames")
    fractions = np.linspace(0.0, 1.0, int(steps))
    return PushTrace(tuple(median_push(p, vertex, s) for s in fractions))


def push_monotone_check(p: Polyline, vertex: int,
                        steps: int = DEFAULT_FRAMES,
                        slack: float = MONOTONE_SLACK) -> Tuple[bool, float]:
    """Is total curvature nonincreasing along the push trace?

    Returns (ok, max_violation): the largest frame-to-frame increase, 0.0
    when curvature only ever decreases.
    """
    values = [pl_total_curvature(f).value
              for f in push_trace(p, vertex, steps).frames]
    diffs = np.diff(values)
    max_violation = float(max(np.max(diffs, initial=0.0), 0.0))
    return bool(np.all(diffs <= slack)), max_violation


def _sub_polyline(vertices: List[np.ndarray]) -> Polyline:
    return uniform_parametrize(np.asarray(vertices, dtype=float), closed=False)


def reduce_to_chord(p: Polyline, j: int, k: int,
                    steps: int = DEFAULT_FRAMES) -> PushTrace:
    """Collapse the sub-polyline of vertices j..k onto its chord by repeated
    full median pushes, largest exterior angle first.

    Every frame must pass the simplicity oracle; a violation means the
    low-curvature precondition was broken and is reported as an internal
    error.  Endpoints never move.  An already-chordal window yields an empty
    trace.
    """
    n = p.vertices.shape[0]
    if not (0 <= j < k < n):
        raise CurveValidationError("window must satisfy 0 <= j < k < n")
    work = [np.array(p.vertices[i], dtype=float) for i in range(j, k + 1)]
    frames: list = []
    while len(work) > 2:
        dirs = np.diff(np.asarray(work), axis=0)
        angles = [exterior_angle(dirs[i], dirs[i + 1]) for i in range(len(dirs) - 1)]
        pick = 1 + int(np.argmax(angles))
        if angles[pick - 1] <= 1e-12:
            # collinear interior vertex: drop it, nothing to push
            work.pop(pick)
            continue
        sub = _sub_polyline(work)
        for s in np.linspace(0.0, 1.0, int(steps)):
            frame = median_push(sub, pick, s)
            if not polyline_is_simple_oracle(frame):
                raise InternalInvariantError(
                    "median push broke simplicity during chord reduction")
            frames.append(frame)
        # the pushed vertex now sits on the segment between its neighbors
        work.pop(pick)
    return PushTrace(tuple(frames))


def save_trace_obj(trace, path) -> None:
    """Write polyline frames as OBJ objects frame_000, frame_001, ..."""
    frames = getattr(trace, "frames", trace)
    lines = []
    offset = 1
    for fi, frame in enumerate(frames):
        verts = frame.vertices
        lines.append(f"o frame_{fi:03d}")
        for v in verts:
            lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
        idx = [str(offset + i) for i in range(verts.shape[0])]
        if frame.closed:
            idx.append(str(offset))
        lines.append("l " + " ".join(idx))
        offset += verts.shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
