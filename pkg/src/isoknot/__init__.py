"""Total curvature, certified PL approximation, and isotopic convergence
testing for space curves."""

from .errors import (
    CurveValidationError,
    QuadratureError,
    NotSimpleError,
    CriteriaNotMetError,
    InternalInvariantError,
)
from .curves import (
    CurveSource,
    ParamWindow,
    Polyline,
    circle,
    concat_pieces,
    eval_point,
    from_expressions,
    helix,
    line_segment,
    load_polyline_csv,
    one_sided_tangents,
    polyline_as_curve,
    restrict,
    sample_curve,
    save_polyline_csv,
    torus_knot,
    uniform_parametrize,
)
from .curvature import (
    END,
    TotalCurvature,
    adaptive_simpson,
    advance_by_budget,
    cumulative_total_curvature,
    curvature_at,
    exterior_angle,
    piecewise_total_curvature,
    pl_total_curvature,
    smooth_total_curvature,
)
from .metric import (
    DistanceReport,
    HullSet,
    convex_hull,
    golden_section_min,
    hausdorff_distance,
    normal_plane_margin,
    normal_plane_separates,
    point_to_curve,
    points_to_curve_samples,
    polyline_is_simple_oracle,
    segment_distance,
)
from .tube import (
    TubeRadius,
    disk_pair_witness,
    disks_intersect,
    end_radius,
    max_curvature,
    min_separation_distance,
    tube_radius,
)
from .inscribe import (
    InscriptionState,
    inscribe_at,
    knots_by_budget,
    pl_representation,
    refine_midpoints,
    seed_inscription,
)
from .certify import (
    Certificate,
    IsotopyIndexResult,
    Partition,
    SegmentRecord,
    certify_approximant,
    certify_inscribed,
    find_isotopy_index,
    hull_in_extended_tube,
    partition_curve,
)
from .offsets import (
    FrenetData,
    frenet_frame,
    offset_approximant,
    offset_curve,
)
from .pushes import (
    PushTrace,
    median_push,
    push_monotone_check,
    push_trace,
    reduce_to_chord,
    save_trace_obj,
)

__version__ = "0.1.0"
