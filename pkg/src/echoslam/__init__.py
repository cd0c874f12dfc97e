"""2-D room reconstruction and self-localization from unlabeled acoustic echoes."""

from .geometry import (
    ConvexRoom,
    EmptyRoomError,
    GEOM_TOL,
    InfeasiblePointError,
    PointOutsideError,
    RedundantWallError,
    RoomError,
    UnboundedRoomError,
    Wall,
    hausdorff_distance,
    is_feasible_point,
    mirror_room,
    point_wall_distance,
    room_contains,
    room_from_vertices,
    room_from_walls,
    room_in_frame,
    rooms_congruent,
)
from .forward import (
    EchoSet,
    corrupt_echo_set,
    echo_set,
    first_order_distances,
    image_source,
    with_common_spurious,
)
from .acoustic import (
    Correlation,
    RirSpec,
    Waveform,
    correlate_windowed,
    make_chirp,
    rir_from_room,
    simulate_received,
)
from .peaks import (
    AllZeroError,
    DetectedPeak,
    PeakConfig,
    detect_peaks,
    find_los,
    to_candidate_distances,
)
from .reconstruct import (
    AngleConstraintError,
    BudgetExceededError,
    CandidateSolution,
    EchoAssignment,
    InfeasibleCombinationError,
    InvalidRoomError,
    MeasurementGeometry,
    NoFeasibleSignsError,
    NoSolutionError,
    SlamConfig,
    alpha_beta,
    build_solution,
    collect_candidates,
    count_assignments,
    enumerate_sign_families,
    equation_residuals,
    feasible_cosine,
    phi_from_signs,
    resolve_signs,
    slam,
    solution_to_dict,
)
from .ambiguity import (
    DegenerateGeometryError,
    LinearSystem,
    NotParallelError,
    NotParallelogramError,
    OneDistanceAlternative,
    feasibility_table_demo,
    inflate_parallel_pair,
    one_distance_counterexample,
    parallel_pairs,
    parallelogram_shear_twin,
    reflect_solution,
    second_leg_residual,
)

__version__ = "0.1.0"
