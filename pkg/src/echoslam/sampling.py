"""Random rooms and measurement geometries for verification and demos."""

from __future__ import annotations

import math

import numpy as np

from .forward import EchoSet, first_order_distances
from .geometry import (
    ConvexRoom,
    PointOutsideError,
    RoomError,
    Wall,
    is_feasible_point,
    room_from_walls,
    room_in_frame,
    transform_point,
    wrap_angle,
)

TWO_PI = 2.0 * math.pi


def random_convex_room(
    rng: np.random.Generator,
    k: int,
    min_gap: float = 0.25,
    offset_range: tuple[float, float] = (1.5, 4.0),
    min_edge: float = 0.4,
    max_tries: int = 2000,
) -> ConvexRoom:
    """Random K-wall convex room with origin interior.

    Normal angles are drawn uniformly with a minimum angular gap between
    consecutive walls and every angular gap below a half turn (bounded);
    rooms with an edge shorter than ``min_edge`` are rejected so the
    feasible measurement region does not degenerate to a sliver.
    """
    for _ in range(max_tries):
        angles = np.sort(rng.uniform(0.0, TWO_PI, size=k))
        gaps = np.diff(np.concatenate([angles, [angles[0] + TWO_PI]]))
        if gaps.min() < min_gap or gaps.max() >= math.pi - 0.15:
            continue
        offsets = rng.uniform(*offset_range, size=k)
        try:
            room = room_from_walls([Wall(a, s) for a, s in zip(angles, offsets)])
        except (RoomError, ValueError):
            continue
        edges = room.vertices - np.roll(room.vertices, 1, axis=0)
        if np.min(np.hypot(edges[:, 0], edges[:, 1])) >= min_edge:
            return room
    raise RuntimeError(f"could not sample a valid {k}-wall room")


def random_parallelogram(
    rng: np.random.Generator,
    pair_angle_range: tuple[float, float] = (math.radians(55), math.radians(125)),
    offset_range: tuple[float, float] = (1.5, 4.0),
) -> ConvexRoom:
    """Random parallelogram: two parallel wall pairs with origin interior."""
    t1 = rng.uniform(0.0, TWO_PI)
    t2 = t1 + rng.uniform(*pair_angle_range)
    offsets = rng.uniform(*offset_range, size=4)
    walls = [
        Wall(t1, offsets[0]),
        Wall(t2, offsets[1]),
        Wall(t1 + math.pi, offsets[2]),
        Wall(t2 + math.pi, offsets[3]),
    ]
    return room_from_walls(walls)


def random_quadrilateral(
    rng: np.random.Generator,
    gap_range_deg: tuple[float, float] = (55.0, 125.0),
    offset_range: tuple[float, float] = (1.5, 4.0),
    max_tries: int = 1000,
) -> ConvexRoom:
    """Random convex quadrilateral whose adjacent-wall angles stay regular.

    Every turning gap between consecutive normals lies in ``gap_range_deg``,
    so interior angles do too.
    """
    lo, hi = math.radians(gap_range_deg[0]), math.radians(gap_range_deg[1])
    for _ in range(max_tries):
        gaps = rng.dirichlet(np.ones(4)) * TWO_PI
        if gaps.min() < lo or gaps.max() > hi:
            continue
        start = rng.uniform(0.0, TWO_PI)
        angles = start + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
        offsets = rng.uniform(*offset_range, size=4)
        try:
            return room_from_walls([Wall(a, s) for a, s in zip(angles, offsets)])
        except (RoomError, ValueError):
            continue
    raise RuntimeError("could not sample a regular quadrilateral")


def _feasible(room: ConvexRoom, p) -> bool:
    try:
        return is_feasible_point(room, p)
    except PointOutsideError:
        return False


def random_feasible_triple(
    rng: np.random.Generator,
    room: ConvexRoom,
    d12: float,
    d23: float,
    phi_range: tuple[float, float] = (0.35, math.pi - 0.35),
    max_tries: int = 5000,
):
    """Three feasible measurement points with given step lengths.

    Returns ``(points, heading, phi)``: the world heading of O1->O2 and the
    turn angle phi of O2->O3 relative to it (positive, non-collinear).
    """
    lo = room.vertices.min(axis=0)
    hi = room.vertices.max(axis=0)
    for _ in range(max_tries):
        o1 = rng.uniform(lo, hi)
        if not _feasible(room, o1):
            continue
        heading = rng.uniform(0.0, TWO_PI)
        o2 = o1 + d12 * np.array([math.cos(heading), math.sin(heading)])
        if not _feasible(room, o2):
            continue
        phi = rng.uniform(*phi_range)
        ang = heading + phi
        o3 = o2 + d23 * np.array([math.cos(ang), math.sin(ang)])
        if not _feasible(room, o3):
            continue
        return np.stack([o1, o2, o3]), heading, phi
    raise RuntimeError("could not place a feasible measurement triple")


def conditioned_feasible_triple(
    rng: np.random.Generator,
    room: ConvexRoom,
    d12: float,
    d23: float,
    phi_range: tuple[float, float] = (0.6, math.pi - 0.6),
    min_margin: float = 0.35,
    tries: int = 400,
):
    """Feasible triple whose orientation keeps all arccos inputs away from +-1.

    Scores candidate (heading, phi) draws by the smallest |sin| over wall
    angles measured from either leg; small values mean a cosine observable
    near +-1, where noise blows up the recovered angles.  Returns the best
    candidate above ``min_margin`` (or the best found).
    """
    wall_angles = room.normal_angles()
    best = None
    best_margin = -1.0
    for _ in range(tries):
        try:
            points, heading, phi = random_feasible_triple(
                rng, room, d12, d23, phi_range=phi_range, max_tries=200
            )
        except RuntimeError:
            continue
        rel = wall_angles - heading
        margin = min(
            float(np.min(np.abs(np.sin(rel)))),
            float(np.min(np.abs(np.sin(rel - phi)))),
        )
        if margin > best_margin:
            best_margin = margin
            best = (points, heading, phi)
            if margin >= min_margin:
                break
    if best is None:
        raise RuntimeError("could not place any feasible measurement triple")
    return best


def parallelogram_center(room: ConvexRoom) -> np.ndarray:
    """Intersection of the two midlines of a parallelogram's wall pairs."""
    w = room.walls
    basis = np.stack([w[0].normal, w[1].normal])
    mid = np.array(
        [0.5 * (w[0].offset - w[2].offset), 0.5 * (w[1].offset - w[3].offset)]
    )
    return np.linalg.solve(basis, mid)


def centered_parallelogram_instance(
    rng: np.random.Generator,
    d12: float,
    d23: float,
    offset_range: tuple[float, float] = (2.0, 3.5),
    midpoint_jitter: float = 0.35,
    phi_range: tuple[float, float] = (0.5, math.pi - 0.5),
    max_tries: int = 200,
):
    """Parallelogram instance whose first step straddles the room center.

    Keeps the O1O2 midpoint within ``midpoint_jitter * d12`` of the center,
    the regime where a pair-swapped echo labeling still yields admissible
    cosines.  Returns ``(room, points, heading, phi)``.
    """
    for _ in range(max_tries):
        room = random_parallelogram(rng, offset_range=offset_range)
        center = parallelogram_center(room)
        ang = rng.uniform(0.0, TWO_PI)
        rad = midpoint_jitter * d12 * math.sqrt(rng.uniform())
        m = center + rad * np.array([math.cos(ang), math.sin(ang)])
        heading = rng.uniform(0.0, TWO_PI)
        u = np.array([math.cos(heading), math.sin(heading)])
        o1 = m - 0.5 * d12 * u
        o2 = m + 0.5 * d12 * u
        phi = rng.uniform(*phi_range)
        ang3 = heading + phi
        o3 = o2 + d23 * np.array([math.cos(ang3), math.sin(ang3)])
        if all(_feasible(room, p) for p in (o1, o2, o3)):
            return room, np.stack([o1, o2, o3]), heading, phi
    raise RuntimeError("could not place a centered parallelogram instance")


def random_instance(
    rng: np.random.Generator,
    k: int,
    d12: float,
    d23: float,
    parallelogram: bool = False,
    phi_range: tuple[float, float] = (0.35, math.pi - 0.35),
    offset_range: tuple[float, float] = (1.5, 4.0),
    max_tries: int = 50,
):
    """Room plus feasible measurement triple, retrying rooms as needed.

    Returns ``(room, points, heading, phi)``.
    """
    for _ in range(max_tries):
        if parallelogram:
            room = random_parallelogram(rng, offset_range=offset_range)
        else:
            room = random_convex_room(rng, k, offset_range=offset_range)
        try:
            points, heading, phi = random_feasible_triple(
                rng, room, d12, d23, phi_range=phi_range, max_tries=800
            )
        except RuntimeError:
            continue
        return room, points, heading, phi
    raise RuntimeError("could not sample a feasible instance")


def grouped_distances(room: ConvexRoom, points) -> list[np.ndarray]:
    """Wall-ordered first-order distances for each measurement point."""
    return [first_order_distances(room, p) for p in points]


def ungrouped_echo_sets(room: ConvexRoom, points) -> list[EchoSet]:
    """First-order echo sets with labels stripped (sorted, correspondence lost)."""
    return [
        EchoSet(np.sort(first_order_distances(room, p)), labels=None) for p in points
    ]


def ground_truth_frame(room: ConvexRoom, points, heading: float):
    """Room and points expressed in the reconstruction frame (O1 origin, O2 on +x)."""
    o1 = points[0]
    room_f = room_in_frame(room, o1, heading)
    pts_f = np.stack([transform_point(p, o1, heading) for p in points])
    return room_f, pts_f


def triple_turn_angle(points) -> float:
    """Turn angle phi of a measured triple: direction change at O2."""
    v1 = np.asarray(points[1]) - np.asarray(points[0])
    v2 = np.asarray(points[2]) - np.asarray(points[1])
    return wrap_angle(math.atan2(v2[1], v2[0]) - math.atan2(v1[1], v1[0]))
