import math

import numpy as np
import pytest

from echoslam import (
    EmptyRoomError,
    PointOutsideError,
    RedundantWallError,
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
from echoslam.geometry import norm_angle, wall_slacks, wrap_angle
from echoslam.sampling import random_convex_room, random_instance


def test_unit_square_vertices(unit_square):
    expected = {(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)}
    got = {tuple(np.round(v, 12)) for v in unit_square.vertices}
    assert got == expected


def test_equilateral_triangle_vertex_distance():
    # offsets 1 with outward normals 120 degrees apart: every vertex at
    # distance offset / cos(60 deg) = 2; the apex opposite the top wall
    # sits on the y axis
    room = room_from_walls(
        [Wall(math.pi / 2, 1.0), Wall(7 * math.pi / 6, 1.0), Wall(11 * math.pi / 6, 1.0)]
    )
    assert room.k == 3
    dists = np.hypot(*room.vertices.T)
    assert np.allclose(dists, 2.0)
    assert any(np.allclose(v, [0.0, -2.0]) for v in room.vertices)


def test_two_walls_unbounded():
    with pytest.raises(UnboundedRoomError):
        room_from_walls([Wall(0.0, 1.0), Wall(math.pi, 1.0)])


def test_half_turn_gap_unbounded():
    with pytest.raises(UnboundedRoomError):
        room_from_walls([Wall(0.0, 1.0), Wall(math.pi / 2, 1.0), Wall(math.pi, 1.0)])


def test_empty_intersection():
    with pytest.raises(EmptyRoomError):
        room_from_walls(
            [Wall(0.0, -5.0), Wall(2 * math.pi / 3, -5.0), Wall(4 * math.pi / 3, -5.0)]
        )


def test_redundant_wall_rejected(unit_square):
    walls = list(unit_square.walls) + [Wall(math.pi / 4, 5.0)]
    with pytest.raises(RedundantWallError):
        room_from_walls(walls)


def test_duplicate_angle_rejected(unit_square):
    walls = list(unit_square.walls) + [Wall(0.0, 0.7)]
    with pytest.raises(ValueError):
        room_from_walls(walls)


def test_walls_sorted_and_normalized():
    room = room_from_walls([Wall(-math.pi / 2, 0.5), Wall(0.0, 0.5), Wall(math.pi, 0.5), Wall(math.pi / 2, 0.5)])
    angles = room.normal_angles()
    assert np.all(np.diff(angles) > 0)
    assert angles[0] >= 0 and angles[-1] < 2 * math.pi


def test_point_wall_distance_square(unit_square):
    assert point_wall_distance(unit_square, (0.0, 0.0), 0) == pytest.approx(0.5)
    assert point_wall_distance(unit_square, (0.2, 0.0), 0) == pytest.approx(0.3)
    assert point_wall_distance(unit_square, (0.2, 0.0), 2) == pytest.approx(0.7)


def test_point_on_wall_is_outside(unit_square):
    with pytest.raises(PointOutsideError):
        point_wall_distance(unit_square, (0.5, 0.0), 0)
    with pytest.raises(PointOutsideError):
        point_wall_distance(unit_square, (0.7, 0.0), 0)


def test_square_interior_always_feasible(unit_square):
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.uniform(-0.49, 0.49, 2)
        assert is_feasible_point(unit_square, p)


def _foot_on_edge(room, p, i):
    # independent oracle: project onto the wall line, test segment membership
    # directly against the vertex list
    a, b = room.edge(i)
    n = room.walls[i].normal
    foot = np.asarray(p, dtype=float) + (room.walls[i].offset - n @ p) * n
    t = (foot - a) @ (b - a) / ((b - a) @ (b - a))
    return -1e-9 <= t <= 1 + 1e-9


def test_obtuse_triangle_infeasible_near_sharp_vertex():
    # obtuse triangle: near the sharp vertex the perpendicular foot onto the
    # far wall leaves its edge segment, so not every first-order echo returns
    room = room_from_vertices([[-2.0, -0.5], [8.0, -0.5], [3.0, 0.3]])
    sharp = np.array([-2.0, -0.5])
    inward = np.array([0.4, 0.07])
    p_near = sharp + inward
    assert np.min(wall_slacks(room, p_near)) > 0
    assert not _foot_on_edge(room, p_near, int(np.argmax([
        not _foot_on_edge(room, p_near, i) for i in range(room.k)
    ])))
    assert not is_feasible_point(room, p_near)
    # well inside, under the obtuse vertex, all feet land on their edges
    p_good = np.array([3.0, -0.2])
    assert all(_foot_on_edge(room, p_good, i) for i in range(room.k))
    assert is_feasible_point(room, p_good)


def test_feasibility_matches_foot_oracle():
    room = room_from_vertices([[-2.0, -0.5], [8.0, -0.5], [3.0, 0.3]])
    rng = np.random.default_rng(1)
    lo = room.vertices.min(axis=0)
    hi = room.vertices.max(axis=0)
    checked = feasible_seen = infeasible_seen = 0
    for _ in range(3000):
        p = rng.uniform(lo, hi)
        if np.min(wall_slacks(room, p)) <= 0:
            continue
        expected = all(_foot_on_edge(room, p, i) for i in range(room.k))
        assert is_feasible_point(room, p) == expected
        checked += 1
        feasible_seen += expected
        infeasible_seen += not expected
    assert checked > 100 and feasible_seen > 0 and infeasible_seen > 0


def test_room_contains_scaled(unit_square):
    big = room_from_walls([Wall(w.normal_angle, 2 * w.offset) for w in unit_square.walls])
    assert room_contains(big, unit_square)
    assert not room_contains(unit_square, big)
    assert room_contains(unit_square, unit_square)


def test_room_contains_disjoint(unit_square):
    shifted = room_from_vertices(unit_square.vertices + np.array([5.0, 0.0]))
    assert not room_contains(unit_square, shifted)
    assert not room_contains(shifted, unit_square)


def test_room_from_vertices_roundtrip(unit_square):
    rebuilt = room_from_vertices(unit_square.vertices)
    assert rooms_congruent(rebuilt, unit_square, tol=1e-12)
    # clockwise input is reoriented
    rebuilt_cw = room_from_vertices(unit_square.vertices[::-1])
    assert rooms_congruent(rebuilt_cw, unit_square, tol=1e-12)


def test_walls_roundtrip_random():
    rng = np.random.default_rng(7)
    for _ in range(25):
        room = random_convex_room(rng, int(rng.integers(3, 7)))
        rebuilt = room_from_walls(list(room.walls))
        assert np.allclose(rebuilt.normal_angles(), room.normal_angles())
        assert np.allclose(rebuilt.offsets(), room.offsets())


def test_interior_distances_positive_random():
    rng = np.random.default_rng(8)
    for _ in range(20):
        room, points, _, _ = random_instance(rng, 5, 0.3, 0.3)
        for p in points:
            slacks = wall_slacks(room, p)
            assert np.min(slacks) > 0


def test_mirror_room_involution(unit_square):
    rng = np.random.default_rng(9)
    room = random_convex_room(rng, 5)
    twice = mirror_room(mirror_room(room))
    assert rooms_congruent(twice, room, tol=1e-9)


def test_room_in_frame_preserves_distances():
    rng = np.random.default_rng(10)
    room = random_convex_room(rng, 4)
    p = np.zeros(2)
    while True:
        p = rng.uniform(room.vertices.min(axis=0), room.vertices.max(axis=0))
        if np.min(wall_slacks(room, p)) > 0.1:
            break
    heading = 0.7
    framed = room_in_frame(room, p, heading)
    # distances from the new origin match distances from p in the old frame
    assert np.allclose(np.sort(wall_slacks(framed, (0, 0))), np.sort(wall_slacks(room, p)))


def test_hausdorff_basic():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 0.1], [1.0, 0.0]])
    assert hausdorff_distance(a, b) == pytest.approx(0.1)


def test_angle_helpers():
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert norm_angle(-0.1) == pytest.approx(2 * math.pi - 0.1)
    assert 0 <= norm_angle(2 * math.pi) < 2 * math.pi
