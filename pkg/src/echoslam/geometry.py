"""Convex room geometry in wall (normal angle, offset) form.

A room is the bounded intersection of half-planes {p : <p, n_i> <= s_i},
where n_i is the outward unit normal of wall i and s_i the signed distance
of the wall line from the coordinate origin.  Walls are kept sorted by
normal angle so wall indexing is canonical; vertices are derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Tolerance for exact-arithmetic-style predicates (meters). Overridable per call.
GEOM_TOL = 1e-9


class RoomError(ValueError):
    """The wall set does not describe a valid bounded convex room."""


class UnboundedRoomError(RoomError):
    """Half-plane intersection is unbounded (normals span less than a half turn)."""


class EmptyRoomError(RoomError):
    """Half-plane intersection is empty."""


class RedundantWallError(RoomError):
    """A wall does not contribute an edge to the boundary."""


class PointOutsideError(ValueError):
    """A point expected strictly inside the room is on or outside the boundary."""


class InfeasiblePointError(ValueError):
    """An interior point that cannot receive all first-order wall echoes."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def norm_angle(a: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod can return exactly TWO_PI after the correction for tiny negatives
    if a >= TWO_PI:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Wall:
    """One wall line: outward normal angle (radians) and signed offset (meters)."""

    normal_angle: float
    offset: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.normal_angle) and math.isfinite(self.offset)):
            raise ValueError("wall parameters must be finite")
        object.__setattr__(self, "normal_angle", norm_angle(self.normal_angle))

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.normal_angle), math.sin(self.normal_angle)])


@dataclass(frozen=True, eq=False)
class ConvexRoom:
    """Bounded convex polygon given by walls sorted ascending by normal angle.

    ``vertices[i]`` is the intersection of wall ``i`` with wall ``i+1`` (cyclic),
    so wall ``i`` supports the edge from ``vertices[i-1]`` to ``vertices[i]``.
    Vertices wind counterclockwise.  Instances are immutable.
    """

    walls: tuple[Wall, ...]
    vertices: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.walls)

    def normals(self) -> np.ndarray:
        """(K, 2) outward unit normals."""
        angles = self.normal_angles()
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def normal_angles(self) -> np.ndarray:
        return np.array([w.normal_angle for w in self.walls])

    def offsets(self) -> np.ndarray:
        return np.array([w.offset for w in self.walls])

    def edge(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints of the edge supported by wall i."""
        return self.vertices[i - 1], self.vertices[i]

    def perimeter(self) -> float:
        d = self.vertices - np.roll(self.vertices, 1, axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return float(0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def _line_intersection(w1: Wall, w2: Wall) -> np.ndarray:
    """Intersection of the two wall lines <p, n_i> = s_i."""
    a1, a2 = w1.normal_angle, w2.normal_angle
    det = math.sin(a2 - a1)
    if abs(det) < 1e-14:
        raise RedundantWallError("adjacent walls are parallel")
    x = (w1.offset * math.sin(a2) - w2.offset * math.sin(a1)) / det
    y = (w2.offset * math.cos(a1) - w1.offset * math.cos(a2)) / det
    return np.array([x, y])


def _clip_box_by_walls(walls: list[Wall], half_size: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a large box by every wall half-plane."""
    poly = [
        np.array([-half_size, -half_size]),
        np.array([half_size, -half_size]),
        np.array([half_size, half_size]),
        np.array([-half_size, half_size]),
    ]
    for w in walls:
        n = w.normal
        out: list[np.ndarray] = []
        m = len(poly)
        for i in range(m):
            cur, nxt = poly[i], poly[(i + 1) % m]
            dc = w.offset - float(n @ cur)
            dn = w.offset - float(n @ nxt)
            if dc >= 0.0:
                out.append(cur)
            if (dc > 0.0) != (dn > 0.0) and dc != dn:
                t = dc / (dc - dn)
                out.append(cur + t * (nxt - cur))
        poly = out
        if len(poly) < 3:
            return np.empty((0, 2))
    return np.array(poly)


def room_from_walls(walls, tol: float = GEOM_TOL) -> ConvexRoom:
    """Build a room from walls, sorting by normal angle and deriving vertices.

    Raises UnboundedRoomError, EmptyRoomError or RedundantWallError when the
    wall set does not bound a proper convex polygon with every wall touching
    the boundary.
    """
    ws = [w if isinstance(w, Wall) else Wall(*w) for w in walls]
    if len(ws) < 3:
        raise UnboundedRoomError("fewer than 3 walls cannot bound a region")
    ws.sort(key=lambda w: w.normal_angle)
    angles = [w.normal_angle for w in ws]
    for i in range(len(ws) - 1):
        if angles[i + 1] - angles[i] == 0.0:
            raise ValueError("two walls share the same normal angle")
    gaps = [angles[(i + 1) % len(ws)] - angles[i] for i in range(len(ws))]
    gaps[-1] += TWO_PI
    if max(gaps) >= math.pi - 1e-12:
        raise UnboundedRoomError("wall normals leave an open half turn uncovered")

    offsets = np.array([w.offset for w in ws])
    if np.min(offsets) <= tol:
        # Origin not safely interior: fall back to explicit clipping to decide
        # emptiness before the vertex construction below.
        span = float(np.max(np.abs(offsets))) + 1.0
        poly = _clip_box_by_walls(ws, half_size=1e3 * span)
        if poly.shape[0] < 3 or _poly_area(poly) <= tol * tol:
            raise EmptyRoomError("half-plane intersection is empty")

    k = len(ws)
    verts = np.array([_line_intersection(ws[i], ws[(i + 1) % k]) for i in range(k)])

    normals = np.stack([np.array([math.cos(a), math.sin(a)]) for a in angles])
    slack = offsets[None, :] - verts @ normals.T  # (vertex, wall)
    if np.min(slack) < -tol:
        raise RedundantWallError("a wall does not touch the boundary")
    edge_len = np.hypot(*(verts - np.roll(verts, 1, axis=0)).T)
    if np.min(edge_len) <= tol:
        raise RedundantWallError("a wall contributes no edge")
    return ConvexRoom(walls=tuple(ws), vertices=verts)


def _poly_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return float(0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def room_from_vertices(vertices, tol: float = GEOM_TOL) -> ConvexRoom:
    """Build a room from a convex counterclockwise (or clockwise) vertex list."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
        raise ValueError("need at least 3 two-dimensional vertices")
    # Orient counterclockwise.
    x, y = v[:, 0], v[:, 1]
    if 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0:
        v = v[::-1]
    walls = []
    n = v.shape[0]
    for i in range(n):
        e = v[(i + 1) % n] - v[i]
        length = math.hypot(*e)
        if length <= tol:
            raise ValueError("degenerate edge in vertex list")
        normal = np.array([e[1], -e[0]]) / length  # outward for CCW winding
        walls.append(Wall(math.atan2(normal[1], normal[0]), float(normal @ v[i])))
    return room_from_walls(walls, tol=tol)


def wall_slacks(room: ConvexRoom, p) -> np.ndarray:
    """Signed clearance s_i - <p, n_i> to every wall (positive strictly inside)."""
    p = np.asarray(p, dtype=float)
    return room.offsets() - room.normals() @ p


def point_wall_distance(room: ConvexRoom, p, i: int) -> float:
    """Perpendicular distance from an interior point to wall i.

    Equals half the distance to the wall's first-order image source.
    Raises PointOutsideError unless p is strictly inside the room.
    """
    slacks = wall_slacks(room, p)
    if np.min(slacks) <= 0.0:
        raise PointOutsideError("point is on or outside the room boundary")
    return float(slacks[i])


def is_feasible_point(room: ConvexRoom, p, tol: float = GEOM_TOL) -> bool:
    """True iff the perpendicular foot on every wall line lands on its edge.

    Such interior points receive a first-order echo from every wall.
    """
    p = np.asarray(p, dtype=float)
    slacks = wall_slacks(room, p)
    if np.min(slacks) <= 0.0:
        raise PointOutsideError("point is on or outside the room boundary")
    for i, w in enumerate(room.walls):
        foot = p + slacks[i] * w.normal
        a, b = room.edge(i)
        e = b - a
        L2 = float(e @ e)
        t = float((foot - a) @ e) / L2
        if t < -tol or t > 1.0 + tol:
            return False
    return True


def room_contains(a: ConvexRoom, b: ConvexRoom, tol: float = GEOM_TOL) -> bool:
    """True iff every vertex of b satisfies all half-plane constraints of a."""
    slack = a.offsets()[None, :] - b.vertices @ a.normals().T
    return bool(np.min(slack) >= -tol)


def mirror_room(room: ConvexRoom) -> ConvexRoom:
    """Reflect a room across the x axis."""
    return room_from_walls([Wall(-w.normal_angle, w.offset) for w in room.walls])


def transform_point(p, origin, heading: float) -> np.ndarray:
    """Express a point in the frame with the given origin and +x heading."""
    p = np.asarray(p, dtype=float) - np.asarray(origin, dtype=float)
    c, s = math.cos(-heading), math.sin(-heading)
    return np.array([c * p[0] - s * p[1], s * p[0] + c * p[1]])


def room_in_frame(room: ConvexRoom, origin, heading: float) -> ConvexRoom:
    """Express a room in the frame with the given origin and +x heading."""
    origin = np.asarray(origin, dtype=float)
    walls = [
        Wall(w.normal_angle - heading, w.offset - float(w.normal @ origin))
        for w in room.walls
    ]
    return room_from_walls(walls)


def hausdorff_distance(pts_a, pts_b) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    a = np.asarray(pts_a, dtype=float)
    b = np.asarray(pts_b, dtype=float)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def rooms_congruent(
    a: ConvexRoom,
    b: ConvexRoom,
    tol: float = 1e-6,
    allow_reflection: bool = False,
) -> bool:
    """Vertex-set equality of two rooms expressed in the same frame.

    With ``allow_reflection`` the mirror image of ``b`` across the x axis is
    also accepted.
    """
    if a.k != b.k:
        return False
    if hausdorff_distance(a.vertices, b.vertices) <= tol:
        return True
    if allow_reflection:
        mirrored = b.vertices * np.array([1.0, -1.0])
        return hausdorff_distance(a.vertices, mirrored) <= tol
    return False
