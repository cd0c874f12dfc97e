"""Image-source forward model.

Generates exact echo half-path distances for a room and a measurement point:
the ground truth every reconstruction and detection stage is checked against.
A first-order echo's half round-trip length equals the point-to-wall distance;
higher orders come from composing reflections across wall lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    ConvexRoom,
    InfeasiblePointError,
    is_feasible_point,
    wall_slacks,
)

WallSequence = tuple[int, ...]


@dataclass
class EchoSet:
    """Multiset of echo half-path distances for one measurement point.

    ``labels`` holds the generating wall sequence per entry when known;
    ``None`` means the set is ungrouped (unknown wall correspondence).
    Distances are kept sorted ascending, duplicates included.
    """

    distances: np.ndarray
    labels: tuple[WallSequence, ...] | None = None

    def __post_init__(self) -> None:
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 1:
            raise ValueError("distances must be one-dimensional")
        if d.size and np.min(d) <= 0.0:
            raise ValueError("echo distances must be positive")
        order = np.argsort(d, kind="stable")
        self.distances = d[order]
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != d.size:
                raise ValueError("labels length must match distances")
            self.labels = tuple(labels[i] for i in order)

    @property
    def n(self) -> int:
        return int(self.distances.size)

    def dedup(self, tol: float = 1e-9) -> "EchoSet":
        """Collapse entries whose distances agree within tol (for display)."""
        if self.n == 0:
            return EchoSet(self.distances.copy(), self.labels)
        keep = [0]
        for i in range(1, self.n):
            if self.distances[i] - self.distances[keep[-1]] > tol:
                keep.append(i)
        labels = None
        if self.labels is not None:
            labels = tuple(self.labels[i] for i in keep)
        return EchoSet(self.distances[keep], labels)


def _validate_sequence(room: ConvexRoom, seq: WallSequence) -> None:
    if len(seq) == 0:
        raise ValueError("wall sequence must be non-empty")
    for i in seq:
        if not (0 <= i < room.k):
            raise ValueError(f"wall index {i} out of range")
    for a, b in zip(seq, seq[1:]):
        if a == b:
            raise ValueError("consecutive reflections off the same wall")


def image_source(room: ConvexRoom, p, seq) -> np.ndarray:
    """Reflect p successively across the wall lines in seq order."""
    seq = tuple(seq)
    _validate_sequence(room, seq)
    q = np.asarray(p, dtype=float).copy()
    for i in seq:
        w = room.walls[i]
        n = w.normal
        q = q + 2.0 * (w.offset - float(n @ q)) * n
    return q


def first_order_distances(room: ConvexRoom, p) -> np.ndarray:
    """Per-wall first-order echo half distances (wall-angle order).

    Requires a feasible point; raises InfeasiblePointError otherwise.
    """
    if not is_feasible_point(room, p):
        raise InfeasiblePointError("point cannot receive all first-order echoes")
    return wall_slacks(room, p)


def echo_set(
    room: ConvexRoom,
    p,
    max_order: int = 1,
    d_max: float = np.inf,
    dedup: bool = False,
    tol: float = 1e-9,
) -> EchoSet:
    """All image-source echoes up to max_order with half distance <= d_max.

    Duplicate distances (symmetric rooms, coincident paths) are kept as a
    multiset; pass ``dedup=True`` to collapse them for display.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if not is_feasible_point(room, p):
        raise InfeasiblePointError("point cannot receive all first-order echoes")
    p = np.asarray(p, dtype=float)

    entries: list[tuple[float, WallSequence]] = []
    frontier: list[tuple[WallSequence, np.ndarray]] = [((), p)]
    for _ in range(max_order):
        nxt: list[tuple[WallSequence, np.ndarray]] = []
        for seq, img in frontier:
            for i in range(room.k):
                if seq and seq[-1] == i:
                    continue
                w = room.walls[i]
                n = w.normal
                img2 = img + 2.0 * (w.offset - float(n @ img)) * n
                nxt.append((seq + (i,), img2))
                dist = 0.5 * float(np.hypot(*(img2 - p)))
                if dist <= d_max:
                    entries.append((dist, seq + (i,)))
        frontier = nxt

    entries.sort(key=lambda e: e[0])
    distances = np.array([e[0] for e in entries])
    labels = tuple(e[1] for e in entries)
    result = EchoSet(distances, labels)
    return result.dedup(tol) if dedup else result


def corrupt_echo_set(
    e: EchoSet,
    sigma: float,
    n_spurious: int = 0,
    drop=(),
    seed: int | None = None,
    spurious_range: tuple[float, float] | None = None,
) -> EchoSet:
    """Noisy, ungrouped version of an echo set.

    Adds zero-mean Gaussian perturbation of std ``sigma`` to every distance,
    inserts ``n_spurious`` uniform draws (default range: the set's own min/max),
    removes the entries listed in ``drop`` (original indices), strips labels
    and re-sorts.  Deterministic for a given seed.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    d = e.distances.copy()
    if sigma > 0:
        d = d + rng.normal(0.0, sigma, size=d.shape)
    if n_spurious > 0:
        if spurious_range is None:
            if e.n == 0:
                raise ValueError("cannot draw spurious echoes from an empty set")
            spurious_range = (float(e.distances.min()), float(e.distances.max()))
        lo, hi = spurious_range
        d = np.concatenate([d, rng.uniform(lo, hi, size=n_spurious)])
    if drop:
        mask = np.ones(d.size, dtype=bool)
        for i in drop:
            mask[i] = False
        d = d[mask]
    d = np.maximum(d, 1e-9)
    return EchoSet(np.sort(d), labels=None)


def with_common_spurious(sets, extra_distances) -> list[EchoSet]:
    """Append the same spurious distances to every point's echo set.

    Models out-of-plane reflectors (ceiling, floor): a device moving in a
    horizontal plane sees them at the same distance from every point.
    """
    extra = np.asarray(extra_distances, dtype=float)
    out = []
    for e in sets:
        out.append(EchoSet(np.sort(np.concatenate([e.distances, extra])), labels=None))
    return out
