import math

import numpy as np
import pytest

from echoslam import (
    EchoSet,
    InfeasiblePointError,
    Wall,
    corrupt_echo_set,
    echo_set,
    first_order_distances,
    image_source,
    point_wall_distance,
    room_from_walls,
    with_common_spurious,
)
from echoslam.sampling import random_convex_room, random_instance


def reflect(p, angle, offset):
    """Reference single reflection used as an independent oracle."""
    n = np.array([math.cos(angle), math.sin(angle)])
    p = np.asarray(p, dtype=float)
    return p + 2.0 * (offset - n @ p) * n


def test_image_source_first_order(unit_square):
    assert np.allclose(image_source(unit_square, (0, 0), [0]), [1.0, 0.0])
    assert np.allclose(image_source(unit_square, (0.2, 0.1), [1]), [0.2, 0.9])


def test_image_source_third_order(unit_square):
    img = image_source(unit_square, (0, 0), [0, 2, 0])
    assert np.allclose(img, [3.0, 0.0])
    assert 0.5 * np.hypot(*(img - np.array([0, 0]))) == pytest.approx(1.5)


def test_image_source_rejects_repeats(unit_square):
    with pytest.raises(ValueError):
        image_source(unit_square, (0, 0), [0, 0])


def test_first_order_distances_square(unit_square):
    assert np.allclose(first_order_distances(unit_square, (0, 0)), [0.5] * 4)
    assert np.allclose(first_order_distances(unit_square, (0.2, 0)), [0.3, 0.5, 0.7, 0.5])
    assert np.allclose(first_order_distances(unit_square, (0.2, 0.1)), [0.3, 0.4, 0.7, 0.6])


def test_first_order_matches_image_sources():
    rng = np.random.default_rng(3)
    for _ in range(10):
        room, points, _, _ = random_instance(rng, int(rng.integers(3, 7)), 0.25, 0.25)
        for p in points:
            dists = first_order_distances(room, p)
            for i in range(room.k):
                img = image_source(room, p, [i])
                assert 0.5 * np.hypot(*(img - p)) == pytest.approx(dists[i])
                assert point_wall_distance(room, p, i) == pytest.approx(dists[i])


def test_reflection_composition_is_isometry():
    rng = np.random.default_rng(4)
    room = random_convex_room(rng, 5)
    p = np.zeros(2)
    q = np.array([0.2, -0.1])
    for seq in ([0], [1, 2], [3, 0, 2], [4, 1, 0, 2]):
        ip = image_source(room, p, seq)
        iq = image_source(room, q, seq)
        assert np.hypot(*(ip - iq)) == pytest.approx(np.hypot(*(p - q)))


def test_echo_set_first_order_multiset(unit_square):
    es = echo_set(unit_square, (0, 0), max_order=1, d_max=10)
    assert es.n == 4
    assert np.allclose(es.distances, 0.5)
    assert es.dedup().n == 1


def test_echo_set_second_order_oracle(unit_square):
    # independent oracle: explicit reflection composition over all 4*3
    # ordered wall pairs
    p = np.array([0.2, 0.0])
    es = echo_set(unit_square, p, max_order=2, d_max=10)
    expected = list(first_order_distances(unit_square, p))
    walls = unit_square.walls
    for i in range(4):
        for k in range(4):
            if i == k:
                continue
            img = reflect(reflect(p, walls[i].normal_angle, walls[i].offset),
                          walls[k].normal_angle, walls[k].offset)
            expected.append(0.5 * float(np.hypot(*(img - p))))
    assert np.allclose(es.distances, np.sort(expected))
    assert 1.0 in np.round(es.distances, 12)  # opposite-wall pair half distance


def test_echo_set_d_max_filter(unit_square):
    es = echo_set(unit_square, (0.2, 0.0), max_order=2, d_max=0.8)
    assert np.all(es.distances <= 0.8)
    assert es.labels is not None and len(es.labels) == es.n


def test_echo_set_requires_positive_order(unit_square):
    with pytest.raises(ValueError):
        echo_set(unit_square, (0, 0), max_order=0)


def test_echo_set_infeasible_point():
    from echoslam import room_from_vertices

    room = room_from_vertices([[-2.0, -0.5], [8.0, -0.5], [3.0, 0.3]])
    bad = np.array([-1.6, -0.43])  # near the sharp vertex
    with pytest.raises(InfeasiblePointError):
        echo_set(room, bad)


def test_parallel_wall_third_order_identity():
    # for parallel walls i, k and any two points, the third-order (i,k,i)
    # distances differ exactly as the first-order ones do
    rng = np.random.default_rng(6)
    for _ in range(10):
        room, points, _, _ = random_instance(rng, 4, 0.3, 0.3, parallelogram=True)
        for (i, k) in ((0, 2), (2, 0), (1, 3), (3, 1)):
            r_iki = []
            r_i = []
            for p in points:
                img = image_source(room, p, [i, k, i])
                r_iki.append(0.5 * np.hypot(*(img - p)))
                r_i.append(point_wall_distance(room, p, i))
            for a in range(3):
                for b in range(3):
                    assert r_iki[a] - r_iki[b] == pytest.approx(r_i[a] - r_i[b], abs=1e-12)


def test_parallelogram_wall_sum_identity():
    rng = np.random.default_rng(7)
    for _ in range(10):
        room, points, _, _ = random_instance(rng, 4, 0.3, 0.3, parallelogram=True)
        dists = [first_order_distances(room, p) for p in points]
        sums_02 = {round(d[0] + d[2], 12) for d in dists}
        sums_13 = {round(d[1] + d[3], 12) for d in dists}
        assert len(sums_02) == 1 and len(sums_13) == 1


def test_corrupt_identity():
    es = EchoSet(np.array([0.3, 0.5, 0.7]), labels=((0,), (1,), (2,)))
    out = corrupt_echo_set(es, sigma=0.0, seed=0)
    assert np.allclose(out.distances, es.distances)
    assert out.labels is None


def test_corrupt_spurious_count():
    es = EchoSet(np.array([0.3, 0.5, 0.7]))
    out = corrupt_echo_set(es, sigma=0.0, n_spurious=2, seed=1)
    assert out.n == 5
    # original distances all still present
    for d in es.distances:
        assert np.min(np.abs(out.distances - d)) < 1e-12


def test_corrupt_noise_bounded_and_deterministic():
    es = EchoSet(np.array([0.3, 0.5, 0.5, 0.7]))
    out1 = corrupt_echo_set(es, sigma=0.1, seed=42)
    out2 = corrupt_echo_set(es, sigma=0.1, seed=42)
    assert np.allclose(out1.distances, out2.distances)
    # element-wise perturbation stays within 5 sigma (sorted vs sorted)
    assert np.max(np.abs(np.sort(out1.distances) - es.distances)) <= 0.5


def test_corrupt_drop():
    es = EchoSet(np.array([0.3, 0.5, 0.7]))
    out = corrupt_echo_set(es, sigma=0.0, drop=[1], seed=0)
    assert np.allclose(out.distances, [0.3, 0.7])


def test_common_spurious():
    sets = [EchoSet(np.array([0.3, 0.5])), EchoSet(np.array([0.4, 0.6]))]
    out = with_common_spurious(sets, [1.2, 1.5])
    for e in out:
        assert e.n == 4
        assert 1.2 in e.distances and 1.5 in e.distances
