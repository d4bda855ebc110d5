import math

import numpy as np
import pytest

from occnav.gridmap import (
    OccupancyGrid,
    circle_overlaps,
    is_occupied,
    load_map,
    parse_ascii_map,
    raycast,
    raycast_batch,
    save_ascii_map,
    save_raster_map,
)

from conftest import disc_overlap_bruteforce, grid_from_rows


# -- loading -----------------------------------------------------------------


def test_ascii_all_free():
    g = parse_ascii_map("3 3 0.5 0.0 0.0\n...\n...\n...\n")
    assert g.width == 3 and g.height == 3
    assert not g.occupied.any()


def test_ascii_occupied_cell_lands_where_expected():
    # row 0 of the payload is the smallest y; '#' at row 1, col 1
    g = parse_ascii_map("3 3 1.0 0.0 0.0\n...\n.#.\n...\n")
    assert is_occupied(g, (1.5, 1.5))
    assert not is_occupied(g, (0.5, 0.5))


def test_metric_extent():
    g = OccupancyGrid(np.zeros((200, 200), bool), 0.05, (0.0, 0.0))
    x0, y0, x1, y1 = g.extent
    assert (x1 - x0, y1 - y0) == (10.0, 10.0)


@pytest.mark.parametrize(
    "text",
    [
        "",  # empty
        "3 3 0.5\n...\n...\n...\n",  # short header
        "3 3 -0.5 0 0\n...\n...\n...\n",  # bad resolution
        "3 3 0.5 0 0\n...\n...\n",  # missing row
        "3 3 0.5 0 0\n...\n..\n...\n",  # short row
        "3 3 0.5 0 0\n...\n.x.\n...\n",  # bad character
        "0 3 0.5 0 0\n",  # zero dimension
    ],
)
def test_ascii_malformed(text):
    with pytest.raises(ValueError):
        parse_ascii_map(text)


def test_ascii_roundtrip(tmp_path):
    g = grid_from_rows(["####", "#..#", "#.##", "####"], resolution=0.25, origin=(-1.0, 2.0))
    path = tmp_path / "map.txt"
    save_ascii_map(g, path)
    g2 = load_map(path)
    assert np.array_equal(g.occupied, g2.occupied)
    assert g2.resolution == 0.25
    assert np.array_equal(g2.origin, [-1.0, 2.0])


def test_raster_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    g = OccupancyGrid(rng.random((20, 30)) < 0.3, 0.05, (1.5, -0.5))
    path = tmp_path / "map.pgm"
    save_raster_map(g, path)
    g2 = load_map(path)
    assert np.array_equal(g.occupied, g2.occupied)
    assert g2.resolution == 0.05
    assert np.array_equal(g2.origin, [1.5, -0.5])


def test_raster_missing_sidecar(tmp_path):
    g = OccupancyGrid(np.zeros((4, 4), bool), 0.1)
    path = tmp_path / "map.pgm"
    save_raster_map(g, path)
    path.with_suffix(".meta").unlink()
    with pytest.raises(ValueError, match="sidecar"):
        load_map(path)


def test_raster_threshold_is_half_of_max(tmp_path):
    # pixel < 50% of maxval means occupied; exactly 50% stays free
    path = tmp_path / "m.pgm"
    payload = bytes([0, 127, 128, 255])
    path.write_bytes(b"P5\n4 1\n255\n" + payload)
    path.with_suffix(".meta").write_text("resolution 0.1\norigin_x 0\norigin_y 0\n")
    g = load_map(path)
    assert list(g.occupied[0]) == [True, True, False, False]


# -- point and disc queries ---------------------------------------------------


def test_is_occupied_out_of_bounds(empty16):
    assert is_occupied(empty16, (-5.0, 3.0))
    assert is_occupied(empty16, (3.0, 99.0))
    assert not is_occupied(empty16, (8.0, 8.0))


def test_circle_overlaps_examples(empty16):
    assert not circle_overlaps(empty16, (8.0, 8.0), 0.0)
    assert not circle_overlaps(empty16, (8.0, 8.0), 1.0)
    # wall face at x=0.1 (border one cell thick): disc 0.3 m away with r=0.45
    assert circle_overlaps(empty16, (0.4, 8.0), 0.45)
    assert not circle_overlaps(empty16, (0.4, 8.0), 0.25)


def test_circle_overlaps_negative_radius(empty16):
    with pytest.raises(ValueError):
        circle_overlaps(empty16, (8.0, 8.0), -0.1)


def test_circle_overlaps_matches_bruteforce():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        g = OccupancyGrid(rng.random((64, 64)) < 0.08, 0.1, (0.0, 0.0))
        c = rng.uniform(-0.5, 6.9, size=2)
        r = rng.uniform(0.0, 1.2)
        assert circle_overlaps(g, c, r) == disc_overlap_bruteforce(g, c, r)


# -- ray casting ---------------------------------------------------------------


def test_raycast_saturates_on_empty_map(empty16):
    assert raycast(empty16, (8.0, 8.0), 0.7, 7.0) == 7.0


def test_raycast_axis_aligned_wall():
    occ = np.zeros((40, 60), bool)
    occ[:, 20:] = True  # wall starts at x = 2.0
    g = OccupancyGrid(occ, 0.1, (0.0, 0.0))
    r = raycast(g, (0.05, 2.0), 0.0, 7.0)
    assert abs(r - 1.95) < 1e-12  # entry into the wall boundary


def test_raycast_origin_in_wall():
    g = grid_from_rows(["###", "###", "###"], resolution=1.0)
    assert raycast(g, (1.5, 1.5), 0.3, 5.0) == 0.0


def test_raycast_origin_outside_map(empty16):
    assert raycast(empty16, (-3.0, -3.0), 0.0, 7.0) == 0.0


def test_raycast_monotone_in_max_range(empty16):
    rng = np.random.default_rng(7)
    occ = rng.random((64, 64)) < 0.05
    g = OccupancyGrid(occ, 0.1, (0.0, 0.0))
    for _ in range(300):
        p = rng.uniform(0.5, 5.9, size=2)
        if is_occupied(g, p):
            continue
        a = rng.uniform(-math.pi, math.pi)
        m1, m2 = sorted(rng.uniform(0.2, 9.0, size=2))
        r1 = raycast(g, p, a, m1)
        r2 = raycast(g, p, a, m2)
        assert r1 == min(r2, m1)  # differ only by saturation


def test_raycast_angle_wraps():
    rng = np.random.default_rng(11)
    occ = rng.random((64, 64)) < 0.05
    g = OccupancyGrid(occ, 0.1, (0.0, 0.0))
    for _ in range(200):
        p = rng.uniform(0.5, 5.9, size=2)
        if is_occupied(g, p):
            continue
        a = rng.uniform(-math.pi, math.pi)
        assert abs(raycast(g, p, a, 7.0) - raycast(g, p, a + 2 * math.pi, 7.0)) <= 1e-9


def test_raycast_never_exceeds_border_distance():
    g = OccupancyGrid(np.zeros((30, 30), bool), 0.1, (0.0, 0.0))
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = rng.uniform(0.2, 2.8, size=2)
        a = rng.uniform(-math.pi, math.pi)
        r = raycast(g, p, a, 50.0)
        end = p + r * np.array([math.cos(a), math.sin(a)])
        assert -1e-9 <= end[0] <= 3.0 + 1e-9
        assert -1e-9 <= end[1] <= 3.0 + 1e-9


def test_batch_equals_scalar_exactly():
    rng = np.random.default_rng(13)
    occ = rng.random((80, 80)) < 0.07
    g = OccupancyGrid(occ, 0.1, (-1.0, -1.0))
    p = np.array([3.0, 2.5])
    assert not is_occupied(g, p)
    angles = rng.uniform(-math.pi, math.pi, size=300)
    batch = raycast_batch(g, p, angles, 7.0)
    scalar = np.array([raycast(g, p, float(a), 7.0) for a in angles])
    assert np.array_equal(batch, scalar)


def test_grid_is_immutable(empty16):
    with pytest.raises(ValueError):
        empty16.occupied[0, 0] = False


def test_world_cell_roundtrip(empty16):
    rng = np.random.default_rng(2)
    for _ in range(200):
        ix, iy = int(rng.integers(0, empty16.width)), int(rng.integers(0, empty16.height))
        assert empty16.world_to_cell(empty16.cell_center(ix, iy)) == (ix, iy)
