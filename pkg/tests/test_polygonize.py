from __future__ import annotations

import numpy as np
import pytest

from buildsnake.geometry import min_area_rect, rotate_points
from buildsnake.polygonize import building_mbr, fit_rectilinear
from buildsnake.snake import resample_closed

from test_geometry import mbr_area_sweep


def angle_error_mod90(a: float, b: float) -> float:
    d = abs(a - b) % 90.0
    return min(d, 90.0 - d)


def noisy_outline(polygon, n=160, noise=0.0, seed=0):
    pts = resample_closed(np.asarray(polygon, dtype=float), n)
    if noise > 0:
        rng = np.random.default_rng(seed)
        pts = pts + rng.uniform(-noise, noise, pts.shape)
    return pts


L_SHAPE = np.array([[0, 0], [36, 0], [36, 14], [16, 14], [16, 30], [0, 30]], dtype=float)
U_SHAPE = np.array(
    [[0, 0], [40, 0], [40, 28], [28, 28], [28, 10], [12, 10], [12, 28], [0, 28]],
    dtype=float,
)
RECT = np.array([[0, 0], [30, 0], [30, 20], [0, 20]], dtype=float)


# ---------------------------------------------------------------------------
# building_mbr


def test_mbr_of_rotated_rect_boundary():
    rect = building_mbr(rotate_points(RECT, 30.0))
    assert rect.angle_deg == pytest.approx(30.0, abs=1e-6)


def test_mbr_of_l_boundary_matches_sweep():
    pts = rotate_points(L_SHAPE, 20.0)
    rect = building_mbr(pts)
    assert rect.area <= mbr_area_sweep(pts) * 1.001
    assert angle_error_mod90(rect.angle_deg, 20.0) <= 0.1


def test_mbr_square_tie_canonical():
    sq = np.array([[0, 0], [10, 0], [10, 10], [0, 10]], dtype=float)
    assert building_mbr(sq).angle_deg == pytest.approx(0.0, abs=1e-9)


# ---------------------------------------------------------------------------
# fit_rectilinear: shape levels


def test_rect_snake_gives_rectangle_level():
    theta = 25.0
    snake = rotate_points(noisy_outline(RECT, 140), theta)
    mbr = min_area_rect(snake)
    result = fit_rectilinear(snake, mbr)
    assert result.shape_level == "rectangle"
    # Candidate region matches the snake region closely.
    from conftest import pixel_iou
    from buildsnake.geometry import GridSpec

    grid = GridSpec((-30.0, -30.0), 0.5, 180, 180)
    assert pixel_iou(result.polygon, snake, grid) >= 90.0


def test_l_snake_gives_ltz_level_and_orientation():
    theta = 23.0
    truth_angle = theta
    outline = noisy_outline(L_SHAPE, 180, noise=1.0, seed=4)
    snake = rotate_points(outline, theta)
    lidar_boundary = rotate_points(L_SHAPE, theta)
    result = fit_rectilinear(snake, building_mbr(lidar_boundary))
    assert result.shape_level == "LTZ"
    assert angle_error_mod90(result.orientation_deg, truth_angle) <= 1.0


def test_u_snake_gives_u_level():
    theta = 10.0
    snake = rotate_points(noisy_outline(U_SHAPE, 220, noise=0.5, seed=9), theta)
    result = fit_rectilinear(snake, building_mbr(rotate_points(U_SHAPE, theta)))
    assert result.shape_level == "U"


# ---------------------------------------------------------------------------
# invariants


def _edge_angles(poly):
    edges = np.roll(poly, -1, axis=0) - poly
    return np.degrees(np.arctan2(edges[:, 1], edges[:, 0])) % 180.0


@pytest.mark.parametrize("shape,theta", [(RECT, 40.0), (L_SHAPE, 77.0), (U_SHAPE, 5.0)])
def test_output_edges_rectilinear(shape, theta):
    snake = rotate_points(noisy_outline(shape, 200, noise=0.4, seed=2), theta)
    result = fit_rectilinear(snake, building_mbr(rotate_points(shape, theta)))
    angles = _edge_angles(result.polygon) % 90.0
    angles = np.minimum(angles, 90.0 - angles)
    base = result.orientation_deg % 90.0
    rel = np.abs(
        np.minimum((_edge_angles(result.polygon) - base) % 90.0,
                   90.0 - (_edge_angles(result.polygon) - base) % 90.0)
    )
    assert rel.max() <= 1e-6


@pytest.mark.parametrize("shape", [RECT, L_SHAPE, U_SHAPE])
def test_output_area_near_snake_area(shape):
    snake = noisy_outline(shape, 200, noise=0.3, seed=5)
    result = fit_rectilinear(snake, building_mbr(shape))
    from buildsnake.geometry import polygon_area

    ratio = polygon_area(result.polygon) / polygon_area(shape)
    assert 0.8 <= ratio <= 1.25


def test_orientation_equals_mbr_angle():
    snake = rotate_points(noisy_outline(RECT, 150), 33.0)
    mbr = building_mbr(rotate_points(RECT, 33.0))
    result = fit_rectilinear(snake, mbr)
    assert result.orientation_deg == mbr.angle_deg


def test_noisy_rect_orientation_within_one_degree():
    theta = 57.0
    snake = rotate_points(noisy_outline(RECT, 160, noise=1.0, seed=12), theta)
    lidar = rotate_points(RECT, theta)
    result = fit_rectilinear(snake, building_mbr(lidar))
    assert angle_error_mod90(result.orientation_deg, theta) <= 1.0


def test_snake_mbr_source_degrades_on_skewed_snake():
    # Shearing the snake fools an MBR computed from snake points; the
    # LiDAR-derived MBR is unaffected.
    theta = 15.0
    outline = noisy_outline(L_SHAPE, 180, noise=0.3, seed=3)
    # Vertical shear tilts the long horizontal edges by ~6.8 degrees.
    sheared = outline @ np.array([[1.0, 0.12], [0.0, 1.0]])
    snake = rotate_points(sheared, theta)
    lidar = rotate_points(L_SHAPE, theta)

    good = fit_rectilinear(snake, building_mbr(lidar))
    bad = fit_rectilinear(snake, building_mbr(snake))
    assert angle_error_mod90(good.orientation_deg, theta) <= 1.0
    assert angle_error_mod90(bad.orientation_deg, theta) >= 2.0


def test_degenerate_snake_rejected():
    line = np.column_stack([np.linspace(0, 10, 20), np.zeros(20)])
    with pytest.raises(ValueError):
        fit_rectilinear(line, min_area_rect(np.array([[0, 0], [10, 0], [5, 1e-6]])))
