"""Regularize converged snake contours into rectilinear building polygons.

Shape levels: plain rectangle, L/T/Z (one corner notch), U (one mid-edge
notch). Orientation comes from the MBR of the projected LiDAR boundary, not
from the snake itself, which keeps it robust to snake outliers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import trim_mean

from .geometry import (
    GridSpec,
    OrientedRect,
    min_area_rect,
    rasterize_polygon,
    rotate_points,
)

__all__ = ["BuildingPolygon", "building_mbr", "fit_rectilinear"]

LEVEL_RECT = "rectangle"
LEVEL_LTZ = "LTZ"
LEVEL_U = "U"


@dataclass
class BuildingPolygon:
    """Rectilinear footprint; every edge parallel or perpendicular to orientation."""

    polygon: np.ndarray
    shape_level: str
    orientation_deg: float


def building_mbr(init) -> OrientedRect:
    """Minimum bounding rectangle of the projected LiDAR boundary points."""
    pts = np.asarray(getattr(init, "pixels", init), dtype=float)
    return min_area_rect(pts)


def _largest_rectangle(mask: np.ndarray) -> tuple[int, int, int, int, int]:
    """Largest all-true axis-aligned rectangle: (area, r0, r1, c0, c1) half-open."""
    h, w = mask.shape
    heights = np.zeros(w, dtype=int)
    best = (0, 0, 0, 0, 0)
    for r in range(h):
        heights = (heights + 1) * mask[r]
        stack: list[tuple[int, int]] = []
        for c in range(w + 1):
            cur = int(heights[c]) if c < w else 0
            start = c
            while stack and stack[-1][1] >= cur:
                sc, sh = stack.pop()
                area = sh * (c - sc)
                if area > best[0]:
                    best = (area, r - sh + 1, r + 1, sc, c)
                start = sc
            if cur > 0 and (not stack or stack[-1][1] < cur):
                stack.append((start, cur))
    return best


def _snap_coord(values: np.ndarray, fallback: float) -> float:
    """25%-trimmed mean of supporting snake coordinates, if enough support."""
    if len(values) >= 4:
        return float(trim_mean(values, 0.25))
    if len(values) >= 1:
        return float(values.mean())
    return fallback


def _snap_vertical(pts, x_raw, y_lo, y_hi, band):
    sel = (np.abs(pts[:, 0] - x_raw) <= band) & (pts[:, 1] >= y_lo - band) & (pts[:, 1] <= y_hi + band)
    return _snap_coord(pts[sel, 0], x_raw)


def _snap_horizontal(pts, y_raw, x_lo, x_hi, band):
    sel = (np.abs(pts[:, 1] - y_raw) <= band) & (pts[:, 0] >= x_lo - band) & (pts[:, 0] <= x_hi + band)
    return _snap_coord(pts[sel, 1], y_raw)


def _corner_notch_polygon(box, notch):
    """Box minus a notch rectangle that shares one box corner (L shape)."""
    minx, maxx, miny, maxy = box
    nx0, nx1, ny0, ny1 = notch
    left = nx0 <= minx
    bottom = ny0 <= miny
    if left and bottom:
        return np.array([(nx1, miny), (maxx, miny), (maxx, maxy), (minx, maxy), (minx, ny1), (nx1, ny1)])
    if not left and bottom:
        return np.array([(minx, miny), (nx0, miny), (nx0, ny1), (maxx, ny1), (maxx, maxy), (minx, maxy)])
    if left and not bottom:
        return np.array([(minx, miny), (maxx, miny), (maxx, maxy), (nx1, maxy), (nx1, ny0), (minx, ny0)])
    return np.array([(minx, miny), (maxx, miny), (maxx, ny0), (nx0, ny0), (nx0, maxy), (minx, maxy)])


def _edge_notch_polygon(box, notch, side):
    """Box minus a notch open on exactly one box side (U shape)."""
    minx, maxx, miny, maxy = box
    nx0, nx1, ny0, ny1 = notch
    if side == "top":
        return np.array(
            [(minx, miny), (maxx, miny), (maxx, maxy), (nx1, maxy), (nx1, ny0), (nx0, ny0), (nx0, maxy), (minx, maxy)]
        )
    if side == "bottom":
        return np.array(
            [(minx, miny), (nx0, miny), (nx0, ny1), (nx1, ny1), (nx1, miny), (maxx, miny), (maxx, maxy), (minx, maxy)]
        )
    if side == "right":
        return np.array(
            [(minx, miny), (maxx, miny), (maxx, ny0), (nx0, ny0), (nx0, ny1), (maxx, ny1), (maxx, maxy), (minx, maxy)]
        )
    return np.array(
        [(minx, miny), (maxx, miny), (maxx, maxy), (minx, maxy), (minx, ny1), (nx1, ny1), (nx1, ny0), (minx, ny0)]
    )


def fit_rectilinear(
    snake: np.ndarray,
    mbr: OrientedRect,
    sym_diff_tol: float = 0.10,
    cell: float = 1.0,
) -> BuildingPolygon:
    """Fit the lowest rectilinear shape level matching the snake region.

    The snake is rotated into the MBR frame and rasterized at `cell`-sized
    pixels. Candidate shapes are the frame-aligned bounding box, the box
    minus the largest rectangular deficit (corner notch -> L/T/Z, mid-edge
    notch -> U). The first level whose symmetric difference against the
    snake region is within sym_diff_tol of the region area wins.
    """
    pts = np.asarray(getattr(snake, "pixels", snake), dtype=float)
    theta = mbr.angle_deg
    center = np.asarray(mbr.center)
    local = rotate_points(pts, -theta, center)
    minx, miny = local.min(axis=0)
    maxx, maxy = local.max(axis=0)
    box = (minx, maxx, miny, maxy)

    grid = GridSpec(
        origin=(minx - cell, miny - cell),
        cell_size=cell,
        width=int(np.ceil((maxx - minx) / cell)) + 2,
        height=int(np.ceil((maxy - miny) / cell)) + 2,
    )
    region = rasterize_polygon(local, grid)
    region_area = region.sum() * cell * cell
    if region_area == 0:
        raise ValueError("snake region rasterizes to zero area")

    xc, yc = grid.x_centers(), grid.y_centers()
    box_mask = ((xc >= minx) & (xc <= maxx))[None, :] & ((yc >= miny) & (yc <= maxy))[:, None]
    cols = np.flatnonzero(box_mask.any(axis=0))
    rows = np.flatnonzero(box_mask.any(axis=1))
    cb0, cb1 = int(cols[0]), int(cols[-1])
    rb0, rb1 = int(rows[0]), int(rows[-1])

    def symdiff_ratio(candidate: np.ndarray) -> float:
        cand_mask = rasterize_polygon(candidate, grid)
        return float((cand_mask ^ region).sum() * cell * cell / region_area)

    rect_poly = np.array([(minx, miny), (maxx, miny), (maxx, maxy), (minx, maxy)])
    candidates: list[tuple[str, np.ndarray, float]] = [(LEVEL_RECT, rect_poly, symdiff_ratio(rect_poly))]

    deficit = box_mask & ~region
    area_px, r0, r1, c0, c1 = _largest_rectangle(deficit)
    if area_px > 0:
        ox, oy = grid.origin
        touches = {
            "left": c0 <= cb0,
            "right": c1 - 1 >= cb1,
            "bottom": r0 <= rb0,
            "top": r1 - 1 >= rb1,
        }
        n_touch = sum(touches.values())
        nx0, nx1 = ox + c0 * cell, ox + c1 * cell
        ny0, ny1 = oy + r0 * cell, oy + r1 * cell
        band = 2.0 * cell
        lo_x, hi_x = minx + cell, maxx - cell
        lo_y, hi_y = miny + cell, maxy - cell

        notch_poly = None
        level = None
        if n_touch == 2 and not (
            (touches["left"] and touches["right"]) or (touches["top"] and touches["bottom"])
        ):
            # Corner notch: snap the two interior edges.
            if touches["left"]:
                nx0 = minx
                nx1 = np.clip(_snap_vertical(local, nx1, ny0, ny1, band), lo_x, hi_x)
            else:
                nx1 = maxx
                nx0 = np.clip(_snap_vertical(local, nx0, ny0, ny1, band), lo_x, hi_x)
            if touches["bottom"]:
                ny0 = miny
                ny1 = np.clip(_snap_horizontal(local, ny1, nx0, nx1, band), lo_y, hi_y)
            else:
                ny1 = maxy
                ny0 = np.clip(_snap_horizontal(local, ny0, nx0, nx1, band), lo_y, hi_y)
            notch_poly = _corner_notch_polygon(box, (nx0, nx1, ny0, ny1))
            level = LEVEL_LTZ
        elif n_touch == 1:
            # Mid-edge notch: snap two side walls plus the floor.
            side = next(s for s, t in touches.items() if t)
            if side in ("top", "bottom"):
                nx0 = np.clip(_snap_vertical(local, nx0, ny0, ny1, band), lo_x, hi_x)
                nx1 = np.clip(_snap_vertical(local, nx1, ny0, ny1, band), lo_x, hi_x)
                if side == "top":
                    ny1 = maxy
                    ny0 = np.clip(_snap_horizontal(local, ny0, nx0, nx1, band), lo_y, hi_y)
                else:
                    ny0 = miny
                    ny1 = np.clip(_snap_horizontal(local, ny1, nx0, nx1, band), lo_y, hi_y)
                valid = nx1 - nx0 > cell
            else:
                ny0 = np.clip(_snap_horizontal(local, ny0, nx0, nx1, band), lo_y, hi_y)
                ny1 = np.clip(_snap_horizontal(local, ny1, nx0, nx1, band), lo_y, hi_y)
                if side == "right":
                    nx1 = maxx
                    nx0 = np.clip(_snap_vertical(local, nx0, ny0, ny1, band), lo_x, hi_x)
                else:
                    nx0 = minx
                    nx1 = np.clip(_snap_vertical(local, nx1, ny0, ny1, band), lo_x, hi_x)
                valid = ny1 - ny0 > cell
            if valid:
                notch_poly = _edge_notch_polygon(box, (nx0, nx1, ny0, ny1), side)
                level = LEVEL_U

        if notch_poly is not None:
            candidates.append((level, notch_poly, symdiff_ratio(notch_poly)))

    chosen = None
    for level, poly, ratio in candidates:  # ordered lowest level first
        if ratio <= sym_diff_tol:
            chosen = (level, poly)
            break
    if chosen is None:
        level, poly, _ = min(candidates, key=lambda c: c[2])
        chosen = (level, poly)

    world = rotate_points(chosen[1], theta, center)
    return BuildingPolygon(polygon=world, shape_level=chosen[0], orientation_deg=theta)
