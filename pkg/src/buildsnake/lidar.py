"""Per-building boundary extraction from an airborne LiDAR point cloud.

Stages: ground separation by elevation threshold, vertical projection to an
occupancy grid, opening + labeling + area filter, per-segment point selection,
planar convex-hull boundaries and their projection into image coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import convex_hull_indices
from .raster import BinaryGrid, connected_components, morphological_open
from .transform import AffineTransform2D

__all__ = [
    "PointCloud3D",
    "BuildingBoundary3D",
    "ProjectedBoundary",
    "parse_xyz",
    "write_xyz",
    "separate_ground",
    "project_to_grid",
    "extract_building_segments",
    "select_building_points",
    "boundary_points",
    "project_boundary",
]

GROUND_CLASS = 2


@dataclass
class PointCloud3D:
    """(N, 3) xyz in meters plus optional per-point class labels."""

    xyz: np.ndarray
    classes: np.ndarray | None = None

    def __post_init__(self):
        self.xyz = np.asarray(self.xyz, dtype=float).reshape(-1, 3)
        if not np.isfinite(self.xyz).all():
            raise ValueError("point coordinates must be finite")
        if self.classes is not None:
            self.classes = np.asarray(self.classes, dtype=int).reshape(-1)
            if len(self.classes) != len(self.xyz):
                raise ValueError("classes must cover every point")

    def __len__(self) -> int:
        return len(self.xyz)

    def subset(self, mask) -> "PointCloud3D":
        cls = self.classes[mask] if self.classes is not None else None
        return PointCloud3D(self.xyz[mask], cls)


@dataclass
class BuildingBoundary3D:
    """Planar convex-hull boundary of one building; z carried per vertex."""

    building_id: int
    boundary: np.ndarray  # (M, 3)


@dataclass
class ProjectedBoundary:
    """Boundary vertices mapped into image pixel coordinates."""

    building_id: int
    pixels: np.ndarray  # (M, 2)


def parse_xyz(text: str) -> PointCloud3D:
    """Parse `x y z [class]` lines; '#' starts a comment."""
    rows = []
    classes = []
    has_class = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) not in (3, 4):
            raise ValueError(f"line {lineno}: expected 'x y z [class]', got {line!r}")
        if has_class is None:
            has_class = len(parts) == 4
        elif has_class != (len(parts) == 4):
            raise ValueError(f"line {lineno}: inconsistent column count")
        rows.append([float(parts[0]), float(parts[1]), float(parts[2])])
        if has_class:
            classes.append(int(parts[3]))
    if not rows:
        raise ValueError("point cloud file contains no points")
    return PointCloud3D(np.asarray(rows), np.asarray(classes) if has_class else None)


def write_xyz(cloud: PointCloud3D) -> str:
    lines = []
    for i, (x, y, z) in enumerate(cloud.xyz):
        coords = f"{float(x)!r} {float(y)!r} {float(z)!r}"
        if cloud.classes is not None:
            coords += f" {int(cloud.classes[i])}"
        lines.append(coords)
    return "\n".join(lines) + "\n"


def _ground_elevations_fallback(cloud: PointCloud3D, tile: float = 10.0) -> np.ndarray:
    """Lowest-decile elevations per tile, used when class labels are absent."""
    xyz = cloud.xyz
    col = np.floor((xyz[:, 0] - xyz[:, 0].min()) / tile).astype(int)
    row = np.floor((xyz[:, 1] - xyz[:, 1].min()) / tile).astype(int)
    key = row * (col.max() + 1) + col
    samples = []
    for k in np.unique(key):
        z = np.sort(xyz[key == k, 2])
        take = max(1, int(np.ceil(0.1 * len(z))))
        samples.append(z[:take])
    return np.concatenate(samples)


def separate_ground(
    cloud: PointCloud3D,
    ground_class: int = GROUND_CLASS,
    tile: float = 10.0,
) -> tuple[PointCloud3D, PointCloud3D]:
    """Split the cloud at T_e = mean(z_G) + max(2.5, std(z_G)).

    Ground statistics z_G come from ground-classified points when labels
    exist, otherwise from the lowest decile of elevations per `tile`-meter
    tile. Points with z > T_e are non-ground.
    """
    if len(cloud) == 0:
        raise ValueError("cannot separate an empty cloud")
    if cloud.classes is not None:
        zg = cloud.xyz[cloud.classes == ground_class, 2]
        if len(zg) == 0:
            raise ValueError(f"no points with ground class {ground_class}")
    else:
        zg = _ground_elevations_fallback(cloud, tile)
    te = float(zg.mean() + max(2.5, float(zg.std())))
    above = cloud.xyz[:, 2] > te
    return cloud.subset(~above), cloud.subset(above)


def project_to_grid(nonground: PointCloud3D, density: float) -> BinaryGrid:
    """Occupancy grid of vertically projected points.

    cell_size = sqrt(2 / density) so an occupied cell holds two points in
    expectation, keeping holes inside building segments rare.
    """
    if density <= 0:
        raise ValueError("density must be positive")
    if len(nonground) == 0:
        raise ValueError("no non-ground points to project")
    cell = float(np.sqrt(2.0 / density))
    xy = nonground.xyz[:, :2]
    origin = (float(xy[:, 0].min()), float(xy[:, 1].min()))
    width = int(np.floor((xy[:, 0].max() - origin[0]) / cell)) + 1
    height = int(np.floor((xy[:, 1].max() - origin[1]) / cell)) + 1
    grid = BinaryGrid(np.zeros((height, width), dtype=bool), cell, origin)
    row, col = grid.cell_index(xy)
    grid.cells[row, col] = True
    return grid


def extract_building_segments(
    grid: BinaryGrid,
    opening_radius: int = 1,
    min_area_m2: float = 10.0,
    connectivity: int = 8,
) -> tuple[np.ndarray, int]:
    """Opened, labeled segments with small ones removed; labels compacted."""
    opened = morphological_open(grid, radius=opening_radius)
    labels, count = connected_components(opened, connectivity=connectivity)
    if count == 0:
        return labels, 0
    cell_area = grid.cell_size**2
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = np.flatnonzero(sizes[1:] * cell_area >= min_area_m2) + 1
    remap = np.zeros(count + 1, dtype=labels.dtype)
    remap[keep] = np.arange(1, len(keep) + 1)
    return remap[labels], len(keep)


def select_building_points(
    cloud: PointCloud3D, grid: BinaryGrid, labels: np.ndarray
) -> dict[int, PointCloud3D]:
    """Assign each point to the labeled segment of its containing cell."""
    if labels.shape != grid.cells.shape:
        raise ValueError("label grid does not match the projection grid")
    row, col = grid.cell_index(cloud.xyz[:, :2])
    inside = (row >= 0) & (row < grid.height) & (col >= 0) & (col < grid.width)
    point_label = np.zeros(len(cloud), dtype=int)
    point_label[inside] = labels[row[inside], col[inside]]
    return {
        int(lbl): cloud.subset(point_label == lbl)
        for lbl in np.unique(point_label)
        if lbl > 0
    }


def boundary_points(points: PointCloud3D, building_id: int = 0) -> BuildingBoundary3D:
    """Convex hull of the xy projection; hull vertices keep their z."""
    if len(points) < 3:
        raise ValueError("need at least 3 points for a boundary")
    idx = convex_hull_indices(points.xyz[:, :2])
    return BuildingBoundary3D(building_id=building_id, boundary=points.xyz[idx])


def project_boundary(b: BuildingBoundary3D, t: AffineTransform2D) -> ProjectedBoundary:
    """Apply the registration transform to boundary xy; z is dropped."""
    return ProjectedBoundary(building_id=b.building_id, pixels=t.apply(b.boundary[:, :2]))


def extract_boundaries(
    cloud: PointCloud3D,
    density: float,
    ground_class: int = GROUND_CLASS,
    opening_radius: int = 1,
    min_area_m2: float = 10.0,
    connectivity: int = 8,
) -> tuple[list[BuildingBoundary3D], BinaryGrid, np.ndarray]:
    """Full LiDAR stage: per-building 3D boundaries plus debug rasters.

    Returns ([], grid-or-None, labels) gracefully when no non-ground points
    or no sufficiently large segments exist.
    """
    _, nonground = separate_ground(cloud, ground_class=ground_class)
    if len(nonground) == 0:
        return [], None, None
    grid = project_to_grid(nonground, density)
    labels, count = extract_building_segments(
        grid,
        opening_radius=opening_radius,
        min_area_m2=min_area_m2,
        connectivity=connectivity,
    )
    buildings = select_building_points(nonground, grid, labels)
    boundaries = []
    for bid in sorted(buildings):
        pts = buildings[bid]
        if len(pts) < 3:
            continue
        try:
            boundaries.append(boundary_points(pts, building_id=bid))
        except ValueError:
            continue  # collinear support, cannot form a boundary
    return boundaries, grid, labels
