"""Active-contour evolution with GVF external force and a LiDAR shape prior.

The contour is a closed (N, 2) array of pixel coordinates, advanced with the
semi-implicit scheme (gamma I + A) x_new = gamma x_old + F(x_old), where A is
the cyclic pentadiagonal operator of the tension/rigidity terms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SnakeConfig
from .energy import GvfField, compute_gvf, image_energy
from .geometry import hausdorff_distance, polygon_perimeter
from .raster import gradient

__all__ = [
    "ExternalFields",
    "prepare_fields",
    "resample_closed",
    "system_matrix",
    "evolve_step",
    "sample_force",
    "shape_sim_energy",
    "shape_force",
    "run_snake",
]


@dataclass
class ExternalFields:
    """Precomputed per-image fields shared by every snake on that image."""

    e_img: np.ndarray
    force_x: np.ndarray
    force_y: np.ndarray
    gvf: GvfField | None = None


def _rescale_force(fx: np.ndarray, fy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divide by the global max magnitude so the strongest force is 1.

    Keeps relative strengths intact while making the step size implied by
    gamma independent of the image's dynamic range.
    """
    peak = float(np.hypot(fx, fy).max())
    if peak <= 0:
        return fx, fy
    return fx / peak, fy / peak


def prepare_fields(gray: np.ndarray, cfg: SnakeConfig) -> ExternalFields:
    """Image energy plus the mode's external force field.

    basic uses the raw potential force -grad(E_img); gvf and proposed use
    the diffused GVF field in its place. Either field is rescaled to unit
    peak magnitude before driving the contour.
    """
    e_img = image_energy(gray, cfg.w_line, cfg.w_edge, cfg.w_term, cfg.sigma)
    if cfg.mode == "basic":
        ex, ey = gradient(e_img)
        fx, fy = _rescale_force(-ex, -ey)
        return ExternalFields(e_img=e_img, force_x=fx, force_y=fy)
    field = compute_gvf(e_img, mu=cfg.mu, iters=cfg.gvf_iters)
    fx, fy = _rescale_force(field.u, field.v)
    return ExternalFields(e_img=e_img, force_x=fx, force_y=fy, gvf=field)


def resample_closed(points: np.ndarray, n: int) -> np.ndarray:
    """Resample a closed contour to n points equally spaced by arc length."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise ValueError("contour needs at least 3 points")
    ring = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(ring, axis=0), axis=1)
    total = seg.sum()
    if total <= 0:
        raise ValueError("contour has zero perimeter")
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.arange(n) * (total / n)
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    t = (s - cum[k]) / np.where(seg[k] > 0, seg[k], 1.0)
    return ring[k] + t[:, None] * (ring[k + 1] - ring[k])


def system_matrix(n: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Dense gamma I + A for the closed contour's internal-energy operator."""
    m = np.zeros((n, n))
    idx = np.arange(n)
    bands = [
        (0, gamma + 2.0 * alpha + 6.0 * beta),
        (1, -alpha - 4.0 * beta),
        (-1, -alpha - 4.0 * beta),
        (2, beta),
        (-2, beta),
    ]
    for off, coef in bands:
        m[idx, (idx + off) % n] += coef
    return m


def evolve_step(
    points: np.ndarray,
    force: np.ndarray,
    cfg: SnakeConfig,
    inv_system: np.ndarray | None = None,
) -> np.ndarray:
    """One semi-implicit step; the linear system is solved exactly."""
    pts = np.asarray(points, dtype=float)
    if inv_system is None:
        inv_system = np.linalg.inv(system_matrix(len(pts), cfg.alpha, cfg.beta, cfg.gamma))
    return inv_system @ (cfg.gamma * pts + force)


def _bilinear(field: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h, w = field.shape
    xc = np.clip(x, 0.0, w - 1.0)
    yc = np.clip(y, 0.0, h - 1.0)
    x0 = np.clip(np.floor(xc).astype(int), 0, w - 2) if w > 1 else np.zeros_like(xc, int)
    y0 = np.clip(np.floor(yc).astype(int), 0, h - 2) if h > 1 else np.zeros_like(yc, int)
    fx = xc - x0
    fy = yc - y0
    f00 = field[y0, x0]
    f01 = field[y0, x0 + 1] if w > 1 else f00
    f10 = field[y0 + 1, x0] if h > 1 else f00
    f11 = field[y0 + 1, x0 + 1] if w > 1 and h > 1 else f00
    return (
        f00 * (1 - fx) * (1 - fy)
        + f01 * fx * (1 - fy)
        + f10 * (1 - fx) * fy
        + f11 * fx * fy
    )


def sample_force(fields: ExternalFields, points: np.ndarray) -> np.ndarray:
    """Bilinear force at each point; zero outside the image bounds."""
    pts = np.asarray(points, dtype=float)
    h, w = fields.force_x.shape
    x, y = pts[:, 0], pts[:, 1]
    inside = (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)
    fx = _bilinear(fields.force_x, x, y) * inside
    fy = _bilinear(fields.force_y, x, y) * inside
    return np.column_stack([fx, fy])


def shape_sim_energy(snake: np.ndarray, boundary: np.ndarray, delta: float) -> float:
    """Shape dissimilarity 1 - exp(-d_H^2 / delta), in [0, 1)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    d = hausdorff_distance(snake, boundary)
    return float(1.0 - np.exp(-(d * d) / delta))


def shape_force(
    snake: np.ndarray,
    boundary: np.ndarray,
    delta: float,
    weight: float = 1.0,
    step: float = 1.0,
) -> np.ndarray:
    """Central finite-difference force of the shape-similarity energy.

    Perturbing one snake point changes a single row of the distance matrix,
    so the perturbed Hausdorff distances are reassembled from cached row and
    column extrema instead of recomputing the full matrix per point.
    """
    a = np.asarray(snake, dtype=float)
    b = np.asarray(boundary, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("snake and boundary must be non-empty")
    n = len(a)
    dx = a[:, 0][:, None] - b[:, 0][None, :]
    dy = a[:, 1][:, None] - b[:, 1][None, :]
    d = np.sqrt(dx * dx + dy * dy)

    rowmin = d.min(axis=1)
    i1 = int(np.argmax(rowmin))
    masked = rowmin.copy()
    masked[i1] = -np.inf
    second = masked.max() if n > 1 else -np.inf
    excl_rowmax = np.full(n, rowmin[i1])
    excl_rowmax[i1] = second

    colmin = d.min(axis=0)
    colarg = d.argmin(axis=0)
    d2 = d.copy()
    d2[colarg, np.arange(len(b))] = np.inf
    colmin2 = d2.min(axis=0)
    # (n, m): column minima as seen with row i removed.
    excl_colmin = np.where(colarg[None, :] == np.arange(n)[:, None], colmin2[None, :], colmin[None, :])

    offsets = np.array([[step, 0.0], [-step, 0.0], [0.0, step], [0.0, -step]])
    px = a[None, :, 0:1] + offsets[:, None, 0:1]  # (4, n, 1)
    py = a[None, :, 1:2] + offsets[:, None, 1:2]
    ndx = px - b[None, None, :, 0].reshape(1, 1, -1)
    ndy = py - b[None, None, :, 1].reshape(1, 1, -1)
    newrows = np.sqrt(ndx * ndx + ndy * ndy)  # (4, n, m)

    d_ab = np.maximum(excl_rowmax[None, :], newrows.min(axis=2))
    d_ba = np.minimum(excl_colmin[None, :, :], newrows).max(axis=2)
    dh = np.maximum(d_ab, d_ba)
    e = 1.0 - np.exp(-(dh * dh) / delta)
    fx = -weight * (e[0] - e[1]) / (2.0 * step)
    fy = -weight * (e[2] - e[3]) / (2.0 * step)
    return np.column_stack([fx, fy])


def run_snake(
    init,
    gray: np.ndarray,
    cfg: SnakeConfig,
    fields: ExternalFields | None = None,
) -> np.ndarray:
    """Evolve a snake from the projected boundary until convergence.

    `init` is a ProjectedBoundary or plain (M, 2) pixel array; it provides
    both the initial contour and the shape-similarity reference in
    proposed mode. Returns the final closed contour as (N, 2) pixels.
    """
    boundary = np.asarray(getattr(init, "pixels", init), dtype=float)
    if len(boundary) < 3:
        raise ValueError("initial boundary needs at least 3 points")
    if fields is None:
        fields = prepare_fields(gray, cfg)
    h, w = gray.shape
    n = max(32, int(round(polygon_perimeter(boundary) / 2.0)))
    pts = resample_closed(boundary, n)
    np.clip(pts[:, 0], 0, w - 1, out=pts[:, 0])
    np.clip(pts[:, 1], 0, h - 1, out=pts[:, 1])
    # Shape reference: the boundary polygon densified by the same resampling,
    # so the Hausdorff term is not dominated by gaps between hull vertices.
    shape_ref = pts.copy()
    inv_system = np.linalg.inv(system_matrix(n, cfg.alpha, cfg.beta, cfg.gamma))

    for it in range(1, cfg.max_iters + 1):
        force = sample_force(fields, pts)
        if cfg.mode == "proposed":
            force += shape_force(pts, shape_ref, cfg.delta, cfg.shape_weight)
        new = evolve_step(pts, force, cfg, inv_system=inv_system)
        np.clip(new[:, 0], 0, w - 1, out=new[:, 0])
        np.clip(new[:, 1], 0, h - 1, out=new[:, 1])
        disp = float(np.linalg.norm(new - pts, axis=1).max())
        pts = new
        if disp < cfg.epsilon:
            break
        if it % cfg.resample_every == 0:
            pts = resample_closed(pts, n)
    return pts
