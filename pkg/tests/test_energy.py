from __future__ import annotations

import numpy as np
import pytest

from buildsnake.energy import (
    compute_gvf,
    gvf_residual,
    image_energy,
    image_energy_terms,
)
from buildsnake.raster import gaussian_smooth, gradient


def blurred_step(height=40.0, sigma=3.0, size=48):
    img = np.zeros((size, size))
    img[:, size // 2 :] = height
    return gaussian_smooth(img, sigma)


# ---------------------------------------------------------------------------
# image energy terms


def test_edge_term_zero_on_constant_image():
    _, e_edge, _ = image_energy_terms(np.full((16, 16), 77.0), 2.0)
    assert np.allclose(e_edge, 0.0)


def test_edge_term_most_negative_at_step():
    img = np.zeros((32, 48))
    img[:, 24:] = 100.0
    _, e_edge, _ = image_energy_terms(img, 2.0)
    col = int(np.argmin(e_edge[16]))
    assert abs(col - 23.5) <= 1.0
    assert e_edge.min() < -1.0


def test_termination_peaks_at_corner_on_strong_edges():
    # Level-line curvature is only meaningful where the gradient is alive;
    # on the strong-edge band it must peak at the corner, and vanish on
    # straight edge segments.
    sigma = 2.0
    img = np.full((64, 64), 50.0)
    img[32:, 32:] = 200.0
    _, _, e_term = image_energy_terms(img, sigma)
    c = gaussian_smooth(img, sigma)
    cx, cy = gradient(c)
    mag = np.hypot(cx, cy)
    band = mag >= 0.5 * mag.max()
    i, j = np.unravel_index(np.argmax(np.where(band, np.abs(e_term), 0.0)), e_term.shape)
    assert np.hypot(i - 32, j - 32) <= 2 * sigma
    assert abs(e_term[32, 50]) < 1e-12  # straight edge: zero curvature


def test_image_energy_weighted_range():
    rng = np.random.default_rng(2)
    img = rng.uniform(0, 255, (40, 40))
    e = image_energy(img, w_line=0.04, w_edge=2.0, w_term=0.01, sigma=2.0)
    assert e.min() >= 0.0
    assert e.max() <= 0.04 + 2.0 + 0.01 + 1e-12


def test_image_energy_constant_image_is_zero():
    e = image_energy(np.full((20, 20), 10.0), sigma=2.0)
    assert np.allclose(e, 0.0)


# ---------------------------------------------------------------------------
# GVF


def test_gvf_zero_on_constant_image():
    field = compute_gvf(np.full((24, 24), 3.0), mu=0.2, iters=50)
    assert np.allclose(field.u, 0.0) and np.allclose(field.v, 0.0)


@pytest.fixture(scope="module")
def step_gvf():
    f = blurred_step()
    e_img = -f
    return f, e_img, compute_gvf(e_img, mu=0.2, iters=50_000)


def test_gvf_step_edge_matches_gradient_where_strong(step_gvf):
    f, _, field = step_gvf
    fx, fy = gradient(f)
    mag = np.hypot(fx, fy)
    strong = mag >= 0.5 * mag.max()
    rel = np.hypot(field.u - fx, field.v - fy)[strong] / mag[strong]
    assert rel.max() <= 0.05


def test_gvf_residual_at_convergence(step_gvf):
    f, e_img, field = step_gvf
    fx, fy = gradient(f)
    g = fx * fx + fy * fy
    assert gvf_residual(field, e_img) <= 1e-3 * g.max()


def test_gvf_disk_field_points_inward():
    yy, xx = np.mgrid[0:64, 0:64]
    disk = (np.hypot(xx - 32, yy - 32) <= 12).astype(float) * 100.0
    e_img = image_energy(disk, sigma=3.0)
    field = compute_gvf(e_img, mu=0.2, iters=8000)
    rr = np.hypot(xx - 32, yy - 32)
    annulus = (rr >= 17) & (rr <= 23)
    inward = -((xx - 32) * field.u + (yy - 32) * field.v)
    assert (inward[annulus] > 0).mean() >= 0.95


def test_gvf_extends_capture_range():
    # Far from the edge the raw gradient is ~zero but GVF still points
    # toward it: that is the entire point of the diffusion.
    f = blurred_step(height=40.0, sigma=2.0, size=64)
    e_img = -f
    field = compute_gvf(e_img, mu=0.2, iters=20_000)
    fx, _ = gradient(f)
    # 20 px left of the edge: raw force negligible, GVF force positive (+x).
    assert abs(fx[32, 12]) < 1e-3
    assert field.u[32, 12] > 1e-4


def test_gvf_rejects_bad_mu():
    with pytest.raises(ValueError):
        compute_gvf(np.zeros((8, 8)), mu=0.0, iters=10)
