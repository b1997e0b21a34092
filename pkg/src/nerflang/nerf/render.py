"""Differentiable volumetric rendering along rays.

Rays are sampled at uniform bins of width delta = (far - near) / S; in
stratified mode the sample position is jittered within its bin. Raw MLP
outputs are activated at render time (sigmoid for color, relu for
density). Compositing uses transmittance T_i = exp(-sum_{j<i} sigma_j
delta) and weights w_i = T_i (1 - exp(-sigma_i delta)); leftover
transmittance falls onto the background color.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import tensor as T
from ..tensor import Tensor
from .camera import Camera, generate_rays


@dataclass
class RenderConfig:
    near: float
    far: float
    samples_per_ray: int = 32
    background: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not (0.0 < self.near < self.far):
            raise ValueError(f"need 0 < near < far, got near={self.near}, far={self.far}")
        if self.samples_per_ray < 1:
            raise ValueError(f"samples_per_ray must be >= 1, got {self.samples_per_ray}")

    @property
    def delta(self) -> float:
        return (self.far - self.near) / self.samples_per_ray


def composite_weights(sigma: Tensor, delta: float) -> Tensor:
    """Per-sample compositing weights for densities (R, S) at bin width delta."""
    a = sigma * float(delta)
    trans = T.exp(T.neg(T.cumsum_exclusive(a, axis=1)))
    alpha = 1.0 - T.exp(T.neg(a))
    return trans * alpha


def sample_depths(n_rays: int, cfg: RenderConfig,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Bin-centre depths, jittered within each bin when an rng is given."""
    s = cfg.samples_per_ray
    if rng is None:
        offsets = np.full((n_rays, s), 0.5, dtype=np.float32)
    else:
        offsets = rng.random((n_rays, s), dtype=np.float32)
    return (cfg.near + (np.arange(s, dtype=np.float32) + offsets) * cfg.delta).astype(np.float32)


def render_rays(query_fn, origins: np.ndarray, dirs: np.ndarray, cfg: RenderConfig,
                rng: np.random.Generator | None = None) -> tuple[Tensor, Tensor]:
    """Render rays through a field given by ``query_fn(points) -> raw (N, 4)``.

    Returns (rgb (R, 3), accumulated opacity (R,)); differentiable end to end.
    """
    n = origins.shape[0]
    ts = sample_depths(n, cfg, rng)  # (R, S)
    pts = origins[:, None, :] + ts[..., None] * dirs[:, None, :]
    raw = query_fn(pts.reshape(-1, 3).astype(np.float32))
    raw = T.reshape(raw, (n, cfg.samples_per_ray, 4))
    rgb = T.sigmoid(raw[:, :, 0:3])
    sigma = T.relu(raw[:, :, 3])
    w = composite_weights(sigma, cfg.delta)
    acc = T.sum_(w, axis=1)
    bg = Tensor(np.asarray(cfg.background, dtype=np.float32))
    color = T.sum_(T.reshape(w, (n, cfg.samples_per_ray, 1)) * rgb, axis=1)
    color = color + T.reshape(1.0 - acc, (n, 1)) * bg
    return color, acc


def render_view(query_fn, camera: Camera, cfg: RenderConfig,
                chunk: int = 8192) -> np.ndarray:
    """Render a full image deterministically (no jitter, no tape)."""
    origins, dirs = generate_rays(camera)
    rows = []
    with T.no_grad():
        for lo in range(0, origins.shape[0], chunk):
            color, _ = render_rays(query_fn, origins[lo:lo + chunk], dirs[lo:lo + chunk], cfg)
            rows.append(color.data)
    img = np.concatenate(rows, axis=0)
    return img.reshape(camera.height, camera.width, 3)
