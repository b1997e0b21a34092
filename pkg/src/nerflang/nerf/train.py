"""Per-object NeRF fitting from posed RGBA views."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import tensor as T
from ..optim import Adam
from ..tensor import Tensor
from .camera import Camera, generate_rays
from .mlp import NerfMlp
from .render import RenderConfig, render_rays


@dataclass
class TrainConfig:
    steps: int = 2000
    rays_per_step: int = 512
    foreground_weight: float = 0.8
    background_weight: float = 0.2
    learning_rate: float = 5e-3

    def __post_init__(self):
        if self.foreground_weight <= 0 or self.background_weight <= 0:
            raise ValueError("pixel weights must be positive")


def build_ray_bank(images: np.ndarray, cameras: list[Camera], cfg: RenderConfig,
                   train_cfg: TrainConfig):
    """Flatten all views into (origins, dirs, gt_rgb, weight) ray arrays.

    Ground-truth colors are composited over the configured background using
    the alpha channel; per-ray weights follow the foreground mask.
    """
    bg = np.asarray(cfg.background, dtype=np.float32)
    all_o, all_d, all_rgb, all_w = [], [], [], []
    for img, cam in zip(images, cameras):
        o, d = generate_rays(cam)
        rgb = img[..., :3].reshape(-1, 3).astype(np.float32)
        alpha = img[..., 3].reshape(-1, 1).astype(np.float32)
        gt = rgb * alpha + bg * (1.0 - alpha)
        fg = (alpha[:, 0] > 0.5)
        w = np.where(fg, train_cfg.foreground_weight, train_cfg.background_weight)
        all_o.append(o)
        all_d.append(d)
        all_rgb.append(gt)
        all_w.append(w.astype(np.float32))
    origins = np.concatenate(all_o)
    dirs = np.concatenate(all_d)
    gt_rgb = np.concatenate(all_rgb)
    weights = np.concatenate(all_w)
    if not (weights == train_cfg.foreground_weight).any():
        raise ValueError("no foreground pixels in any view: degenerate object")
    return origins, dirs, gt_rgb, weights


def train_nerf(images: np.ndarray, cameras: list[Camera], cfg: RenderConfig,
               train_cfg: TrainConfig, rng: np.random.Generator,
               mlp: NerfMlp | None = None) -> tuple[NerfMlp, list[float]]:
    """Fit a NerfMlp to posed views with foreground-weighted L1 loss."""
    if len(cameras) < 2:
        raise ValueError(f"need >= 2 posed views, got {len(cameras)}")
    if mlp is None:
        mlp = NerfMlp(rng)
    origins, dirs, gt_rgb, weights = build_ray_bank(images, cameras, cfg, train_cfg)
    n_rays = origins.shape[0]
    opt = Adam(mlp.params(), lr=train_cfg.learning_rate)
    losses: list[float] = []
    for _ in range(train_cfg.steps):
        idx = rng.integers(0, n_rays, train_cfg.rays_per_step)
        T.reset_tape()
        opt.zero_grad()
        color, _ = render_rays(mlp.forward, origins[idx], dirs[idx], cfg, rng)
        diff = T.absval(color - Tensor(gt_rgb[idx]))
        per_ray = T.sum_(diff, axis=1) * Tensor(weights[idx])
        loss = T.mean(per_ray)
        T.backward(loss)
        opt.step()
        losses.append(float(loss.data))
    return mlp, losses
