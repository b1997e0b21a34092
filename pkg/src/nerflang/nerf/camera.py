"""Pinhole cameras and per-pixel ray generation.

Convention: rotation is camera-to-world with columns (right, up, -view),
i.e. the camera looks along its local -z axis; translation is the camera
origin in world coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Camera:
    rotation: np.ndarray   # (3, 3) orthonormal, camera-to-world
    translation: np.ndarray  # (3,) camera origin, world units
    focal: float           # pixels
    width: int
    height: int

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64)
        err = np.abs(self.rotation @ self.rotation.T - np.eye(3)).max()
        if err > 1e-5:
            raise ValueError(f"camera rotation not orthonormal (max deviation {err:.2e})")

    def to_dict(self) -> dict:
        return {
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
            "focal": float(self.focal),
            "width": int(self.width),
            "height": int(self.height),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        return cls(np.array(d["rotation"]), np.array(d["translation"]),
                   float(d["focal"]), int(d["width"]), int(d["height"]))


def look_at_camera(eye, target=(0.0, 0.0, 0.0), up=(0.0, 0.0, 1.0),
                   focal: float = 80.0, width: int = 64, height: int = 64) -> Camera:
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    view = target - eye
    view /= np.linalg.norm(view)
    up = np.asarray(up, dtype=np.float64)
    if abs(np.dot(view, up)) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    right = np.cross(view, up)
    right /= np.linalg.norm(right)
    true_up = np.cross(right, view)
    rot = np.stack([right, true_up, -view], axis=1)
    return Camera(rot, eye, focal, width, height)


def generate_rays(camera: Camera) -> tuple[np.ndarray, np.ndarray]:
    """One (origin, unit direction) pair per pixel, row-major over (v, u)."""
    w, h, f = camera.width, camera.height, camera.focal
    u = np.arange(w, dtype=np.float64) + 0.5
    v = np.arange(h, dtype=np.float64) + 0.5
    uu, vv = np.meshgrid(u, v)
    dirs_cam = np.stack([
        (uu - w / 2.0) / f,
        -(vv - h / 2.0) / f,
        -np.ones_like(uu),
    ], axis=-1).reshape(-1, 3)
    dirs = dirs_cam @ camera.rotation.T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.broadcast_to(camera.translation, dirs.shape).copy()
    return origins.astype(np.float32), dirs.astype(np.float32)
