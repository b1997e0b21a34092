"""Procedural colored-primitive scenes and their analytic renderer.

Objects are centered at the origin and scaled to fit inside the unit cube.
Shading is view-independent (flat albedo times an ambient+Lambert term from
a fixed light), so a view-independent radiance field can represent these
scenes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nerf.camera import Camera, generate_rays, look_at_camera
from ..seeding import rng_for

CLASSES = ("sphere", "box", "cylinder", "cone")

COLORS = {
    "red": (0.82, 0.12, 0.12),
    "green": (0.12, 0.65, 0.20),
    "blue": (0.15, 0.30, 0.85),
    "yellow": (0.90, 0.85, 0.10),
    "purple": (0.55, 0.20, 0.70),
    "orange": (0.95, 0.55, 0.10),
    "cyan": (0.10, 0.75, 0.80),
    "pink": (0.95, 0.45, 0.65),
}

SIZES = {"small": 0.25, "medium": 0.35, "large": 0.45}

ATTRIBUTES = ("none", "stripe", "cap")

_LIGHT = np.array([0.45, -0.35, 0.82])
_LIGHT = _LIGHT / np.linalg.norm(_LIGHT)
_AMBIENT = 0.45


@dataclass(frozen=True)
class SceneSpec:
    object_id: str
    shape: str
    color_name: str
    size_name: str
    attribute: str            # none | stripe | cap
    attribute_color: str      # color name, or "" when attribute == none
    seed: int

    @property
    def scale(self) -> float:
        return SIZES[self.size_name]

    @property
    def color_rgb(self) -> np.ndarray:
        return np.array(COLORS[self.color_name])

    @property
    def attribute_rgb(self) -> np.ndarray:
        return np.array(COLORS[self.attribute_color]) if self.attribute_color else self.color_rgb

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "shape": self.shape,
            "color": self.color_name,
            "size": self.size_name,
            "attribute": self.attribute,
            "attribute_color": self.attribute_color,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        return cls(d["object_id"], d["shape"], d["color"], d["size"],
                   d["attribute"], d["attribute_color"], int(d["seed"]))


def generate_scene(seed: int, forced_class: str | None = None) -> SceneSpec:
    """Deterministic scene draw; datasets force classes to stay balanced."""
    rng = rng_for(seed, "scene")
    shape = forced_class if forced_class else CLASSES[rng.integers(len(CLASSES))]
    color_names = sorted(COLORS)
    color = color_names[rng.integers(len(color_names))]
    size = sorted(SIZES)[rng.integers(len(SIZES))]
    attribute = ATTRIBUTES[rng.integers(len(ATTRIBUTES))]
    if attribute == "none":
        attr_color = ""
    else:
        others = [c for c in color_names if c != color]
        attr_color = others[rng.integers(len(others))]
    return SceneSpec(f"obj_{seed:05d}", shape, color, size, attribute, attr_color, seed)


# ---------------------------------------------------------------------------
# analytic ray--primitive intersection (vectorized over rays)

_EPS = 1e-6


def _intersect_sphere(o, d, s):
    b = 2.0 * np.sum(o * d, axis=1)
    c = np.sum(o * o, axis=1) - s * s
    disc = b * b - 4.0 * c
    ok = disc > 0
    sq = np.sqrt(np.maximum(disc, 0.0))
    t = (-b - sq) / 2.0
    ok &= t > _EPS
    t = np.where(ok, t, np.inf)
    p = o + t[:, None] * d
    n = p / s
    return t, n


def _intersect_box(o, d, s):
    safe_d = np.where(np.abs(d) < 1e-12, 1e-12, d)
    t1 = (-s - o) / safe_d
    t2 = (s - o) / safe_d
    tmin = np.minimum(t1, t2).max(axis=1)
    tmax = np.maximum(t1, t2).min(axis=1)
    ok = (tmax > np.maximum(tmin, _EPS)) & (tmin > _EPS)
    t = np.where(ok, tmin, np.inf)
    p = o + t[:, None] * d
    axis = np.argmax(np.abs(p), axis=1)
    n = np.zeros_like(p)
    rows = np.arange(p.shape[0])
    n[rows, axis] = np.sign(p[rows, axis])
    return t, n


def _intersect_cylinder(o, d, s):
    r = 0.8 * s
    a = d[:, 0] ** 2 + d[:, 1] ** 2
    b = 2.0 * (o[:, 0] * d[:, 0] + o[:, 1] * d[:, 1])
    c = o[:, 0] ** 2 + o[:, 1] ** 2 - r * r
    disc = b * b - 4.0 * a * c
    sq = np.sqrt(np.maximum(disc, 0.0))
    safe_a = np.where(np.abs(a) < 1e-12, 1e-12, a)
    t_side = (-b - sq) / (2.0 * safe_a)
    z_side = o[:, 2] + t_side * d[:, 2]
    side_ok = (disc > 0) & (t_side > _EPS) & (np.abs(z_side) <= s)
    t_side = np.where(side_ok, t_side, np.inf)

    best_t = t_side
    best_kind = np.where(side_ok, 1, 0)  # 1 = side, 2 = top cap, 3 = bottom cap
    safe_dz = np.where(np.abs(d[:, 2]) < 1e-12, 1e-12, d[:, 2])
    for z_cap, kind in ((s, 2), (-s, 3)):
        t_cap = (z_cap - o[:, 2]) / safe_dz
        p_cap = o + t_cap[:, None] * d
        cap_ok = (t_cap > _EPS) & (p_cap[:, 0] ** 2 + p_cap[:, 1] ** 2 <= r * r)
        better = cap_ok & (t_cap < best_t)
        best_t = np.where(better, t_cap, best_t)
        best_kind = np.where(better, kind, best_kind)

    p = o + best_t[:, None] * d
    n = np.zeros_like(p)
    side = best_kind == 1
    n[side, 0] = p[side, 0] / r
    n[side, 1] = p[side, 1] / r
    n[best_kind == 2, 2] = 1.0
    n[best_kind == 3, 2] = -1.0
    return np.where(best_kind > 0, best_t, np.inf), n


def _intersect_cone(o, d, s):
    # apex at (0, 0, s), axis pointing down, base radius 0.9 s at z = -s
    r_base = 0.9 * s
    height = 2.0 * s
    cos2 = height ** 2 / (height ** 2 + r_base ** 2)
    co = o - np.array([0.0, 0.0, s])
    dv = -d[:, 2]           # d . axis with axis = (0, 0, -1)
    cov = -co[:, 2]
    a = dv * dv - cos2 * np.sum(d * d, axis=1)
    b = 2.0 * (dv * cov - cos2 * np.sum(d * co, axis=1))
    c = cov * cov - cos2 * np.sum(co * co, axis=1)
    disc = b * b - 4.0 * a * c
    sq = np.sqrt(np.maximum(disc, 0.0))
    safe_a = np.where(np.abs(a) < 1e-12, 1e-12, a)
    cand = np.stack([(-b - sq) / (2.0 * safe_a), (-b + sq) / (2.0 * safe_a)])
    m_axis = cov[None, :] + cand * dv[None, :]   # distance from apex along axis
    ok = (disc[None, :] > 0) & (cand > _EPS) & (m_axis >= 0) & (m_axis <= height)
    cand = np.where(ok, cand, np.inf)
    t_side = cand.min(axis=0)
    side_ok = np.isfinite(t_side)

    best_t = np.where(side_ok, t_side, np.inf)
    best_kind = np.where(side_ok, 1, 0)
    safe_dz = np.where(np.abs(d[:, 2]) < 1e-12, 1e-12, d[:, 2])
    t_cap = (-s - o[:, 2]) / safe_dz
    p_cap = o + t_cap[:, None] * d
    cap_ok = (t_cap > _EPS) & (p_cap[:, 0] ** 2 + p_cap[:, 1] ** 2 <= r_base * r_base)
    better = cap_ok & (t_cap < best_t)
    best_t = np.where(better, t_cap, best_t)
    best_kind = np.where(better, 2, best_kind)

    p = o + best_t[:, None] * d
    n = np.zeros_like(p)
    side = best_kind == 1
    # outward normal = -grad of (m.v)^2 - cos2*|m|^2 (positive inside)
    m = p[side] - np.array([0.0, 0.0, s])
    grad = np.empty_like(m)
    grad[:, 0] = cos2 * m[:, 0]
    grad[:, 1] = cos2 * m[:, 1]
    grad[:, 2] = -(1.0 - cos2) * m[:, 2]
    norm = np.linalg.norm(grad, axis=1, keepdims=True)
    n[side] = grad / np.maximum(norm, 1e-12)
    n[best_kind == 2, 2] = -1.0
    return np.where(best_kind > 0, best_t, np.inf), n


_INTERSECTORS = {
    "sphere": _intersect_sphere,
    "box": _intersect_box,
    "cylinder": _intersect_cylinder,
    "cone": _intersect_cone,
}


def albedo_at(spec: SceneSpec, points: np.ndarray) -> np.ndarray:
    """Surface color at hit points, honoring the stripe/cap attribute."""
    base = np.broadcast_to(spec.color_rgb, points.shape).copy()
    if spec.attribute == "stripe":
        band = np.abs(points[:, 2]) <= 0.2 * spec.scale
        base[band] = spec.attribute_rgb
    elif spec.attribute == "cap":
        top = points[:, 2] >= 0.45 * spec.scale
        base[top] = spec.attribute_rgb
    return base


def shade_rays(spec: SceneSpec, origins: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Returns (rgb (N, 3) in [0, 1], alpha (N,) binary)."""
    o = np.asarray(origins, dtype=np.float64)
    d = np.asarray(dirs, dtype=np.float64)
    t, n = _INTERSECTORS[spec.shape](o, d, spec.scale)
    hit = np.isfinite(t)
    rgb = np.ones((o.shape[0], 3))
    if hit.any():
        p = o[hit] + t[hit, None] * d[hit]
        albedo = albedo_at(spec, p)
        lambert = np.maximum(n[hit] @ _LIGHT, 0.0)
        shade = _AMBIENT + (1.0 - _AMBIENT) * lambert
        rgb[hit] = np.clip(albedo * shade[:, None], 0.0, 1.0)
    return rgb.astype(np.float32), hit.astype(np.float32)


def scene_cameras(n_views: int, resolution: int, rng: np.random.Generator,
                  distance: float = 1.8) -> list[Camera]:
    """Cameras on a sphere around the object: golden-angle azimuths with a
    seeded phase, elevations swept over a mid-latitude band."""
    golden = np.pi * (3.0 - np.sqrt(5.0))
    phase = rng.uniform(0.0, 2.0 * np.pi)
    cams = []
    for i in range(n_views):
        az = phase + i * golden
        el = np.deg2rad(-35.0 + 80.0 * ((i + 0.5) / n_views))
        eye = distance * np.array([
            np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])
        cams.append(look_at_camera(eye, focal=0.9 * resolution,
                                   width=resolution, height=resolution))
    return cams


def render_gt_views(spec: SceneSpec, n_views: int, resolution: int,
                    rng: np.random.Generator, distance: float = 1.8
                    ) -> tuple[np.ndarray, list[Camera]]:
    """Analytic posed RGBA renders; alpha is 1 on hits and 0 on background."""
    cams = scene_cameras(n_views, resolution, rng, distance)
    images = np.empty((n_views, resolution, resolution, 4), dtype=np.float32)
    for i, cam in enumerate(cams):
        o, d = generate_rays(cam)
        rgb, alpha = shade_rays(spec, o, d)
        images[i, ..., :3] = rgb.reshape(resolution, resolution, 3)
        images[i, ..., 3] = alpha.reshape(resolution, resolution)
    return images, cams
