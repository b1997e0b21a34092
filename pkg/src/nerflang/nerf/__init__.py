from .camera import Camera, generate_rays, look_at_camera
from .encoding import encoding_dim, frequency_encode
from .mlp import NerfMlp, load_nerf, save_nerf
from .render import RenderConfig, composite_weights, render_rays, render_view
from .train import TrainConfig, train_nerf

__all__ = [
    "Camera", "generate_rays", "look_at_camera",
    "encoding_dim", "frequency_encode",
    "NerfMlp", "load_nerf", "save_nerf",
    "RenderConfig", "composite_weights", "render_rays", "render_view",
    "TrainConfig", "train_nerf",
]
