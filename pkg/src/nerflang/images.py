"""RGBA image files and the PSNR utility."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image

IDENTICAL = math.inf  # sentinel PSNR for a zero-MSE pair


def save_rgba(path: str | Path, img: np.ndarray) -> None:
    """Save a float (H, W, 4) image in [0, 1] as an RGBA PNG."""
    arr = np.clip(np.asarray(img), 0.0, 1.0)
    Image.fromarray((arr * 255.0 + 0.5).astype(np.uint8), mode="RGBA").save(path)


def load_rgba(path: str | Path) -> np.ndarray:
    img = Image.open(path).convert("RGBA")
    return np.asarray(img, dtype=np.float32) / 255.0


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1/MSE) with peak value 1.0; inf when the images are identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return IDENTICAL
    return 10.0 * math.log10(1.0 / mse)


def format_psnr(value: float) -> str:
    return "identical" if math.isinf(value) else f"{value:.2f} dB"
