"""The coordinate MLP: encoded position in, raw RGB-sigma out."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .. import tensor as T
from ..nn import kaiming_normal
from ..tensor import Tensor
from .encoding import encoding_dim, frequency_encode

NRF1_MAGIC = b"NRF1"
NRF1_VERSION = 1


class NerfMlp:
    """ReLU MLP with L square hidden layers; the output head has no activation."""

    def __init__(self, rng: np.random.Generator | None = None,
                 hidden_layers: int = 3, hidden_width: int = 64,
                 num_frequencies: int = 24):
        self.hidden_layers = hidden_layers
        self.hidden_width = hidden_width
        self.num_frequencies = num_frequencies
        self.input_dim = encoding_dim(num_frequencies)
        if rng is None:
            rng = np.random.default_rng(0)
        h = hidden_width
        self.w_in = Tensor(kaiming_normal(rng, self.input_dim, h), requires_grad=True, name="nerf.w_in")
        self.b_in = Tensor(np.zeros(h, np.float32), requires_grad=True, name="nerf.b_in")
        self.hidden: list[tuple[Tensor, Tensor]] = []
        for l in range(hidden_layers):
            w = Tensor(kaiming_normal(rng, h, h), requires_grad=True, name=f"nerf.w_{l}")
            b = Tensor(np.zeros(h, np.float32), requires_grad=True, name=f"nerf.b_{l}")
            self.hidden.append((w, b))
        self.w_out = Tensor(kaiming_normal(rng, h, 4), requires_grad=True, name="nerf.w_out")
        self.b_out = Tensor(np.zeros(4, np.float32), requires_grad=True, name="nerf.b_out")

    def params(self) -> list[Tensor]:
        out = [self.w_in, self.b_in]
        for w, b in self.hidden:
            out += [w, b]
        out += [self.w_out, self.b_out]
        return out

    @property
    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.params())

    def forward(self, points: np.ndarray) -> Tensor:
        """Raw (N, 4) RGB-sigma for a batch of 3D points."""
        enc = Tensor(frequency_encode(points, self.num_frequencies))
        h = T.relu(T.matmul(enc, self.w_in) + self.b_in)
        for w, b in self.hidden:
            h = T.relu(T.matmul(h, w) + b)
        return T.matmul(h, self.w_out) + self.b_out

    def query(self, points: np.ndarray) -> np.ndarray:
        """Raw outputs without recording on the tape."""
        with T.no_grad():
            return self.forward(points).data


def save_nerf(path: str | Path, mlp: NerfMlp) -> None:
    """Bit-exact weight file: header then layer payloads in stacking order."""
    with open(path, "wb") as f:
        f.write(NRF1_MAGIC)
        f.write(struct.pack("<5I", NRF1_VERSION, mlp.hidden_layers, mlp.hidden_width,
                            mlp.input_dim, mlp.num_frequencies))
        for p in mlp.params():
            f.write(np.ascontiguousarray(p.data, dtype="<f4").tobytes(order="C"))


def load_nerf(path: str | Path) -> NerfMlp:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != NRF1_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        version, layers, width, input_dim, num_freq = struct.unpack("<5I", f.read(20))
        if version != NRF1_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        if input_dim != encoding_dim(num_freq):
            raise ValueError(f"{path}: input_dim {input_dim} != 6*{num_freq}")
        mlp = NerfMlp(np.random.default_rng(0), layers, width, num_freq)
        for p in mlp.params():
            raw = f.read(4 * p.data.size)
            if len(raw) != 4 * p.data.size:
                raise ValueError(f"{path}: truncated at {p.name}")
            p.data = np.frombuffer(raw, dtype="<f4").reshape(p.data.shape).copy()
        if f.read(1):
            raise ValueError(f"{path}: trailing bytes")
    return mlp
