"""Frame-feature ingestion: cyclic frame-repeating to a fixed length and the
per-frame visual gate. Also owns the binary frame-feature file format."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Dict

import numpy as np

from . import tensor as T
from .errors import DataError, DimensionError
from .tensor import Tensor

T_MAX_DEFAULT = 199

_MAGIC = b"QVFF"
_VERSION = 1


@dataclass(frozen=True)
class FrameFeatureMatrix:
    features: np.ndarray  # [t_max, D] float64
    original_length: int

    def __post_init__(self):
        t = self.original_length
        if not 1 <= t <= self.features.shape[0]:
            raise DataError(
                f"original_length {t} outside [1, {self.features.shape[0]}]"
            )

    @property
    def t_max(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


def preprocess_frames(raw: np.ndarray, t_max: int = T_MAX_DEFAULT) -> FrameFeatureMatrix:
    """Cyclically repeat the T raw frames until the matrix has t_max rows."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise DimensionError(f"expected [T,D] features, got shape {raw.shape}")
    t = raw.shape[0]
    if t == 0:
        raise DataError("empty video: no frames to repeat")
    if t > t_max:
        raise DataError(f"video length {t} exceeds maximum {t_max}")
    idx = np.arange(t_max) % t
    return FrameFeatureMatrix(features=raw[idx].copy(), original_length=t)


def repeat_labels(labels, t_max: int = T_MAX_DEFAULT) -> list:
    """Mirror frame-repeating on a label sequence."""
    t = len(labels)
    if t == 0:
        raise DataError("empty label sequence")
    if t > t_max:
        raise DataError(f"label length {t} exceeds maximum {t_max}")
    return [labels[i % t] for i in range(t_max)]


def init_visual_params(feature_dim: int, rng: np.random.Generator,
                       std: float = 0.02) -> Dict[str, Tensor]:
    return {
        "visual.gate_w": T.parameter(
            rng.normal(0.0, std, size=(feature_dim, feature_dim))
        ),
        "visual.gate_b": T.parameter(np.zeros(feature_dim)),
    }


def visual_attention(v: Tensor, params: Dict[str, Tensor],
                     enabled: bool = True) -> Tensor:
    """Per-frame sigmoid gate with shared weights; identity when ablated."""
    if not enabled:
        return v
    w = params["visual.gate_w"]
    b = params["visual.gate_b"]
    gate = T.sigmoid(T.add_rowvec(T.matmul(v, T.transpose(w)), b))
    return T.hadamard(gate, v)


def save_frame_features(path, raw: np.ndarray) -> None:
    """Write raw (pre-repeat) features: magic, version, T, D, then T*D
    little-endian float64 values row-major."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise DimensionError(f"expected [T,D] features, got shape {raw.shape}")
    t, d = raw.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, t, d))
        fh.write(raw.astype("<f8").tobytes())


def load_frame_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise DataError(f"bad frame-feature magic in {path}")
        version, t, d = struct.unpack("<III", fh.read(12))
        if version != _VERSION:
            raise DataError(f"unsupported frame-feature version {version}")
        payload = fh.read(8 * t * d)
        if len(payload) != 8 * t * d:
            raise DataError(f"truncated frame-feature payload in {path}")
    return np.frombuffer(payload, dtype="<f8").reshape(t, d).copy()
