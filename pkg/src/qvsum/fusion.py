"""Query/video fusion (broadcast Hadamard + 1x1 convolution), the per-frame
relevance classifier, and summary selection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from . import tensor as T
from .errors import ConfigurationError
from .tensor import Tensor

NUM_CLASSES = 4
DEFAULT_THRESHOLD = 2


@dataclass(frozen=True)
class SummaryResult:
    logits: np.ndarray  # [t_max, 4]
    predicted_labels: tuple
    selected_frames: tuple
    threshold: int

    def to_dict(self) -> dict:
        return {
            "logits": self.logits.tolist(),
            "predicted_labels": list(self.predicted_labels),
            "selected_frames": list(self.selected_frames),
            "threshold": self.threshold,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SummaryResult":
        return cls(
            logits=np.asarray(d["logits"], dtype=np.float64),
            predicted_labels=tuple(d["predicted_labels"]),
            selected_frames=tuple(d["selected_frames"]),
            threshold=int(d["threshold"]),
        )


def init_fusion_params(feature_dim: int, query_dim: int,
                       rng: np.random.Generator,
                       std: float = 0.02) -> Dict[str, Tensor]:
    return {
        "fusion.query_projection": T.parameter(
            rng.normal(0.0, std, size=(feature_dim, query_dim))
        ),
        "fusion.conv_w": T.parameter(
            rng.normal(0.0, std, size=(feature_dim, feature_dim))
        ),
        "fusion.conv_b": T.parameter(np.zeros(feature_dim)),
        "fusion.classifier_w": T.parameter(
            rng.normal(0.0, std, size=(NUM_CLASSES, feature_dim))
        ),
        "fusion.classifier_b": T.parameter(np.zeros(NUM_CLASSES)),
    }


def interactive_attention(z_ta: Tensor, z_va: Tensor,
                          params: Dict[str, Tensor],
                          enabled: bool = True) -> Tensor:
    """Project the query vector to the feature dim, broadcast it over all
    frames, take the Hadamard product with the gated frame features, then
    apply the 1x1 convolution (a shared per-frame linear channel map).

    When ablated the convolution is bypassed; the broadcast Hadamard
    combination remains so the output stays query-dependent.
    """
    proj = params["fusion.query_projection"]
    if proj.shape[1] != z_ta.shape[0]:
        raise ConfigurationError(
            f"query projection expects dim {proj.shape[1]}, "
            f"got query vector of dim {z_ta.shape[0]}"
        )
    if proj.shape[0] != z_va.shape[1]:
        raise ConfigurationError(
            f"feature dim mismatch: projection {proj.shape[0]} "
            f"vs frames {z_va.shape[1]}"
        )
    q = T.take_row(T.matmul(T.broadcast_rows(z_ta, 1), T.transpose(proj)), 0)
    fused = T.mul_rowvec(z_va, q)
    if not enabled:
        return fused
    return T.add_rowvec(T.matmul(fused, T.transpose(params["fusion.conv_w"])),
                        params["fusion.conv_b"])


def classify_frames(z_ia: Tensor, params: Dict[str, Tensor]) -> Tensor:
    """Per-frame affine map to 4 relevance logits; no softmax (the loss
    consumes raw logits)."""
    return T.add_rowvec(
        T.matmul(z_ia, T.transpose(params["fusion.classifier_w"])),
        params["fusion.classifier_b"],
    )


def argmax_labels(logits: np.ndarray) -> List[int]:
    """Row argmax with ties broken toward the higher relevance level."""
    flipped = logits[:, ::-1]
    return [logits.shape[1] - 1 - int(i) for i in flipped.argmax(axis=1)]


def select_summary(logits, threshold: int = DEFAULT_THRESHOLD) -> SummaryResult:
    if threshold not in (1, 2, 3):
        raise ConfigurationError(f"threshold must be 1, 2 or 3, got {threshold}")
    arr = logits.array if isinstance(logits, Tensor) else np.asarray(logits)
    labels = argmax_labels(arr)
    selected = tuple(i for i, lab in enumerate(labels) if lab >= threshold)
    return SummaryResult(
        logits=arr.copy(),
        predicted_labels=tuple(labels),
        selected_frames=selected,
        threshold=threshold,
    )
