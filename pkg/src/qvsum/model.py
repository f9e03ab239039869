"""End-to-end model: wires the query encoder, visual gate, fusion and
classifier into one parameter dict with ablation flags."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Dict, Sequence

import numpy as np

from . import controller, fusion, visual
from . import tensor as T
from .controller import ControllerConfig, TokenSequence
from .errors import ConfigurationError
from .tensor import Tensor
from .visual import FrameFeatureMatrix


@dataclass(frozen=True)
class ModelConfig:
    controller: ControllerConfig
    feature_dim: int
    t_max: int = visual.T_MAX_DEFAULT
    textual_attention: bool = True
    visual_attention: bool = True
    interactive_attention: bool = True
    init_std: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim < 1 or self.t_max < 1:
            raise ConfigurationError("feature_dim and t_max must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["controller"] = asdict(self.controller)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["controller"] = ControllerConfig(**d["controller"])
        return cls(**d)


def toy_config(feature_dim: int = 8, embed_dim: int = 8, hidden_dim: int = 8,
               ffn_dim: int = 16, output_dim: int = 8, vocab_size: int = 12,
               num_blocks: int = 1, seed: int = 0, **kwargs) -> ModelConfig:
    """Small dimensions for gradient checks and fast tests."""
    return ModelConfig(
        controller=ControllerConfig(
            embed_dim=embed_dim, hidden_dim=hidden_dim, ffn_dim=ffn_dim,
            output_dim=output_dim, vocab_size=vocab_size,
            num_blocks=num_blocks,
        ),
        feature_dim=feature_dim, seed=seed, **kwargs,
    )


class Model:
    """Parameter container plus forward passes for one configuration."""

    def __init__(self, config: ModelConfig,
                 params: Dict[str, Tensor] | None = None):
        self.config = config
        if params is None:
            rng = np.random.default_rng(config.seed)
            params = {}
            params.update(controller.init_controller_params(
                config.controller, rng, std=config.init_std))
            params.update(visual.init_visual_params(
                config.feature_dim, rng, std=config.init_std))
            params.update(fusion.init_fusion_params(
                config.feature_dim, config.controller.output_dim, rng,
                std=config.init_std))
        self.params = params

    def num_scalars(self) -> int:
        return sum(p.array.size for p in self.params.values())

    def encode_query(self, tokens: TokenSequence) -> Tensor:
        return controller.encode_query(
            tokens, self.params, self.config.controller,
            textual_attention_on=self.config.textual_attention,
        )

    def frame_logits(self, tokens: TokenSequence,
                     frames: FrameFeatureMatrix) -> Tensor:
        if frames.feature_dim != self.config.feature_dim:
            raise ConfigurationError(
                f"feature dim {frames.feature_dim} does not match "
                f"model feature_dim {self.config.feature_dim}"
            )
        z_ta = self.encode_query(tokens)
        v = T.constant(frames.features)
        z_va = visual.visual_attention(
            v, self.params, enabled=self.config.visual_attention)
        z_ia = fusion.interactive_attention(
            z_ta, z_va, self.params,
            enabled=self.config.interactive_attention)
        return fusion.classify_frames(z_ia, self.params)

    def loss(self, tokens: TokenSequence, frames: FrameFeatureMatrix,
             labels: Sequence[int]) -> Tensor:
        return T.cross_entropy_mean(self.frame_logits(tokens, frames), labels)

    def summarize(self, tokens: TokenSequence, frames: FrameFeatureMatrix,
                  threshold: int = fusion.DEFAULT_THRESHOLD) -> fusion.SummaryResult:
        logits = self.frame_logits(tokens, frames)
        return fusion.select_summary(logits, threshold=threshold)

    def zero_grads(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def grads(self) -> Dict[str, np.ndarray]:
        return {
            name: p.grad
            for name, p in self.params.items()
            if p.grad is not None
        }

    def clone_params(self) -> Dict[str, np.ndarray]:
        return {name: p.array.copy() for name, p in self.params.items()}

    def load_param_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        for name, arr in arrays.items():
            if name not in self.params:
                raise ConfigurationError(f"unknown parameter {name!r}")
            if self.params[name].shape != arr.shape:
                raise ConfigurationError(
                    f"shape mismatch for {name!r}: "
                    f"{self.params[name].shape} vs {arr.shape}"
                )
            self.params[name].array = np.ascontiguousarray(
                arr, dtype=np.float64)
