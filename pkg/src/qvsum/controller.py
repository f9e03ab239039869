"""Query encoder: token + positional embedding, a stack of causal decoder
blocks, final-token pooling, output projection, and the textual gate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from . import tensor as T
from .errors import ConfigurationError, VocabularyError
from .tensor import Tensor

DEFAULT_VOCAB_SIZE = 50257
DEFAULT_MAX_TOKENS = 16


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple
    vocab_size: int
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self):
        if not 1 <= len(self.ids) <= self.max_tokens:
            raise VocabularyError(
                f"token count {len(self.ids)} outside [1, {self.max_tokens}]"
            )
        for t in self.ids:
            if not 0 <= t < self.vocab_size:
                raise VocabularyError(
                    f"token id {t} outside vocabulary of size {self.vocab_size}"
                )

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class ControllerConfig:
    embed_dim: int
    hidden_dim: int
    ffn_dim: int
    output_dim: int
    vocab_size: int = DEFAULT_VOCAB_SIZE
    num_blocks: int = 2
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self):
        for name in ("embed_dim", "hidden_dim", "ffn_dim", "output_dim",
                     "vocab_size", "num_blocks", "max_tokens"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")


class Tokenizer:
    """Whitespace + lowercasing tokenizer over a line-per-token vocab file.

    Line index equals token id; id 0 is reserved for unknown words, so the
    first line of the vocab file is the unknown marker.
    """

    UNK_ID = 0

    def __init__(self, tokens: Sequence[str]):
        self.tokens = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    @classmethod
    def load(cls, path) -> "Tokenizer":
        with open(path, "r", encoding="utf-8") as fh:
            return cls([line.rstrip("\n") for line in fh])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self.tokens:
                fh.write(tok + "\n")

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, text: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> TokenSequence:
        words = text.lower().split()
        ids = tuple(self.index.get(w, self.UNK_ID) for w in words)
        return TokenSequence(ids=ids, vocab_size=len(self.tokens),
                             max_tokens=max_tokens)

    def decode(self, ids: Sequence[int]) -> str:
        return " ".join(self.tokens[i] for i in ids)


def sinusoidal_positions(n: int, dim: int) -> np.ndarray:
    """Standard sin/cos positional table; position 0 is [0,1,0,1,...]."""
    pos = np.arange(n, dtype=np.float64)[:, None]
    i = np.arange(dim, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, (2.0 * np.floor(i / 2.0)) / dim)
    table = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return table


def init_controller_params(
    config: ControllerConfig, rng: np.random.Generator, std: float = 0.02
) -> Dict[str, Tensor]:
    """Gaussian(0, std) weights, zero biases, unit layer-norm gains."""
    e, h, f, o = (config.embed_dim, config.hidden_dim,
                  config.ffn_dim, config.output_dim)
    p: Dict[str, Tensor] = {}

    def w(name, shape):
        p[name] = T.parameter(rng.normal(0.0, std, size=shape))

    def z(name, shape):
        p[name] = T.parameter(np.zeros(shape))

    w("controller.token_embedding", (e, config.vocab_size))
    for b in range(config.num_blocks):
        pre = f"controller.block{b}"
        w(f"{pre}.w_q", (h, e)); z(f"{pre}.b_q", (h,))
        w(f"{pre}.w_k", (h, e)); z(f"{pre}.b_k", (h,))
        w(f"{pre}.w_v", (h, e)); z(f"{pre}.b_v", (h,))
        p[f"{pre}.ln_gain"] = T.parameter(np.ones(h))
        z(f"{pre}.ln_bias", (h,))
        w(f"{pre}.w_1", (f, h)); z(f"{pre}.b_1", (f,))
        w(f"{pre}.w_2", (e, f)); z(f"{pre}.b_2", (e,))
    w("controller.output_projection", (o, e))
    w("controller.text_gate_w", (o, o))
    z("controller.text_gate_b", (o,))
    return p


def embed(tokens: TokenSequence, params: Dict[str, Tensor],
          config: ControllerConfig) -> Tensor:
    """Token embedding (columns of the table) plus sinusoidal positions."""
    table = params["controller.token_embedding"]
    if max(tokens.ids) >= table.shape[1]:
        raise VocabularyError(
            f"token id {max(tokens.ids)} outside embedding table "
            f"of size {table.shape[1]}"
        )
    x = T.embed_rows(table, tokens.ids)
    pos = T.constant(sinusoidal_positions(len(tokens), config.embed_dim))
    return T.add(x, pos)


def _linear_rows(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Row-wise affine map: x [N,in] -> x @ w.T + b, with w [out,in]."""
    return T.add_rowvec(T.matmul(x, T.transpose(w)), b)


def masked_self_attention(x: Tensor, params: Dict[str, Tensor],
                          prefix: str) -> Tensor:
    """softmax(mask(QK^T / sqrt(d_k))) V with a strict causal mask."""
    q = _linear_rows(x, params[f"{prefix}.w_q"], params[f"{prefix}.b_q"])
    k = _linear_rows(x, params[f"{prefix}.w_k"], params[f"{prefix}.b_k"])
    v = _linear_rows(x, params[f"{prefix}.w_v"], params[f"{prefix}.b_v"])
    d_k = q.shape[1]
    scores = T.scale(T.matmul(q, T.transpose(k)), 1.0 / math.sqrt(d_k))
    n = scores.shape[0]
    mask = np.triu(np.full((n, n), T.MASK_NEG), k=1)
    weights = T.softmax_rows(T.add(scores, T.constant(mask)))
    return T.matmul(weights, v)


def decoder_block(x: Tensor, params: Dict[str, Tensor], prefix: str) -> Tensor:
    """Masked self-attention, layer norm, and FFN; residuals where the
    dimensions line up (attention residual needs hidden_dim == embed_dim)."""
    a = masked_self_attention(x, params, prefix)
    if a.shape == x.shape:
        a = T.add(a, x)
    z = T.layer_norm(a, params[f"{prefix}.ln_gain"], params[f"{prefix}.ln_bias"])
    hidden = T.gelu(_linear_rows(z, params[f"{prefix}.w_1"],
                                 params[f"{prefix}.b_1"]))
    f = _linear_rows(hidden, params[f"{prefix}.w_2"], params[f"{prefix}.b_2"])
    return T.add(f, x)


def textual_attention(f: Tensor, params: Dict[str, Tensor]) -> Tensor:
    """Sigmoid gate on the pooled query vector, applied elementwise."""
    w = params["controller.text_gate_w"]
    b = params["controller.text_gate_b"]
    row = T.matmul(_as_row(f), T.transpose(w))
    gate = T.sigmoid(T.add_rowvec(row, b))
    return T.hadamard(T.take_row(gate, 0), f)


def _as_row(v: Tensor) -> Tensor:
    """View a [D] vector as a [1,D] matrix inside the graph."""
    return T.broadcast_rows(v, 1)


def encode_query(tokens: TokenSequence, params: Dict[str, Tensor],
                 config: ControllerConfig,
                 textual_attention_on: bool = True) -> Tensor:
    """Full query path: embed, block stack, final-token pooling, projection
    to output_dim, then the textual gate (identity when ablated)."""
    x = embed(tokens, params, config)
    for b in range(config.num_blocks):
        x = decoder_block(x, params, f"controller.block{b}")
    pooled = T.take_row(x, len(tokens) - 1)
    proj = T.take_row(
        T.matmul(_as_row(pooled),
                 T.transpose(params["controller.output_projection"])),
        0,
    )
    if not textual_attention_on:
        return proj
    return textual_attention(proj, params)
