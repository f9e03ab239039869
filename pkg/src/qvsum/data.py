"""Dataset representation, annotation merging, splitting, the synthetic
generator, and manifest I/O."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .controller import Tokenizer, TokenSequence, DEFAULT_MAX_TOKENS
from .errors import DataError
from .visual import (FrameFeatureMatrix, T_MAX_DEFAULT, load_frame_features,
                     preprocess_frames, repeat_labels, save_frame_features)

NUM_LEVELS = 4


@dataclass(frozen=True)
class RelevanceLabels:
    labels: tuple  # length t_max, values in {0,1,2,3}
    original_length: int

    def __post_init__(self):
        t = self.original_length
        if not 1 <= t <= len(self.labels):
            raise DataError(
                f"original_length {t} outside [1, {len(self.labels)}]")
        for lab in self.labels:
            if lab not in (0, 1, 2, 3):
                raise DataError(f"relevance label {lab} outside {{0..3}}")
        for i in range(t, len(self.labels)):
            if self.labels[i] != self.labels[i % t]:
                raise DataError(
                    f"label at index {i} breaks cyclic repetition")

    @property
    def t_max(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class QueryVideoPair:
    pair_id: str
    video_id: str
    query: str
    tokens: TokenSequence
    frames: FrameFeatureMatrix
    labels: RelevanceLabels

    def __post_init__(self):
        if self.frames.original_length != self.labels.original_length:
            raise DataError(
                f"pair {self.pair_id}: frame length "
                f"{self.frames.original_length} != label length "
                f"{self.labels.original_length}")


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple
    val: tuple
    test: tuple


@dataclass
class Dataset:
    pairs: List[QueryVideoPair]
    tokenizer: Tokenizer
    t_max: int = T_MAX_DEFAULT

    @property
    def feature_dim(self) -> int:
        return self.pairs[0].frames.feature_dim

    def by_id(self, pair_id: str) -> QueryVideoPair:
        for p in self.pairs:
            if p.pair_id == pair_id:
                return p
        raise DataError(f"unknown pair id {pair_id!r}")

    def by_video(self, video_id: str) -> List[QueryVideoPair]:
        return [p for p in self.pairs if p.video_id == video_id]

    def video_ids(self) -> List[str]:
        seen: List[str] = []
        for p in self.pairs:
            if p.video_id not in seen:
                seen.append(p.video_id)
        return seen


def merge_annotations(per_annotator: Sequence[Sequence[int]],
                      tie_break_high: bool = True) -> List[int]:
    """Per-frame majority vote over annotators; ties break toward the
    higher relevance level by default."""
    if not per_annotator:
        raise DataError("no annotators to merge")
    n = len(per_annotator[0])
    for seq in per_annotator:
        if len(seq) != n:
            raise DataError("annotator label sequences differ in length")
    merged: List[int] = []
    levels = range(NUM_LEVELS - 1, -1, -1) if tie_break_high else range(NUM_LEVELS)
    for i in range(n):
        votes = [seq[i] for seq in per_annotator]
        best, best_count = 0, -1
        for level in levels:
            c = votes.count(level)
            if c > best_count:
                best, best_count = level, c
        merged.append(best)
    return merged


def split_dataset(ids: Sequence[str], seed: int) -> DatasetSplit:
    """Deterministic shuffled 60/20/20 partition; train absorbs rounding."""
    n = len(ids)
    if n < 5:
        raise DataError(f"need at least 5 pairs to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    n_val = round(0.2 * n)
    n_test = round(0.2 * n)
    n_train = n - n_val - n_test
    return DatasetSplit(
        train=tuple(shuffled[:n_train]),
        val=tuple(shuffled[n_train:n_train + n_val]),
        test=tuple(shuffled[n_train + n_val:]),
    )


_FILLERS = ["show", "me", "scenes", "of", "the", "a", "with", "people"]
_KEYWORDS = ["snowboarding", "skiing", "skateboard", "cooking",
             "surfing", "climbing", "cycling", "sailing"]


def default_vocab(num_signatures: int) -> List[str]:
    return ["<unk>"] + _FILLERS + _KEYWORDS[:num_signatures]


@dataclass(frozen=True)
class SyntheticDims:
    feature_dim: int = 32
    t_max: int = T_MAX_DEFAULT
    num_signatures: int = 4
    min_length: int = 30
    noise_std: float = 0.05


def generate_synthetic(num_pairs: int, seed: int,
                       dims: SyntheticDims = SyntheticDims()) -> Dataset:
    """Build query-video pairs whose labels are recoverable from the data.

    Each signature is a random direction in feature space tied to one query
    keyword. Every video carries per-frame integer strengths in {0..3} for
    every signature; frame features are the strength-weighted sum of
    signature vectors plus small noise, and the labels of a pair are the
    strengths of its query's signature. Videos are shared by two pairs with
    distinct signatures so summaries are query-dependent.
    """
    if num_pairs < 1:
        raise DataError("num_pairs must be >= 1")
    if dims.num_signatures > len(_KEYWORDS):
        raise DataError(
            f"at most {len(_KEYWORDS)} signatures supported")
    rng = np.random.default_rng(seed)
    tokenizer = Tokenizer(default_vocab(dims.num_signatures))
    sigs = rng.normal(0.0, 1.0, size=(dims.num_signatures, dims.feature_dim))
    sigs /= np.linalg.norm(sigs, axis=1, keepdims=True)

    for attempt in range(16):
        pairs = _generate_pairs(num_pairs, rng, dims, sigs, tokenizer)
        if _label_distribution_ok(pairs):
            return Dataset(pairs=pairs, tokenizer=tokenizer, t_max=dims.t_max)
    raise DataError("could not generate a non-degenerate label distribution")


def _generate_pairs(num_pairs, rng, dims, sigs, tokenizer):
    pairs: List[QueryVideoPair] = []
    num_videos = math.ceil(num_pairs / 2)
    for v in range(num_videos):
        video_id = f"v{v:03d}"
        t = int(rng.integers(dims.min_length, dims.t_max + 1))
        strengths = rng.integers(0, NUM_LEVELS, size=(t, dims.num_signatures))
        raw = strengths @ sigs + rng.normal(
            0.0, dims.noise_std, size=(t, dims.feature_dim))
        frames = preprocess_frames(raw, dims.t_max)
        sig_a, sig_b = rng.choice(dims.num_signatures, size=2, replace=False)
        for slot, sig_idx in enumerate((int(sig_a), int(sig_b))):
            j = 2 * v + slot
            if j >= num_pairs:
                break
            n_fill = int(rng.integers(1, 4))
            words = list(rng.choice(_FILLERS, size=n_fill)) + \
                [_KEYWORDS[sig_idx]]
            query = " ".join(words)
            labels = RelevanceLabels(
                labels=tuple(repeat_labels(
                    [int(x) for x in strengths[:, sig_idx]], dims.t_max)),
                original_length=t,
            )
            pairs.append(QueryVideoPair(
                pair_id=f"p{j:03d}", video_id=video_id, query=query,
                tokens=tokenizer.encode(query), frames=frames, labels=labels,
            ))
    return pairs


def _label_distribution_ok(pairs, min_fraction: float = 0.01) -> bool:
    counts = np.zeros(NUM_LEVELS)
    for p in pairs:
        for lab in p.labels.labels:
            counts[lab] += 1
    return bool((counts / counts.sum() >= min_fraction).all())


MANIFEST_VERSION = 1


def save_dataset(dataset: Dataset, out_dir: str,
                 manifest_name: str = "manifest.json") -> str:
    """Write vocab, one feature file per video, and the JSON manifest."""
    os.makedirs(out_dir, exist_ok=True)
    vocab_file = "vocab.txt"
    dataset.tokenizer.save(os.path.join(out_dir, vocab_file))
    written: set = set()
    entries = []
    for p in dataset.pairs:
        feature_file = f"{p.video_id}.qvff"
        if p.video_id not in written:
            t = p.frames.original_length
            save_frame_features(os.path.join(out_dir, feature_file),
                                p.frames.features[:t])
            written.add(p.video_id)
        t = p.labels.original_length
        entries.append({
            "id": p.pair_id,
            "video_id": p.video_id,
            "query": p.query,
            "feature_file": feature_file,
            "labels": list(p.labels.labels[:t]),
        })
    manifest = {
        "version": MANIFEST_VERSION,
        "t_max": dataset.t_max,
        "feature_dim": dataset.feature_dim,
        "vocab_file": vocab_file,
        "pairs": entries,
    }
    path = os.path.join(out_dir, manifest_name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def load_dataset(manifest_path: str) -> Dataset:
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("version") != MANIFEST_VERSION:
        raise DataError(
            f"unsupported manifest version {manifest.get('version')}")
    t_max = int(manifest["t_max"])
    tokenizer = Tokenizer.load(os.path.join(base, manifest["vocab_file"]))
    feature_cache: Dict[str, FrameFeatureMatrix] = {}
    pairs: List[QueryVideoPair] = []
    for entry in manifest["pairs"]:
        ff = entry["feature_file"]
        if ff not in feature_cache:
            feature_cache[ff] = preprocess_frames(
                load_frame_features(os.path.join(base, ff)), t_max)
        frames = feature_cache[ff]
        if "labels" in entry:
            raw_labels = [int(x) for x in entry["labels"]]
        elif "annotators" in entry:
            raw_labels = merge_annotations(entry["annotators"])
        else:
            raise DataError(
                f"pair {entry['id']!r} carries neither labels nor annotators")
        labels = RelevanceLabels(
            labels=tuple(repeat_labels(raw_labels, t_max)),
            original_length=len(raw_labels),
        )
        pairs.append(QueryVideoPair(
            pair_id=entry["id"], video_id=entry["video_id"],
            query=entry["query"],
            tokens=tokenizer.encode(entry["query"]),
            frames=frames, labels=labels,
        ))
    if not pairs:
        return Dataset(pairs=[], tokenizer=tokenizer, t_max=t_max)
    return Dataset(pairs=pairs, tokenizer=tokenizer, t_max=t_max)
