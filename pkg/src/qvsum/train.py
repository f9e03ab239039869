"""Training loop and the experiment harnesses (dimension sweep, attention
ablation)."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import tensor as T
from .controller import ControllerConfig
from .data import Dataset, DatasetSplit, split_dataset
from .errors import TrainingError
from .fusion import DEFAULT_THRESHOLD
from .metrics import EvalReport, evaluate
from .model import Model, ModelConfig
from .optim import AdamState, OptimizerConfig, adam_step


@dataclass
class TrainConfig:
    epochs: int = 10
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    batch_size: int = 4
    seed: int = 0
    mask_mode: str = "all_199"
    threshold: int = DEFAULT_THRESHOLD


@dataclass
class TrainResult:
    train_loss: List[float]
    val_accuracy: List[float]
    best_epoch: int
    best_params: Dict[str, np.ndarray]

    def write_trajectory_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_accuracy"])
            for i, loss in enumerate(self.train_loss):
                val = self.val_accuracy[i] if i < len(self.val_accuracy) else ""
                writer.writerow([i, repr(loss), repr(val) if val != "" else ""])


def train(model: Model, dataset: Dataset, split: DatasetSplit,
          config: TrainConfig) -> TrainResult:
    """Mini-batch Adam on the averaged cross-entropy loss; retains the
    parameters of the best validation epoch."""
    if not split.train:
        raise TrainingError("empty training split")
    rng = np.random.default_rng(config.seed)
    state = AdamState()
    losses: List[float] = []
    val_accs: List[float] = []
    best_epoch = -1
    best_acc = -1.0
    best_params = model.clone_params()
    train_ids = list(split.train)
    for epoch in range(config.epochs):
        order = rng.permutation(len(train_ids))
        epoch_losses: List[float] = []
        for start in range(0, len(train_ids), config.batch_size):
            batch = [train_ids[i] for i in order[start:start + config.batch_size]]
            model.zero_grads()
            parts = []
            for pid in batch:
                pair = dataset.by_id(pid)
                parts.append(model.loss(pair.tokens, pair.frames,
                                        pair.labels.labels))
            total = parts[0]
            for part in parts[1:]:
                total = T.add(total, part)
            batch_loss = T.scale(total, 1.0 / len(parts))
            value = batch_loss.item()
            if not math.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at epoch {epoch}, "
                    f"batch starting at {start}")
            batch_loss.backward()
            adam_step(model.params, model.grads(), state, config.optimizer)
            epoch_losses.append(value)
        losses.append(float(np.mean(epoch_losses)))
        if split.val:
            report = evaluate(model, dataset, split.val,
                              mask_mode=config.mask_mode,
                              threshold=config.threshold)
            val_accs.append(report.accuracy)
            if report.accuracy > best_acc:
                best_acc = report.accuracy
                best_epoch = epoch
                best_params = model.clone_params()
        else:
            best_epoch = epoch
            best_params = model.clone_params()
    return TrainResult(train_loss=losses, val_accuracy=val_accs,
                       best_epoch=best_epoch, best_params=best_params)


def _trained_eval(model_config: ModelConfig, dataset: Dataset,
                  split: DatasetSplit, train_config: TrainConfig,
                  eval_ids: Sequence[str]) -> EvalReport:
    model = Model(model_config)
    result = train(model, dataset, split, train_config)
    model.load_param_arrays(result.best_params)
    return evaluate(model, dataset, eval_ids,
                    mask_mode=train_config.mask_mode,
                    threshold=train_config.threshold)


def run_dimension_sweep(dims: Sequence[int], model_config: ModelConfig,
                        dataset: Dataset, split: DatasetSplit,
                        train_config: TrainConfig,
                        eval_ids: Optional[Sequence[str]] = None) -> List[dict]:
    """Train one model per query-representation dimension and tabulate
    accuracy, mirroring the embedding-dimension experiment."""
    ids = list(eval_ids) if eval_ids else list(split.test or split.train)
    rows = []
    for dim in dims:
        cfg = replace(model_config,
                      controller=replace(model_config.controller,
                                         output_dim=int(dim)))
        report = _trained_eval(cfg, dataset, split, train_config, ids)
        rows.append({"output_dim": int(dim),
                     "accuracy": report.accuracy,
                     "f_beta": report.f_beta})
    return rows


ABLATION_CONDITIONS = [
    ("baseline (w/o all attentions)", dict(textual_attention=False,
                                           visual_attention=False,
                                           interactive_attention=False)),
    ("w/ visual attention", dict(textual_attention=False,
                                 visual_attention=True,
                                 interactive_attention=False)),
    ("w/ textual attention", dict(textual_attention=True,
                                  visual_attention=False,
                                  interactive_attention=False)),
    ("w/ visual-textual attention", dict(textual_attention=True,
                                         visual_attention=True,
                                         interactive_attention=False)),
    ("w/ interactive attention", dict(textual_attention=False,
                                      visual_attention=False,
                                      interactive_attention=True)),
    ("w/ interactive-visual-textual attention",
     dict(textual_attention=True, visual_attention=True,
          interactive_attention=True)),
]


def run_ablation(model_config: ModelConfig, dataset: Dataset,
                 split: DatasetSplit, train_config: TrainConfig,
                 eval_ids: Optional[Sequence[str]] = None) -> List[dict]:
    """Train and evaluate the six attention on/off conditions."""
    ids = list(eval_ids) if eval_ids else list(split.test or split.train)
    rows = []
    for name, flags in ABLATION_CONDITIONS:
        cfg = replace(model_config, **flags)
        report = _trained_eval(cfg, dataset, split, train_config, ids)
        rows.append({"condition": name, **flags,
                     "f_beta": report.f_beta,
                     "accuracy": report.accuracy})
    return rows


def format_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Plain-text table with one header row."""
    def fmt(v):
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    widths = [max(len(c), *(len(fmt(r[c])) for r in rows)) for c in columns]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(fmt(r[c]).ljust(w)
                               for c, w in zip(columns, widths)))
    return "\n".join(lines)


def write_report(rows: Sequence[dict], columns: Sequence[str],
                 text_path=None, json_path=None) -> str:
    table = format_table(rows, columns)
    if text_path:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(table + "\n")
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(list(rows), fh, indent=2)
    return table
