"""Evaluation metrics: frame accuracy and the F-beta score over
summary membership, plus the loss wrapper used by training."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Set, Tuple

import numpy as np

from . import tensor as T
from .data import RelevanceLabels
from .errors import DataError, EvaluationError
from .fusion import DEFAULT_THRESHOLD
from .tensor import Tensor


def cross_entropy(logits: Tensor, labels: RelevanceLabels) -> Tensor:
    """Eq.-style per-frame cross entropy, averaged over all frames."""
    if logits.shape[0] != labels.t_max:
        raise DataError(
            f"logit rows {logits.shape[0]} != label count {labels.t_max}")
    return T.cross_entropy_mean(logits, labels.labels)


def accuracy(pred_labels: Sequence[int], gt: RelevanceLabels,
             mask_mode: str = "all_199") -> float:
    """Fraction of scored frames predicted exactly; ``original_only``
    restricts scoring to the frames before repetition."""
    if len(pred_labels) != gt.t_max:
        raise DataError(
            f"prediction length {len(pred_labels)} != label count {gt.t_max}")
    if mask_mode == "all_199":
        n = gt.t_max
    elif mask_mode == "original_only":
        n = gt.original_length
    else:
        raise DataError(f"unknown mask_mode {mask_mode!r}")
    correct = sum(1 for i in range(n) if pred_labels[i] == gt.labels[i])
    return correct / n


def precision_recall(pred: Set[int], gt: Set[int]) -> Tuple[float, float]:
    """Summary-membership precision/recall with total conventions:
    p=0 when nothing is predicted; r=1 when both sets are empty, r=0 when
    only the ground truth is empty."""
    inter = len(pred & gt)
    p = inter / len(pred) if pred else 0.0
    if gt:
        r = inter / len(gt)
    else:
        r = 1.0 if not pred else 0.0
    return p, r


def f_beta_term(p: float, r: float, beta: float) -> float:
    denom = beta * beta * p + r
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * p * r / denom


@dataclass
class EvalReport:
    accuracy: float
    f_beta: float
    beta: float
    precisions: List[float]
    recalls: List[float]

    @property
    def num_pairs(self) -> int:
        return len(self.precisions)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f_beta": self.f_beta,
            "beta": self.beta,
            "precisions": self.precisions,
            "recalls": self.recalls,
            "num_pairs": self.num_pairs,
        }


def f_beta(pairs: Sequence[Tuple[Set[int], Set[int]]],
           beta: float = 1.0) -> float:
    """Mean F-beta over (predicted, ground-truth) summary index sets."""
    if not pairs:
        raise EvaluationError("f_beta needs at least one pair")
    total = 0.0
    for pred, gt in pairs:
        p, r = precision_recall(set(pred), set(gt))
        total += f_beta_term(p, r, beta)
    return total / len(pairs)


def selection_from_labels(labels: Sequence[int],
                          threshold: int = DEFAULT_THRESHOLD) -> Set[int]:
    return {i for i, lab in enumerate(labels) if lab >= threshold}


def evaluate(model, dataset, pair_ids: Sequence[str],
             mask_mode: str = "all_199", beta: float = 1.0,
             threshold: int = DEFAULT_THRESHOLD) -> EvalReport:
    """Read-only evaluation of a model over the named pairs."""
    if not pair_ids:
        raise EvaluationError("no pairs to evaluate")
    accs: List[float] = []
    ps: List[float] = []
    rs: List[float] = []
    for pid in pair_ids:
        pair = dataset.by_id(pid)
        result = model.summarize(pair.tokens, pair.frames, threshold=threshold)
        accs.append(accuracy(result.predicted_labels, pair.labels, mask_mode))
        gt_sel = selection_from_labels(pair.labels.labels, threshold)
        p, r = precision_recall(set(result.selected_frames), gt_sel)
        ps.append(p)
        rs.append(r)
    fb = float(np.mean([f_beta_term(p, r, beta) for p, r in zip(ps, rs)]))
    return EvalReport(accuracy=float(np.mean(accs)), f_beta=fb, beta=beta,
                      precisions=ps, recalls=rs)
