"""Query-driven, frame-based video summarization on a from-scratch
autodiff tensor substrate."""

from .controller import ControllerConfig, Tokenizer, TokenSequence
from .checkpoint import load_checkpoint, save_checkpoint
from .data import (Dataset, DatasetSplit, QueryVideoPair, RelevanceLabels,
                   generate_synthetic, load_dataset, merge_annotations,
                   save_dataset, split_dataset)
from .errors import (ConfigurationError, DataError, DimensionError,
                     EvaluationError, QvsumError, TrainingError,
                     VocabularyError)
from .fusion import SummaryResult, select_summary
from .gradcheck import GradCheckReport, grad_check
from .metrics import EvalReport, accuracy, cross_entropy, evaluate, f_beta
from .model import Model, ModelConfig, toy_config
from .optim import AdamState, OptimizerConfig, adam_step
from .tensor import Tensor
from .train import TrainConfig, TrainResult, run_ablation, \
    run_dimension_sweep, train
from .visual import FrameFeatureMatrix, preprocess_frames, visual_attention

__version__ = "0.1.0"

__all__ = [
    "AdamState", "ConfigurationError", "ControllerConfig", "DataError",
    "Dataset", "DatasetSplit", "DimensionError", "EvalReport",
    "EvaluationError", "FrameFeatureMatrix", "GradCheckReport", "Model",
    "ModelConfig", "OptimizerConfig", "QueryVideoPair", "QvsumError",
    "RelevanceLabels", "SummaryResult", "Tensor", "TokenSequence",
    "Tokenizer", "TrainConfig", "TrainResult", "TrainingError",
    "VocabularyError", "accuracy", "adam_step", "cross_entropy", "evaluate",
    "f_beta", "generate_synthetic", "grad_check", "load_checkpoint",
    "load_dataset", "merge_annotations", "preprocess_frames", "run_ablation",
    "run_dimension_sweep", "save_checkpoint", "save_dataset",
    "select_summary", "split_dataset", "toy_config", "train",
    "visual_attention",
]
