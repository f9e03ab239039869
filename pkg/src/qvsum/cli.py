"""Command-line entry points."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .controller import ControllerConfig
from .data import (Dataset, DatasetSplit, SyntheticDims, generate_synthetic,
                   load_dataset, save_dataset, split_dataset)
from .errors import QvsumError
from .gradcheck import grad_check
from .metrics import evaluate
from .model import Model, ModelConfig, toy_config
from .optim import OptimizerConfig
from .train import (TrainConfig, format_table, run_ablation,
                    run_dimension_sweep, train, write_report)


@click.group()
def main():
    """Query-driven frame-based video summarization toolkit."""


def _fail(err: Exception) -> None:
    click.echo(f"error: {err}", err=True)
    sys.exit(1)


@main.command("gen-data")
@click.option("--pairs", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--feature-dim", type=int, default=32, show_default=True)
@click.option("--signatures", type=int, default=4, show_default=True)
@click.option("--out", type=click.Path(), default="data", show_default=True)
def gen_data(pairs, seed, feature_dim, signatures, out):
    """Generate a synthetic dataset and write its manifest."""
    try:
        dataset = generate_synthetic(
            pairs, seed,
            SyntheticDims(feature_dim=feature_dim, num_signatures=signatures))
        path = save_dataset(dataset, out)
    except QvsumError as err:
        _fail(err)
    click.echo(f"wrote {len(dataset.pairs)} pairs to {path}")


def _model_options(fn):
    opts = [
        click.option("--embed-dim", type=int, default=32, show_default=True),
        click.option("--hidden-dim", type=int, default=32, show_default=True),
        click.option("--ffn-dim", type=int, default=64, show_default=True),
        click.option("--output-dim", type=int, default=16, show_default=True),
        click.option("--blocks", type=int, default=1, show_default=True),
        click.option("--no-textual", is_flag=True,
                     help="disable the textual attention gate"),
        click.option("--no-visual", is_flag=True,
                     help="disable the visual attention gate"),
        click.option("--no-interactive", is_flag=True,
                     help="bypass the 1x1 fusion convolution"),
        click.option("--init-std", type=float, default=0.1, show_default=True,
                     help="weight initialization scale"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_model_config(dataset: Dataset, embed_dim, hidden_dim, ffn_dim,
                        output_dim, blocks, no_textual, no_visual,
                        no_interactive, init_std, seed) -> ModelConfig:
    return ModelConfig(
        controller=ControllerConfig(
            embed_dim=embed_dim, hidden_dim=hidden_dim, ffn_dim=ffn_dim,
            output_dim=output_dim, vocab_size=len(dataset.tokenizer),
            num_blocks=blocks,
        ),
        feature_dim=dataset.feature_dim,
        t_max=dataset.t_max,
        textual_attention=not no_textual,
        visual_attention=not no_visual,
        interactive_attention=not no_interactive,
        init_std=init_std,
        seed=seed,
    )


def _train_options(fn):
    opts = [
        click.option("--epochs", type=int, default=10, show_default=True),
        click.option("--lr", type=float, default=1e-4, show_default=True),
        click.option("--batch-size", type=int, default=4, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@main.command("train")
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default="run", show_default=True)
@click.option("--train-all", is_flag=True,
              help="train on every pair instead of the 60/20/20 split")
@_model_options
@_train_options
def train_cmd(manifest, out, train_all, embed_dim, hidden_dim, ffn_dim,
              output_dim, blocks, no_textual, no_visual, no_interactive,
              init_std, epochs, lr, batch_size, seed):
    """Train a model and write checkpoint + loss trajectory CSV."""
    try:
        dataset = load_dataset(manifest)
        ids = [p.pair_id for p in dataset.pairs]
        if train_all:
            split = DatasetSplit(train=tuple(ids), val=(), test=())
        else:
            split = split_dataset(ids, seed)
        cfg = _build_model_config(dataset, embed_dim, hidden_dim, ffn_dim,
                                  output_dim, blocks, no_textual, no_visual,
                                  no_interactive, init_std, seed)
        tcfg = TrainConfig(epochs=epochs,
                           optimizer=OptimizerConfig(learning_rate=lr),
                           batch_size=batch_size, seed=seed)
        model = Model(cfg)
        result = train(model, dataset, split, tcfg)
        model.load_param_arrays(result.best_params)
        os.makedirs(out, exist_ok=True)
        save_checkpoint(os.path.join(out, "checkpoint.qvcp"), model)
        result.write_trajectory_csv(os.path.join(out, "trajectory.csv"))
    except QvsumError as err:
        _fail(err)
    final = result.train_loss[-1] if result.train_loss else float("nan")
    click.echo(f"trained {epochs} epochs, final train loss {final:.6f}; "
               f"artifacts in {out}")


@main.command("eval")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--split", "which", type=click.Choice(
    ["train", "val", "test", "all"]), default="test", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="split seed (must match the training run)")
@click.option("--mask-mode", type=click.Choice(["all_199", "original_only"]),
              default="all_199", show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="write the report JSON here")
def eval_cmd(checkpoint, manifest, which, seed, mask_mode, out):
    """Evaluate a checkpoint on a dataset split."""
    try:
        model = load_checkpoint(checkpoint)
        dataset = load_dataset(manifest)
        ids = [p.pair_id for p in dataset.pairs]
        if which != "all":
            split = split_dataset(ids, seed)
            ids = list(getattr(split, which))
        report = evaluate(model, dataset, ids, mask_mode=mask_mode)
    except QvsumError as err:
        _fail(err)
    doc = json.dumps(report.to_dict(), indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
    click.echo(doc)


@main.command("sweep")
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--dims", default="10,150,300", show_default=True,
              help="comma-separated query representation dimensions")
@click.option("--out", type=click.Path(), default="sweep", show_default=True)
@_model_options
@_train_options
def sweep_cmd(manifest, dims, out, embed_dim, hidden_dim, ffn_dim, output_dim,
              blocks, no_textual, no_visual, no_interactive, init_std, epochs,
              lr, batch_size, seed):
    """Train and evaluate one model per query-representation dimension."""
    try:
        dataset = load_dataset(manifest)
        split = split_dataset([p.pair_id for p in dataset.pairs], seed)
        cfg = _build_model_config(dataset, embed_dim, hidden_dim, ffn_dim,
                                  output_dim, blocks, no_textual, no_visual,
                                  no_interactive, init_std, seed)
        tcfg = TrainConfig(epochs=epochs,
                           optimizer=OptimizerConfig(learning_rate=lr),
                           batch_size=batch_size, seed=seed)
        dim_list = [int(d) for d in dims.split(",") if d.strip()]
        rows = run_dimension_sweep(dim_list, cfg, dataset, split, tcfg)
        os.makedirs(out, exist_ok=True)
        table = write_report(rows, ["output_dim", "accuracy", "f_beta"],
                             text_path=os.path.join(out, "sweep.txt"),
                             json_path=os.path.join(out, "sweep.json"))
    except QvsumError as err:
        _fail(err)
    click.echo(table)


@main.command("ablate")
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default="ablation", show_default=True)
@_model_options
@_train_options
def ablate_cmd(manifest, out, embed_dim, hidden_dim, ffn_dim, output_dim,
               blocks, no_textual, no_visual, no_interactive, init_std,
               epochs, lr, batch_size, seed):
    """Run the six attention on/off conditions and tabulate F1."""
    try:
        dataset = load_dataset(manifest)
        split = split_dataset([p.pair_id for p in dataset.pairs], seed)
        cfg = _build_model_config(dataset, embed_dim, hidden_dim, ffn_dim,
                                  output_dim, blocks, no_textual, no_visual,
                                  no_interactive, init_std, seed)
        tcfg = TrainConfig(epochs=epochs,
                           optimizer=OptimizerConfig(learning_rate=lr),
                           batch_size=batch_size, seed=seed)
        rows = run_ablation(cfg, dataset, split, tcfg)
        os.makedirs(out, exist_ok=True)
        table = write_report(rows, ["condition", "f_beta", "accuracy"],
                             text_path=os.path.join(out, "ablation.txt"),
                             json_path=os.path.join(out, "ablation.json"))
    except QvsumError as err:
        _fail(err)
    click.echo(table)


@main.command("summarize")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--video", required=True, help="video id from the manifest")
@click.option("--query", required=True)
@click.option("--threshold", type=int, default=2, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="write the summary document here")
def summarize_cmd(checkpoint, manifest, video, query, threshold, out):
    """Score one (query, video) pair and emit the summary document."""
    try:
        model = load_checkpoint(checkpoint)
        dataset = load_dataset(manifest)
        pairs = dataset.by_video(video)
        if not pairs:
            raise QvsumError(f"unknown video id {video!r}")
        tokens = dataset.tokenizer.encode(query)
        result = model.summarize(tokens, pairs[0].frames, threshold=threshold)
    except QvsumError as err:
        _fail(err)
    doc = result.to_json()
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(doc)
    click.echo(doc)


@main.command("gradcheck")
@click.option("--dims", type=click.Choice(["toy"]), default="toy",
              show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@click.option("--step", type=float, default=1e-3, show_default=True,
              help="central-difference step")
@click.option("--seed", type=int, default=0, show_default=True)
def gradcheck_cmd(dims, tolerance, step, seed):
    """Verify the full-model loss gradient against central differences."""
    cfg = toy_config(seed=seed)
    model = Model(cfg)
    rng = np.random.default_rng(seed)
    from .controller import TokenSequence
    from .visual import preprocess_frames
    tokens = TokenSequence(
        ids=tuple(int(i) for i in rng.integers(0, cfg.controller.vocab_size,
                                               size=4)),
        vocab_size=cfg.controller.vocab_size)
    frames = preprocess_frames(
        rng.normal(size=(60, cfg.feature_dim)), cfg.t_max)
    labels = [int(x) for x in rng.integers(0, 4, size=cfg.t_max)]

    def f(params):
        return model.loss(tokens, frames, labels)

    report = grad_check(f, model.params, tolerance=tolerance, step=step)
    for name, err in sorted(report.max_rel_error.items()):
        click.echo(f"{name}: max rel error {err:.3e}")
    click.echo(f"worst {report.worst:.3e}  tolerance {tolerance:g}  "
               f"{'PASS' if report.passed else 'FAIL'}")
    sys.exit(0 if report.passed else 1)


@main.command("serve")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--threshold", type=int, default=2, show_default=True)
def serve_cmd(checkpoint, manifest, host, port, threshold):
    """Run the HTTP inference service."""
    import uvicorn

    from .service import ServiceConfig, create_app
    try:
        app = create_app(ServiceConfig(checkpoint_path=checkpoint,
                                       manifest_path=manifest,
                                       host=host, port=port,
                                       threshold=threshold))
    except QvsumError as err:
        _fail(err)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
