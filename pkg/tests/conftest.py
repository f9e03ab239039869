import time

import numpy as np
import pytest

import qvsum as q


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def toy_model():
    return q.Model(q.toy_config(seed=3))


@pytest.fixture(scope="session")
def synthetic_dataset():
    return q.generate_synthetic(8, seed=7)


def overfit_config(dataset, seed=0):
    """Toy training configuration used by the overfit tests."""
    return q.ModelConfig(
        controller=q.ControllerConfig(
            embed_dim=32, hidden_dim=32, ffn_dim=64, output_dim=16,
            vocab_size=len(dataset.tokenizer), num_blocks=1),
        feature_dim=dataset.feature_dim,
        init_std=0.1,
        seed=seed,
    )


@pytest.fixture(scope="session")
def overfit_run(synthetic_dataset):
    """Train to convergence on all 8 synthetic pairs; reused across tests.

    Returns (model, train_result, wall_seconds).
    """
    ds = synthetic_dataset
    model = q.Model(overfit_config(ds))
    ids = tuple(p.pair_id for p in ds.pairs)
    split = q.DatasetSplit(train=ids, val=(), test=())
    cfg = q.TrainConfig(epochs=300,
                        optimizer=q.OptimizerConfig(learning_rate=1e-3),
                        batch_size=4, seed=0)
    start = time.perf_counter()
    result = q.train(model, ds, split, cfg)
    return model, result, time.perf_counter() - start
