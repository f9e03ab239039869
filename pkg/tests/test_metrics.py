import math

import numpy as np
import pytest

import qvsum as q
from qvsum import metrics, tensor as T
from qvsum.data import RelevanceLabels
from qvsum.errors import DataError, EvaluationError


def labels_of(values):
    return RelevanceLabels(labels=tuple(values), original_length=len(values))


class TestCrossEntropy:
    def test_uniform_logits_give_ln4(self):
        logits = T.constant(np.zeros((199, 4)))
        labs = labels_of([0] * 199)
        assert abs(metrics.cross_entropy(logits, labs).item()
                   - math.log(4)) <= 1e-12

    def test_known_single_frame_value(self):
        logits = T.constant(np.array([[2.0, 0.0, 0.0, 0.0]]))
        loss = T.cross_entropy_mean(logits, [0]).item()
        expected = -2.0 + math.log(math.exp(2.0) + 3.0)
        assert abs(loss - expected) <= 1e-9
        assert abs(expected - 0.3407529539131313) <= 1e-12

    def test_loss_decreases_in_true_logit(self):
        lo = T.cross_entropy_mean(
            T.constant(np.array([[1.0, 0.0, 0.0, 0.0]])), [0]).item()
        hi = T.cross_entropy_mean(
            T.constant(np.array([[2.0, 0.0, 0.0, 0.0]])), [0]).item()
        assert hi < lo

    def test_nonnegative(self, rng):
        for _ in range(10):
            logits = T.constant(rng.normal(size=(199, 4)))
            labs = labels_of([int(x) for x in rng.integers(0, 4, size=199)])
            assert metrics.cross_entropy(logits, labs).item() >= 0.0

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            metrics.cross_entropy(T.constant(np.zeros((3, 4))),
                                  labels_of([0] * 199))


class TestAccuracy:
    def test_perfect_prediction(self):
        labs = labels_of([1, 2, 3, 0])
        assert metrics.accuracy([1, 2, 3, 0], labs) == 1.0

    def test_fig3_value(self):
        # 144 correct of 199
        gt = labels_of([2] * 199)
        pred = [2] * 144 + [0] * 55
        assert abs(metrics.accuracy(pred, gt) - 144 / 199) <= 1e-12
        assert abs(metrics.accuracy(pred, gt) - 0.7236) <= 5e-5

    def test_original_only_masking(self):
        labs = RelevanceLabels(labels=(1, 2, 1, 2), original_length=2)
        pred = [1, 2, 0, 0]
        assert metrics.accuracy(pred, labs, "original_only") == 1.0
        assert metrics.accuracy(pred, labs, "all_199") == 0.5

    def test_matches_counting_oracle(self, rng):
        for _ in range(100):
            gt_vals = [int(x) for x in rng.integers(0, 4, size=50)]
            pred = [int(x) for x in rng.integers(0, 4, size=50)]
            labs = labels_of(gt_vals)
            count = 0
            for p_, g_ in zip(pred, gt_vals):
                if p_ == g_:
                    count += 1
            assert abs(metrics.accuracy(pred, labs) - count / 50) <= 1e-12

    def test_errors(self):
        with pytest.raises(DataError):
            metrics.accuracy([0], labels_of([0, 1]))
        with pytest.raises(DataError):
            metrics.accuracy([0], labels_of([0]), "bogus")


class TestFBeta:
    def test_perfect_agreement(self):
        pairs = [({1, 2, 3}, {1, 2, 3}), ({0}, {0})]
        assert metrics.f_beta(pairs) == 1.0

    def test_disjoint_sets(self):
        assert metrics.f_beta([({1, 2}, {3, 4})]) == 0.0

    def test_known_mixture(self):
        # (p,r) = (1,1) and (0.5,0.5) at beta=1 -> (1.0 + 0.5) / 2
        pairs = [({1, 2}, {1, 2}), ({1, 2}, {2, 3})]
        assert abs(metrics.f_beta(pairs) - 0.75) <= 1e-12

    def test_empty_conventions(self):
        # no prediction, non-empty gt: p=0, r=0 -> term 0
        assert metrics.f_beta([(set(), {1})]) == 0.0
        # both empty: p=0, r=1 -> term 0 (denominator 0*b^2 + 1)
        assert metrics.f_beta([(set(), set())]) == 0.0
        # prediction but empty gt: p=0, r=0 -> 0
        assert metrics.f_beta([({1}, set())]) == 0.0

    def test_matches_brute_force_oracle(self, rng):
        for _ in range(100):
            n_pairs = int(rng.integers(1, 6))
            cases = []
            expected = 0.0
            for _ in range(n_pairs):
                pred = {int(i) for i in rng.integers(0, 20,
                                                     size=rng.integers(0, 10))}
                gt = {int(i) for i in rng.integers(0, 20,
                                                   size=rng.integers(0, 10))}
                cases.append((pred, gt))
                inter = len(pred & gt)
                p = inter / len(pred) if pred else 0.0
                if gt:
                    r = inter / len(gt)
                else:
                    r = 1.0 if not pred else 0.0
                expected += (2 * p * r / (p + r)) if (p + r) > 0 else 0.0
            expected /= n_pairs
            assert abs(metrics.f_beta(cases) - expected) <= 1e-12

    def test_empty_pair_list_rejected(self):
        with pytest.raises(EvaluationError):
            metrics.f_beta([])


class TestEvaluate:
    def test_is_read_only_and_repeatable(self, synthetic_dataset):
        ds = synthetic_dataset
        model = q.Model(q.toy_config(
            feature_dim=ds.feature_dim, embed_dim=8, hidden_dim=8,
            output_dim=8, vocab_size=len(ds.tokenizer)))
        ids = [p.pair_id for p in ds.pairs]
        before = model.clone_params()
        r1 = metrics.evaluate(model, ds, ids)
        r2 = metrics.evaluate(model, ds, ids)
        assert r1.accuracy == r2.accuracy
        assert r1.f_beta == r2.f_beta
        for name, arr in before.items():
            assert np.array_equal(arr, model.params[name].array)

    def test_report_internally_consistent(self, synthetic_dataset):
        ds = synthetic_dataset
        model = q.Model(q.toy_config(
            feature_dim=ds.feature_dim, embed_dim=8, hidden_dim=8,
            output_dim=8, vocab_size=len(ds.tokenizer)))
        report = metrics.evaluate(model, ds, [p.pair_id for p in ds.pairs])
        recomputed = np.mean([metrics.f_beta_term(p_, r_, report.beta)
                              for p_, r_ in zip(report.precisions,
                                                report.recalls)])
        assert abs(report.f_beta - recomputed) <= 1e-12

    def test_empty_ids_rejected(self, synthetic_dataset):
        model = q.Model(q.toy_config())
        with pytest.raises(EvaluationError):
            metrics.evaluate(model, synthetic_dataset, [])
