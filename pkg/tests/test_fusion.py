import numpy as np
import pytest

from qvsum import fusion, tensor as T
from qvsum.errors import ConfigurationError


def make_params(d=4, q=3, seed=0, std=0.3):
    return fusion.init_fusion_params(d, q, np.random.default_rng(seed),
                                     std=std)


class TestInteractiveAttention:
    def test_identity_conv_is_broadcast_hadamard(self, rng):
        params = make_params()
        params["fusion.conv_w"].array = np.eye(4)
        params["fusion.conv_b"].array = np.zeros(4)
        z_ta = T.constant(rng.normal(size=3))
        z_va = T.constant(rng.normal(size=(199, 4)))
        out = fusion.interactive_attention(z_ta, z_va, params).array
        q = params["fusion.query_projection"].array @ z_ta.array
        assert np.allclose(out, z_va.array * q, atol=1e-12)

    def test_all_ones_query_is_transparent(self, rng):
        params = make_params()
        # projection chosen so the broadcast query vector is all ones
        params["fusion.query_projection"].array = np.zeros((4, 3))
        params["fusion.query_projection"].array[:, 0] = 1.0
        z_ta = T.constant(np.array([1.0, 0.0, 0.0]))
        z_va_arr = rng.normal(size=(199, 4))
        out = fusion.interactive_attention(z_ta, T.constant(z_va_arr),
                                           params).array
        conv = z_va_arr @ params["fusion.conv_w"].array.T \
            + params["fusion.conv_b"].array
        assert np.allclose(out, conv, atol=1e-12)

    def test_conv_matches_per_frame_loop_oracle(self, rng):
        params = make_params()
        z_ta = T.constant(rng.normal(size=3))
        z_va = T.constant(rng.normal(size=(199, 4)))
        out = fusion.interactive_attention(z_ta, z_va, params).array
        q = params["fusion.query_projection"].array @ z_ta.array
        w = params["fusion.conv_w"].array
        b = params["fusion.conv_b"].array
        for i in range(199):
            expected = w @ (z_va.array[i] * q) + b
            assert np.max(np.abs(out[i] - expected)) <= 1e-12

    def test_dimension_mismatch_raises(self, rng):
        params = make_params()
        with pytest.raises(ConfigurationError):
            fusion.interactive_attention(T.constant(rng.normal(size=5)),
                                         T.constant(rng.normal(size=(199, 4))),
                                         params)
        with pytest.raises(ConfigurationError):
            fusion.interactive_attention(T.constant(rng.normal(size=3)),
                                         T.constant(rng.normal(size=(199, 9))),
                                         params)

    def test_ablation_bypasses_conv_keeps_hadamard(self, rng):
        params = make_params()
        z_ta = T.constant(rng.normal(size=3))
        z_va = T.constant(rng.normal(size=(199, 4)))
        out = fusion.interactive_attention(z_ta, z_va, params,
                                           enabled=False).array
        q = params["fusion.query_projection"].array @ z_ta.array
        assert np.allclose(out, z_va.array * q, atol=1e-12)


class TestClassifyFrames:
    def test_zero_classifier_gives_uniform_loss(self):
        params = make_params()
        params["fusion.classifier_w"].array = np.zeros((4, 4))
        params["fusion.classifier_b"].array = np.zeros(4)
        logits = fusion.classify_frames(T.constant(np.ones((199, 4))), params)
        assert np.array_equal(logits.array, np.zeros((199, 4)))
        loss = T.cross_entropy_mean(logits, [0] * 199)
        assert abs(loss.item() - np.log(4)) <= 1e-12

    @pytest.mark.parametrize("d", [2, 4, 16])
    def test_output_shape(self, d, rng):
        params = make_params(d=d)
        logits = fusion.classify_frames(
            T.constant(rng.normal(size=(199, d))), params)
        assert logits.shape == (199, 4)


class TestSelectSummary:
    def test_all_high_selects_everything(self):
        logits = np.zeros((199, 4))
        logits[:, 3] = 5.0
        result = fusion.select_summary(logits, threshold=2)
        assert result.selected_frames == tuple(range(199))

    def test_all_low_selects_nothing(self):
        logits = np.zeros((199, 4))
        logits[:, 0] = 5.0
        result = fusion.select_summary(logits)
        assert result.selected_frames == ()

    def test_matches_filter_oracle(self, rng):
        logits = rng.normal(size=(199, 4))
        result = fusion.select_summary(logits, threshold=2)
        expected = tuple(i for i in range(199)
                         if result.predicted_labels[i] >= 2)
        assert result.selected_frames == expected
        for i in range(199):
            assert logits[i, result.predicted_labels[i]] == logits[i].max()

    def test_ties_break_toward_higher_label(self):
        logits = np.zeros((1, 4))
        result = fusion.select_summary(np.vstack([logits] * 199))
        assert all(lab == 3 for lab in result.predicted_labels)

    def test_row_shift_invariance(self, rng):
        logits = rng.normal(size=(199, 4))
        shifted = logits + rng.normal(size=(199, 1))
        a = fusion.select_summary(logits)
        b = fusion.select_summary(shifted)
        assert a.predicted_labels == b.predicted_labels
        assert a.selected_frames == b.selected_frames

    def test_invalid_threshold(self, rng):
        with pytest.raises(ConfigurationError):
            fusion.select_summary(rng.normal(size=(199, 4)), threshold=0)

    def test_serialization_roundtrip(self, rng):
        result = fusion.select_summary(rng.normal(size=(199, 4)))
        again = fusion.SummaryResult.from_dict(result.to_dict())
        assert np.array_equal(result.logits, again.logits)
        assert result.predicted_labels == again.predicted_labels
        assert result.selected_frames == again.selected_frames
