import math

import numpy as np
import pytest

from evex.errors import ValidationError
from evex.neuralnet import (
    PF_DIM,
    PF_ROWS,
    AdadeltaState,
    FeaturizedInstance,
    LayerStack,
    adadelta_step,
    conv_max_pool,
    conv_max_pool_backward,
    conv_preactivations,
    dropout_mask,
    gradient_check,
    weighted_softmax_loss,
)


class TestConvMaxPool:
    def test_width_one_identity_filter(self):
        inputs = np.array([[-2.0], [3.0], [1.0]])
        weights = np.ones((1, 1, 1))
        pooled, _ = conv_max_pool(inputs, weights, np.zeros(1))
        assert pooled == pytest.approx([math.tanh(3.0)])

    def test_zero_inputs_zero_bias(self):
        pooled, _ = conv_max_pool(np.zeros((4, 3)), np.zeros((2, 3, 3)), np.zeros(2))
        assert pooled == pytest.approx([0.0, 0.0])

    def test_permutation_invariant_for_width_one(self):
        rng = np.random.default_rng(0)
        inputs = rng.normal(size=(6, 2))
        weights = rng.normal(size=(3, 1, 2))
        bias = rng.normal(size=3)
        pooled, _ = conv_max_pool(inputs, weights, bias)
        shuffled, _ = conv_max_pool(inputs[::-1].copy(), weights, bias)
        assert pooled == pytest.approx(shuffled)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            conv_max_pool(np.zeros((3, 4)), np.zeros((1, 3, 5)), np.zeros(1))

    def test_preactivation_linearity_without_bias(self):
        rng = np.random.default_rng(1)
        inputs = rng.normal(size=(5, 3))
        weights = rng.normal(size=(2, 3, 3))
        z1 = conv_preactivations(inputs, weights, np.zeros(2))
        z2 = conv_preactivations(2.5 * inputs, weights, np.zeros(2))
        assert z2 == pytest.approx(2.5 * z1)

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        inputs = rng.normal(size=(5, 3))
        weights = rng.normal(size=(2, 3, 3))
        bias = rng.normal(size=2)
        dpooled = rng.normal(size=2)

        pooled, cache = conv_max_pool(inputs, weights, bias)
        dinputs, dweights, dbias = conv_max_pool_backward(dpooled, cache)

        def objective(x, w, b):
            p, _ = conv_max_pool(x, w, b)
            return float(dpooled @ p)

        h = 1e-6
        for arr, grad in ((inputs, dinputs), (weights, dweights), (bias, dbias)):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = objective(inputs, weights, bias)
                flat[i] = orig - h
                down = objective(inputs, weights, bias)
                flat[i] = orig
                assert gflat[i] == pytest.approx((up - down) / (2 * h), abs=1e-5)


class TestAdadelta:
    def test_first_step_hand_value(self):
        params = {"w": np.array([0.0])}
        state = AdadeltaState(rho=0.95, eps=1e-6)
        adadelta_step(params, {"w": np.array([1.0])}, state)
        assert params["w"][0] == pytest.approx(-0.0044721, abs=1e-6)
        # -sqrt(eps) / sqrt(0.05 + eps)
        expected = -math.sqrt(1e-6) / math.sqrt(0.05 * 1.0 + 1e-6)
        assert params["w"][0] == pytest.approx(expected)

    def test_zero_gradient_decays_only(self):
        params = {"w": np.array([1.0])}
        state = AdadeltaState()
        adadelta_step(params, {"w": np.array([2.0])}, state)
        before = params["w"].copy()
        acc_g = state.acc_grad["w"].copy()
        adadelta_step(params, {"w": np.array([0.0])}, state)
        assert params["w"] == pytest.approx(before)
        assert state.acc_grad["w"] == pytest.approx(acc_g * 0.95)

    def test_odd_symmetry(self):
        p1 = {"w": np.array([0.0])}
        p2 = {"w": np.array([0.0])}
        adadelta_step(p1, {"w": np.array([0.7])}, AdadeltaState())
        adadelta_step(p2, {"w": np.array([-0.7])}, AdadeltaState())
        assert p1["w"] == pytest.approx(-p2["w"])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            adadelta_step(
                {"w": np.zeros(2)}, {"w": np.zeros(3)}, AdadeltaState()
            )


class TestWeightedSoftmaxLoss:
    def test_two_equal_logits(self):
        loss, probs, _ = weighted_softmax_loss(np.zeros(2), 0, np.ones(2))
        assert loss == pytest.approx(math.log(2))
        assert probs == pytest.approx([0.5, 0.5])

    def test_weight_scales_linearly(self):
        weights = np.array([5.0, 1.0])
        loss, _, grad = weighted_softmax_loss(np.zeros(2), 0, weights)
        base, _, base_grad = weighted_softmax_loss(np.zeros(2), 0, np.ones(2))
        assert loss == pytest.approx(5 * base)
        assert grad == pytest.approx(5 * base_grad)

    def test_softmax_normalized(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            logits = rng.normal(scale=10, size=7)
            _, probs, _ = weighted_softmax_loss(logits, 3, np.ones(7))
            assert abs(probs.sum() - 1.0) < 1e-12

    def test_stable_under_large_logits(self):
        loss, probs, _ = weighted_softmax_loss(np.array([1000.0, 999.0]), 0, np.ones(2))
        assert np.isfinite(loss)
        assert probs[0] > probs[1]

    def test_non_finite_logits_rejected(self):
        with pytest.raises(ValidationError):
            weighted_softmax_loss(np.array([np.nan, 0.0]), 0, np.ones(2))

    def test_gradient_is_weighted_softmax_minus_onehot(self):
        logits = np.array([0.3, -0.2, 1.1])
        _, probs, grad = weighted_softmax_loss(logits, 1, np.array([1.0, 3.0, 1.0]))
        expected = 3.0 * probs.copy()
        expected[1] -= 3.0
        assert grad == pytest.approx(expected)


class TestDropout:
    def test_rate_zero_is_identity(self):
        assert dropout_mask(np.random.default_rng(0), 10, 0.0) is None

    def test_inverted_scaling_preserves_expectation(self):
        rng = np.random.default_rng(4)
        rate = 0.5
        h = np.ones(100_000)
        mask = dropout_mask(rng, h.size, rate)
        assert abs((h * mask).mean() - 1.0) < 0.01

    def test_bad_rate_rejected(self):
        with pytest.raises(ValidationError):
            dropout_mask(np.random.default_rng(0), 4, 1.0)


def random_stack(rng, kind="trigger", vocab_rows=12, d_word=8, n_filters=4,
                 width=3, n_labels=3, lex_words=None):
    if lex_words is None:
        lex_words = 6 if kind == "argument" else 3
    d_in = d_word + PF_DIM + (PF_DIM if kind == "argument" else 0)
    return LayerStack(
        word_emb=rng.normal(scale=0.3, size=(vocab_rows, d_word)),
        pf_trigger=rng.normal(scale=0.3, size=(PF_ROWS, PF_DIM)),
        pf_arg=rng.normal(scale=0.3, size=(PF_ROWS, PF_DIM)) if kind == "argument" else None,
        conv_w=rng.normal(scale=0.3, size=(n_filters, width, d_in)),
        conv_b=rng.normal(scale=0.1, size=n_filters),
        out_w=rng.normal(scale=0.3, size=(n_labels, n_filters + lex_words * d_word)),
        out_b=rng.normal(scale=0.1, size=n_labels),
    )


def random_instance(rng, kind="trigger", n=6, vocab_rows=12):
    word_ids = rng.integers(0, vocab_rows, size=n)
    anchor = int(rng.integers(0, n))
    pf = np.clip(np.arange(n) - anchor, -30, 30) + 30
    lex = rng.integers(0, vocab_rows, size=6 if kind == "argument" else 3)
    pf_arg = None
    if kind == "argument":
        head = int(rng.integers(0, n))
        pf_arg = np.clip(np.arange(n) - head, -30, 30) + 30
    return FeaturizedInstance(
        word_ids=word_ids, pf_trigger_ids=pf, lex_ids=lex, pf_arg_ids=pf_arg
    )


class TestGradientCheck:
    @pytest.mark.parametrize("kind", ["trigger", "argument"])
    def test_analytic_matches_numeric(self, kind):
        rng = np.random.default_rng(6)
        stack = random_stack(rng, kind)
        inst = random_instance(rng, kind)
        report = gradient_check(stack, inst, label=1,
                                class_weights=np.array([1.0, 5.0, 1.0]))
        assert report.passed, report.per_group
        assert report.max_relative_error < 1e-4

    def test_zero_filters_zero_inputs(self):
        stack = LayerStack(
            word_emb=np.zeros((4, 3)),
            pf_trigger=np.zeros((PF_ROWS, PF_DIM)),
            conv_w=np.zeros((2, 3, 3 + PF_DIM)),
            conv_b=np.zeros(2),
            out_w=np.zeros((2, 2 + 3 * 3)),
            out_b=np.zeros(2),
        )
        inst = FeaturizedInstance(
            word_ids=np.array([0, 1, 2]),
            pf_trigger_ids=np.array([30, 31, 32]),
            lex_ids=np.array([0, 1, 2]),
        )
        report = gradient_check(stack, inst, 0, np.ones(2))
        assert report.passed
        _, grads = stack.loss_and_grads(inst, 0, np.ones(2))
        # only the output bias can move the loss here
        assert np.any(grads["out_b"] != 0)
        for name, g in grads.items():
            if name != "out_b":
                assert not np.any(g)

    def test_corrupted_gradient_detected(self):
        rng = np.random.default_rng(7)
        stack = random_stack(rng)
        inst = random_instance(rng)
        weights = np.ones(3)
        real_loss_and_grads = stack.loss_and_grads

        def corrupted(inst, label, class_weights, mask=None):
            loss, grads = real_loss_and_grads(inst, label, class_weights, mask)
            grads["out_w"] = 2.0 * grads["out_w"]
            return loss, grads

        stack.loss_and_grads = corrupted
        report = gradient_check(stack, inst, 0, weights)
        assert not report.passed
        assert report.per_group["out_w"] > 0.1


class TestDeterminism:
    def test_same_seed_same_updates(self):
        def run():
            rng = np.random.default_rng(123)
            stack = random_stack(rng)
            inst = random_instance(rng)
            state = AdadeltaState()
            params = stack.params()
            for _ in range(3):
                mask = dropout_mask(rng, stack.out_w.shape[1], 0.5)
                _, grads = stack.loss_and_grads(inst, 1, np.ones(3), mask)
                adadelta_step(params, grads, state)
            return {k: v.copy() for k, v in params.items()}

        a, b = run(), run()
        for name in a:
            assert np.array_equal(a[name], b[name])
