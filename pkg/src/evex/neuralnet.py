"""Minimal neural kernel for the trigger/argument classifiers.

Dense math is numpy float64 throughout so that finite-difference gradient
checks are meaningful. The architecture is fixed: embedding lookup channels
(word + position features) feed a same-padded 1-D convolution with tanh and
max-over-positions pooling; the pooled vector is concatenated with a lexical
window of word embeddings, passed through inverted dropout, and classified
by an affine output layer under weighted softmax cross-entropy. Parameters
update with Adadelta.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

PF_CLAMP = 30
PF_ROWS = 2 * PF_CLAMP + 2  # 61 clamped distances + 1 padding row
PF_PADDING_ID = PF_ROWS - 1
PF_DIM = 5


@dataclass
class FeaturizedInstance:
    """Index view of one classification instance.

    word_ids and pf_trigger_ids run over the sentence tokens; pf_arg_ids is
    present only for argument instances. lex_ids holds the anchor windows
    (trigger, plus mention for arguments) as word ids.
    """
    word_ids: np.ndarray
    pf_trigger_ids: np.ndarray
    lex_ids: np.ndarray
    pf_arg_ids: np.ndarray | None = None


def _conv_windows(inputs: np.ndarray, width: int) -> np.ndarray:
    """(n, width*d_in) matrix of zero-padded sliding windows, one per
    position (same-length convolution)."""
    n, d_in = inputs.shape
    pad = width // 2
    padded = np.zeros((n + 2 * pad, d_in))
    padded[pad : pad + n] = inputs
    windows = np.lib.stride_tricks.sliding_window_view(padded, (width, d_in))
    return windows.reshape(n, width * d_in)


def conv_preactivations(inputs: np.ndarray, weights: np.ndarray,
                        bias: np.ndarray) -> np.ndarray:
    """Per-position filter responses before the nonlinearity, shape (n, f)."""
    n, d_in = inputs.shape
    f, width, d_w = weights.shape
    if d_w != d_in:
        raise ValidationError(
            f"filter input width {d_w} does not match feature width {d_in}"
        )
    return _conv_windows(inputs, width) @ weights.reshape(f, width * d_in).T + bias


def conv_max_pool(inputs: np.ndarray, weights: np.ndarray, bias: np.ndarray):
    """tanh convolution over a zero-padded token matrix, max-pooled over
    positions.

    inputs: (n, d_in); weights: (f, w, d_in); bias: (f,).
    Returns (pooled (f,), cache for the backward pass).
    """
    n, d_in = inputs.shape
    f, width, d_w = weights.shape
    if d_w != d_in:
        raise ValidationError(
            f"filter input width {d_w} does not match feature width {d_in}"
        )
    windows = _conv_windows(inputs, width)
    z = windows @ weights.reshape(f, width * d_in).T + bias
    activ = np.tanh(z)
    best = activ.argmax(axis=0)
    pooled = activ[best, np.arange(f)]
    cache = (inputs.shape, windows, activ, best, weights, width // 2)
    return pooled, cache


def conv_max_pool_backward(dpooled: np.ndarray, cache):
    (n, d_in), windows, activ, best, weights, pad = cache
    f, width, _ = weights.shape
    dz = dpooled * (1.0 - activ[best, np.arange(f)] ** 2)  # (f,)
    dweights = (dz[:, None] * windows[best]).reshape(f, width, d_in)
    dbias = dz.copy()
    dpadded = np.zeros((n + 2 * pad, d_in))
    flat = weights.reshape(f, width * d_in)
    for i in range(f):
        dpadded[best[i] : best[i] + width] += (dz[i] * flat[i]).reshape(width, d_in)
    dinputs = dpadded[pad : pad + n]
    return dinputs, dweights, dbias


def weighted_softmax_loss(logits: np.ndarray, label: int, class_weights: np.ndarray):
    """Class-weighted cross-entropy with max-subtracted softmax.

    Returns (loss, probabilities, gradient w.r.t. logits).
    """
    if not np.all(np.isfinite(logits)):
        raise ValidationError("non-finite logits")
    if not (0 <= label < logits.shape[0]):
        raise ValidationError(f"label {label} out of range for {logits.shape[0]} classes")
    if np.any(np.asarray(class_weights) <= 0):
        raise ValidationError("class weights must be positive")
    shifted = logits - logits.max()
    expz = np.exp(shifted)
    probs = expz / expz.sum()
    w = float(class_weights[label])
    loss = -w * (shifted[label] - np.log(expz.sum()))
    dlogits = w * probs
    dlogits[label] -= w
    return loss, probs, dlogits


@dataclass
class AdadeltaState:
    rho: float = 0.95
    eps: float = 1e-6
    acc_grad: dict[str, np.ndarray] = field(default_factory=dict)
    acc_delta: dict[str, np.ndarray] = field(default_factory=dict)


def adadelta_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
                  state: AdadeltaState) -> None:
    """One Adadelta update, in place:
    E[g2] <- rho E[g2] + (1-rho) g2
    dx    <- -sqrt(E[dx2]+eps)/sqrt(E[g2]+eps) * g
    E[dx2]<- rho E[dx2] + (1-rho) dx2
    """
    for name, grad in grads.items():
        param = params[name]
        if param.shape != grad.shape:
            raise ValidationError(
                f"gradient shape {grad.shape} does not match parameter "
                f"{name!r} shape {param.shape}"
            )
        acc_g = state.acc_grad.setdefault(name, np.zeros_like(param))
        acc_d = state.acc_delta.setdefault(name, np.zeros_like(param))
        acc_g *= state.rho
        acc_g += (1.0 - state.rho) * grad * grad
        dx = -np.sqrt(acc_d + state.eps) / np.sqrt(acc_g + state.eps) * grad
        acc_d *= state.rho
        acc_d += (1.0 - state.rho) * dx * dx
        param += dx


def dropout_mask(rng: np.random.Generator, size: int, rate: float) -> np.ndarray | None:
    """Inverted-dropout mask: multiply activations by mask to keep their
    expectation unchanged. None when the rate is 0 (identity)."""
    if rate == 0.0:
        return None
    if not (0.0 <= rate < 1.0):
        raise ValidationError(f"dropout rate must be in [0, 1), got {rate}")
    return (rng.random(size) >= rate).astype(np.float64) / (1.0 - rate)


@dataclass
class LayerStack:
    """All learned parameters plus the fixed wiring between them."""

    word_emb: np.ndarray        # (vocab rows incl. UNK+PAD, d_word)
    pf_trigger: np.ndarray      # (PF_ROWS, PF_DIM)
    conv_w: np.ndarray          # (filters, width, d_in)
    conv_b: np.ndarray          # (filters,)
    out_w: np.ndarray           # (labels, filters + lex_words * d_word)
    out_b: np.ndarray           # (labels,)
    pf_arg: np.ndarray | None = None  # argument models only
    dropout: float = 0.5

    @property
    def d_word(self) -> int:
        return self.word_emb.shape[1]

    @property
    def n_filters(self) -> int:
        return self.conv_w.shape[0]

    @property
    def n_labels(self) -> int:
        return self.out_b.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        out = {
            "word_emb": self.word_emb,
            "pf_trigger": self.pf_trigger,
            "conv_w": self.conv_w,
            "conv_b": self.conv_b,
            "out_w": self.out_w,
            "out_b": self.out_b,
        }
        if self.pf_arg is not None:
            out["pf_arg"] = self.pf_arg
        return out

    def _token_matrix(self, inst: FeaturizedInstance) -> np.ndarray:
        channels = [self.word_emb[inst.word_ids], self.pf_trigger[inst.pf_trigger_ids]]
        if self.pf_arg is not None:
            if inst.pf_arg_ids is None:
                raise ValidationError("argument model requires pf_arg_ids")
            channels.append(self.pf_arg[inst.pf_arg_ids])
        return np.concatenate(channels, axis=1)

    def forward(self, inst: FeaturizedInstance, mask: np.ndarray | None = None):
        inputs = self._token_matrix(inst)
        pooled, conv_cache = conv_max_pool(inputs, self.conv_w, self.conv_b)
        lex = self.word_emb[inst.lex_ids].reshape(-1)
        hidden = np.concatenate([pooled, lex])
        dropped = hidden if mask is None else hidden * mask
        logits = self.out_w @ dropped + self.out_b
        cache = (inst, conv_cache, hidden, dropped, mask)
        return logits, cache

    def predict_proba(self, inst: FeaturizedInstance) -> np.ndarray:
        logits, _ = self.forward(inst)
        shifted = logits - logits.max()
        expz = np.exp(shifted)
        return expz / expz.sum()

    def loss_and_grads(
        self,
        inst: FeaturizedInstance,
        label: int,
        class_weights: np.ndarray,
        mask: np.ndarray | None = None,
    ) -> tuple[float, dict[str, np.ndarray]]:
        logits, cache = self.forward(inst, mask)
        loss, _, dlogits = weighted_softmax_loss(logits, label, class_weights)
        _, conv_cache, hidden, dropped, mask = cache

        grads = {name: np.zeros_like(p) for name, p in self.params().items()}
        grads["out_w"] += np.outer(dlogits, dropped)
        grads["out_b"] += dlogits
        ddropped = self.out_w.T @ dlogits
        dhidden = ddropped if mask is None else ddropped * mask

        f = self.n_filters
        dinputs, dconv_w, dconv_b = conv_max_pool_backward(dhidden[:f], conv_cache)
        grads["conv_w"] += dconv_w
        grads["conv_b"] += dconv_b

        d_w = self.d_word
        np.add.at(grads["word_emb"], inst.word_ids, dinputs[:, :d_w])
        np.add.at(grads["pf_trigger"], inst.pf_trigger_ids, dinputs[:, d_w : d_w + PF_DIM])
        if self.pf_arg is not None:
            np.add.at(grads["pf_arg"], inst.pf_arg_ids, dinputs[:, d_w + PF_DIM :])

        dlex = dhidden[f:].reshape(-1, d_w)
        np.add.at(grads["word_emb"], inst.lex_ids, dlex)
        return loss, grads


@dataclass
class GradCheckReport:
    per_group: dict[str, float]
    max_relative_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_error < self.tolerance


def gradient_check(
    stack: LayerStack,
    inst: FeaturizedInstance,
    label: int,
    class_weights: np.ndarray,
    tolerance: float = 1e-4,
    step: float = 1e-5,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences on
    every parameter group (dropout disabled). Per-group error is
    ||analytic - numeric|| / (||analytic|| + ||numeric||), 0 when both sides
    vanish."""
    _, analytic = stack.loss_and_grads(inst, label, class_weights)
    per_group: dict[str, float] = {}
    for name, param in stack.params().items():
        numeric = np.zeros_like(param)
        flat = param.reshape(-1)
        nflat = numeric.reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + step
            up, _, _ = weighted_softmax_loss(
                stack.forward(inst)[0], label, class_weights
            )
            flat[i] = orig - step
            down, _, _ = weighted_softmax_loss(
                stack.forward(inst)[0], label, class_weights
            )
            flat[i] = orig
            nflat[i] = (up - down) / (2.0 * step)
        scale = np.linalg.norm(analytic[name]) + np.linalg.norm(numeric)
        if scale == 0.0:
            per_group[name] = 0.0
        else:
            per_group[name] = float(np.linalg.norm(analytic[name] - numeric) / scale)
    return GradCheckReport(
        per_group=per_group,
        max_relative_error=max(per_group.values()),
        tolerance=tolerance,
    )
