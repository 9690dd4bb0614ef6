"""From-scratch differentiable layers and optimizers.

Everything operates on plain numpy arrays. Weights are stored in single
precision by the model layer; the functions here follow the dtype of their
inputs, so callers widen to float64 for training math and gradient checks.
All forward functions return caches consumed by the matching backward
functions; analytic gradients are verified against central differences by
``grad_check``.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

__all__ = [
    "conv1d_forward",
    "conv1d_backward",
    "global_maxpool1d",
    "global_maxpool1d_backward",
    "dense_forward",
    "dense_backward",
    "softmax",
    "cross_entropy",
    "cross_entropy_grad",
    "rnn_step",
    "rnn_forward",
    "rnn_backward",
    "lstm_step",
    "lstm_forward",
    "lstm_backward",
    "dropout",
    "dropout_mask",
    "OptimizerState",
    "init_optimizer_state",
    "adam_step",
    "adagrad_step",
    "grad_check",
    "glorot_uniform",
]


# ---------------------------------------------------------------------------
# convolution / pooling / dense
# ---------------------------------------------------------------------------


def conv1d_forward(x: np.ndarray, filters: np.ndarray, bias: np.ndarray):
    """Valid 1-D convolution over the time axis, stride 1.

    x: (T, D); filters: (F, K, D); bias: (F,). Returns (out, cache) with
    out[t, f] = bias[f] + sum_{k,d} x[t+k, d] * filters[f, k, d].
    """
    T, D = x.shape
    F, K, Dw = filters.shape
    if Dw != D:
        raise ValueError(f"filter depth {Dw} != input depth {D}")
    if K > T:
        raise ValueError(f"kernel size {K} exceeds sequence length {T}")
    windows = np.lib.stride_tricks.sliding_window_view(x, (K, D))[:, 0]  # (T-K+1, K, D)
    wflat = windows.reshape(T - K + 1, K * D)
    out = wflat @ filters.reshape(F, K * D).T + bias
    cache = (wflat, filters, x.shape)
    return out, cache


def conv1d_backward(dout: np.ndarray, cache):
    """Gradients for conv1d_forward: returns (dx, dfilters, dbias)."""
    wflat, filters, (T, D) = cache
    F, K, _ = filters.shape
    dbias = dout.sum(axis=0)
    dwflat = dout.T @ wflat  # (F, K*D)
    dfilters = dwflat.reshape(F, K, D)
    dwin = (dout @ filters.reshape(F, K * D)).reshape(-1, K, D)
    dx = np.zeros((T, D), dtype=dout.dtype)
    for k in range(K):
        dx[k : k + dwin.shape[0]] += dwin[:, k, :]
    return dx, dfilters, dbias


def global_maxpool1d(x: np.ndarray):
    """Max over the time axis per filter; ties break at the lowest index.

    x: (T, F). Returns (out (F,), argmax (F,)) — argmax feeds the backward pass.
    """
    if x.shape[0] < 1:
        raise ValueError("cannot max-pool an empty sequence")
    argmax = np.argmax(x, axis=0)
    out = x[argmax, np.arange(x.shape[1])]
    return out, argmax


def global_maxpool1d_backward(dout: np.ndarray, argmax: np.ndarray, T: int) -> np.ndarray:
    dx = np.zeros((T, dout.shape[0]), dtype=dout.dtype)
    dx[argmax, np.arange(dout.shape[0])] = dout
    return dx


def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """W @ x + b with shape checking; W: (m, n), x: (n,), b: (m,)."""
    if W.shape[1] != x.shape[0] or W.shape[0] != b.shape[0]:
        raise ValueError(f"dense shape mismatch: W{W.shape}, x{x.shape}, b{b.shape}")
    return W @ x + b


def dense_backward(dy: np.ndarray, x: np.ndarray, W: np.ndarray):
    """Returns (dx, dW, db) for y = W @ x + b."""
    return W.T @ dy, np.outer(dy, x), dy.copy()


# ---------------------------------------------------------------------------
# softmax / cross-entropy
# ---------------------------------------------------------------------------


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max-subtraction); rejects non-finite input."""
    if not np.all(np.isfinite(logits)):
        raise ValueError("softmax input must be finite")
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


def cross_entropy(probs: np.ndarray, true_class: int) -> float:
    """-ln(probs[true_class]), clamped via probs >= 1e-12."""
    if not 0 <= true_class < probs.shape[0]:
        raise IndexError(f"class index {true_class} out of range for {probs.shape[0]} classes")
    return float(-np.log(max(float(probs[true_class]), 1e-12)))


def cross_entropy_grad(probs: np.ndarray, true_class: int) -> np.ndarray:
    """Gradient of the loss w.r.t. the logits feeding softmax: probs - onehot."""
    g = probs.copy()
    g[true_class] -= 1.0
    return g


# ---------------------------------------------------------------------------
# recurrent cells
# ---------------------------------------------------------------------------


def rnn_step(x: np.ndarray, h: np.ndarray, w_x: np.ndarray, w_h: np.ndarray, b: np.ndarray) -> np.ndarray:
    """h' = tanh(W_x x + W_h h + b)."""
    return np.tanh(dense_forward(x, w_x, np.zeros_like(b)) + w_h @ h + b)


def rnn_forward(
    xs: np.ndarray,
    h0: np.ndarray,
    w_x: np.ndarray,
    w_h: np.ndarray,
    b: np.ndarray,
    in_mask: Optional[np.ndarray] = None,
    rec_mask: Optional[np.ndarray] = None,
):
    """Run the simple RNN over real rows only; returns (h_last, cache).

    in_mask/rec_mask are fixed per-sequence dropout multipliers (variational
    style) applied to the input and hidden-state contributions respectively.
    """
    L = xs.shape[0]
    H = h0.shape[0]
    xm = xs * in_mask if in_mask is not None else xs
    hs = np.empty((L + 1, H), dtype=xs.dtype)
    hs[0] = h0
    for t in range(L):
        hprev = hs[t] * rec_mask if rec_mask is not None else hs[t]
        hs[t + 1] = np.tanh(w_x @ xm[t] + w_h @ hprev + b)
    cache = (xm, hs, w_x, w_h, rec_mask)
    return hs[L], cache


def rnn_backward(dh_last: np.ndarray, cache):
    """BPTT for rnn_forward; returns dict with dw_x, dw_h, db."""
    xm, hs, w_x, w_h, rec_mask = cache
    L = xm.shape[0]
    dw_x = np.zeros_like(w_x)
    dw_h = np.zeros_like(w_h)
    db = np.zeros(w_x.shape[0], dtype=dh_last.dtype)
    dh = dh_last
    for t in range(L - 1, -1, -1):
        da = dh * (1.0 - hs[t + 1] ** 2)
        hprev = hs[t] * rec_mask if rec_mask is not None else hs[t]
        dw_x += np.outer(da, xm[t])
        dw_h += np.outer(da, hprev)
        db += da
        dh = w_h.T @ da
        if rec_mask is not None:
            dh = dh * rec_mask
    return {"w_x": dw_x, "w_h": dw_h, "b": db}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_step(
    x: np.ndarray,
    h: np.ndarray,
    c: np.ndarray,
    w_x: np.ndarray,
    w_h: np.ndarray,
    b: np.ndarray,
):
    """One LSTM step; gate order in the packed matrices is (i, f, o, g).

    w_x: (4H, D); w_h: (4H, H); b: (4H,). Returns (h', c').
    """
    h2, c2, _ = _lstm_step_cached(x, h, c, w_x, w_h, b)
    return h2, c2


def _lstm_step_cached(x, h, c, w_x, w_h, b):
    H = h.shape[0]
    pre = w_x @ x + w_h @ h + b
    i = _sigmoid(pre[0:H])
    f = _sigmoid(pre[H : 2 * H])
    o = _sigmoid(pre[2 * H : 3 * H])
    g = np.tanh(pre[3 * H : 4 * H])
    c2 = f * c + i * g
    tanh_c2 = np.tanh(c2)
    h2 = o * tanh_c2
    return h2, c2, (i, f, o, g, c, tanh_c2)


def lstm_forward(
    xs: np.ndarray,
    h0: np.ndarray,
    c0: np.ndarray,
    w_x: np.ndarray,
    w_h: np.ndarray,
    b: np.ndarray,
    in_mask: Optional[np.ndarray] = None,
    rec_mask: Optional[np.ndarray] = None,
):
    """Run the LSTM over real rows only; returns (h_last, cache)."""
    L = xs.shape[0]
    xm = xs * in_mask if in_mask is not None else xs
    hs = [h0]
    cs = [c0]
    gates = []
    for t in range(L):
        hprev = hs[t] * rec_mask if rec_mask is not None else hs[t]
        h2, c2, gate_cache = _lstm_step_cached(xm[t], hprev, cs[t], w_x, w_h, b)
        hs.append(h2)
        cs.append(c2)
        gates.append((hprev, gate_cache))
    cache = (xm, hs, gates, w_x, w_h, rec_mask)
    return hs[L], cache


def lstm_backward(dh_last: np.ndarray, cache):
    """BPTT for lstm_forward; returns dict with dw_x, dw_h, db."""
    xm, hs, gates, w_x, w_h, rec_mask = cache
    L = xm.shape[0]
    H = dh_last.shape[0]
    dw_x = np.zeros_like(w_x)
    dw_h = np.zeros_like(w_h)
    db = np.zeros(4 * H, dtype=dh_last.dtype)
    dh = dh_last
    dc = np.zeros(H, dtype=dh_last.dtype)
    for t in range(L - 1, -1, -1):
        hprev, (i, f, o, g, c_prev, tanh_c2) = gates[t]
        do = dh * tanh_c2
        dc = dc + dh * o * (1.0 - tanh_c2**2)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc_prev = dc * f
        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                do * o * (1.0 - o),
                dg * (1.0 - g**2),
            ]
        )
        dw_x += np.outer(da, xm[t])
        dw_h += np.outer(da, hprev)
        db += da
        dh = w_h.T @ da
        if rec_mask is not None:
            dh = dh * rec_mask
        dc = dc_prev
    return {"w_x": dw_x, "w_h": dw_h, "b": db}


# ---------------------------------------------------------------------------
# dropout
# ---------------------------------------------------------------------------


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability rate, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def dropout(x: np.ndarray, rate: float, rng: np.random.Generator, training: bool) -> np.ndarray:
    """Inverted dropout; identity at inference time or rate 0."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    return x * dropout_mask(x.shape, rate, rng)


# ---------------------------------------------------------------------------
# optimizers
# ---------------------------------------------------------------------------


class OptimizerState:
    """Per-parameter accumulators plus a step counter.

    Adam keeps first/second moments ('m', 'v'); Adagrad keeps squared-gradient
    sums ('accum'). Accumulators are stored in the parameters' dtype.
    """

    def __init__(self, kind: str, slots: dict[str, dict[str, np.ndarray]], t: int = 0):
        if kind not in ("adam", "adagrad"):
            raise ValueError(f"unknown optimizer kind {kind!r}")
        self.kind = kind
        self.slots = slots
        self.t = t

    def __eq__(self, other) -> bool:
        if not isinstance(other, OptimizerState) or self.kind != other.kind or self.t != other.t:
            return False
        if self.slots.keys() != other.slots.keys():
            return False
        for slot, arrays in self.slots.items():
            if arrays.keys() != other.slots[slot].keys():
                return False
            for name, arr in arrays.items():
                if not np.array_equal(arr, other.slots[slot][name]):
                    return False
        return True


def init_optimizer_state(kind: str, params: dict[str, np.ndarray]) -> OptimizerState:
    kind = kind.lower()
    slot_names = ("m", "v") if kind == "adam" else ("accum",)
    slots = {
        s: {name: np.zeros_like(p) for name, p in params.items()} for s in slot_names
    }
    return OptimizerState(kind, slots)


def _check_grads_finite(grads: dict[str, np.ndarray]) -> None:
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for parameter {name!r}")


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update, in place; t increments once per call."""
    _check_grads_finite(grads)
    state.t += 1
    t = state.t
    for name, p in params.items():
        g = grads[name].astype(np.float64)
        m = state.slots["m"][name].astype(np.float64)
        v = state.slots["v"][name].astype(np.float64)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_p = p.astype(np.float64) - lr * m_hat / (np.sqrt(v_hat) + eps)
        state.slots["m"][name] = m.astype(p.dtype)
        state.slots["v"][name] = v.astype(p.dtype)
        params[name] = new_p.astype(p.dtype)


def adagrad_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    lr: float,
    eps: float = 1e-8,
) -> None:
    """Adagrad update, in place: accumulate g^2, scale by 1/sqrt(accum)."""
    _check_grads_finite(grads)
    state.t += 1
    for name, p in params.items():
        g = grads[name].astype(np.float64)
        accum = state.slots["accum"][name].astype(np.float64) + g * g
        new_p = p.astype(np.float64) - lr * g / (np.sqrt(accum) + eps)
        state.slots["accum"][name] = accum.astype(p.dtype)
        params[name] = new_p.astype(p.dtype)


def optimizer_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    lr: float,
) -> None:
    if state.kind == "adam":
        adam_step(params, grads, state, lr)
    else:
        adagrad_step(params, grads, state, lr)


# ---------------------------------------------------------------------------
# initialization / verification
# ---------------------------------------------------------------------------


def glorot_uniform(shape, fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def grad_check(
    loss_and_grads: Callable[[], tuple[float, dict[str, np.ndarray]]],
    params: dict[str, np.ndarray],
    step: float = 1e-4,
) -> float:
    """Compare analytic gradients against central differences.

    loss_and_grads recomputes (loss, grads) from the current contents of the
    param arrays, which are perturbed in place (float64 expected, dropout
    disabled). Returns the max relative error for the caller to assert on.
    """
    _, analytic = loss_and_grads()
    max_err = 0.0
    for name, p in params.items():
        a = analytic[name].ravel()
        flat = p.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            lp, _ = loss_and_grads()
            flat[i] = orig - step
            lm, _ = loss_and_grads()
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * step)
            denom = max(abs(a[i]), abs(numeric), 1e-3)
            max_err = max(max_err, abs(a[i] - numeric) / denom)
    return max_err
