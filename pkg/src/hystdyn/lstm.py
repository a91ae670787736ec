"""Single-layer LSTM with a dense ReLU head and one linear output node.

Gate preactivations are stored stacked in one ``(4h, .)`` block per weight
kind, rows ordered forget / input / output / cell; per-gate views are exposed
for inspection. The output gate reads the previous hidden state, like the
cell and input gates.

The backward pass accumulates exact gradients of a per-step loss through the
hidden- and cell-state recurrences (backpropagation through time).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import glorot_uniform, relu, sigmoid, tanh

GATE_ORDER = ("f", "i", "o", "c")


def _gate_slice(which: str, h: int) -> slice:
    g = GATE_ORDER.index(which)
    return slice(g * h, (g + 1) * h)


@dataclass
class LstmParams:
    """Stacked input weights (4h, n), recurrent weights (4h, h), biases (4h,)."""

    w_x: np.ndarray
    u_h: np.ndarray
    b: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.u_h.shape[1]

    def gate(self, kind: str, which: str) -> np.ndarray:
        """View of one gate's block, e.g. ``gate("w", "f")``."""
        sl = _gate_slice(which, self.hidden_size)
        return {"w": self.w_x, "u": self.u_h, "b": self.b}[kind][sl]


@dataclass
class DenseParams:
    """ReLU layer (w1, b1) followed by a single linear output (w2, b2)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray  # shape (1,)


@dataclass
class LstmState:
    """Hidden and cell vectors; zeros at sequence start."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int) -> "LstmState":
        return cls(h=np.zeros(hidden_size), c=np.zeros(hidden_size))


@dataclass
class LstmNetwork:
    lstm: LstmParams
    dense: DenseParams
    n: int
    hidden_size: int
    dense_size: int

    def named_arrays(self) -> dict[str, np.ndarray]:
        """Every trainable array, keyed stably for optimizers and checkpoints."""
        return {
            "lstm_w_x": self.lstm.w_x,
            "lstm_u_h": self.lstm.u_h,
            "lstm_b": self.lstm.b,
            "dense_w1": self.dense.w1,
            "dense_b1": self.dense.b1,
            "dense_w2": self.dense.w2,
            "dense_b2": self.dense.b2,
        }

    def initial_state(self) -> LstmState:
        return LstmState.zeros(self.hidden_size)


def init_network(
    rng: np.random.Generator,
    n: int,
    hidden_size: int,
    dense_size: int,
    unit_forget_bias: bool = True,
) -> LstmNetwork:
    """Glorot-uniform weights, zero biases; the forget-gate bias defaults to 1
    to keep early gradients flowing."""
    h = hidden_size
    w_x = np.vstack([glorot_uniform(rng, h, n) for _ in GATE_ORDER])
    u_h = np.vstack([glorot_uniform(rng, h, h) for _ in GATE_ORDER])
    b = np.zeros(4 * h)
    if unit_forget_bias:
        b[_gate_slice("f", h)] = 1.0
    dense = DenseParams(
        w1=glorot_uniform(rng, dense_size, h),
        b1=np.zeros(dense_size),
        w2=glorot_uniform(rng, dense_size, 1)[:, 0],
        b2=np.zeros(1),
    )
    return LstmNetwork(
        lstm=LstmParams(w_x=w_x, u_h=u_h, b=b),
        dense=dense,
        n=n,
        hidden_size=h,
        dense_size=dense_size,
    )


@dataclass
class CellCache:
    """Values a single step must retain for the backward pass."""

    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray
    tc: np.ndarray


def cell_forward(x: np.ndarray, state: LstmState, p: LstmParams) -> tuple[LstmState, CellCache]:
    """One recurrent step.

    f = sigmoid(W_f x + U_f h_prev + b_f)        (likewise i, o)
    g = tanh(W_c x + U_c h_prev + b_c)
    c = f * c_prev + i * g
    h = o * tanh(c)
    """
    h = p.hidden_size
    if x.shape != (p.w_x.shape[1],):
        raise ValueError(f"input shape {x.shape} does not match n={p.w_x.shape[1]}")
    pre = p.w_x @ x + p.u_h @ state.h + p.b
    f = sigmoid(pre[0 * h : 1 * h])
    i = sigmoid(pre[1 * h : 2 * h])
    o = sigmoid(pre[2 * h : 3 * h])
    g = tanh(pre[3 * h : 4 * h])
    c = f * state.c + i * g
    tc = tanh(c)
    new = LstmState(h=o * tc, c=c)
    cache = CellCache(x=x, h_prev=state.h, c_prev=state.c, f=f, i=i, o=o, g=g, c=c, tc=tc)
    return new, cache


def dense_forward(h: np.ndarray, d: DenseParams) -> float:
    return float(d.w2 @ relu(d.w1 @ h + d.b1) + d.b2[0])


def step_forward(net: LstmNetwork, x: np.ndarray, state: LstmState) -> tuple[float, LstmState]:
    """One full prediction step: recurrent cell then dense head."""
    new, _ = cell_forward(x, state, net.lstm)
    return dense_forward(new.h, net.dense), new


@dataclass
class ForwardCache:
    x: np.ndarray       # (T, n)
    h_prev: np.ndarray  # (T, h) hidden state entering each step
    c_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray
    tc: np.ndarray
    h: np.ndarray       # (T, h) hidden state leaving each step
    z1_pos: np.ndarray  # (T, d) ReLU active mask
    a1: np.ndarray      # (T, d)


def forward(
    net: LstmNetwork, xs: np.ndarray, state: LstmState | None = None
) -> tuple[np.ndarray, LstmState, ForwardCache]:
    """Run a window sequence through the network.

    ``xs`` has one window per row. Returns scaled per-step predictions, the
    final recurrent state, and the cache consumed by :func:`backward`.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != net.n:
        raise ValueError(f"window sequence must be (T, {net.n}), got {xs.shape}")
    if state is None:
        state = net.initial_state()
    T, h = xs.shape[0], net.hidden_size
    p = net.lstm
    pre_x = xs @ p.w_x.T + p.b  # input contribution for every step at once

    H_prev = np.empty((T, h))
    C_prev = np.empty((T, h))
    F = np.empty((T, h))
    I = np.empty((T, h))
    O = np.empty((T, h))
    G = np.empty((T, h))
    C = np.empty((T, h))
    TC = np.empty((T, h))
    H = np.empty((T, h))

    h_t, c_t = state.h, state.c
    for t in range(T):
        pre = pre_x[t] + p.u_h @ h_t
        f = sigmoid(pre[0 * h : 1 * h])
        i = sigmoid(pre[1 * h : 2 * h])
        o = sigmoid(pre[2 * h : 3 * h])
        g = tanh(pre[3 * h : 4 * h])
        c = f * c_t + i * g
        tc = tanh(c)
        H_prev[t], C_prev[t] = h_t, c_t
        F[t], I[t], O[t], G[t], C[t], TC[t] = f, i, o, g, c, tc
        c_t = c
        h_t = o * tc
        H[t] = h_t

    d = net.dense
    z1 = H @ d.w1.T + d.b1
    a1 = relu(z1)
    preds = a1 @ d.w2 + d.b2[0]
    cache = ForwardCache(
        x=xs, h_prev=H_prev, c_prev=C_prev, f=F, i=I, o=O, g=G, c=C, tc=TC, h=H,
        z1_pos=z1 > 0.0, a1=a1,
    )
    return preds, LstmState(h=h_t.copy(), c=c_t.copy()), cache


def backward(net: LstmNetwork, cache: ForwardCache, dpreds: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of ``sum_t dpreds[t] * pred[t]``'s generating loss.

    ``dpreds`` holds the loss gradient at each step's output. Returns one
    gradient array per entry of :meth:`LstmNetwork.named_arrays`.
    """
    dpreds = np.asarray(dpreds, dtype=float)
    T, h = cache.x.shape[0], net.hidden_size
    if dpreds.shape != (T,):
        raise ValueError(f"per-step loss gradients must be ({T},), got {dpreds.shape}")
    p, d = net.lstm, net.dense

    # Dense head, all steps at once.
    dz1 = (dpreds[:, None] * d.w2) * cache.z1_pos
    dw2 = cache.a1.T @ dpreds
    db2 = np.array([dpreds.sum()])
    dw1 = dz1.T @ cache.h
    db1 = dz1.sum(axis=0)
    dh_dense = dz1 @ d.w1

    # Recurrent chain, newest step first.
    da = np.empty((T, 4 * h))
    dh_rec = np.zeros(h)
    dc_rec = np.zeros(h)
    for t in range(T - 1, -1, -1):
        dh = dh_dense[t] + dh_rec
        do = dh * cache.tc[t]
        dc = dc_rec + dh * cache.o[t] * (1.0 - cache.tc[t] ** 2)
        df = dc * cache.c_prev[t]
        di = dc * cache.g[t]
        dg = dc * cache.i[t]
        f, i, o, g = cache.f[t], cache.i[t], cache.o[t], cache.g[t]
        da_t = da[t]
        da_t[0 * h : 1 * h] = df * f * (1.0 - f)
        da_t[1 * h : 2 * h] = di * i * (1.0 - i)
        da_t[2 * h : 3 * h] = do * o * (1.0 - o)
        da_t[3 * h : 4 * h] = dg * (1.0 - g**2)
        dh_rec = p.u_h.T @ da_t
        dc_rec = dc * f

    return {
        "lstm_w_x": da.T @ cache.x,
        "lstm_u_h": da.T @ cache.h_prev,
        "lstm_b": da.sum(axis=0),
        "dense_w1": dw1,
        "dense_b1": db1,
        "dense_w2": dw2,
        "dense_b2": db2,
    }
