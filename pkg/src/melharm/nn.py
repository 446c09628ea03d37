"""BiLSTM chord-prediction network with hand-written backpropagation.

Everything is plain numpy in double precision. Parameter values are kept
exactly representable in float32 (quantized after init and after every
optimizer step) so that float32 checkpoints round-trip bit-exactly.

Input layout per frame: 12 melody pitch-class flags, 96 chord-context
entries (one-hot where the chord is given, all zero where it is unknown),
and 1 mask flag. Mask polarity is fixed everywhere: 1 = unknown, to be
predicted. The stack is BiLSTM -> dropout -> BiLSTM -> dropout, then the
second layer's output is concatenated with the raw input and mapped to 96
logits by a fully connected layer.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chords import NUM_CHORDS, NUM_PITCH_CLASSES

MELODY_WIDTH = NUM_PITCH_CLASSES
MASK_WIDTH = 1
INPUT_WIDTH = MELODY_WIDTH + NUM_CHORDS + MASK_WIDTH  # 109


class NumericalError(RuntimeError):
    """Non-finite value produced inside the network."""

    def __init__(self, layer: str, detail: str = "non-finite values"):
        self.layer = layer
        super().__init__(f"{layer}: {detail}")


def as_f32_representable(a: np.ndarray) -> np.ndarray:
    """Round to the nearest float32 value, kept in a float64 array."""
    return a.astype(np.float32).astype(np.float64)


@dataclass
class GateWeights:
    """One LSTM direction. Gate rows are stacked [input, forget, cell, output]."""

    w_x: np.ndarray  # (4H, D_in)
    w_h: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.w_h.shape[1]


@dataclass
class ModelParams:
    hidden_size: int
    dropout_rate: float
    seed: int
    lstm1_fwd: GateWeights
    lstm1_bwd: GateWeights
    lstm2_fwd: GateWeights
    lstm2_bwd: GateWeights
    fc_w: np.ndarray  # (96, 2H + INPUT_WIDTH)
    fc_b: np.ndarray  # (96,)

    def arrays(self) -> dict:
        """Named parameter arrays in fixed order (the checkpoint order)."""
        out = {}
        for name in ("lstm1_fwd", "lstm1_bwd", "lstm2_fwd", "lstm2_bwd"):
            gw = getattr(self, name)
            out[f"{name}.w_x"] = gw.w_x
            out[f"{name}.w_h"] = gw.w_h
            out[f"{name}.b"] = gw.b
        out["fc_w"] = self.fc_w
        out["fc_b"] = self.fc_b
        return out

    def copy(self) -> "ModelParams":
        def gw(g):
            return GateWeights(g.w_x.copy(), g.w_h.copy(), g.b.copy())

        return ModelParams(
            self.hidden_size,
            self.dropout_rate,
            self.seed,
            gw(self.lstm1_fwd),
            gw(self.lstm1_bwd),
            gw(self.lstm2_fwd),
            gw(self.lstm2_bwd),
            self.fc_w.copy(),
            self.fc_b.copy(),
        )


def _init_gates(rng, d_in: int, hidden: int) -> GateWeights:
    # uniform in [-k, k] with k = 1/sqrt(fan_in); forget-gate bias starts at 1
    kx = 1.0 / np.sqrt(d_in)
    kh = 1.0 / np.sqrt(hidden)
    w_x = rng.uniform(-kx, kx, size=(4 * hidden, d_in))
    w_h = rng.uniform(-kh, kh, size=(4 * hidden, hidden))
    b = np.zeros(4 * hidden)
    b[hidden : 2 * hidden] = 1.0
    return GateWeights(
        as_f32_representable(w_x), as_f32_representable(w_h), as_f32_representable(b)
    )


def init_params(hidden_size: int, dropout_rate: float = 0.2, seed: int = 0) -> ModelParams:
    if hidden_size < 1:
        raise ValueError(f"hidden_size must be positive, got {hidden_size}")
    if not 0.0 <= dropout_rate < 1.0:
        raise ValueError(f"dropout_rate must lie in [0, 1), got {dropout_rate}")
    rng = np.random.default_rng(seed)
    h = hidden_size
    fc_in = 2 * h + INPUT_WIDTH
    kf = 1.0 / np.sqrt(fc_in)
    return ModelParams(
        hidden_size=h,
        dropout_rate=dropout_rate,
        seed=seed,
        lstm1_fwd=_init_gates(rng, INPUT_WIDTH, h),
        lstm1_bwd=_init_gates(rng, INPUT_WIDTH, h),
        lstm2_fwd=_init_gates(rng, 2 * h, h),
        lstm2_bwd=_init_gates(rng, 2 * h, h),
        fc_w=as_f32_representable(rng.uniform(-kf, kf, size=(NUM_CHORDS, fc_in))),
        fc_b=np.zeros(NUM_CHORDS),
    )


# --- input assembly -------------------------------------------------------


@dataclass
class BatchInput:
    melody: np.ndarray  # (T, 12)
    chord_context: np.ndarray  # (T, 96), one-hot where mask = 0
    mask: np.ndarray  # (T,), 1 = unknown
    assembled: np.ndarray = field(init=False)  # (T, 109)

    def __post_init__(self):
        self.assembled = np.concatenate(
            [self.melody, self.chord_context, self.mask[:, None]], axis=1
        )

    @property
    def num_frames(self) -> int:
        return self.melody.shape[0]


def make_training_mask(num_frames: int, rng) -> np.ndarray:
    """Random context selection: ratio r ~ U(0,1), each frame unknown w.p. r.

    All-zero masks are redrawn at the same ratio (the loss divides by the
    number of unknown frames, so at least one is required). A redraw cap
    guards the r ~ 0 corner; forcing one uniformly random frame there is
    indistinguishable from the accepted redraw.
    """
    if num_frames < 1:
        raise ValueError(f"num_frames must be positive, got {num_frames}")
    ratio = rng.uniform()
    for _ in range(100):
        mask = (rng.random(num_frames) < ratio).astype(np.float64)
        if mask.any():
            return mask
    mask = np.zeros(num_frames)
    mask[rng.integers(num_frames)] = 1.0
    return mask


def assemble_input(melody: np.ndarray, chords: np.ndarray, mask: np.ndarray) -> BatchInput:
    """Concatenate [melody | chord context | mask]; context is zeroed where unknown."""
    melody = np.asarray(melody, dtype=np.float64)
    chords = np.asarray(chords)
    mask = np.asarray(mask, dtype=np.float64).reshape(-1)
    t = melody.shape[0]
    if melody.ndim != 2 or melody.shape[1] != MELODY_WIDTH:
        raise ValueError(f"melody must be (T, {MELODY_WIDTH}), got {melody.shape}")
    if chords.shape != (t,) or mask.shape != (t,):
        raise ValueError(
            f"shape mismatch: melody T={t}, chords {chords.shape}, mask {mask.shape}"
        )
    context = np.zeros((t, NUM_CHORDS))
    known = mask == 0
    if known.any():
        idx = chords[known]
        if idx.min() < 0 or idx.max() >= NUM_CHORDS:
            raise ValueError("chord index out of range at a known position")
        context[np.flatnonzero(known), idx] = 1.0
    return BatchInput(melody, context, mask)


# --- class weighting ------------------------------------------------------


def class_weights(counts: np.ndarray, smoothing: float = 1000.0) -> np.ndarray:
    """Inverse smoothed-frequency weights, normalized to mean 1."""
    counts = np.asarray(counts, dtype=np.float64)
    if (counts < 0).any():
        raise ValueError("counts must be nonnegative")
    denom = smoothing + counts
    inv = 1.0 / denom
    # the normalizer is the correctly rounded exact mean of 1/denom, so for
    # equal counts it is the very same double as the inv entries and the
    # weights come out exactly 1.0 (a float-sum mean can be 1 ulp off)
    mean = Fraction(0)
    for d in denom:
        mean += Fraction(1) / Fraction(float(d))
    return inv / float(mean / len(denom))


# --- forward / loss / backward ---------------------------------------------


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lstm_forward(gw: GateWeights, xs: np.ndarray):
    """Run one direction over xs (T, D). Returns hidden states (T, H) and cache."""
    t_len = xs.shape[0]
    h = gw.hidden_size
    zx = xs @ gw.w_x.T + gw.b  # (T, 4H)
    i_g = np.empty((t_len, h))
    f_g = np.empty((t_len, h))
    g_g = np.empty((t_len, h))
    o_g = np.empty((t_len, h))
    cs = np.empty((t_len, h))
    tanh_c = np.empty((t_len, h))
    hs = np.empty((t_len, h))
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    for t in range(t_len):
        z = zx[t] + gw.w_h @ h_prev
        i_g[t] = _sigmoid(z[:h])
        f_g[t] = _sigmoid(z[h : 2 * h])
        g_g[t] = np.tanh(z[2 * h : 3 * h])
        o_g[t] = _sigmoid(z[3 * h :])
        cs[t] = f_g[t] * c_prev + i_g[t] * g_g[t]
        tanh_c[t] = np.tanh(cs[t])
        hs[t] = o_g[t] * tanh_c[t]
        h_prev = hs[t]
        c_prev = cs[t]
    cache = {"xs": xs, "i": i_g, "f": f_g, "g": g_g, "o": o_g, "c": cs,
             "tanh_c": tanh_c, "h": hs}
    return hs, cache


def _lstm_backward(gw: GateWeights, cache: dict, dh_out: np.ndarray):
    """Gradients for one direction given d(loss)/d(hidden states)."""
    xs = cache["xs"]
    i_g, f_g, g_g, o_g = cache["i"], cache["f"], cache["g"], cache["o"]
    cs, tanh_c, hs = cache["c"], cache["tanh_c"], cache["h"]
    t_len, h = hs.shape
    dz_all = np.empty((t_len, 4 * h))
    dh_rec = np.zeros(h)
    dc_rec = np.zeros(h)
    for t in range(t_len - 1, -1, -1):
        dh = dh_out[t] + dh_rec
        c_prev = cs[t - 1] if t > 0 else np.zeros(h)
        do = dh * tanh_c[t]
        dc = dh * o_g[t] * (1.0 - tanh_c[t] ** 2) + dc_rec
        df = dc * c_prev
        di = dc * g_g[t]
        dg = dc * i_g[t]
        dc_rec = dc * f_g[t]
        dz = dz_all[t]
        dz[:h] = di * i_g[t] * (1.0 - i_g[t])
        dz[h : 2 * h] = df * f_g[t] * (1.0 - f_g[t])
        dz[2 * h : 3 * h] = dg * (1.0 - g_g[t] ** 2)
        dz[3 * h :] = do * o_g[t] * (1.0 - o_g[t])
        dh_rec = dz @ gw.w_h
    h_prev_rows = np.vstack([np.zeros((1, h)), hs[:-1]])
    grads = {
        "w_x": dz_all.T @ xs,
        "w_h": dz_all.T @ h_prev_rows,
        "b": dz_all.sum(axis=0),
    }
    dx = dz_all @ gw.w_x
    return grads, dx


def _bilstm_forward(fwd: GateWeights, bwd: GateWeights, xs: np.ndarray):
    h_f, cache_f = _lstm_forward(fwd, xs)
    h_b_rev, cache_b = _lstm_forward(bwd, xs[::-1])
    return np.concatenate([h_f, h_b_rev[::-1]], axis=1), (cache_f, cache_b)


def _bilstm_backward(fwd, bwd, caches, dh: np.ndarray):
    h = fwd.hidden_size
    grads_f, dx_f = _lstm_backward(fwd, caches[0], dh[:, :h])
    grads_b, dx_b_rev = _lstm_backward(bwd, caches[1], dh[:, h:][::-1])
    return grads_f, grads_b, dx_f + dx_b_rev[::-1]


def _dropout_mask(shape, rate: float, rng) -> np.ndarray:
    # inverted dropout: scale kept units at train time, identity at eval
    if rate == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def forward(params: ModelParams, batch: BatchInput, train_mode: bool = False,
            rng=None, dropout_masks=None):
    """Logits (T, 96). In train_mode also returns the cache for backward().

    Dropout is applied to each BiLSTM layer's output, only in train_mode.
    dropout_masks overrides the random masks (used by the gradient check).
    """
    xs = batch.assembled
    if train_mode and dropout_masks is None:
        if rng is None:
            raise ValueError("train_mode forward needs an rng (or explicit dropout_masks)")
        dropout_masks = (
            _dropout_mask((xs.shape[0], 2 * params.hidden_size), params.dropout_rate, rng),
            _dropout_mask((xs.shape[0], 2 * params.hidden_size), params.dropout_rate, rng),
        )

    h1, caches1 = _bilstm_forward(params.lstm1_fwd, params.lstm1_bwd, xs)
    if not np.isfinite(h1).all():
        raise NumericalError("bilstm1")
    h1_drop = h1 * dropout_masks[0] if train_mode else h1

    h2, caches2 = _bilstm_forward(params.lstm2_fwd, params.lstm2_bwd, h1_drop)
    if not np.isfinite(h2).all():
        raise NumericalError("bilstm2")
    h2_drop = h2 * dropout_masks[1] if train_mode else h2

    feats = np.concatenate([h2_drop, xs], axis=1)
    logits = feats @ params.fc_w.T + params.fc_b
    if not np.isfinite(logits).all():
        raise NumericalError("fc")
    if not train_mode:
        return logits, None
    cache = {"batch": batch, "caches1": caches1, "caches2": caches2,
             "dropout_masks": dropout_masks, "feats": feats, "logits": logits}
    return logits, cache


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def masked_nll(logits: np.ndarray, targets: np.ndarray, mask: np.ndarray,
               weights: np.ndarray) -> float:
    """Class-weighted negative log-likelihood over unknown frames only."""
    mask = np.asarray(mask, dtype=np.float64).reshape(-1)
    n_unknown = int(mask.sum())
    if n_unknown == 0:
        raise ValueError("mask selects no frames: loss is undefined")
    rows = np.flatnonzero(mask == 1)
    shifted = logits[rows] - logits[rows].max(axis=1, keepdims=True)
    log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    tgt = np.asarray(targets)[rows]
    return float(-(weights[tgt] * log_p[np.arange(rows.size), tgt]).sum() / n_unknown)


def _loss_grad_logits(logits, targets, mask, weights) -> np.ndarray:
    mask = np.asarray(mask, dtype=np.float64).reshape(-1)
    n_unknown = int(mask.sum())
    rows = np.flatnonzero(mask == 1)
    tgt = np.asarray(targets)[rows]
    dlogits = np.zeros_like(logits)
    p = softmax(logits[rows])
    p[np.arange(rows.size), tgt] -= 1.0
    dlogits[rows] = weights[tgt][:, None] * p / n_unknown
    return dlogits


def backward(params: ModelParams, cache: dict, targets: np.ndarray,
             mask: np.ndarray, weights: np.ndarray) -> dict:
    """Exact loss gradients for every parameter, keyed like params.arrays()."""
    feats = cache["feats"]
    h = params.hidden_size
    dlogits = _loss_grad_logits(cache["logits"], targets, mask, weights)

    grads = {"fc_w": dlogits.T @ feats, "fc_b": dlogits.sum(axis=0)}
    dfeats = dlogits @ params.fc_w
    dh2 = dfeats[:, : 2 * h] * cache["dropout_masks"][1]
    g2f, g2b, dx2 = _bilstm_backward(
        params.lstm2_fwd, params.lstm2_bwd, cache["caches2"], dh2
    )
    dh1 = dx2 * cache["dropout_masks"][0]
    g1f, g1b, _ = _bilstm_backward(
        params.lstm1_fwd, params.lstm1_bwd, cache["caches1"], dh1
    )
    for name, g in (("lstm1_fwd", g1f), ("lstm1_bwd", g1b),
                    ("lstm2_fwd", g2f), ("lstm2_bwd", g2b)):
        grads[f"{name}.w_x"] = g["w_x"]
        grads[f"{name}.w_h"] = g["w_h"]
        grads[f"{name}.b"] = g["b"]
    return grads
