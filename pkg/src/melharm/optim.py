"""Adam optimizer and global-norm gradient clipping for ModelParams."""

from dataclasses import dataclass, field

import numpy as np

from .nn import ModelParams, as_f32_representable


@dataclass
class AdamState:
    lr: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)  # first moments, keyed like arrays()
    v: dict = field(default_factory=dict)  # second moments


def init_adam(params: ModelParams, lr: float = 0.005) -> AdamState:
    state = AdamState(lr=lr)
    for name, arr in params.arrays().items():
        state.m[name] = np.zeros_like(arr)
        state.v[name] = np.zeros_like(arr)
    return state


def global_norm(grads: dict) -> float:
    return float(np.sqrt(sum(float((g**2).sum()) for g in grads.values())))


def clip_global_norm(grads: dict, max_norm: float) -> float:
    """Scale all gradients in place so their joint norm is at most max_norm."""
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def adam_step(params: ModelParams, grads: dict, state: AdamState) -> None:
    """Bias-corrected Adam update, in place.

    Updated values are rounded to the nearest float32 so the in-memory
    parameters always equal what a saved checkpoint would reload.
    """
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, arr in params.arrays().items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g**2
        arr -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        arr[...] = as_f32_representable(arr)
