"""Chord generation by annealed blocked resampling.

The melody is fixed; chords start fully unknown (except user pins, whose
one-hot context is present from the first forward pass and which are never
regenerated). After the initial draw, each refinement iteration keeps a
growing fraction alpha of the current chords, zeroes the context at the
positions to be regenerated, runs one forward pass, and redraws those
positions from the predicted distributions.
"""

from dataclasses import dataclass

import numpy as np

from .nn import NUM_CHORDS, ModelParams, assemble_input, forward, softmax

FALLBACK_ITERATIONS = 16


@dataclass
class SamplerConfig:
    n: int = FALLBACK_ITERATIONS
    p_min: float = 0.05
    p_max: float = 1.0
    temperature: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"iteration count must be at least 1, got {self.n}")
        if not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise ValueError(
                f"need 0 <= p_min <= p_max <= 1, got ({self.p_min}, {self.p_max})"
            )
        if self.temperature < 0.0:
            raise ValueError(f"temperature must be nonnegative, got {self.temperature}")


def default_iterations(avg_chord_seq_len: float) -> int:
    """Iteration count from corpus statistics; fallback when stats are absent."""
    if avg_chord_seq_len and avg_chord_seq_len > 0:
        return max(1, round(avg_chord_seq_len))
    return FALLBACK_ITERATIONS


def anneal_alpha(i: int, cfg: SamplerConfig) -> float:
    """Keep-probability at iteration i: linear ramp from p_min to p_max."""
    if not 0 <= i <= cfg.n:
        raise ValueError(f"iteration {i} outside [0, {cfg.n}]")
    # convex-combination form so both endpoints are hit exactly (i/n is
    # exactly 0.0 or 1.0 there, and x*1.0 + y*0.0 == x)
    frac = i / cfg.n
    return cfg.p_min * (1.0 - frac) + cfg.p_max * frac


def create_random_mask(alpha: float, num_frames: int, pins: dict, rng) -> np.ndarray:
    """1 = regenerate, drawn per frame w.p. 1 - alpha; pinned frames stay 0."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mask = (rng.random(num_frames) >= alpha).astype(np.float64)
    for t in pins:
        mask[t] = 0.0
    return mask


def draw_chord(logits_row: np.ndarray, temperature: float, rng) -> int:
    """Temperature sampling; temperature 0 is argmax (lowest index on ties)."""
    if temperature == 0.0:
        return int(np.argmax(logits_row))
    p = softmax(logits_row / temperature)
    return int(rng.choice(p.size, p=p))


def _check_pins(pins: dict, num_frames: int) -> dict:
    clean = {}
    for t, chord in pins.items():
        t = int(t)
        if not 0 <= t < num_frames:
            raise ValueError(f"pinned frame {t} outside melody of {num_frames} frames")
        chord = int(chord)
        if not 0 <= chord < NUM_CHORDS:
            raise ValueError(f"pinned chord index {chord} outside [0, {NUM_CHORDS})")
        clean[t] = chord
    return clean


def harmonize(params: ModelParams, melody: np.ndarray, pins: dict,
              cfg: SamplerConfig):
    """Returns (chord indices (T,), final per-frame distributions (T, 96))."""
    melody = np.asarray(melody, dtype=np.float64)
    if melody.ndim != 2 or melody.shape[1] != 12:
        raise ValueError(f"melody must be (T, 12), got {melody.shape}")
    if melody.shape[0] < 1:
        raise ValueError("melody must have at least one frame")
    if not np.isfinite(melody).all():
        raise ValueError("melody contains non-finite values")
    num_frames = melody.shape[0]
    pins = _check_pins(pins, num_frames)
    rng = np.random.default_rng(cfg.seed)

    chords = np.zeros(num_frames, dtype=np.int64)
    mask = np.ones(num_frames)
    for t, chord in pins.items():
        chords[t] = chord
        mask[t] = 0.0

    # initial pass: everything unpinned is unknown
    logits, _ = forward(params, assemble_input(melody, chords, mask))
    for t in np.flatnonzero(mask == 1):
        chords[t] = draw_chord(logits[t], cfg.temperature, rng)

    for i in range(cfg.n + 1):
        alpha = anneal_alpha(i, cfg)
        mask = create_random_mask(alpha, num_frames, pins, rng)
        logits, _ = forward(params, assemble_input(melody, chords, mask))
        for t in np.flatnonzero(mask == 1):
            chords[t] = draw_chord(logits[t], cfg.temperature, rng)

    return chords, softmax(logits)
