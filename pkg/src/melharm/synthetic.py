"""Synthetic lead-sheet corpus with a deliberately imbalanced chord palette.

Pieces are written in random major keys. Chords are drawn from a skewed
palette (a few very common triads, a long tail of sevenths and rarer
colors) and held for one to three half-bar frames; melody notes are mostly
chord tones with occasional step-wise neighbor tones, so the accompaniment
is learnable from the melody alone. Useful for fixtures and for the
balanced-versus-unbalanced training comparison.
"""

import json
from fractions import Fraction

import numpy as np

from .chords import PITCH_CLASS_NAMES, chord_tones, parse_chord_symbol
from .leadsheet import transpose_symbol

# (symbol in C major, probability); heavy head, thin tail
DEFAULT_PALETTE = [
    ("C", 0.30),
    ("G", 0.17),
    ("Am", 0.13),
    ("F", 0.12),
    ("Dm", 0.055),
    ("Em", 0.045),
    ("G7", 0.05),
    ("Cmaj7", 0.013),
    ("Am7", 0.013),
    ("Fmaj7", 0.013),
    ("Dm7", 0.013),
    ("Em7", 0.013),
    ("C7", 0.013),
    ("D7", 0.013),
    ("E7", 0.013),
    ("Bdim", 0.013),
    ("Csus", 0.013),
]

_RHYTHMS = [
    [Fraction(2)],
    [Fraction(1), Fraction(1)],
    [Fraction(1), Fraction(1, 2), Fraction(1, 2)],
    [Fraction(1, 2), Fraction(1, 2), Fraction(1)],
    [Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)],
]

_BEATS_PER_BAR = 4
_HALF_BAR = Fraction(_BEATS_PER_BAR, 2)


def _frac_pair(x: Fraction) -> list:
    return [x.numerator, x.denominator]


def make_piece(rng, n_bars: int = 12, palette=None, key_shift=None,
               neighbor_tone_prob: float = 0.15) -> dict:
    """One lead-sheet document (schema version 1) as a plain dict."""
    palette = palette or DEFAULT_PALETTE
    symbols = [s for s, _ in palette]
    probs = np.array([p for _, p in palette])
    probs = probs / probs.sum()
    if key_shift is None:
        key_shift = int(rng.integers(12))

    n_frames = 2 * n_bars
    frame_syms = []
    while len(frame_syms) < n_frames:
        sym = symbols[int(rng.choice(len(symbols), p=probs))]
        hold = int(rng.integers(1, 4))
        frame_syms.extend([sym] * hold)
    frame_syms = frame_syms[:n_frames]

    chords = []
    start = 0
    for t in range(1, n_frames + 1):
        if t == n_frames or frame_syms[t] != frame_syms[start]:
            chords.append(
                {
                    "onset": _frac_pair(start * _HALF_BAR),
                    "duration": _frac_pair((t - start) * _HALF_BAR),
                    "symbol": transpose_symbol(frame_syms[start], key_shift),
                }
            )
            start = t

    melody = []
    cursor = Fraction(0)
    for t in range(n_frames):
        tones = sorted(chord_tones(parse_chord_symbol(frame_syms[t])))
        for dur in _RHYTHMS[int(rng.integers(len(_RHYTHMS)))]:
            pc = int(tones[int(rng.integers(len(tones)))])
            if rng.random() < neighbor_tone_prob:
                pc = (pc + int(rng.choice([-2, -1, 1, 2]))) % 12
            base = int(rng.choice([48, 60, 60, 72]))
            melody.append(
                {
                    "onset": _frac_pair(cursor),
                    "duration": _frac_pair(dur),
                    "midi": base + (pc + key_shift) % 12,
                }
            )
            cursor += dur

    return {
        "version": 1,
        "title": f"synthetic-{key_shift}-{n_bars}",
        "key": {"tonic": PITCH_CLASS_NAMES[key_shift], "mode": "major"},
        "beats_per_bar": _BEATS_PER_BAR,
        "melody": melody,
        "chords": chords,
    }


def make_corpus(n_pieces: int, seed: int = 0, min_bars: int = 8,
                max_bars: int = 16, palette=None) -> list:
    rng = np.random.default_rng(seed)
    return [
        make_piece(rng, n_bars=int(rng.integers(min_bars, max_bars + 1)),
                   palette=palette)
        for _ in range(n_pieces)
    ]


def write_corpus(path, docs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
