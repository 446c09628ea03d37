"""Corpus preparation: key normalization, framing, splitting, statistics.

Pieces are shuffled deterministically, split by piece (never by frame), and
silent-frame gaps are resolved by carrying the previous chord forward.  Chord
counts and the average sequence length are computed on the training split
only; the sampler's default iteration count comes from that average.
"""

import json
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chords import NUM_CHORDS
from .leadsheet import (
    NO_CHORD,
    FrameSequence,
    LeadSheet,
    LeadSheetError,
    parse_leadsheet,
    quantize_to_frames,
    transpose_to_common_key,
)

log = logging.getLogger(__name__)


@dataclass
class CorpusStats:
    chord_counts: np.ndarray  # (96,) int64
    avg_chord_seq_len: float
    n_pieces: int


def resolve_no_chord(frames: FrameSequence):
    """Forward-fill NO_CHORD gaps; frames before the first chord are dropped.

    Returns None when the piece has no chord at all.
    """
    chords = frames.chords
    valid = np.flatnonzero(chords != NO_CHORD)
    if valid.size == 0:
        return None
    start = int(valid[0])
    chords = chords[start:].copy()
    melody = frames.melody[start:]
    notes = frames.notes[start:] if frames.notes else []
    for t in range(1, len(chords)):
        if chords[t] == NO_CHORD:
            chords[t] = chords[t - 1]
    return FrameSequence(melody, chords, frames.frame_duration, notes)


def sheet_to_frames(sheet: LeadSheet):
    """Transpose to the common key, quantize, resolve chord gaps."""
    return resolve_no_chord(quantize_to_frames(transpose_to_common_key(sheet)))


def corpus_stats(pieces) -> CorpusStats:
    counts = np.zeros(NUM_CHORDS, dtype=np.int64)
    for fs in pieces:
        counts += np.bincount(fs.chords, minlength=NUM_CHORDS)
    avg_len = float(np.mean([fs.num_frames for fs in pieces])) if pieces else 0.0
    return CorpusStats(counts, avg_len, len(pieces))


def split_sizes(n_pieces: int, split_ratio: float) -> tuple[int, int]:
    """Piece counts (train, test): test = floor((1 - ratio) * n), at least 1."""
    # epsilon so exact-decimal ratios like 0.8 floor as intended
    n_test = int((1.0 - split_ratio) * n_pieces + 1e-9)
    n_test = min(max(n_test, 1), n_pieces - 1)
    return n_pieces - n_test, n_test


def prepare_corpus(sheets, split_ratio: float, seed: int):
    """Frame every sheet, split train/test by piece, compute train stats.

    The shuffle is a seeded permutation, so the same seed always yields the
    same split.  Sheets with no chord frames are skipped with a warning.
    """
    if len(sheets) < 2:
        raise ValueError("corpus preparation needs at least 2 lead sheets")
    if not 0.0 < split_ratio < 1.0:
        raise ValueError(f"split ratio must lie in (0, 1), got {split_ratio}")

    pieces = []
    for i, sheet in enumerate(sheets):
        frames = sheet_to_frames(sheet)
        if frames is None:
            log.warning("skipping piece %d: no chord frames", i)
            continue
        pieces.append(frames)
    if len(pieces) < 2:
        raise ValueError("fewer than 2 pieces with chord frames")

    order = np.random.default_rng(seed).permutation(len(pieces))
    n_train, _ = split_sizes(len(pieces), split_ratio)
    train = [pieces[i] for i in order[:n_train]]
    test = [pieces[i] for i in order[n_train:]]
    return train, test, corpus_stats(train)


# --- file formats ---------------------------------------------------------
# Corpus file: newline-delimited JSON, one lead-sheet object per line.
# Frame file: newline-delimited JSON, one framed piece per line, keeping the
# per-frame note lists (pitch class, rational duration) for evaluation.


def read_corpus(path) -> list:
    sheets = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                sheets.append(parse_leadsheet(json.loads(line)))
            except (json.JSONDecodeError, LeadSheetError) as exc:
                raise LeadSheetError(f"line {lineno}", str(exc)) from exc
    return sheets


def frames_to_dict(fs: FrameSequence) -> dict:
    return {
        "melody": fs.melody.astype(int).tolist(),
        "chords": fs.chords.tolist(),
        "frame_duration": [fs.frame_duration.numerator, fs.frame_duration.denominator],
        "notes": [
            [[pc, [dur.numerator, dur.denominator]] for pc, dur in frame]
            for frame in fs.notes
        ],
    }


def frames_from_dict(obj: dict) -> FrameSequence:
    melody = np.asarray(obj["melody"], dtype=np.float64)
    chords = np.asarray(obj["chords"], dtype=np.int64)
    num, den = obj["frame_duration"]
    notes = [
        [(pc, Fraction(dur[0], dur[1])) for pc, dur in frame]
        for frame in obj.get("notes", [])
    ]
    return FrameSequence(melody, chords, Fraction(num, den), notes)


def write_frames(path, pieces) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for fs in pieces:
            fh.write(json.dumps(frames_to_dict(fs), separators=(",", ":")) + "\n")


def read_frames(path) -> list:
    pieces = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pieces.append(frames_from_dict(json.loads(line)))
    return pieces


def stats_to_dict(stats: CorpusStats) -> dict:
    return {
        "chord_counts": stats.chord_counts.tolist(),
        "avg_chord_seq_len": stats.avg_chord_seq_len,
        "n_pieces": stats.n_pieces,
    }


def stats_from_dict(obj: dict) -> CorpusStats:
    return CorpusStats(
        np.asarray(obj["chord_counts"], dtype=np.int64),
        float(obj["avg_chord_seq_len"]),
        int(obj["n_pieces"]),
    )
