"""Lead-sheet documents: parsing, key normalization, and half-bar framing.

A lead sheet is one JSON object holding a melody (MIDI notes with rational
beat onsets/durations), chord symbol events, and key metadata.  Downstream
everything runs on half-bar frames: a 12-wide pitch-class presence vector per
frame plus one chord per frame.  Beat arithmetic uses ``fractions.Fraction``
so frame boundaries are exact.
"""

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .chords import (
    NUM_PITCH_CLASSES,
    PITCH_CLASS_NAMES,
    ChordSymbolError,
    chord_to_index,
    parse_chord_symbol,
    _parse_root,
)

NO_CHORD = -1  # ingestion-only sentinel, resolved before training

_TONIC_NAMES = {name: pc for pc, name in enumerate(PITCH_CLASS_NAMES)}
_TONIC_NAMES.update({"Db": 1, "Eb": 3, "Gb": 6, "Ab": 8, "Bb": 10})

MODES = ("major", "minor")


class LeadSheetError(ValueError):
    """Schema or invariant violation, carrying the offending field path."""

    def __init__(self, path, reason):
        self.path = path
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True)
class Note:
    onset: Fraction
    duration: Fraction
    midi: int

    @property
    def end(self) -> Fraction:
        return self.onset + self.duration

    @property
    def pitch_class(self) -> int:
        return self.midi % NUM_PITCH_CLASSES


@dataclass(frozen=True)
class ChordEvent:
    onset: Fraction
    duration: Fraction
    symbol: str

    @property
    def end(self) -> Fraction:
        return self.onset + self.duration


@dataclass
class LeadSheet:
    key_tonic: int
    key_mode: str
    beats_per_bar: int
    melody: list
    chords: list

    @property
    def total_beats(self) -> Fraction:
        ends = [n.end for n in self.melody] + [c.end for c in self.chords]
        return max(ends) if ends else Fraction(0)


@dataclass
class FrameSequence:
    """Half-bar frames: pitch-class presence, chord indices, note events.

    ``chords`` may contain the NO_CHORD sentinel straight after quantization;
    corpus preparation resolves it.  ``notes`` keeps the per-frame melody
    note list (pitch class, duration in beats) for the metric suite.
    """

    melody: np.ndarray  # (T, 12) float, 0/1 presence
    chords: np.ndarray  # (T,) int
    frame_duration: Fraction
    notes: list = field(default_factory=list)  # per frame: [(pc, Fraction), ...]

    @property
    def num_frames(self) -> int:
        return len(self.chords)


def _expect(cond, path, reason):
    if not cond:
        raise LeadSheetError(path, reason)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_beats(value, path) -> Fraction:
    _expect(
        isinstance(value, (list, tuple)) and len(value) == 2,
        path,
        "expected a rational [numerator, denominator]",
    )
    num, den = value
    _expect(_is_int(num) and _is_int(den), path, "numerator and denominator must be integers")
    _expect(den > 0, path, "denominator must be positive")
    return Fraction(num, den)


def _parse_note(obj, path) -> Note:
    _expect(isinstance(obj, dict), path, "expected an object")
    for key in ("onset", "duration", "midi"):
        _expect(key in obj, f"{path}.{key}", "missing field")
    onset = _parse_beats(obj["onset"], f"{path}.onset")
    duration = _parse_beats(obj["duration"], f"{path}.duration")
    _expect(onset >= 0, f"{path}.onset", "onset must be nonnegative")
    _expect(duration > 0, f"{path}.duration", "duration must be positive")
    midi = obj["midi"]
    _expect(_is_int(midi) and 0 <= midi <= 127, f"{path}.midi", "expected a MIDI number in [0, 127]")
    return Note(onset, duration, midi)


def _parse_chord_event(obj, path) -> ChordEvent:
    _expect(isinstance(obj, dict), path, "expected an object")
    for key in ("onset", "duration", "symbol"):
        _expect(key in obj, f"{path}.{key}", "missing field")
    onset = _parse_beats(obj["onset"], f"{path}.onset")
    duration = _parse_beats(obj["duration"], f"{path}.duration")
    _expect(onset >= 0, f"{path}.onset", "onset must be nonnegative")
    _expect(duration > 0, f"{path}.duration", "duration must be positive")
    symbol = obj["symbol"]
    _expect(isinstance(symbol, str), f"{path}.symbol", "expected a string")
    try:
        parse_chord_symbol(symbol)
    except ChordSymbolError as exc:
        raise LeadSheetError(f"{path}.symbol", str(exc)) from exc
    return ChordEvent(onset, duration, symbol)


def parse_leadsheet(document) -> LeadSheet:
    """Validate a lead-sheet document (dict or JSON text).

    Unknown top-level fields are ignored, so session files carrying extras
    like "pins" still parse.  Violations raise :class:`LeadSheetError` with
    the field path.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise LeadSheetError("$", f"invalid JSON: {exc}") from exc
    _expect(isinstance(document, dict), "$", "expected a JSON object")
    for key in ("version", "key", "beats_per_bar", "melody", "chords"):
        _expect(key in document, key, "missing field")
    _expect(document["version"] == 1, "version", f"unsupported version {document['version']!r}")

    key_obj = document["key"]
    _expect(isinstance(key_obj, dict), "key", "expected an object")
    _expect("tonic" in key_obj, "key.tonic", "missing field")
    _expect("mode" in key_obj, "key.mode", "missing field")
    tonic_name = key_obj["tonic"]
    _expect(tonic_name in _TONIC_NAMES, "key.tonic", f"unknown tonic {tonic_name!r}")
    mode = key_obj["mode"]
    _expect(mode in MODES, "key.mode", f"mode must be one of {MODES}")

    beats_per_bar = document["beats_per_bar"]
    _expect(_is_int(beats_per_bar) and beats_per_bar > 0, "beats_per_bar", "expected a positive integer")

    _expect(isinstance(document["melody"], list), "melody", "expected a list")
    _expect(isinstance(document["chords"], list), "chords", "expected a list")
    melody = [_parse_note(n, f"melody[{i}]") for i, n in enumerate(document["melody"])]
    chords = [_parse_chord_event(c, f"chords[{i}]") for i, c in enumerate(document["chords"])]

    melody.sort(key=lambda n: (n.onset, n.end))
    chords.sort(key=lambda c: (c.onset, c.end))
    for prev, nxt in zip(melody, melody[1:]):
        if nxt.onset < prev.end:
            raise LeadSheetError(
                "melody",
                f"overlapping notes at beats {prev.onset} and {nxt.onset}",
            )

    return LeadSheet(_TONIC_NAMES[tonic_name], mode, beats_per_bar, melody, chords)


def leadsheet_to_dict(sheet: LeadSheet) -> dict:
    """Inverse of :func:`parse_leadsheet` (canonical tonic spelling)."""
    return {
        "version": 1,
        "key": {"tonic": PITCH_CLASS_NAMES[sheet.key_tonic], "mode": sheet.key_mode},
        "beats_per_bar": sheet.beats_per_bar,
        "melody": [
            {
                "onset": [n.onset.numerator, n.onset.denominator],
                "duration": [n.duration.numerator, n.duration.denominator],
                "midi": n.midi,
            }
            for n in sheet.melody
        ],
        "chords": [
            {
                "onset": [c.onset.numerator, c.onset.denominator],
                "duration": [c.duration.numerator, c.duration.denominator],
                "symbol": c.symbol,
            }
            for c in sheet.chords
        ],
    }


def transpose_symbol(symbol: str, semitones: int) -> str:
    """Shift a chord symbol's root (and any slash bass) by semitones."""
    body, slash, bass = symbol.strip().partition("/")
    root, quality_token = _parse_root(body, symbol)
    out = PITCH_CLASS_NAMES[(root + semitones) % 12] + quality_token
    if slash:
        bass_pc, leftover = _parse_root(bass, symbol)
        out += "/" + PITCH_CLASS_NAMES[(bass_pc + semitones) % 12] + leftover
    return out


def transposition_shift(sheet: LeadSheet) -> int:
    """Semitone shift that moves the sheet's tonic to C.

    Shifts downward by the tonic's pitch class; bumped up an octave if that
    would push a melody note below MIDI 0.
    """
    if sheet.key_tonic == 0:
        return 0
    shift = -sheet.key_tonic
    if sheet.melody and min(n.midi for n in sheet.melody) + shift < 0:
        shift += 12
    return shift


def transpose_to_common_key(sheet: LeadSheet) -> LeadSheet:
    """Move a sheet into C major or C minor (same mode, tonic C)."""
    shift = transposition_shift(sheet)
    if shift == 0 and sheet.key_tonic == 0:
        return sheet
    return LeadSheet(
        key_tonic=0,
        key_mode=sheet.key_mode,
        beats_per_bar=sheet.beats_per_bar,
        melody=[replace(n, midi=n.midi + shift) for n in sheet.melody],
        chords=[replace(c, symbol=transpose_symbol(c.symbol, shift)) for c in sheet.chords],
    )


def _chord_at(chords, instant) -> int:
    """Index of the chord event sounding at an instant, -1 if none.

    When events overlap, the latest-starting one wins (the chord change).
    """
    found = -1
    for i, ev in enumerate(chords):
        if ev.onset > instant:
            break
        if ev.end > instant:
            found = i
    return found


def quantize_to_frames(sheet: LeadSheet, duration_weighted: bool = False) -> FrameSequence:
    """Cut a sheet into half-bar frames.

    Each frame takes the chord sounding at its start instant (NO_CHORD when
    silent) and the presence set of all melody pitch classes overlapping its
    span.  Notes crossing a frame boundary are split for the per-frame note
    lists, with the duration attributed proportionally.
    """
    if duration_weighted:
        raise NotImplementedError("duration-weighted melody frames are not implemented")
    half_bar = Fraction(sheet.beats_per_bar, 2)
    total = sheet.total_beats
    if total <= 0:
        raise LeadSheetError("$", "cannot quantize an empty lead sheet")
    num_frames = math.ceil(total / half_bar)

    melody = np.zeros((num_frames, NUM_PITCH_CLASSES), dtype=np.float64)
    chord_idx = np.full(num_frames, NO_CHORD, dtype=np.int64)
    notes_per_frame = [[] for _ in range(num_frames)]

    for t in range(num_frames):
        start = t * half_bar
        ev = _chord_at(sheet.chords, start)
        if ev >= 0:
            chord_idx[t] = chord_to_index(parse_chord_symbol(sheet.chords[ev].symbol))

    for note in sheet.melody:
        first = int(note.onset // half_bar)
        last = math.ceil(note.end / half_bar) - 1  # end instant is exclusive
        for t in range(first, min(last, num_frames - 1) + 1):
            span_start = t * half_bar
            span_end = span_start + half_bar
            overlap = min(note.end, span_end) - max(note.onset, span_start)
            if overlap <= 0:
                continue
            melody[t, note.pitch_class] = 1.0
            notes_per_frame[t].append((note.pitch_class, overlap))

    return FrameSequence(melody, chord_idx, half_bar, notes_per_frame)
