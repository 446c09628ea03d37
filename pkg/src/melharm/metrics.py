"""Objective evaluation of harmonizations.

Chord-progression metrics (entropy of the chord histogram, distinct chord
count, mean consecutive tonal distance) look at the chord sequence alone.
Melody/chord harmonicity metrics (chord-tone ratio, pitch consonance score,
mean note-to-chord tonal distance) weight every melody note by its duration
within the frame, so notes split at frame boundaries contribute
proportionally to each side.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chords import NUM_CHORDS, chord_tones, index_to_chord
from .leadsheet import FrameSequence
from .tonnetz import chord_centroid, pitch_class_centroid, tonal_distance

# intervals (note pc - chord-tone pc) mod 12 scored as consonant;
# the perfect fourth (5) is scored neutral, everything else dissonant
CONSONANT_INTERVALS = frozenset({0, 3, 4, 7, 8, 9})
NEUTRAL_INTERVALS = frozenset({5})

PASSING_TONE_MAX_STEP = 2  # semitones to the next note, pitch-class circle


@dataclass
class Harmonization:
    notes: list  # per frame: list of (pitch class, duration-in-beats Fraction)
    chords: np.ndarray  # (T,) chord indices

    def __post_init__(self):
        self.chords = np.asarray(self.chords, dtype=np.int64)
        if len(self.notes) != self.chords.shape[0]:
            raise ValueError(
                f"frame mismatch: {len(self.notes)} note frames vs "
                f"{self.chords.shape[0]} chords"
            )
        if self.chords.size and not (
            (self.chords >= 0) & (self.chords < NUM_CHORDS)
        ).all():
            raise ValueError("chord index outside the 96-chord vocabulary")

    @property
    def num_frames(self) -> int:
        return self.chords.shape[0]


def harmonization_from_frames(fs: FrameSequence, chords=None) -> Harmonization:
    return Harmonization(fs.notes, fs.chords if chords is None else chords)


@dataclass
class MetricReport:
    che: float
    cc: float
    ctd: float
    ctnctr: float
    pcs: float
    mctd: float
    ctd_defined: bool = True

    def to_dict(self) -> dict:
        return {
            "che": self.che,
            "cc": self.cc,
            "ctd": self.ctd,
            "ctnctr": self.ctnctr,
            "pcs": self.pcs,
            "mctd": self.mctd,
            "ctd_defined": self.ctd_defined,
        }


@dataclass
class CorpusReport:
    per_piece: list
    mean: MetricReport

    def to_dict(self) -> dict:
        return {
            "per_piece": [r.to_dict() for r in self.per_piece],
            "mean": self.mean.to_dict(),
        }


# --- chord-progression metrics ---------------------------------------------


def che(chords) -> float:
    """Natural-log entropy of the normalized chord histogram."""
    chords = np.asarray(chords)
    if chords.size < 1:
        raise ValueError("need at least one chord")
    counts = np.bincount(chords, minlength=NUM_CHORDS)
    p = counts[counts > 0] / chords.size
    return float(-(p * np.log(p)).sum())


def cc(chords) -> int:
    """Number of distinct chords used."""
    chords = np.asarray(chords)
    if chords.size < 1:
        raise ValueError("need at least one chord")
    return int(np.unique(chords).size)


def ctd(chords) -> float:
    """Mean tonal distance between consecutive frames; repeats contribute 0."""
    chords = np.asarray(chords)
    if chords.size < 2:
        raise ValueError("consecutive-chord distance needs at least two frames")
    cents = [chord_centroid(index_to_chord(int(c))) for c in chords]
    dists = [tonal_distance(cents[t], cents[t + 1]) for t in range(len(cents) - 1)]
    return float(np.mean(dists))


# --- melody/chord harmonicity metrics --------------------------------------


def _flat_notes(h: Harmonization):
    """(pitch class, duration, frame chord index) in temporal order."""
    seq = []
    for t, frame in enumerate(h.notes):
        for pc, dur in frame:
            if dur <= 0:
                continue
            seq.append((int(pc) % 12, Fraction(dur), int(h.chords[t])))
    if not seq:
        raise ValueError("harmonization has no melody notes")
    return seq


def _pc_step(a: int, b: int) -> int:
    d = (a - b) % 12
    return min(d, 12 - d)


def ctnctr(h: Harmonization) -> float:
    """Duration-weighted (chord tones + passing tones) / (chord + non-chord).

    A non-chord tone counts as passing when the next melody note lies within
    2 semitones on the pitch-class circle; the final note never does.
    """
    seq = _flat_notes(h)
    n_c = Fraction(0)
    n_n = Fraction(0)
    n_p = Fraction(0)
    for k, (pc, dur, chord) in enumerate(seq):
        if pc in chord_tones(index_to_chord(chord)):
            n_c += dur
        else:
            n_n += dur
            if k + 1 < len(seq) and _pc_step(pc, seq[k + 1][0]) <= PASSING_TONE_MAX_STEP:
                n_p += dur
    if n_c + n_n == 0:
        raise ValueError("harmonization has no melody notes")
    return float((n_c + n_p) / (n_c + n_n))


def _interval_score(interval: int) -> int:
    if interval in CONSONANT_INTERVALS:
        return 1
    if interval in NEUTRAL_INTERVALS:
        return 0
    return -1


def pcs(h: Harmonization) -> float:
    """Duration-weighted mean consonance over (melody note, chord tone) pairs."""
    num = Fraction(0)
    den = Fraction(0)
    for pc, dur, chord in _flat_notes(h):
        tones = chord_tones(index_to_chord(chord))
        num += dur * sum(_interval_score((pc - tone) % 12) for tone in tones)
        den += dur * len(tones)
    return float(num / den)


def mctd(h: Harmonization) -> float:
    """Duration-weighted mean tonal distance from each note to its chord."""
    num = 0.0
    den = Fraction(0)
    for pc, dur, chord in _flat_notes(h):
        d = tonal_distance(
            pitch_class_centroid(pc), chord_centroid(index_to_chord(chord))
        )
        num += float(dur) * d
        den += dur
    return num / float(den)


# --- per-piece and corpus reports ------------------------------------------


def piece_report(h: Harmonization) -> MetricReport:
    defined = h.num_frames >= 2
    return MetricReport(
        che=che(h.chords),
        cc=cc(h.chords),
        ctd=ctd(h.chords) if defined else 0.0,
        ctnctr=ctnctr(h),
        pcs=pcs(h),
        mctd=mctd(h),
        ctd_defined=defined,
    )


def evaluate_corpus(hs) -> CorpusReport:
    """Per-piece reports plus unweighted means across pieces.

    The mean consecutive-chord distance averages only pieces where it is
    defined (2+ frames); its flag records whether any piece qualified.
    """
    if not hs:
        raise ValueError("evaluate_corpus needs at least one harmonization")
    reports = [piece_report(h) for h in hs]
    ctd_ok = [r.ctd for r in reports if r.ctd_defined]
    mean = MetricReport(
        che=float(np.mean([r.che for r in reports])),
        cc=float(np.mean([r.cc for r in reports])),
        ctd=float(np.mean(ctd_ok)) if ctd_ok else 0.0,
        ctnctr=float(np.mean([r.ctnctr for r in reports])),
        pcs=float(np.mean([r.pcs for r in reports])),
        mctd=float(np.mean([r.mctd for r in reports])),
        ctd_defined=bool(ctd_ok),
    )
    return CorpusReport(reports, mean)


def report_to_json(report: CorpusReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2)


_TABLE_GROUPS = [
    ("melody/chord harmonicity", [("ctnctr", "CTnCTR"), ("pcs", "PCS"), ("mctd", "MCTD")]),
    ("chord progression", [("che", "CHE"), ("cc", "CC"), ("ctd", "CTD")]),
]


def format_report_table(columns: dict) -> str:
    """Aligned text table; columns maps model name -> mean MetricReport."""
    names = list(columns)
    label_w = max(
        [len(label) + 2 for _, rows in _TABLE_GROUPS for _, label in rows]
        + [len(g) for g, _ in _TABLE_GROUPS]
    )
    col_w = max([len(n) for n in names] + [9]) + 2
    lines = [" " * label_w + "".join(n.rjust(col_w) for n in names)]
    for group, rows in _TABLE_GROUPS:
        lines.append(group)
        for attr, label in rows:
            cells = "".join(
                f"{getattr(columns[n], attr):.4f}".rjust(col_w) for n in names
            )
            lines.append(("  " + label).ljust(label_w) + cells)
    return "\n".join(lines)
