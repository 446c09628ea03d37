"""96-chord vocabulary: 12 roots x 8 qualities, with chord-tone theory and
symbol parsing.

The label space is fixed: every chord is a (root pitch class, quality) pair,
and the integer encoding is ``8 * root + quality ordinal``.  Symbols outside
the vocabulary (9th/11th/13th extensions, half-diminished, slash basses) are
folded onto their nearest seventh-chord or triad family by
:func:`parse_chord_symbol`.
"""

import hashlib
from dataclasses import dataclass
from enum import IntEnum

NUM_PITCH_CLASSES = 12
NUM_QUALITIES = 8
NUM_CHORDS = NUM_PITCH_CLASSES * NUM_QUALITIES  # 96

PITCH_CLASS_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

_NATURALS = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}


class Quality(IntEnum):
    """Chord qualities in ordinal order; the ordinal is part of the encoding."""

    MAJ = 0
    MIN = 1
    AUG = 2
    DIM = 3
    SUS = 4
    MAJ7 = 5
    MIN7 = 6
    DOM7 = 7


# Root-relative chord tones per quality.  "sus" is read as sus4.
QUALITY_INTERVALS = {
    Quality.MAJ: (0, 4, 7),
    Quality.MIN: (0, 3, 7),
    Quality.AUG: (0, 4, 8),
    Quality.DIM: (0, 3, 6),
    Quality.SUS: (0, 5, 7),
    Quality.MAJ7: (0, 4, 7, 11),
    Quality.MIN7: (0, 3, 7, 10),
    Quality.DOM7: (0, 4, 7, 10),
}

# Canonical suffix per quality; these re-parse to themselves.
QUALITY_SUFFIX = {
    Quality.MAJ: "",
    Quality.MIN: "m",
    Quality.AUG: "aug",
    Quality.DIM: "dim",
    Quality.SUS: "sus",
    Quality.MAJ7: "maj7",
    Quality.MIN7: "m7",
    Quality.DOM7: "7",
}

# Accepted quality tokens and the vocabulary quality each reduces to.
# Extensions keep their seventh-chord family, half-diminished keeps the
# diminished fifth, sus2 folds onto sus (lossy, documented).
QUALITY_TOKENS = {
    "": Quality.MAJ,
    "m": Quality.MIN,
    "aug": Quality.AUG,
    "dim": Quality.DIM,
    "sus": Quality.SUS,
    "sus2": Quality.SUS,
    "sus4": Quality.SUS,
    "maj7": Quality.MAJ7,
    "m7": Quality.MIN7,
    "7": Quality.DOM7,
    "9": Quality.DOM7,
    "11": Quality.DOM7,
    "13": Quality.DOM7,
    "m9": Quality.MIN7,
    "maj9": Quality.MAJ7,
    "m7b5": Quality.DIM,
    "dim7": Quality.DIM,
}


class ChordSymbolError(ValueError):
    """Raised for chord symbols outside the documented grammar."""

    def __init__(self, symbol, reason=""):
        self.symbol = symbol
        detail = f": {reason}" if reason else ""
        super().__init__(f"unrecognizable chord symbol {symbol!r}{detail}")


@dataclass(frozen=True)
class ChordLabel:
    """One of the 96 vocabulary chords."""

    root: int  # pitch class, 0 = C
    quality: Quality

    def __post_init__(self):
        if not 0 <= self.root < NUM_PITCH_CLASSES:
            raise ValueError(f"root pitch class out of range: {self.root}")
        object.__setattr__(self, "quality", Quality(self.quality))

    @property
    def name(self) -> str:
        return PITCH_CLASS_NAMES[self.root] + QUALITY_SUFFIX[self.quality]

    def transpose(self, semitones: int) -> "ChordLabel":
        return ChordLabel((self.root + semitones) % NUM_PITCH_CLASSES, self.quality)


def chord_to_index(label: ChordLabel) -> int:
    """Encode a label as an integer in [0, 96)."""
    return NUM_QUALITIES * label.root + int(label.quality)


def index_to_chord(idx: int) -> ChordLabel:
    """Inverse of :func:`chord_to_index`."""
    if not 0 <= idx < NUM_CHORDS:
        raise ValueError(f"chord index out of range [0, {NUM_CHORDS}): {idx}")
    return ChordLabel(idx // NUM_QUALITIES, Quality(idx % NUM_QUALITIES))


def chord_name(idx: int) -> str:
    return index_to_chord(idx).name


def all_chord_names() -> list[str]:
    return [chord_name(i) for i in range(NUM_CHORDS)]


def chord_tones(label: ChordLabel) -> frozenset[int]:
    """Pitch classes sounded by the chord (root position, no voicing)."""
    return frozenset(
        (label.root + step) % NUM_PITCH_CLASSES for step in QUALITY_INTERVALS[label.quality]
    )


def _parse_root(text: str, symbol: str) -> tuple[int, str]:
    if not text or text[0] not in _NATURALS:
        raise ChordSymbolError(symbol, "expected a root letter A-G")
    pc = _NATURALS[text[0]]
    rest = text[1:]
    if rest.startswith("#"):
        pc, rest = (pc + 1) % 12, rest[1:]
    elif rest.startswith("b"):
        pc, rest = (pc - 1) % 12, rest[1:]
    return pc, rest


def parse_chord_symbol(symbol: str) -> ChordLabel:
    """Parse a chord symbol and reduce it onto the 96-chord vocabulary.

    Grammar: root letter A-G, optional # or b, a quality token from
    ``QUALITY_TOKENS``, and an optional "/bass" which is dropped (root
    position).  Anything else raises :class:`ChordSymbolError`.
    """
    if not isinstance(symbol, str):
        raise ChordSymbolError(symbol, "not a string")
    text = symbol.strip()
    body, slash, bass = text.partition("/")
    root, quality_token = _parse_root(body, symbol)
    if quality_token not in QUALITY_TOKENS:
        raise ChordSymbolError(symbol, f"unknown quality token {quality_token!r}")
    if slash:
        bass_pc, leftover = _parse_root(bass, symbol)
        if leftover:
            raise ChordSymbolError(symbol, f"malformed bass note {bass!r}")
    return ChordLabel(root, QUALITY_TOKENS[quality_token])


def vocab_hash() -> str:
    """Stable digest of the vocabulary layout, embedded in checkpoints."""
    blob = ",".join(all_chord_names()).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
