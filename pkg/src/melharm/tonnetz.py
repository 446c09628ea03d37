"""Six-dimensional tonal-centroid geometry (Harte-style tonnetz).

Pitch-class weight vectors are projected onto three circles (fifths, minor
thirds, major thirds) with radii 1, 1 and 0.5, then L1-normalized.  The
Euclidean distance between two centroids is the tonal distance used by the
chord metrics.
"""

import numpy as np

from .chords import ChordLabel, NUM_PITCH_CLASSES, chord_tones

RADII = (1.0, 1.0, 0.5)


def _transform_matrix() -> np.ndarray:
    k = np.arange(NUM_PITCH_CLASSES)
    r_fifths, r_minor3, r_major3 = RADII
    return np.vstack(
        [
            r_fifths * np.sin(k * 7.0 * np.pi / 6.0),
            r_fifths * np.cos(k * 7.0 * np.pi / 6.0),
            r_minor3 * np.sin(k * 3.0 * np.pi / 2.0),
            r_minor3 * np.cos(k * 3.0 * np.pi / 2.0),
            r_major3 * np.sin(k * 2.0 * np.pi / 3.0),
            r_major3 * np.cos(k * 2.0 * np.pi / 3.0),
        ]
    )


TONNETZ = _transform_matrix()
TONNETZ.setflags(write=False)


def tonal_centroid(pc_weights) -> np.ndarray:
    """Project nonnegative pitch-class weights to the 6-D centroid.

    The centroid of the empty (all-zero) weight vector is undefined.
    """
    w = np.asarray(pc_weights, dtype=float)
    if w.shape != (NUM_PITCH_CLASSES,):
        raise ValueError(f"expected a 12-vector of weights, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("pitch-class weights must be nonnegative")
    norm = w.sum()
    if norm == 0.0:
        raise ValueError("tonal centroid of an all-zero weight vector is undefined")
    return (TONNETZ @ w) / norm


def tonal_distance(a, b) -> float:
    """Euclidean distance between two 6-D centroids."""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def pitch_class_centroid(pc: int) -> np.ndarray:
    w = np.zeros(NUM_PITCH_CLASSES)
    w[pc] = 1.0
    return tonal_centroid(w)


def chord_centroid(label: ChordLabel) -> np.ndarray:
    """Centroid of the chord's tones with binary weights."""
    w = np.zeros(NUM_PITCH_CLASSES)
    w[list(chord_tones(label))] = 1.0
    return tonal_centroid(w)
