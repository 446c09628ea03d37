import logging
from fractions import Fraction

import numpy as np
import pytest

from melharm.corpus import (
    CorpusStats,
    prepare_corpus,
    read_corpus,
    read_frames,
    resolve_no_chord,
    split_sizes,
    stats_from_dict,
    stats_to_dict,
    write_frames,
)
from melharm.leadsheet import NO_CHORD, FrameSequence, LeadSheetError, parse_leadsheet
from melharm.synthetic import make_corpus, write_corpus


def _frames(chords):
    chords = np.asarray(chords, dtype=np.int64)
    t = len(chords)
    melody = np.zeros((t, 12))
    melody[:, 0] = 1.0
    notes = [[(0, Fraction(2))] for _ in range(t)]
    return FrameSequence(melody, chords, Fraction(2), notes)


def test_forward_fill_resolves_gaps():
    fs = resolve_no_chord(_frames([NO_CHORD, 3, NO_CHORD, NO_CHORD, 9]))
    assert list(fs.chords) == [3, 3, 3, 9]
    assert fs.num_frames == 4
    assert len(fs.notes) == 4


def test_leading_silence_is_dropped():
    fs = resolve_no_chord(_frames([NO_CHORD, NO_CHORD, 5]))
    assert list(fs.chords) == [5]
    assert fs.melody.shape == (1, 12)


def test_chordless_piece_resolves_to_none():
    assert resolve_no_chord(_frames([NO_CHORD, NO_CHORD])) is None


def test_split_sizes_floor_arithmetic():
    assert split_sizes(40, 0.97) == (39, 1)
    assert split_sizes(10, 0.8) == (8, 2)
    assert split_sizes(10, 0.99) == (9, 1)  # test side never empty
    assert split_sizes(2, 0.01) == (1, 1)  # train side never empty


def test_prepare_is_deterministic_per_seed():
    sheets = [parse_leadsheet(d) for d in make_corpus(8, seed=2, min_bars=2, max_bars=3)]
    a_train, a_test, a_stats = prepare_corpus(sheets, 0.75, seed=5)
    b_train, b_test, b_stats = prepare_corpus(sheets, 0.75, seed=5)
    assert len(a_train) == 6 and len(a_test) == 2
    for x, y in zip(a_train + a_test, b_train + b_test):
        assert np.array_equal(x.chords, y.chords)
        assert np.array_equal(x.melody, y.melody)
    assert np.array_equal(a_stats.chord_counts, b_stats.chord_counts)

    c_train, _, _ = prepare_corpus(sheets, 0.75, seed=6)
    assert any(
        not np.array_equal(x.chords, y.chords) for x, y in zip(a_train, c_train)
    )


def test_prepare_transposes_to_common_key():
    sheets = [parse_leadsheet(d) for d in make_corpus(8, seed=2, min_bars=2, max_bars=3)]
    _, _, stats = prepare_corpus(sheets, 0.75, seed=5)
    # the synthetic palette is C-rooted; counts live on those few chords
    used = np.flatnonzero(stats.chord_counts)
    names = {"C", "G", "Am", "F", "Dm", "Em", "G7", "Cmaj7", "Am7", "Fmaj7",
             "Dm7", "Em7", "C7", "D7", "E7", "Bdim", "Csus"}
    from melharm.chords import index_to_chord

    assert {index_to_chord(int(i)).name for i in used} <= names


def test_prepare_skips_chordless_sheets_with_warning(caplog):
    docs = make_corpus(4, seed=0, min_bars=2, max_bars=2)
    docs[1]["chords"] = []
    sheets = [parse_leadsheet(d) for d in docs]
    with caplog.at_level(logging.WARNING):
        train, test, stats = prepare_corpus(sheets, 0.75, seed=0)
    assert len(train) + len(test) == 3
    assert any("skipping" in rec.message for rec in caplog.records)


def test_prepare_needs_two_pieces():
    sheets = [parse_leadsheet(d) for d in make_corpus(1, seed=0, min_bars=2, max_bars=2)]
    with pytest.raises(ValueError):
        prepare_corpus(sheets, 0.5, seed=0)
    with pytest.raises(ValueError):
        prepare_corpus(sheets * 4, 1.5, seed=0)


def test_stats_cover_training_split_only():
    sheets = [parse_leadsheet(d) for d in make_corpus(6, seed=4, min_bars=2, max_bars=3)]
    train, _, stats = prepare_corpus(sheets, 0.67, seed=1)
    counts = np.zeros(96, dtype=np.int64)
    for fs in train:
        counts += np.bincount(fs.chords, minlength=96)
    assert np.array_equal(stats.chord_counts, counts)
    assert stats.n_pieces == len(train)
    assert stats.avg_chord_seq_len == pytest.approx(
        np.mean([fs.num_frames for fs in train])
    )


def test_frame_file_round_trip(tmp_path):
    sheets = [parse_leadsheet(d) for d in make_corpus(3, seed=7, min_bars=2, max_bars=3)]
    train, _, _ = prepare_corpus(sheets, 0.67, seed=0)
    path = tmp_path / "frames.ndjson"
    write_frames(path, train)
    back = read_frames(path)
    assert len(back) == len(train)
    for x, y in zip(train, back):
        assert np.array_equal(x.melody, y.melody)
        assert np.array_equal(x.chords, y.chords)
        assert x.frame_duration == y.frame_duration
        assert x.notes == y.notes  # Fractions compare exactly


def test_stats_round_trip():
    stats = CorpusStats(np.arange(96, dtype=np.int64), 12.5, 7)
    back = stats_from_dict(stats_to_dict(stats))
    assert np.array_equal(back.chord_counts, stats.chord_counts)
    assert back.avg_chord_seq_len == 12.5
    assert back.n_pieces == 7


def test_read_corpus_cites_the_bad_line(tmp_path):
    docs = make_corpus(3, seed=1, min_bars=2, max_bars=2)
    path = tmp_path / "corpus.ndjson"
    write_corpus(path, docs)
    lines = path.read_text().splitlines()
    lines[1] = '{"version": 2}'
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(LeadSheetError, match="line 2"):
        read_corpus(path)


def test_read_corpus_skips_blank_lines(tmp_path):
    docs = make_corpus(2, seed=1, min_bars=2, max_bars=2)
    path = tmp_path / "corpus.ndjson"
    write_corpus(path, docs)
    path.write_text(path.read_text() + "\n\n")
    assert len(read_corpus(path)) == 2
