import json

import numpy as np
import pytest

from melharm.chords import chord_to_index, parse_chord_symbol
from melharm.cli import main
from melharm.leadsheet import parse_leadsheet, quantize_to_frames
from melharm.synthetic import make_piece


def _write_sheet(path, key_shift=0, seed=3, n_bars=4):
    doc = make_piece(np.random.default_rng(seed), n_bars=n_bars, key_shift=key_shift)
    path.write_text(json.dumps(doc))
    return doc


def test_prepare_writes_artifacts_and_summary(ws, capsys):
    assert ws.train_frames.exists()
    assert ws.test_frames.exists()
    stats = json.loads(ws.stats.read_text())
    assert sum(stats["chord_counts"]) > 0
    assert stats["n_pieces"] == 12  # floor(0.2 * 14) = 2 pieces held out


def test_prepare_reports_split_counts(ws, tmp_path, capsys):
    out = tmp_path / "d"
    assert main([
        "prepare", "--corpus", str(ws.corpus), "--out-dir", str(out),
        "--split-ratio", "0.8",
    ]) == 0
    msg = capsys.readouterr().out
    assert "prepared 12 train / 2 test pieces" in msg


def test_prepare_missing_corpus_fails_cleanly(tmp_path, capsys):
    assert main([
        "prepare", "--corpus", str(tmp_path / "nope.ndjson"),
        "--out-dir", str(tmp_path / "d"),
    ]) == 1
    assert "error:" in capsys.readouterr().err


def test_train_requires_prepared_data(tmp_path, capsys):
    assert main([
        "train", "--data-dir", str(tmp_path), "--out-dir", str(tmp_path / "run"),
    ]) == 1
    assert "run prepare first" in capsys.readouterr().err


def test_train_artifacts(ws):
    assert ws.checkpoint.exists()
    rows = [json.loads(line) for line in ws.history.read_text().splitlines()]
    assert [r["epoch"] for r in rows] == [0, 1]
    assert all(np.isfinite(r["val_loss"]) for r in rows)


def test_harmonize_output_is_a_valid_leadsheet(ws, tmp_path, capsys):
    sheet_path = tmp_path / "sheet.json"
    doc = _write_sheet(sheet_path, key_shift=0)
    assert main([
        "harmonize", "--checkpoint", str(ws.checkpoint),
        "--leadsheet", str(sheet_path), "--iterations", "3", "--seed", "4",
    ]) == 0
    line = capsys.readouterr().out
    out = parse_leadsheet(line)  # reparses, so the schema is honored
    assert [
        (n.onset, n.duration, n.midi) for n in out.melody
    ] == [(n.onset, n.duration, n.midi) for n in parse_leadsheet(doc).melody]
    assert out.key_tonic == parse_leadsheet(doc).key_tonic
    assert out.chords
    frames = quantize_to_frames(out)
    assert (frames.chords >= 0).all()


def test_harmonize_same_seed_is_byte_identical(ws, tmp_path):
    sheet_path = tmp_path / "sheet.json"
    _write_sheet(sheet_path, key_shift=2)
    outs = []
    for name, seed in (("a", "9"), ("b", "9"), ("c", "10")):
        out_path = tmp_path / f"{name}.json"
        assert main([
            "harmonize", "--checkpoint", str(ws.checkpoint),
            "--leadsheet", str(sheet_path), "--iterations", "4",
            "--seed", seed, "--out", str(out_path),
        ]) == 0
        outs.append(out_path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_pin_survives_the_key_round_trip(ws, tmp_path, capsys):
    # the sheet is in G; the pin is given in G, the model works in C, and the
    # output must come back in G with the pinned frame intact
    sheet_path = tmp_path / "sheet.json"
    _write_sheet(sheet_path, key_shift=7, seed=5)
    assert main([
        "harmonize", "--checkpoint", str(ws.checkpoint),
        "--leadsheet", str(sheet_path), "--iterations", "3", "--seed", "0",
        "--pin", "2=Am", "--pin", f"0={chord_to_index(parse_chord_symbol('G'))}",
        "--no-merge",
    ]) == 0
    out = parse_leadsheet(capsys.readouterr().out)
    events = sorted(out.chords, key=lambda e: e.onset)
    assert len(events) == 8  # no merging: one event per half bar
    assert events[0].symbol == "G"
    assert events[2].symbol == "Am"
    assert out.key_tonic == 7  # still in G


def test_merge_collapses_equal_neighbors(ws, tmp_path, capsys):
    sheet_path = tmp_path / "sheet.json"
    _write_sheet(sheet_path, seed=6)
    args = [
        "harmonize", "--checkpoint", str(ws.checkpoint),
        "--leadsheet", str(sheet_path), "--iterations", "3", "--seed", "1",
        "--pin", "0=C", "--pin", "1=C", "--pin", "2=C",
    ]
    assert main(args) == 0
    merged = parse_leadsheet(capsys.readouterr().out)
    first = sorted(merged.chords, key=lambda e: e.onset)[0]
    assert first.symbol == "C"
    assert first.duration >= 6  # three half bars of 2 beats merged into one

    assert main(args + ["--no-merge"]) == 0
    unmerged = parse_leadsheet(capsys.readouterr().out)
    assert len(unmerged.chords) == 8


@pytest.mark.parametrize(
    "pin", ["2", "x=C", "0=Zz", "0=@", "0=200", "99=C"],
)
def test_bad_pins_fail_cleanly(ws, tmp_path, capsys, pin):
    sheet_path = tmp_path / "sheet.json"
    _write_sheet(sheet_path)
    assert main([
        "harmonize", "--checkpoint", str(ws.checkpoint),
        "--leadsheet", str(sheet_path), "--iterations", "2", "--pin", pin,
    ]) == 1
    assert "error:" in capsys.readouterr().err


def test_harmonize_rejects_garbage_checkpoint(ws, tmp_path, capsys):
    bad = tmp_path / "bad.mharm"
    bad.write_bytes(b"not a checkpoint")
    sheet_path = tmp_path / "sheet.json"
    _write_sheet(sheet_path)
    assert main([
        "harmonize", "--checkpoint", str(bad), "--leadsheet", str(sheet_path),
    ]) == 1
    assert "error:" in capsys.readouterr().err


def test_eval_input_only_column(ws, capsys):
    assert main(["eval", "--frames", str(ws.test_frames)]) == 0
    table = capsys.readouterr().out
    assert "input" in table.splitlines()[0]
    for label in ("CTnCTR", "PCS", "MCTD", "CHE", "CC", "CTD"):
        assert label in table


def test_eval_with_checkpoint_writes_json_report(ws, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert main([
        "eval", "--frames", str(ws.test_frames),
        "--checkpoint", str(ws.checkpoint),
        "--iterations", "2", "--seed", "0", "--json-out", str(report_path),
    ]) == 0
    table = capsys.readouterr().out
    assert "run" in table.splitlines()[0]  # column named after the run dir
    payload = json.loads(report_path.read_text())
    assert set(payload) == {"run"}
    assert len(payload["run"]["per_piece"]) == 2
    assert set(payload["run"]["mean"]) >= {"che", "cc", "ctd", "ctnctr", "pcs", "mctd"}


def test_eval_missing_frames_fails_cleanly(tmp_path, capsys):
    assert main(["eval", "--frames", str(tmp_path / "none.ndjson")]) == 1
    assert "error:" in capsys.readouterr().err
