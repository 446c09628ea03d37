"""Command-line interface: prepare, train, harmonize, eval, serve."""

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .chords import (
    ChordSymbolError,
    chord_to_index,
    index_to_chord,
    parse_chord_symbol,
)
from .corpus import (
    prepare_corpus,
    read_corpus,
    read_frames,
    stats_from_dict,
    stats_to_dict,
    write_frames,
)
from .leadsheet import (
    ChordEvent,
    LeadSheet,
    LeadSheetError,
    leadsheet_to_dict,
    parse_leadsheet,
    quantize_to_frames,
    transpose_to_common_key,
    transposition_shift,
)
from .metrics import (
    evaluate_corpus,
    format_report_table,
    harmonization_from_frames,
    report_to_json,
)
from .sampling import SamplerConfig, default_iterations, harmonize
from .training import TrainConfig, train, weights_for

CHECKPOINT_NAME = "checkpoint.mharm"
HISTORY_NAME = "history.ndjson"
TRAIN_FRAMES = "train_frames.ndjson"
TEST_FRAMES = "test_frames.ndjson"
STATS_NAME = "stats.json"


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_prepare(args) -> int:
    sheets = read_corpus(args.corpus)
    train_set, test_set, stats = prepare_corpus(sheets, args.split_ratio, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_frames(out / TRAIN_FRAMES, train_set)
    write_frames(out / TEST_FRAMES, test_set)
    with open(out / STATS_NAME, "w", encoding="utf-8") as fh:
        json.dump(stats_to_dict(stats), fh, sort_keys=True, indent=2)
    n_frames = sum(fs.num_frames for fs in train_set)
    print(
        f"prepared {len(train_set)} train / {len(test_set)} test pieces "
        f"({n_frames} training frames, avg chord seq len "
        f"{stats.avg_chord_seq_len:.2f})"
    )
    return 0


def cmd_train(args) -> int:
    data = Path(args.data_dir)
    train_path = data / TRAIN_FRAMES
    stats_path = data / STATS_NAME
    if not train_path.exists() or not stats_path.exists():
        print(f"error: {data} is missing {TRAIN_FRAMES} or {STATS_NAME} "
              f"(run prepare first)", file=sys.stderr)
        return 1
    corpus = read_frames(train_path)
    with open(stats_path, "r", encoding="utf-8") as fh:
        stats = stats_from_dict(json.load(fh))

    cfg = TrainConfig(
        epochs_max=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        dropout=args.dropout,
        seed=args.seed,
        class_balancing=not args.no_balancing,
        validation_fraction=args.validation_fraction,
        hidden_size=args.hidden_size,
    )
    params, history = train(corpus, stats, cfg)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    weights = weights_for(stats, cfg.class_balancing)
    save_checkpoint(out / CHECKPOINT_NAME, params, stats, weights)
    with open(out / HISTORY_NAME, "w", encoding="utf-8") as fh:
        for row in history.rows():
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    if history.aborted:
        print("error: training aborted on non-finite loss; "
              f"best checkpoint so far kept at {out / CHECKPOINT_NAME}",
              file=sys.stderr)
        return 1
    best = min(history.val_loss) if history.val_loss else float("nan")
    print(f"best validation loss: {best:.4f} (epoch {history.best_epoch})")
    return 0


def _parse_pin(text: str) -> tuple:
    frame_text, sep, chord_text = text.partition("=")
    if not sep:
        raise ValueError(f"pin must look like FRAME=CHORD, got {text!r}")
    try:
        frame = int(frame_text)
    except ValueError:
        raise ValueError(f"pin frame must be an integer, got {frame_text!r}") from None
    if chord_text.lstrip("-").isdigit():
        return frame, int(chord_text)
    return frame, chord_to_index(parse_chord_symbol(chord_text))


def _chord_events(indices, half_bar: Fraction, shift_back: int, merge: bool):
    events = []
    start = 0
    n = len(indices)
    for t in range(1, n + 1):
        if t == n or indices[t] != indices[start] or not merge:
            symbol = index_to_chord(int(indices[start])).transpose(shift_back).name
            events.append(
                ChordEvent(start * half_bar, (t - start) * half_bar, symbol)
            )
            start = t
    return events


def cmd_harmonize(args) -> int:
    params, stats, _weights, _header = load_checkpoint(args.checkpoint)
    with open(args.leadsheet, "r", encoding="utf-8") as fh:
        sheet = parse_leadsheet(fh.read())

    shift = transposition_shift(sheet)
    frames = quantize_to_frames(transpose_to_common_key(sheet))

    pins = {}
    for pin in args.pin or []:
        frame, chord = _parse_pin(pin)
        if isinstance(chord, int) and not 0 <= chord < 96:
            raise ValueError(f"pin chord index {chord} outside [0, 96)")
        pins[frame] = chord_to_index_shifted(chord, shift)

    cfg = SamplerConfig(
        n=args.iterations or default_iterations(stats.avg_chord_seq_len),
        temperature=args.temperature,
        seed=args.seed,
    )
    chords, _dists = harmonize(params, frames.melody, pins, cfg)

    half_bar = Fraction(sheet.beats_per_bar, 2)
    out_sheet = LeadSheet(
        key_tonic=sheet.key_tonic,
        key_mode=sheet.key_mode,
        beats_per_bar=sheet.beats_per_bar,
        melody=sheet.melody,
        chords=_chord_events(chords, half_bar, -shift % 12, not args.no_merge),
    )
    text = json.dumps(leadsheet_to_dict(out_sheet), sort_keys=True,
                      separators=(",", ":")) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _info(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def chord_to_index_shifted(chord: int, shift: int) -> int:
    """Re-root a pin given in the sheet's key into the model's common key."""
    return chord_to_index(index_to_chord(chord).transpose(shift % 12))


def cmd_eval(args) -> int:
    pieces = read_frames(args.frames)
    if not pieces:
        print(f"error: {args.frames} holds no pieces", file=sys.stderr)
        return 1

    columns = {}
    reports = {}
    if not args.checkpoint:
        report = evaluate_corpus([harmonization_from_frames(fs) for fs in pieces])
        columns["input"] = report.mean
        reports["input"] = report
    else:
        for ck_path in args.checkpoint:
            params, stats, _w, _h = load_checkpoint(ck_path)
            n_iter = args.iterations or default_iterations(stats.avg_chord_seq_len)
            hs = []
            for idx, fs in enumerate(pieces):
                cfg = SamplerConfig(n=n_iter, temperature=args.temperature,
                                    seed=args.seed + idx)
                chords, _ = harmonize(params, fs.melody, {}, cfg)
                hs.append(harmonization_from_frames(fs, chords))
            name = Path(ck_path).parent.name or Path(ck_path).stem
            report = evaluate_corpus(hs)
            columns[name] = report.mean
            reports[name] = report
    print(format_report_table(columns))
    if args.json_out:
        payload = {name: json.loads(report_to_json(r)) for name, r in reports.items()}
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
        _info(f"wrote {args.json_out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(args.checkpoint)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="melharm",
        description="Melody harmonization: corpus prep, training, generation, "
        "evaluation, and an HTTP service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "prepare",
        help="quantize a lead-sheet corpus into training frames",
        description="Reads newline-delimited lead-sheet JSON, transposes every "
        "piece to the common key, quantizes to half-bar frames, and writes "
        "train/test frame files plus corpus statistics. The test split gets "
        "floor((1 - ratio) * pieces) pieces, but at least one.",
    )
    p.add_argument("--corpus", required=True, help="lead-sheet NDJSON file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--split-ratio", type=float, default=0.95,
                   help="train fraction (default 0.95)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a harmonization model")
    p.add_argument("--data-dir", required=True, help="output of prepare")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden-size", type=int, default=128)
    p.add_argument("--validation-fraction", type=float, default=0.05)
    p.add_argument("--no-balancing", action="store_true",
                   help="train with uniform class weights")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("harmonize", help="generate chords for a lead sheet")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--leadsheet", required=True, help="lead-sheet JSON file")
    p.add_argument("--pin", action="append", metavar="FRAME=CHORD",
                   help="fix a half-bar frame to a chord symbol or index; "
                   "repeatable")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=0,
                   help="refinement iterations (default: from checkpoint stats)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--no-merge", action="store_true",
                   help="keep one chord event per half bar instead of merging "
                   "equal consecutive chords")
    p.set_defaults(func=cmd_harmonize)

    p = sub.add_parser("eval", help="score harmonizations")
    p.add_argument("--frames", required=True, help="frame file (from prepare)")
    p.add_argument("--checkpoint", action="append",
                   help="harmonize the melodies with this model first; "
                   "repeat to compare models side by side")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=0)
    p.add_argument("--json-out", help="also write the full report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LeadSheetError, ChordSymbolError, CheckpointError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
