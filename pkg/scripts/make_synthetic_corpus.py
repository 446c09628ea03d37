#!/usr/bin/env python3
"""Generate a synthetic lead-sheet corpus (newline-delimited JSON).

The chord palette is deliberately imbalanced (a few very common triads, a
thin tail of sevenths and rarer colors) so the corpus is useful for
class-balancing experiments; see run_trend_experiment.py.
"""

import argparse

from melharm.synthetic import make_corpus, write_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="output NDJSON path")
    ap.add_argument("--pieces", type=int, default=220)
    ap.add_argument("--seed", type=int, default=33)
    ap.add_argument("--min-bars", type=int, default=8)
    ap.add_argument("--max-bars", type=int, default=16)
    args = ap.parse_args()

    docs = make_corpus(args.pieces, seed=args.seed, min_bars=args.min_bars,
                       max_bars=args.max_bars)
    write_corpus(args.out, docs)
    print(f"wrote {len(docs)} pieces to {args.out}")


if __name__ == "__main__":
    main()
