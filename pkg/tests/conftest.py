"""Shared fixture: a tiny prepared corpus and trained checkpoint on disk.

Built once per session through the real CLI so the command, file format,
sampler, and server tests all exercise the same artifacts a user would have.
"""

from types import SimpleNamespace

import pytest

from melharm.cli import (
    CHECKPOINT_NAME,
    HISTORY_NAME,
    STATS_NAME,
    TEST_FRAMES,
    TRAIN_FRAMES,
    main,
)
from melharm.synthetic import make_corpus, write_corpus


@pytest.fixture(scope="session")
def ws(tmp_path_factory):
    root = tmp_path_factory.mktemp("ws")
    corpus = root / "corpus.ndjson"
    write_corpus(corpus, make_corpus(14, seed=11, min_bars=4, max_bars=6))

    data = root / "data"
    run = root / "run"
    assert main([
        "prepare", "--corpus", str(corpus), "--out-dir", str(data),
        "--split-ratio", "0.8", "--seed", "0",
    ]) == 0
    assert main([
        "train", "--data-dir", str(data), "--out-dir", str(run),
        "--epochs", "2", "--batch-size", "8", "--lr", "0.01",
        "--dropout", "0.0", "--seed", "1", "--hidden-size", "12",
        "--validation-fraction", "0.2",
    ]) == 0

    return SimpleNamespace(
        root=root,
        corpus=corpus,
        data=data,
        run=run,
        train_frames=data / TRAIN_FRAMES,
        test_frames=data / TEST_FRAMES,
        stats=data / STATS_NAME,
        checkpoint=run / CHECKPOINT_NAME,
        history=run / HISTORY_NAME,
    )
