"""Model checkpoint file: magic line, JSON header line, raw float32 arrays.

Layout: b"MHARM1\\n", one line of JSON (hyperparameters, array names and
shapes in storage order, vocabulary layout hash, corpus statistics, class
weights), then the arrays' little-endian float32 bytes concatenated in the
header-declared order. Parameters are float32-representable in memory, so a
save/load cycle reproduces them bit for bit.
"""

import json

import numpy as np

from .chords import vocab_hash
from .corpus import CorpusStats, stats_from_dict, stats_to_dict
from .nn import GateWeights, ModelParams

MAGIC = b"MHARM1"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params: ModelParams, stats: CorpusStats,
                    weights: np.ndarray) -> None:
    arrays = params.arrays()
    header = {
        "version": 1,
        "hidden_size": params.hidden_size,
        "dropout_rate": params.dropout_rate,
        "seed": params.seed,
        "vocab_hash": vocab_hash(),
        "arrays": [{"name": n, "shape": list(a.shape)} for n, a in arrays.items()],
        "stats": stats_to_dict(stats),
        "class_weights": weights.tolist(),
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC + b"\n")
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for arr in arrays.values():
            fh.write(arr.astype("<f4").tobytes())


def load_checkpoint(path):
    """Returns (params, stats, class_weights, header)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    magic_end = blob.find(b"\n")
    if magic_end < 0 or blob[:magic_end] != MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint (bad magic)")
    header_end = blob.find(b"\n", magic_end + 1)
    if header_end < 0:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(blob[magic_end + 1 : header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header: {exc}") from exc
    if header.get("version") != 1:
        raise CheckpointError(f"{path}: unsupported version {header.get('version')}")
    if header["vocab_hash"] != vocab_hash():
        raise CheckpointError(
            f"{path}: chord vocabulary mismatch (checkpoint {header['vocab_hash']}, "
            f"library {vocab_hash()}): indices would not mean the same chords"
        )

    raw = blob[header_end + 1 :]
    arrays = {}
    offset = 0
    for entry in header["arrays"]:
        n_items = int(np.prod(entry["shape"])) if entry["shape"] else 1
        n_bytes = 4 * n_items
        if offset + n_bytes > len(raw):
            raise CheckpointError(f"{path}: truncated array data at {entry['name']}")
        flat = np.frombuffer(raw[offset : offset + n_bytes], dtype="<f4")
        arrays[entry["name"]] = flat.reshape(entry["shape"]).astype(np.float64)
        offset += n_bytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")

    def gw(prefix):
        return GateWeights(
            arrays[f"{prefix}.w_x"], arrays[f"{prefix}.w_h"], arrays[f"{prefix}.b"]
        )

    params = ModelParams(
        hidden_size=int(header["hidden_size"]),
        dropout_rate=float(header["dropout_rate"]),
        seed=int(header["seed"]),
        lstm1_fwd=gw("lstm1_fwd"),
        lstm1_bwd=gw("lstm1_bwd"),
        lstm2_fwd=gw("lstm2_fwd"),
        lstm2_bwd=gw("lstm2_bwd"),
        fc_w=arrays["fc_w"],
        fc_b=arrays["fc_b"],
    )
    stats = stats_from_dict(header["stats"])
    weights = np.asarray(header["class_weights"], dtype=np.float64)
    return params, stats, weights, header
