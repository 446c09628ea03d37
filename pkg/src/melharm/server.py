"""HTTP service around a trained checkpoint.

The checkpoint is loaded once at startup and shared read-only; every request
builds its own sampler state, so concurrent calls cannot leak pins, seeds,
or partial results into each other. Schema violations return 400 with the
offending field path; chord names or indices outside the 96-chord
vocabulary return 422.
"""

from fractions import Fraction

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field, field_validator

from .checkpoint import load_checkpoint
from .chords import (
    NUM_CHORDS,
    ChordSymbolError,
    chord_to_index,
    index_to_chord,
    parse_chord_symbol,
)
from .metrics import Harmonization, evaluate_corpus
from .sampling import SamplerConfig, default_iterations, harmonize


class HarmonizeRequest(BaseModel):
    melody: list[list[int]] = Field(min_length=1)
    pins: dict[str, int | str] = Field(default_factory=dict)
    n: int | None = None
    temperature: float = 1.0
    seed: int | None = None
    include_distributions: bool = False

    @field_validator("melody")
    @classmethod
    def _check_rows(cls, rows):
        for t, row in enumerate(rows):
            if len(row) != 12:
                raise ValueError(f"frame {t} must have 12 pitch-class flags")
            if any(v not in (0, 1) for v in row):
                raise ValueError(f"frame {t} flags must be 0 or 1")
        return rows


class HarmonizeResponse(BaseModel):
    chords: list[int]
    chord_names: list[str]
    pins: dict[str, int | str]
    seed: int
    distributions: list[list[float]] | None = None


class EvalPiece(BaseModel):
    chords: list[int] = Field(min_length=1)
    notes: list[list[tuple[int, int, int]]]  # per frame: (pitch class, num, den)

    @field_validator("notes")
    @classmethod
    def _check_durations(cls, frames):
        for t, frame in enumerate(frames):
            for pc, num, den in frame:
                if den <= 0 or num <= 0:
                    raise ValueError(f"frame {t}: note durations must be positive")
                if not 0 <= pc < 12:
                    raise ValueError(f"frame {t}: pitch class {pc} outside [0, 12)")
        return frames


class EvaluateRequest(BaseModel):
    harmonizations: list[EvalPiece] = Field(min_length=1)


def _resolve_pin_chord(value) -> int:
    if isinstance(value, int):
        if not 0 <= value < NUM_CHORDS:
            raise HTTPException(
                status_code=422,
                detail=f"chord index {value} outside the {NUM_CHORDS}-chord vocabulary",
            )
        return value
    try:
        return chord_to_index(parse_chord_symbol(value))
    except ChordSymbolError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app(checkpoint_path) -> FastAPI:
    params, stats, _weights, header = load_checkpoint(checkpoint_path)
    n_default = default_iterations(stats.avg_chord_seq_len)
    chord_names = [index_to_chord(i).name for i in range(NUM_CHORDS)]

    app = FastAPI(title="melharm")
    # browser clients may be served from a different origin than the API
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _malformed_body(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in err["loc"]], "msg": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.get("/health")
    def health():
        return PlainTextResponse("ok")

    @app.get("/model")
    def model_info():
        return {
            "vocab_hash": header["vocab_hash"],
            "chord_names": chord_names,
            "hidden_size": params.hidden_size,
            "n_default": n_default,
            "stats": {
                "avg_chord_seq_len": stats.avg_chord_seq_len,
                "n_pieces": stats.n_pieces,
            },
        }

    @app.post("/harmonize", response_model=HarmonizeResponse,
              response_model_exclude_none=True)
    def harmonize_endpoint(req: HarmonizeRequest):
        melody = np.asarray(req.melody, dtype=np.float64)
        pins = {}
        for key, value in req.pins.items():
            try:
                frame = int(key)
            except ValueError:
                raise HTTPException(
                    status_code=422, detail=f"pin key {key!r} is not a frame index"
                ) from None
            if not 0 <= frame < melody.shape[0]:
                raise HTTPException(
                    status_code=422,
                    detail=f"pinned frame {frame} outside melody of "
                    f"{melody.shape[0]} frames",
                )
            pins[frame] = _resolve_pin_chord(value)

        seed = req.seed
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**31))
        try:
            cfg = SamplerConfig(
                n=req.n if req.n is not None else n_default,
                temperature=req.temperature,
                seed=seed,
            )
            chords, dists = harmonize(params, melody, pins, cfg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return HarmonizeResponse(
            chords=[int(c) for c in chords],
            chord_names=[chord_names[int(c)] for c in chords],
            pins=req.pins,
            seed=seed,
            distributions=dists.tolist() if req.include_distributions else None,
        )

    @app.post("/evaluate")
    def evaluate_endpoint(req: EvaluateRequest):
        hs = []
        for piece in req.harmonizations:
            if len(piece.notes) != len(piece.chords):
                raise HTTPException(
                    status_code=422,
                    detail=f"{len(piece.notes)} note frames vs "
                    f"{len(piece.chords)} chords",
                )
            try:
                hs.append(
                    Harmonization(
                        notes=[
                            [(pc, Fraction(num, den)) for pc, num, den in frame]
                            for frame in piece.notes
                        ],
                        chords=np.asarray(piece.chords),
                    )
                )
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            report = evaluate_corpus(hs)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return report.to_dict()

    return app
