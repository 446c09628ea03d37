"""Melody harmonization: a BiLSTM chord model with masked training,
annealed blocked resampling, and objective evaluation metrics."""

from .chords import (
    NUM_CHORDS,
    NUM_PITCH_CLASSES,
    NUM_QUALITIES,
    ChordLabel,
    ChordSymbolError,
    Quality,
    chord_to_index,
    chord_tones,
    index_to_chord,
    parse_chord_symbol,
    vocab_hash,
)
from .leadsheet import (
    NO_CHORD,
    ChordEvent,
    FrameSequence,
    LeadSheet,
    LeadSheetError,
    Note,
    leadsheet_to_dict,
    parse_leadsheet,
    quantize_to_frames,
    transpose_to_common_key,
)
from .metrics import (
    CorpusReport,
    Harmonization,
    MetricReport,
    cc,
    che,
    ctd,
    ctnctr,
    evaluate_corpus,
    mctd,
    pcs,
)
from .nn import (
    BatchInput,
    ModelParams,
    NumericalError,
    assemble_input,
    backward,
    class_weights,
    forward,
    init_params,
    make_training_mask,
    masked_nll,
    softmax,
)
from .sampling import SamplerConfig, anneal_alpha, create_random_mask, draw_chord, harmonize
from .tonnetz import tonal_centroid, tonal_distance
from .training import TrainConfig, TrainHistory, evaluate_loss, train

__version__ = "0.1.0"
