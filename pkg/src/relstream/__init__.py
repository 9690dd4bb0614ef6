"""Interactive online learning for streaming short-text relevance classification.

Streams of short texts are classified as Relevant / Not Relevant / Can't
Decide by small from-scratch neural networks over pre-trained word
embeddings; user-corrected labels retrain the model in real time through a
sliding-window protocol, and the simulation harness replays that protocol
over labeled corpora.
"""

from .embeddings import EmbeddingTable, load_binary, load_text, save_binary
from .errors import (
    CheckpointError,
    CheckpointVersionError,
    ChecksumError,
    CorpusFormatError,
    EmbeddingFormatError,
    RelstreamError,
    TrainingError,
)
from .labels import N_CLASSES, RelevanceLabel
from .metrics import (
    ScoreTriple,
    TrendlineFit,
    average_f1,
    confusion,
    estimate_f1,
    fit_log,
    score,
)
from .models import (
    ClassifierModel,
    Hyperparameters,
    build,
    cnn_defaults,
    defaults_for,
    lstm_defaults,
    predict,
    restore,
    rnn_defaults,
    save,
)
from .server import ReplayStream, ServerConfig, create_app, replay_stream
from .simulation import (
    Corpus,
    SimulationReport,
    SplitSpec,
    emit_report,
    grid_search,
    load_crisislex,
    load_figure_eight,
    split,
)
from .text_pipeline import SentenceMatrix, clean, to_matrix, tokenize
from .trainer import (
    Prediction,
    TrainReport,
    predict_batch,
    predict_label,
    simulate_stream,
    submit_labels,
)
from .window import (
    DEFAULT_DELIVERY_SIZE,
    DEFAULT_WINDOW_CAPACITY,
    LabeledExample,
    TrainingWindow,
)

__version__ = "0.1.0"
