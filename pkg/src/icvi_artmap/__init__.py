"""ARTMAP clustering driven by incremental cluster validity indices."""

from .core import Dataset, DataError, Partition, load_csv, load_labels, save_csv, save_labels
from .icvi import KINDS, IcviState, batch_value
from .metrics import ari
from .preprocess import PreparedData, prepare
from .trainer import RunResult, TrainerConfig, fit

__all__ = [
    "Dataset", "DataError", "Partition", "load_csv", "load_labels", "save_csv", "save_labels",
    "KINDS", "IcviState", "batch_value", "ari", "PreparedData", "prepare",
    "RunResult", "TrainerConfig", "fit",
]
__version__ = "0.1.0"
