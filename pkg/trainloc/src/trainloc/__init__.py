"""Learnable hourglass localization network for center-direction fields.

Trains purely on synthetic scenes produced by the `cedir synth` command and
exchanges everything with the primary pipeline through CDF1 files and
points CSVs.
"""

__version__ = "0.1.0"

from .model import HourglassNet, HourglassSpec
from .train import TrainConfig, load_checkpoint, train, weighted_l1
from .infer import infer_array, infer_export
