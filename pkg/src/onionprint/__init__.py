"""Minutiae-based fingerprint verification via convex layer peeling.

The pipeline: extract minutiae from a grayscale print, align two sets
rigidly, peel the matched minutiae into nested convex rings, compare
peer rings by turning-function distance, and squash into a [0, 1]
similarity score.
"""

from .alignment import MatchResult, Transform, match_minutiae
from .config import MatchConfig, build_config, load_config_file
from .errors import InvalidInputError, InvariantError, OnionprintError, PreconditionError
from .evaluation import Dataset, EvalReport, ScoreTable, evaluate, load_dataset, sweep
from .geometry import ConvexLayers, convex_hull, convex_layers
from .imgproc import extract
from .minutiae import Minutia, MinutiaKind, MinutiaSet, read_minutiae, write_minutiae
from .pgm import read_pgm, write_pgm
from .scoring import ScoreBreakdown, match_pair
from .turning import TurningFunction, turning_distance, turning_function

__version__ = "0.1.0"

__all__ = [
    "ConvexLayers",
    "Dataset",
    "EvalReport",
    "InvalidInputError",
    "InvariantError",
    "MatchConfig",
    "MatchResult",
    "Minutia",
    "MinutiaKind",
    "MinutiaSet",
    "OnionprintError",
    "PreconditionError",
    "ScoreBreakdown",
    "ScoreTable",
    "Transform",
    "TurningFunction",
    "build_config",
    "convex_hull",
    "convex_layers",
    "evaluate",
    "extract",
    "load_config_file",
    "load_dataset",
    "match_minutiae",
    "match_pair",
    "read_minutiae",
    "read_pgm",
    "sweep",
    "turning_distance",
    "turning_function",
    "write_minutiae",
    "write_pgm",
]
