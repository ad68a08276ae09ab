"""Toolkit for cascaded speech-to-text translation experiments.

Builds, perturbs, runs, and scores recognize → restore → translate
pipelines, with emphasis on quantifying what structural noise in
recognizer output (lost punctuation, fused words) costs downstream
translation, and what an intermediate boundary-restoration stage wins
back.
"""

from . import (
    adapters,
    agreement,
    corpus,
    metrics,
    report,
    restore,
    scenarios,
    textcore,
)
from .errors import CascadekitError

__version__ = "0.1.0"

__all__ = [
    "CascadekitError",
    "adapters",
    "agreement",
    "corpus",
    "metrics",
    "report",
    "restore",
    "scenarios",
    "textcore",
    "__version__",
]
