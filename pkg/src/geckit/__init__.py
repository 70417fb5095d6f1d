"""Desk-scale toolkit for grammatical error correction and acceptability.

Subpackages cover the full loop: core text types and interchange formats
(textcore), alignment and error typing (align), building acceptability
corpora from correction data (colacorpus), the acceptability judge (judge),
the trainable corrector (gec), scoring and ablations (evalmetrics), a
synthetic benchmark factory (synth), and the command-line front end (cli).
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateCorpus,
    EmptyEvaluation,
    EmptySentence,
    FormatError,
    GeckitError,
    InvalidEditSet,
    InvalidLogits,
    MissingLogits,
)
from .textcore import AnnotatedPair, ColaInstance, Edit, Sentence, apply_edits, tokenize

__all__ = [
    "AnnotatedPair",
    "ColaInstance",
    "ConfigError",
    "DegenerateCorpus",
    "Edit",
    "EmptyEvaluation",
    "EmptySentence",
    "FormatError",
    "GeckitError",
    "InvalidEditSet",
    "InvalidLogits",
    "MissingLogits",
    "Sentence",
    "apply_edits",
    "tokenize",
    "__version__",
]
