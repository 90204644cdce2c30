"""descprop: molecular property prediction from computed descriptors.

SMILES strings are parsed into molecular graphs, featurized with a fixed
catalogue of topological and constitutional descriptors, rescaled, and fed
to a small feedforward network trained with Adam. Shapley-value sampling
explains trained models in terms of the input descriptors.
"""

__version__ = "0.1.0"

from .errors import (
    DescpropError,
    SmilesParseError,
    DataError,
    ConfigError,
    TrainingError,
    CheckpointError,
)
from .molparse import MolecularGraph, parse_smiles, standardize, distance_matrix

__all__ = [
    "__version__",
    "DescpropError",
    "SmilesParseError",
    "DataError",
    "ConfigError",
    "TrainingError",
    "CheckpointError",
    "MolecularGraph",
    "parse_smiles",
    "standardize",
    "distance_matrix",
]
