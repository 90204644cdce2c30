"""Exception types shared across the package."""


class DescpropError(Exception):
    """Base class for all errors raised deliberately by this package."""


class SmilesParseError(DescpropError):
    """A SMILES string could not be turned into a valid molecular graph."""

    def __init__(self, message: str, smiles: str | None = None, position: int | None = None):
        detail = message
        if position is not None:
            detail = f"{message} (at position {position})"
        if smiles is not None:
            detail = f"{detail} in {smiles!r}"
        super().__init__(detail)
        self.smiles = smiles
        self.position = position


class DataError(DescpropError):
    """A dataset file is missing, malformed, or unusable after row filtering."""


class ConfigError(DescpropError):
    """A run configuration file or override set is invalid."""


class TrainingError(DescpropError):
    """Training could not proceed (bad shapes, non-finite gradients, ...)."""


class CheckpointError(DescpropError):
    """A model checkpoint could not be written or read back."""
