"""Exception hierarchy and the exit codes the command line maps them to."""

from __future__ import annotations

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DMNetError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


# Configuration class
class ConfigurationError(DMNetError, ValueError):
    """Invalid configuration value or document."""

    exit_code = EXIT_CONFIG


class CheckpointError(ConfigurationError):
    """Checkpoint does not match the requested model configuration."""


# Data class
class DataError(DMNetError):
    """Problem with input audio, manifests or corpora."""

    exit_code = EXIT_DATA


class AudioFormatError(DataError):
    """Audio that is not 16 kHz mono."""


class LengthError(DataError, ValueError):
    """Signal too short or lengths that do not agree."""


class EnergyError(DataError, ValueError):
    """Silent signal where energy is required."""


class ShapeError(DataError, ValueError):
    """Array dimensions that do not agree with the configuration."""


class DomainError(DataError, ValueError):
    """Value outside the domain of an operation (negative magnitude, non-finite phase)."""


class GeometryError(DataError, ValueError):
    """Room geometry that violates the clearance rules."""


class CorpusError(DataError):
    """Corpus building produced nothing usable."""


class VerificationError(DataError):
    """Degradation verification gate failed."""


# Numeric class
class NumericError(DMNetError):
    """Numerical failure."""

    exit_code = EXIT_NUMERIC


class FilterDesignError(NumericError):
    """Filter design produced poles on or outside the unit circle."""


class NonFiniteLossError(NumericError):
    """Training loss became NaN or infinite."""
