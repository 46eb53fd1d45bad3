"""Core types and data structures shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, NewType

import numpy as np

from .constants import SAMPLE_RATE
from .errors import AudioFormatError

if TYPE_CHECKING:
    from numpy.typing import NDArray

# Basic type aliases
UtteranceId = NewType("UtteranceId", str)
Hertz = NewType("Hertz", float)
Decibels = NewType("Decibels", float)
Seconds = NewType("Seconds", float)
Meters = NewType("Meters", float)


class Variant(Enum):
    """Architecture variants of the restoration network."""

    S1 = "s1"  # masking-based single network
    S2 = "s2"  # mapping-based single network with input skip
    U1 = "u1"  # two independent magnitude decoders, omega fusion
    DM1 = "dm1"  # shared magnitude decoder, omega fusion
    DM2 = "dm2"  # shared magnitude decoder, alpha skip connection

    @property
    def has_mask_path(self) -> bool:
        """Whether the variant computes the masking path."""
        return self is not Variant.S2

    @property
    def has_map_path(self) -> bool:
        """Whether the variant computes the mapping path."""
        return self is not Variant.S1

    @property
    def uses_omega(self) -> bool:
        """Whether the final magnitude is an omega-weighted blend."""
        return self in {Variant.U1, Variant.DM1}


class FilterFamily(Enum):
    """Low-pass filter families used for bandwidth degradation."""

    BUTTERWORTH = "butterworth"
    BESSEL = "bessel"
    CHEBYSHEV1 = "chebyshev1"
    ELLIPTIC = "elliptic"


class WindowKind(Enum):
    """STFT analysis windows."""

    HANN = "hann"
    HAMMING = "hamming"
    RECTANGULAR = "rectangular"

    @property
    def scipy_name(self) -> str:
        """Name understood by `scipy.signal.get_window`."""
        return "boxcar" if self is WindowKind.RECTANGULAR else self.value


class Split(Enum):
    """Corpus splits."""

    TRAIN = "train"
    VALIDATION = "validation"


class NoisePosition(Enum):
    """Where noise enters relative to the low-pass stage."""

    PRE_FILTER = "pre_filter"  # noise shares the bandwidth limit
    POST_FILTER = "post_filter"


class CorpusTarget(Enum):
    """What the clean side of a training pair is."""

    DRY_ROOM = "dry_room"  # source convolved with the dry-room response
    SOURCE = "source"


@dataclass(frozen=True, slots=True)
class Waveform:
    """Mono audio at the pipeline sample rate."""

    samples: NDArray[np.floating]
    sample_rate: int = SAMPLE_RATE
    id: UtteranceId = field(default=UtteranceId(""))

    def __post_init__(self) -> None:
        """Check the sample rate and channel layout."""
        if self.sample_rate != SAMPLE_RATE:
            msg = f"{self.id or 'waveform'}: sample rate {self.sample_rate} Hz, expected {SAMPLE_RATE} Hz"
            raise AudioFormatError(msg)
        if np.ndim(self.samples) != 1:
            msg = f"{self.id or 'waveform'}: expected mono samples, got shape {np.shape(self.samples)}"
            raise AudioFormatError(msg)

    def __len__(self) -> int:
        """Return the number of samples."""
        return int(self.samples.shape[0])

    @property
    def duration(self) -> Seconds:
        """Duration in seconds."""
        return Seconds(len(self) / self.sample_rate)

    def with_samples(self, samples: NDArray[np.floating]) -> Waveform:
        """Return a waveform with the same metadata and new samples."""
        return Waveform(samples=samples, sample_rate=self.sample_rate, id=self.id)
