"""WAV reading and writing at the pipeline sample rate."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import soundfile as sf

from .constants import SAMPLE_RATE
from .core import UtteranceId, Waveform
from .errors import AudioFormatError

logger = logging.getLogger(__name__)

READABLE_SUBTYPES = frozenset({"PCM_16", "FLOAT"})


def read_wav(path: str | Path, utterance_id: str | None = None) -> Waveform:
    """Read a 16 kHz mono PCM16 or float32 WAV file as float32 samples."""
    path = Path(path)
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        msg = f"{path}: unreadable audio ({e})"
        raise AudioFormatError(msg) from e
    if info.channels != 1:
        msg = f"{path}: {info.channels} channels, only mono is supported"
        raise AudioFormatError(msg)
    if info.samplerate != SAMPLE_RATE:
        msg = f"{path}: {info.samplerate} Hz, expected {SAMPLE_RATE} Hz (no resampling is done)"
        raise AudioFormatError(msg)
    if info.subtype not in READABLE_SUBTYPES:
        msg = f"{path}: sample format {info.subtype} not supported, use PCM_16 or FLOAT"
        raise AudioFormatError(msg)
    samples, _ = sf.read(str(path), dtype="float32", always_2d=False)
    return Waveform(samples=samples, id=UtteranceId(utterance_id or path.stem))


def write_wav(path: str | Path, waveform: Waveform) -> Path:
    """Write a waveform as a float32 WAV file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), np.asarray(waveform.samples, dtype=np.float32), waveform.sample_rate, subtype="FLOAT")
    logger.debug("Wrote %s (%.2f s)", path, waveform.duration)
    return path
