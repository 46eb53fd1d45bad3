"""Degradation pipeline: reverberation, then band limitation and noise."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from dmnet.core import NoisePosition, Waveform
from dmnet.errors import ConfigurationError

from .distortion import DistortionSpec, with_recorded
from .filters import apply_lowpass
from .mixing import crop_noise, noise_gain_for_snr, tile_noise
from .room import convolve_rir, gen_rir

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpeechPath:
    """Noise-free intermediates of the pipeline for one utterance."""

    reverberant: NDArray[np.float64]  # after the room, before the filter
    speech: NDArray[np.float64]  # after the filter
    reverb_gain: float = 1.0
    absorption: float | None = None
    rt60_measured_s: float | None = None


def speech_path(clean: ArrayLike, spec: DistortionSpec) -> SpeechPath:
    """Run the deterministic speech stages of `spec` on `clean`."""
    x = np.asarray(clean, dtype=np.float64)
    reverberant = x
    reverb_gain = 1.0
    absorption = None
    rt60_measured = None
    if spec.reverb_enabled:
        rir = gen_rir(spec)
        reverberant, reverb_gain = convolve_rir(x, rir.taps)
        absorption = rir.absorption
        rt60_measured = float(rir.rt60_measured_s)
    speech = reverberant
    if spec.filter_enabled:
        assert spec.filter_family is not None
        assert spec.cutoff_hz is not None
        speech = apply_lowpass(reverberant, spec.filter_family, spec.cutoff_hz, spec.resolved_filter_order)
    return SpeechPath(
        reverberant=reverberant,
        speech=speech,
        reverb_gain=reverb_gain,
        absorption=absorption,
        rt60_measured_s=rt60_measured,
    )


def degrade(
    clean: Waveform,
    noise: Waveform | None,
    spec: DistortionSpec,
) -> tuple[Waveform, DistortionSpec]:
    """Apply the distortions of `spec` to `clean`.

    Reverberation comes first. Noise is mixed so that the SNR against the
    filtered reverberant speech equals `spec.snr_db`; with the pre-filter
    position the noise is band-limited together with the speech. A recorded
    `noise_offset` is replayed, otherwise the offset is drawn from a generator
    seeded with `spec.rng_seed`. If the result would clip it is scaled down
    and the gain is recorded.

    Returns the degraded waveform and `spec` with the recorded fields filled.
    """
    path = speech_path(clean.samples, spec)
    mixture = path.speech
    noise_gain = None
    offset = None
    if spec.noise_enabled:
        assert spec.snr_db is not None
        if noise is None:
            msg = f"{clean.id or 'utterance'}: spec asks for noise at {spec.snr_db} dB but none was given"
            raise ConfigurationError(msg)
        source = tile_noise(noise.samples, len(clean))
        if spec.noise_offset is not None:
            excerpt, offset = crop_noise(source[spec.noise_offset :], len(clean))
            offset = spec.noise_offset
        else:
            excerpt, offset = crop_noise(source, len(clean), np.random.default_rng(spec.rng_seed))
        if spec.filter_enabled and spec.noise_position is NoisePosition.PRE_FILTER:
            assert spec.filter_family is not None
            assert spec.cutoff_hz is not None
            excerpt = apply_lowpass(excerpt, spec.filter_family, spec.cutoff_hz, spec.resolved_filter_order)
        noise_gain = noise_gain_for_snr(path.speech, excerpt, spec.snr_db)
        mixture = path.speech + noise_gain * excerpt

    peak = float(np.max(np.abs(mixture))) if mixture.size else 0.0
    output_gain = 1.0 / peak if peak > 1.0 else 1.0
    if output_gain != 1.0:
        logger.debug("%s: scaled by %.3f to avoid clipping", clean.id, output_gain)

    spec_out = with_recorded(
        spec,
        absorption=path.absorption,
        rt60_measured_s=path.rt60_measured_s,
        noise_gain=noise_gain,
        noise_offset=offset,
        reverb_gain=path.reverb_gain,
        output_gain=output_gain,
    )
    return clean.with_samples(mixture * output_gain), spec_out
