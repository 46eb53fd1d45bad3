"""Tests for distortion specs and the degradation pipeline."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from dmnet.constants import ROOM_HEIGHT_RANGE_M, WALL_CLEARANCE_M
from dmnet.core import FilterFamily, NoisePosition, Waveform
from dmnet.errors import ConfigurationError
from dmnet.metrics.measures import measured_snr
from dmnet.metrics.spectral import power_spectrogram
from dmnet.simulation.distortion import DistortionSpec, RecipeRanges, sample_distortion_spec
from dmnet.simulation.pipeline import degrade, speech_path

FULL = DistortionSpec(
    rng_seed=11,
    snr_db=10.0,
    room_dims=(6.0, 5.0, 3.0),
    rt60_s=0.4,
    src_pos=(2.0, 2.0, 1.5),
    mic_pos=(4.0, 3.0, 1.2),
    filter_family=FilterFamily.CHEBYSHEV1,
    cutoff_hz=3000.0,
)


def test_sampled_spec_within_recipe() -> None:
    ranges = RecipeRanges()
    for seed in range(20):
        spec = sample_distortion_spec(np.random.default_rng(seed), ranges, rng_seed=seed)
        assert spec.snr_db is not None
        assert 0.0 <= spec.snr_db <= 20.0
        assert spec.rt60_s is not None
        assert 0.3 <= spec.rt60_s <= 0.9
        assert spec.cutoff_hz is not None
        assert 2000.0 <= spec.cutoff_hz <= 4000.0
        assert spec.room_dims is not None
        assert ROOM_HEIGHT_RANGE_M[0] <= spec.room_dims[2] <= ROOM_HEIGHT_RANGE_M[1]
        assert spec.src_pos is not None
        for coord, extent in zip(spec.src_pos, spec.room_dims, strict=True):
            assert WALL_CLEARANCE_M <= coord <= extent - WALL_CLEARANCE_M
        assert spec.filter_family in FilterFamily
        assert spec.resolved_filter_order >= 1


def test_sampling_is_seeded() -> None:
    a = sample_distortion_spec(np.random.default_rng(3))
    b = sample_distortion_spec(np.random.default_rng(3))
    assert a == b


def test_spec_dict_round_trip() -> None:
    spec = replace(FULL, noise_offset=5, noise_gain=0.3)
    assert DistortionSpec.from_dict(spec.to_dict()) == spec


def test_spec_rejects_unknown_field() -> None:
    with pytest.raises(ConfigurationError, match="bogus"):
        DistortionSpec.from_dict({**FULL.to_dict(), "bogus": 1})


@pytest.mark.parametrize(
    "changes",
    [
        {"rt60_s": 0.0},
        {"snr_db": float("inf")},
        {"cutoff_hz": 8000.0},
        {"cutoff_hz": None},
        {"filter_order": 0},
    ],
)
def test_spec_domain_checks(changes: dict[str, object]) -> None:
    with pytest.raises(ConfigurationError):
        replace(FULL, **changes)  # type: ignore[arg-type]


def test_reversed_recipe_range() -> None:
    with pytest.raises(ConfigurationError):
        RecipeRanges(snr_db=(20.0, 0.0))


def test_degrade_hits_snr(speech: Waveform, noise: Waveform) -> None:
    """Test the noise sits at the requested SNR against the filtered reverberant speech."""
    degraded, spec_out = degrade(speech, noise, FULL)
    assert len(degraded) == len(speech)
    assert np.max(np.abs(degraded.samples)) <= 1.0
    path = speech_path(speech.samples, FULL)
    observed = degraded.samples / spec_out.output_gain
    assert measured_snr(path.speech, observed) == pytest.approx(10.0, abs=1e-6)


def test_degrade_records_parameters(speech: Waveform, noise: Waveform) -> None:
    _, spec_out = degrade(speech, noise, FULL)
    assert spec_out.absorption is not None
    assert spec_out.rt60_measured_s == pytest.approx(0.4, rel=0.2)
    assert spec_out.noise_gain is not None
    assert spec_out.noise_gain > 0.0
    assert spec_out.noise_offset is not None
    assert 0 <= spec_out.noise_offset <= len(noise) - len(speech)


def test_degrade_replays_recorded_spec(speech: Waveform, noise: Waveform) -> None:
    first, spec_out = degrade(speech, noise, FULL)
    again, spec_again = degrade(speech, noise, spec_out)
    assert np.array_equal(first.samples, again.samples)
    assert spec_again == spec_out


def test_degrade_is_deterministic(speech: Waveform, noise: Waveform) -> None:
    a, _ = degrade(speech, noise, FULL)
    b, _ = degrade(speech, noise, FULL)
    assert np.array_equal(a.samples, b.samples)


def test_all_stages_disabled_is_identity(speech: Waveform) -> None:
    degraded, spec_out = degrade(speech, None, DistortionSpec())
    assert np.allclose(degraded.samples, speech.samples)
    assert spec_out.noise_gain is None
    assert spec_out.output_gain == 1.0


def test_noise_without_recording(speech: Waveform) -> None:
    with pytest.raises(ConfigurationError):
        degrade(speech, None, DistortionSpec(snr_db=5.0))


def _high_band_energy(x: np.ndarray) -> float:
    power = power_spectrogram(x, 512, 128)
    return float(power[256 * 5 // 8 :].sum())  # above 5 kHz


def test_noise_position(speech: Waveform, noise: Waveform) -> None:
    """Test that pre-filter noise is band-limited and post-filter noise is not."""
    spec = DistortionSpec(snr_db=5.0, filter_family=FilterFamily.BUTTERWORTH, cutoff_hz=3000.0)
    pre, _ = degrade(speech, noise, spec)
    post, _ = degrade(speech, noise, replace(spec, noise_position=NoisePosition.POST_FILTER))
    assert _high_band_energy(post.samples) > 100 * _high_band_energy(pre.samples)


def test_loud_output_is_scaled(noise: Waveform) -> None:
    loud = Waveform(samples=0.99 * np.sign(np.sin(np.linspace(0, 300, 16000))))
    degraded, spec_out = degrade(loud, noise, DistortionSpec(snr_db=0.0))
    assert spec_out.output_gain < 1.0
    assert np.max(np.abs(degraded.samples)) == pytest.approx(1.0)


def test_dry_spec_keeps_geometry() -> None:
    dry = FULL.dry()
    assert dry.room_dims == FULL.room_dims
    assert dry.rt60_s is None
    assert not dry.noise_enabled
    assert not dry.filter_enabled
