"""Tests for SI-SDR, measured SNR, active level, RT60 and bandwidth estimation."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.signal import sosfreqz

from dmnet.core import FilterFamily
from dmnet.errors import EnergyError, LengthError
from dmnet.metrics.measures import (
    active_level,
    energy_decay_curve,
    estimate_bandwidth,
    half_power_crossing,
    measured_snr,
    rt60_schroeder,
    si_sdr,
)
from dmnet.simulation.filters import apply_lowpass, design_lowpass

from .conftest import speech_like


def test_si_sdr_identity_is_capped() -> None:
    x = speech_like(0.5)
    assert si_sdr(x, x) == 60.0
    assert math.isinf(si_sdr(x, x, cap=None))


def test_si_sdr_is_scale_invariant() -> None:
    rng = np.random.default_rng(0)
    x = speech_like(0.5)
    y = x + 0.01 * rng.standard_normal(x.size)
    assert si_sdr(x, 3.0 * y) == pytest.approx(si_sdr(x, y))


def test_si_sdr_known_value() -> None:
    """Test an orthogonal distortion at a tenth of the target energy gives 10 dB."""
    n = 1000
    target = np.sin(2 * np.pi * 5 * np.arange(n) / n)
    distortion = np.cos(2 * np.pi * 5 * np.arange(n) / n) * math.sqrt(0.1)
    assert si_sdr(target, target + distortion) == pytest.approx(10.0, abs=1e-6)


def test_si_sdr_errors() -> None:
    with pytest.raises(LengthError):
        si_sdr(np.ones(10), np.ones(11))
    with pytest.raises(EnergyError):
        si_sdr(np.zeros(10), np.ones(10))


def test_active_level_ignores_silence() -> None:
    """Test that appending silence does not change the active level."""
    x = speech_like(0.5)
    padded = np.concatenate([x, np.zeros(16000)])
    assert active_level(padded) == pytest.approx(active_level(x))


def test_active_level_of_silence() -> None:
    with pytest.raises(EnergyError):
        active_level(np.zeros(1000))


def test_measured_snr() -> None:
    x = speech_like(0.5)
    assert math.isinf(measured_snr(x, x))
    with pytest.raises(LengthError):
        measured_snr(x, x[:-1])


def _exponential_rir(rt60: float, seconds: float = 1.5) -> np.ndarray:
    rng = np.random.default_rng(0)
    t = np.arange(round(seconds * 16000)) / 16000
    return rng.standard_normal(t.size) * 10 ** (-3 * t / rt60)


@pytest.mark.parametrize("rt60", [0.3, 0.5, 0.8])
def test_rt60_of_exponential_decay(rt60: float) -> None:
    assert rt60_schroeder(_exponential_rir(rt60)) == pytest.approx(rt60, rel=0.05)


def test_rt60_needs_decay() -> None:
    with pytest.raises(LengthError):
        rt60_schroeder(np.array([1.0, 0.9, 0.8]))


def test_energy_decay_curve() -> None:
    edc = energy_decay_curve([1.0, 0.5, 0.25])
    assert edc[0] == 0.0
    assert np.all(np.diff(edc) < 0)
    with pytest.raises(EnergyError):
        energy_decay_curve(np.zeros(4))


@pytest.mark.parametrize("family", list(FilterFamily))
@pytest.mark.parametrize("cutoff", [2000.0, 3500.0])
def test_bandwidth_of_lowpass(family: FilterFamily, cutoff: float) -> None:
    x = np.random.default_rng(1).standard_normal(32000)
    y = apply_lowpass(x, family, cutoff)
    assert estimate_bandwidth(x, y) == pytest.approx(cutoff, rel=0.1)


def test_bandwidth_ignores_uncorrelated_noise() -> None:
    rng = np.random.default_rng(2)
    x = rng.standard_normal(32000)
    y = apply_lowpass(x, FilterFamily.BUTTERWORTH, 3000.0) + 0.3 * rng.standard_normal(x.size)
    assert estimate_bandwidth(x, y) == pytest.approx(3000.0, rel=0.1)


def test_full_band_gives_nyquist() -> None:
    x = np.random.default_rng(3).standard_normal(16000)
    assert estimate_bandwidth(x, 0.5 * x) == 8000.0


def test_bandwidth_errors() -> None:
    with pytest.raises(LengthError):
        estimate_bandwidth(np.ones(10), np.ones(12))
    with pytest.raises(EnergyError):
        estimate_bandwidth(np.zeros(1000), np.zeros(1000))


def test_crossing_ignores_passband_droop() -> None:
    """Test that a Bessel response already sagging below 1 kHz is measured at its own -3 dB point."""
    freqs = np.linspace(0.0, 8000.0, 129)
    _, h = sosfreqz(design_lowpass(FilterFamily.BESSEL, 2083.0), worN=freqs, fs=16000)
    assert half_power_crossing(freqs, np.abs(h) ** 2) == pytest.approx(2083.0, rel=0.02)


def test_crossing_is_interpolated_between_bins() -> None:
    freqs = np.arange(0.0, 8001.0, 100.0)
    response = np.clip(1.0 - (freqs - 2000.0) / 1000.0, 0.0, 1.0)
    assert half_power_crossing(freqs, response, smoothing=1) == pytest.approx(2500.0)
