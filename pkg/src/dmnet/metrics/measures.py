"""Signal-level measures: SI-SDR, measured SNR, active speech level, RT60 and bandwidth."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.ndimage import median_filter
from scipy.signal import csd, welch

from dmnet.constants import ACTIVE_LEVEL_FLOOR_DB, ACTIVE_LEVEL_FRAME, SAMPLE_RATE, SI_SDR_CAP_DB
from dmnet.core import Decibels, Hertz, Seconds
from dmnet.errors import EnergyError, LengthError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

# Schroeder fit ranges, widest first
DECAY_FIT_RANGES_DB = ((-5.0, -35.0), (-5.0, -25.0), (-5.0, -15.0))

# band the passband level of a transfer response is read from
PASSBAND_HZ = (100.0, 1000.0)


def _as_f64(x: ArrayLike) -> NDArray[np.float64]:
    return np.asarray(x, dtype=np.float64)


def active_level(
    x: ArrayLike,
    frame: int = ACTIVE_LEVEL_FRAME,
    floor_db: float = ACTIVE_LEVEL_FLOOR_DB,
) -> float:
    """Mean power over frames within `floor_db` of the loudest frame."""
    x = _as_f64(x)
    n_frames = len(x) // frame
    frames = x[: n_frames * frame].reshape(n_frames, frame) if n_frames > 0 else x[None, :]
    power = np.mean(frames**2, axis=1)
    peak = float(power.max()) if power.size else 0.0
    if peak <= 0.0:
        msg = "signal is silent, active level undefined"
        raise EnergyError(msg)
    active = power >= peak * 10.0 ** (-floor_db / 10.0)
    return float(power[active].mean())


def measured_snr(clean: ArrayLike, mixture: ArrayLike) -> Decibels:
    """SNR of a mixture from the residual against its clean component."""
    clean = _as_f64(clean)
    mixture = _as_f64(mixture)
    if clean.shape != mixture.shape:
        msg = f"clean has {clean.shape[0]} samples, mixture {mixture.shape[0]}"
        raise LengthError(msg)
    residual_power = float(np.mean((mixture - clean) ** 2))
    if residual_power == 0.0:
        return Decibels(math.inf)
    return Decibels(10.0 * math.log10(active_level(clean) / residual_power))


def si_sdr(ref: ArrayLike, est: ArrayLike, cap: float | None = SI_SDR_CAP_DB) -> Decibels:
    """Scale-invariant signal-to-distortion ratio, capped for reporting."""
    ref = _as_f64(ref)
    est = _as_f64(est)
    if ref.shape != est.shape:
        msg = f"reference has {ref.shape[0]} samples, estimate {est.shape[0]}"
        raise LengthError(msg)
    ref = ref - ref.mean()
    est = est - est.mean()
    ref_energy = float(np.dot(ref, ref))
    if ref_energy == 0.0 or float(np.dot(est, est)) == 0.0:
        msg = "SI-SDR needs non-silent reference and estimate"
        raise EnergyError(msg)
    target = (float(np.dot(est, ref)) / ref_energy) * ref
    distortion = est - target
    distortion_energy = float(np.dot(distortion, distortion))
    value = math.inf if distortion_energy == 0.0 else 10.0 * math.log10(float(np.dot(target, target)) / distortion_energy)
    if cap is not None:
        value = min(value, cap)
    return Decibels(value)


def energy_decay_curve(taps: ArrayLike) -> NDArray[np.float64]:
    """Schroeder backward-integrated energy in dB re total energy."""
    energy = _as_f64(taps) ** 2
    edc = np.cumsum(energy[::-1])[::-1]
    if edc.size == 0 or edc[0] <= 0.0:
        msg = "impulse response has no energy"
        raise EnergyError(msg)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(edc / edc[0])


def rt60_schroeder(taps: ArrayLike, sample_rate: int = SAMPLE_RATE) -> Seconds:
    """Reverberation time from a line fit to the energy decay curve, extrapolated to -60 dB."""
    edc_db = energy_decay_curve(taps)
    t = np.arange(edc_db.size) / sample_rate
    for upper, lower in DECAY_FIT_RANGES_DB:
        if edc_db[-1] > lower:
            continue
        idx = np.flatnonzero((edc_db <= upper) & (edc_db >= lower))
        if idx.size < 2:
            continue
        slope, _ = np.polyfit(t[idx], edc_db[idx], 1)
        if slope < 0.0:
            return Seconds(-60.0 / slope)
    msg = "impulse response decays less than 15 dB, RT60 undefined"
    raise LengthError(msg)


def transfer_response(
    reference: ArrayLike,
    output: ArrayLike,
    sample_rate: int = SAMPLE_RATE,
    nperseg: int = 256,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Frequencies and power response |P_ro / P_rr|^2 of the linear path from `reference` to `output`.

    The Welch cross-spectral (H1) estimate ignores components of `output`
    uncorrelated with `reference`, such as additive noise.
    """
    reference = _as_f64(reference)
    output = _as_f64(output)
    if reference.shape != output.shape:
        msg = f"reference has {reference.shape[0]} samples, output {output.shape[0]}"
        raise LengthError(msg)
    nperseg = min(nperseg, reference.size)
    freqs, p_rr = welch(reference, fs=sample_rate, nperseg=nperseg)
    _, p_ro = csd(reference, output, fs=sample_rate, nperseg=nperseg)
    if not np.any(p_rr > 0.0):
        msg = "reference is silent, bandwidth undefined"
        raise EnergyError(msg)
    with np.errstate(divide="ignore", invalid="ignore"):
        response = np.where(p_rr > 0.0, np.abs(p_ro / p_rr) ** 2, 0.0)
    return freqs, response


def half_power_crossing(
    freqs: NDArray[np.float64],
    response: NDArray[np.float64],
    sample_rate: int = SAMPLE_RATE,
    smoothing: int = 5,
) -> Hertz:
    """First frequency above the passband where `response` falls 3 dB under the passband level.

    The passband level is the 90th percentile of the median-smoothed response
    over 100 Hz - 1 kHz, so a response that already droops there does not
    lower the threshold. The crossing is interpolated between bins. Returns
    Nyquist when the response never falls that far.
    """
    smoothed = median_filter(response, size=smoothing, mode="nearest")
    passband = (freqs >= PASSBAND_HZ[0]) & (freqs <= PASSBAND_HZ[1])
    threshold = 0.5 * float(np.percentile(smoothed[passband], 90))
    below = np.flatnonzero((freqs > PASSBAND_HZ[1]) & (smoothed < threshold))
    if below.size == 0:
        return Hertz(sample_rate / 2.0)
    i = int(below[0])
    upper, lower = float(smoothed[i - 1]), float(smoothed[i])
    if upper < threshold:
        return Hertz(float(freqs[i]))
    fraction = (upper - threshold) / (upper - lower)
    return Hertz(float(freqs[i - 1] + fraction * (freqs[i] - freqs[i - 1])))


def estimate_bandwidth(
    reference: ArrayLike,
    output: ArrayLike,
    sample_rate: int = SAMPLE_RATE,
    nperseg: int = 256,
    smoothing: int = 5,
) -> Hertz:
    """-3 dB bandwidth of the linear path from `reference` to `output`."""
    freqs, response = transfer_response(reference, output, sample_rate, nperseg)
    return half_power_crossing(freqs, response, sample_rate, smoothing)
