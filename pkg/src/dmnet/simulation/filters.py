"""Low-pass filters for bandwidth limitation."""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import bessel, butter, cheby1, ellip, sos2zpk, sosfilt, sosfreqz

from dmnet.constants import CHEBYSHEV1_RIPPLE_DB, ELLIPTIC_RIPPLE_DB, ELLIPTIC_STOPBAND_DB, SAMPLE_RATE
from dmnet.core import FilterFamily, Hertz, Waveform
from dmnet.errors import ConfigurationError, FilterDesignError

from .distortion import default_filter_order

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)


def _family(family: FilterFamily | str) -> FilterFamily:
    if isinstance(family, FilterFamily):
        return family
    try:
        return FilterFamily(family)
    except ValueError as e:
        known = ", ".join(f.value for f in FilterFamily)
        msg = f"unsupported filter family {family!r}, expected one of {known}"
        raise ConfigurationError(msg) from e


def design_lowpass(
    family: FilterFamily | str,
    cutoff_hz: float,
    order: int | None = None,
    sample_rate: int = SAMPLE_RATE,
) -> NDArray[np.float64]:
    """Second-order sections of a digital low-pass filter.

    The cutoff is the -3 dB point for Butterworth and Bessel (magnitude
    normalised), and the passband edge for Chebyshev I and elliptic designs.
    """
    family = _family(family)
    order = order or default_filter_order(family)
    nyquist = sample_rate / 2
    if not 0.0 < cutoff_hz < nyquist:
        msg = f"cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz"
        raise ConfigurationError(msg)

    match family:
        case FilterFamily.BUTTERWORTH:
            sos = butter(order, cutoff_hz, btype="low", fs=sample_rate, output="sos")
        case FilterFamily.BESSEL:
            sos = bessel(order, cutoff_hz, btype="low", norm="mag", fs=sample_rate, output="sos")
        case FilterFamily.CHEBYSHEV1:
            sos = cheby1(order, CHEBYSHEV1_RIPPLE_DB, cutoff_hz, btype="low", fs=sample_rate, output="sos")
        case FilterFamily.ELLIPTIC:
            sos = ellip(
                order,
                ELLIPTIC_RIPPLE_DB,
                ELLIPTIC_STOPBAND_DB,
                cutoff_hz,
                btype="low",
                fs=sample_rate,
                output="sos",
            )

    _, poles, _ = sos2zpk(sos)
    if np.any(np.abs(poles) >= 1.0):
        msg = f"{family.value} order {order} at {cutoff_hz} Hz has poles on or outside the unit circle"
        raise FilterDesignError(msg)
    logger.debug("Designed %s low-pass, order %d, cutoff %.1f Hz", family.value, order, cutoff_hz)
    return np.asarray(sos, dtype=np.float64)


def apply_lowpass(
    x: ArrayLike,
    family: FilterFamily | str,
    cutoff_hz: float,
    order: int | None = None,
) -> NDArray[np.float64]:
    """Filter raw samples, returning float64."""
    sos = design_lowpass(family, cutoff_hz, order)
    return np.asarray(sosfilt(sos, np.asarray(x, dtype=np.float64)), dtype=np.float64)


def lowpass(x: Waveform, family: FilterFamily | str, cutoff_hz: float, order: int | None = None) -> Waveform:
    """Band-limit a waveform. Output length equals input length."""
    return x.with_samples(apply_lowpass(x.samples, family, cutoff_hz, order))


def half_power_frequency(sos: NDArray[np.float64], sample_rate: int = SAMPLE_RATE, n_points: int = 8192) -> Hertz:
    """Frequency where a designed low-pass falls 3 dB under its passband peak."""
    freqs, h = sosfreqz(sos, worN=n_points, fs=sample_rate)
    power = np.abs(h) ** 2
    peak = int(np.argmax(power))
    threshold = 0.5 * float(power[peak])
    below = peak + np.flatnonzero(power[peak:] < threshold)
    if below.size == 0:
        return Hertz(sample_rate / 2.0)
    i = int(below[0])
    fraction = (float(power[i - 1]) - threshold) / float(power[i - 1] - power[i])
    return Hertz(float(freqs[i - 1] + fraction * (freqs[i] - freqs[i - 1])))


def fit_cutoff(
    freqs: NDArray[np.float64],
    response: NDArray[np.float64],
    family: FilterFamily | str,
    initial_hz: float,
    order: int | None = None,
    sample_rate: int = SAMPLE_RATE,
    low_hz: float = 100.0,
) -> Hertz:
    """Cutoff of the `family` design whose power response best matches a measured one.

    The measured `response` (power, on `freqs`) is compared with the design's
    response scaled by its least-squares gain, over `low_hz` to 95% of
    Nyquist. The search covers 0.6 to 1.4 times `initial_hz`.
    """
    family = _family(family)
    nyquist = sample_rate / 2
    band = (freqs >= low_hz) & (freqs <= 0.95 * nyquist)
    f, measured = freqs[band], response[band]

    def mismatch(cutoff: float) -> float:
        try:
            sos = design_lowpass(family, cutoff, order, sample_rate)
        except FilterDesignError:
            return math.inf
        _, h = sosfreqz(sos, worN=f, fs=sample_rate)
        designed = np.abs(h) ** 2
        gain = float(measured @ designed) / float(designed @ designed)
        return float(np.sum((measured - gain * designed) ** 2))

    bounds = (max(low_hz, 0.6 * initial_hz), min(0.99 * nyquist, 1.4 * initial_hz))
    result = minimize_scalar(mismatch, bounds=bounds, method="bounded", options={"xatol": 1.0})
    return Hertz(float(result.x))
