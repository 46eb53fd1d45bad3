"""Shoebox room impulse responses by the image-source method.

Wall absorption starts from Eyring's formula for the target RT60 and is then
calibrated against the Schroeder RT60 of the rendered response, so the
measured reverberation time lands on target. Responses are aligned so that
the direct path sits at tap 0 with unit amplitude, and truncated where the
energy envelope falls 75 dB below the direct path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.signal import fftconvolve

from dmnet.constants import DRY_ROOM_ABSORPTION, RIR_TRUNCATION_DB, SAMPLE_RATE, SPEED_OF_SOUND
from dmnet.core import Seconds, Waveform
from dmnet.errors import GeometryError, LengthError
from dmnet.metrics.measures import rt60_schroeder

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .distortion import DistortionSpec, Point

logger = logging.getLogger(__name__)

# 24 ln(10) / c
EYRING_CONSTANT = 24.0 * math.log(10.0) / SPEED_OF_SOUND

CALIBRATION_PASSES = 4
CALIBRATION_TOLERANCE = 0.03
IMAGE_HORIZON = 1.5  # images rendered up to this multiple of the target RT60
ENVELOPE_WINDOW = 160  # 10 ms
DRY_ROOM_MIN_LENGTH_S = 0.05


@dataclass(frozen=True)
class Rir:
    """A rendered room impulse response."""

    taps: NDArray[np.float64]
    absorption: float
    rt60_measured_s: Seconds
    rt60_target_s: Seconds | None = None
    sample_rate: int = SAMPLE_RATE

    def __len__(self) -> int:
        """Return the number of taps."""
        return int(self.taps.shape[0])


@dataclass(frozen=True)
class ImageSet:
    """Distances and wall-reflection counts of the image sources of a room."""

    distances: NDArray[np.float64]
    reflections: NDArray[np.int64]
    direct_distance: float


def _volume_surface(room_dims: Point) -> tuple[float, float]:
    length, width, height = room_dims
    volume = length * width * height
    surface = 2.0 * (length * width + length * height + width * height)
    return volume, surface


def eyring_absorption(room_dims: Point, rt60_s: float) -> float:
    """Uniform absorption coefficient giving `rt60_s` under Eyring's formula."""
    volume, surface = _volume_surface(room_dims)
    return 1.0 - math.exp(-EYRING_CONSTANT * volume / (surface * rt60_s))


def eyring_rt60(room_dims: Point, absorption: float) -> Seconds:
    """Eyring reverberation time of a room with uniform absorption."""
    volume, surface = _volume_surface(room_dims)
    return Seconds(EYRING_CONSTANT * volume / (-surface * math.log(1.0 - absorption)))


def _axis_images(source: float, mic: float, extent: float, reach: float) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Offsets to the microphone and reflection counts of the images along one axis."""
    n_max = math.ceil(reach / (2.0 * extent)) + 1
    m = np.arange(-n_max, n_max + 1)
    offsets = []
    counts = []
    for q in (0, 1):
        offsets.append((1 - 2 * q) * source + 2.0 * m * extent - mic)
        counts.append(np.abs(m - q) + np.abs(m))
    return np.concatenate(offsets), np.concatenate(counts).astype(np.int64)


def image_sources(room_dims: Point, src_pos: Point, mic_pos: Point, max_distance: float) -> ImageSet:
    """All images of the source within `max_distance` of the microphone."""
    axes = [_axis_images(s, m, e, max_distance) for s, m, e in zip(src_pos, mic_pos, room_dims, strict=True)]
    (dx, rx), (dy, ry), (dz, rz) = axes
    # y-z plane once, then one x slab at a time
    dyz2 = dy[:, None] ** 2 + dz[None, :] ** 2
    ryz = ry[:, None] + rz[None, :]
    limit2 = max_distance**2
    distances = []
    reflections = []
    for offset, count in zip(dx, rx, strict=True):
        d2 = offset**2 + dyz2
        keep = d2 <= limit2
        if not keep.any():
            continue
        distances.append(np.sqrt(d2[keep]))
        reflections.append(ryz[keep] + count)
    direct = math.dist(src_pos, mic_pos)
    return ImageSet(
        distances=np.concatenate(distances),
        reflections=np.concatenate(reflections),
        direct_distance=direct,
    )


def render(images: ImageSet, absorption: float, sample_rate: int = SAMPLE_RATE) -> NDArray[np.float64]:
    """Sum the image contributions into taps, direct path at tap 0 with amplitude 1."""
    log_beta = 0.5 * math.log(1.0 - absorption)
    amplitudes = np.exp(images.reflections * log_beta) * (images.direct_distance / images.distances)
    delays = np.rint((images.distances - images.direct_distance) / SPEED_OF_SOUND * sample_rate).astype(np.int64)
    return np.bincount(delays, weights=amplitudes, minlength=1)


def truncate(taps: NDArray[np.float64], floor_db: float = RIR_TRUNCATION_DB) -> NDArray[np.float64]:
    """Cut the response where its 10 ms energy envelope falls `floor_db` below the direct path."""
    direct = taps[0] ** 2 / ENVELOPE_WINDOW
    envelope = np.convolve(taps**2, np.ones(ENVELOPE_WINDOW) / ENVELOPE_WINDOW, mode="full")[: taps.size]
    above = np.flatnonzero(envelope >= direct * 10.0 ** (-floor_db / 10.0))
    return taps[: int(above[-1]) + 1] if above.size else taps[:1]


def _geometry(spec: DistortionSpec) -> tuple[Point, Point, Point]:
    if spec.room_dims is None or spec.src_pos is None or spec.mic_pos is None:
        msg = "room impulse response needs room dimensions, source and microphone positions"
        raise GeometryError(msg)
    return spec.room_dims, spec.src_pos, spec.mic_pos


def gen_rir(spec: DistortionSpec, sample_rate: int = SAMPLE_RATE) -> Rir:
    """Render the impulse response of the room described by `spec`.

    Deterministic in its geometry and RT60. Without a target RT60 the room
    gets the recorded absorption, or the dry-room absorption of 0.99.
    """
    room_dims, src_pos, mic_pos = _geometry(spec)
    direct = math.dist(src_pos, mic_pos)

    if spec.rt60_s is None:
        absorption = spec.absorption if spec.absorption is not None else DRY_ROOM_ABSORPTION
        horizon = max(IMAGE_HORIZON * eyring_rt60(room_dims, absorption), DRY_ROOM_MIN_LENGTH_S)
        images = image_sources(room_dims, src_pos, mic_pos, direct + SPEED_OF_SOUND * horizon)
        taps = truncate(render(images, absorption, sample_rate))
        try:
            measured = rt60_schroeder(taps, sample_rate)
        except LengthError:
            measured = eyring_rt60(room_dims, absorption)
        return Rir(taps=taps, absorption=absorption, rt60_measured_s=measured, sample_rate=sample_rate)

    target = spec.rt60_s
    images = image_sources(room_dims, src_pos, mic_pos, direct + SPEED_OF_SOUND * IMAGE_HORIZON * target)
    absorption = eyring_absorption(room_dims, target)
    for _ in range(CALIBRATION_PASSES):
        measured = rt60_schroeder(render(images, absorption, sample_rate), sample_rate)
        ratio = measured / target
        if abs(ratio - 1.0) <= CALIBRATION_TOLERANCE:
            break
        # decay rate is proportional to -ln(1 - absorption)
        absorption = 1.0 - (1.0 - absorption) ** ratio
        absorption = min(absorption, DRY_ROOM_ABSORPTION)

    taps = truncate(render(images, absorption, sample_rate))
    measured = rt60_schroeder(taps, sample_rate)
    logger.debug(
        "RIR for %s: target %.3f s, measured %.3f s, absorption %.4f, %d taps",
        room_dims,
        target,
        measured,
        absorption,
        taps.size,
    )
    return Rir(
        taps=taps,
        absorption=absorption,
        rt60_measured_s=measured,
        rt60_target_s=Seconds(target),
        sample_rate=sample_rate,
    )


def convolve_rir(x: ArrayLike, taps: ArrayLike) -> tuple[NDArray[np.float64], float]:
    """Convolve and trim to the input length, scaling down if the peak exceeds 1.

    Returns the output and the gain that was applied.
    """
    x = np.asarray(x, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    if taps.size == 0:
        msg = "empty impulse response"
        raise LengthError(msg)
    out = fftconvolve(x, taps, mode="full")[: x.size]
    peak = float(np.max(np.abs(out))) if out.size else 0.0
    gain = 1.0 / peak if peak > 1.0 else 1.0
    return out * gain, gain


def apply_rir(x: Waveform, rir: Rir | ArrayLike) -> Waveform:
    """Reverberate a waveform. Output length equals input length."""
    taps = rir.taps if isinstance(rir, Rir) else rir
    out, _ = convolve_rir(x.samples, taps)
    return x.with_samples(out)
