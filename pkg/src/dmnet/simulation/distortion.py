"""Distortion parameters for one degraded utterance and the recipe they are drawn from."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import TYPE_CHECKING, Any

from dmnet.constants import (
    BESSEL_ORDER,
    BUTTERWORTH_ORDER,
    CHEBYSHEV1_ORDER,
    CUTOFF_RANGE_HZ,
    ELLIPTIC_ORDER,
    ROOM_HEIGHT_RANGE_M,
    ROOM_LENGTH_RANGE_M,
    RT60_RANGE_S,
    SAMPLE_RATE,
    SNR_RANGE_DB,
    WALL_CLEARANCE_M,
)
from dmnet.core import FilterFamily, NoisePosition
from dmnet.errors import ConfigurationError, GeometryError

if TYPE_CHECKING:
    import numpy as np

Point = tuple[float, float, float]

DEFAULT_FILTER_ORDERS = {
    FilterFamily.BUTTERWORTH: BUTTERWORTH_ORDER,
    FilterFamily.BESSEL: BESSEL_ORDER,
    FilterFamily.CHEBYSHEV1: CHEBYSHEV1_ORDER,
    FilterFamily.ELLIPTIC: ELLIPTIC_ORDER,
}


def default_filter_order(family: FilterFamily) -> int:
    """Order used for a filter family."""
    return DEFAULT_FILTER_ORDERS[family]


def _check_geometry(room_dims: Point, src_pos: Point | None, mic_pos: Point | None) -> None:
    length, width, height = room_dims
    lo, hi = ROOM_LENGTH_RANGE_M
    h_lo, h_hi = ROOM_HEIGHT_RANGE_M
    if not (lo <= length <= hi and lo <= width <= hi and h_lo <= height <= h_hi):
        msg = f"room {room_dims} outside {lo}-{hi} m (length, width) and {h_lo}-{h_hi} m (height)"
        raise GeometryError(msg)
    for name, pos in (("source", src_pos), ("microphone", mic_pos)):
        if pos is None:
            msg = f"{name} position is required when a room is given"
            raise GeometryError(msg)
        for coord, extent in zip(pos, room_dims, strict=True):
            if not WALL_CLEARANCE_M <= coord <= extent - WALL_CLEARANCE_M:
                msg = f"{name} at {pos} is closer than {WALL_CLEARANCE_M} m to a wall of room {room_dims}"
                raise GeometryError(msg)


@dataclass(frozen=True, slots=True)
class DistortionSpec:
    """Parameters that produced one degraded utterance.

    A stage is disabled by leaving its parameters unset: no room means no
    reverberation, no SNR means no noise, no filter family means full band.
    A room without an RT60 is the dry room (absorption 0.99).
    """

    rng_seed: int = 0
    snr_db: float | None = None
    room_dims: Point | None = None
    rt60_s: float | None = None
    src_pos: Point | None = None
    mic_pos: Point | None = None
    filter_family: FilterFamily | None = None
    filter_order: int | None = None
    cutoff_hz: float | None = None
    noise_position: NoisePosition = NoisePosition.PRE_FILTER

    # Recorded by `degrade`
    absorption: float | None = None
    rt60_measured_s: float | None = None
    noise_gain: float | None = None
    noise_offset: int | None = None
    reverb_gain: float = 1.0
    output_gain: float = 1.0

    def __post_init__(self) -> None:
        """Check geometry and parameter domains."""
        if self.room_dims is not None:
            _check_geometry(self.room_dims, self.src_pos, self.mic_pos)
        if self.rt60_s is not None and self.rt60_s <= 0.0:
            msg = f"rt60_s must be positive, got {self.rt60_s}"
            raise ConfigurationError(msg)
        if self.snr_db is not None and not math.isfinite(self.snr_db):
            msg = f"snr_db must be finite, got {self.snr_db} (leave unset to disable noise)"
            raise ConfigurationError(msg)
        if self.filter_family is not None:
            if self.cutoff_hz is None or not 0.0 < self.cutoff_hz < SAMPLE_RATE / 2:
                msg = f"cutoff_hz must lie in (0, {SAMPLE_RATE // 2}) Hz, got {self.cutoff_hz}"
                raise ConfigurationError(msg)
            if self.filter_order is not None and self.filter_order < 1:
                msg = f"filter_order must be positive, got {self.filter_order}"
                raise ConfigurationError(msg)

    @property
    def reverb_enabled(self) -> bool:
        """Whether a room impulse response is applied."""
        return self.room_dims is not None

    @property
    def noise_enabled(self) -> bool:
        """Whether noise is mixed in."""
        return self.snr_db is not None

    @property
    def filter_enabled(self) -> bool:
        """Whether the low-pass stage is applied."""
        return self.filter_family is not None

    @property
    def resolved_filter_order(self) -> int:
        """Filter order, falling back to the family default."""
        if self.filter_family is None:
            msg = "no filter family set"
            raise ConfigurationError(msg)
        return self.filter_order or default_filter_order(self.filter_family)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        out = asdict(self)
        out["filter_family"] = self.filter_family.value if self.filter_family else None
        out["noise_position"] = self.noise_position.value
        for key in ("room_dims", "src_pos", "mic_pos"):
            out[key] = list(out[key]) if out[key] is not None else None
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DistortionSpec:
        """Inverse of `to_dict`."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            msg = f"unknown distortion spec fields: {sorted(unknown)}"
            raise ConfigurationError(msg)
        values = dict(data)
        for key in ("room_dims", "src_pos", "mic_pos"):
            if values.get(key) is not None:
                values[key] = tuple(float(v) for v in values[key])
        if values.get("filter_family") is not None:
            values["filter_family"] = FilterFamily(values["filter_family"])
        if "noise_position" in values:
            values["noise_position"] = NoisePosition(values["noise_position"])
        return cls(**values)

    def dry(self) -> DistortionSpec:
        """Same geometry in the dry room, every other stage disabled."""
        return DistortionSpec(
            rng_seed=self.rng_seed,
            room_dims=self.room_dims,
            src_pos=self.src_pos,
            mic_pos=self.mic_pos,
        )


@dataclass(frozen=True, slots=True)
class RecipeRanges:
    """Ranges the corpus recipe samples from."""

    snr_db: tuple[float, float] = SNR_RANGE_DB
    room_length_m: tuple[float, float] = ROOM_LENGTH_RANGE_M
    room_height_m: tuple[float, float] = ROOM_HEIGHT_RANGE_M
    rt60_s: tuple[float, float] = RT60_RANGE_S
    cutoff_hz: tuple[float, float] = CUTOFF_RANGE_HZ
    families: tuple[FilterFamily, ...] = field(default=tuple(FilterFamily))

    def __post_init__(self) -> None:
        """Check every range is ordered and families are non-empty."""
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name != "families" and value[0] > value[1]:
                msg = f"range {f.name} is reversed: {value}"
                raise ConfigurationError(msg)
        if not self.families:
            msg = "at least one filter family is required"
            raise ConfigurationError(msg)


def _uniform(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def sample_distortion_spec(
    rng: np.random.Generator,
    ranges: RecipeRanges | None = None,
    rng_seed: int = 0,
    noise_position: NoisePosition = NoisePosition.PRE_FILTER,
) -> DistortionSpec:
    """Draw one set of recipe parameters."""
    ranges = ranges or RecipeRanges()
    room = (
        _uniform(rng, ranges.room_length_m),
        _uniform(rng, ranges.room_length_m),
        _uniform(rng, ranges.room_height_m),
    )

    def position() -> Point:
        x, y, z = (float(rng.uniform(WALL_CLEARANCE_M, extent - WALL_CLEARANCE_M)) for extent in room)
        return (x, y, z)

    src_pos = position()
    mic_pos = position()
    family = ranges.families[int(rng.integers(len(ranges.families)))]
    return DistortionSpec(
        rng_seed=rng_seed,
        snr_db=_uniform(rng, ranges.snr_db),
        room_dims=room,
        rt60_s=_uniform(rng, ranges.rt60_s),
        src_pos=src_pos,
        mic_pos=mic_pos,
        filter_family=family,
        filter_order=default_filter_order(family),
        cutoff_hz=_uniform(rng, ranges.cutoff_hz),
        noise_position=noise_position,
    )


def with_recorded(spec: DistortionSpec, **recorded: Any) -> DistortionSpec:
    """Copy of `spec` with fields filled in by the pipeline."""
    return replace(spec, **recorded)
