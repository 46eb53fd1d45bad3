"""Quality gate: measure what a degradation actually did and compare it to its spec."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from dmnet.audio import read_wav
from dmnet.constants import BANDWIDTH_TOLERANCE, RT60_TOLERANCE, SAMPLE_RATE, SNR_TOLERANCE_DB
from dmnet.core import UtteranceId, Waveform
from dmnet.errors import DataError, LengthError, VerificationError
from dmnet.metrics.measures import half_power_crossing, measured_snr, transfer_response
from dmnet.metrics.spectral import lsd

from .corpus import load_manifest
from .filters import design_lowpass, fit_cutoff, half_power_frequency
from .pipeline import speech_path

if TYPE_CHECKING:
    from pathlib import Path

    from numpy.typing import ArrayLike

    from .distortion import DistortionSpec

logger = logging.getLogger(__name__)

NYQUIST = SAMPLE_RATE / 2


@dataclass(frozen=True)
class VerificationReport:
    """Measured degradation of one utterance. `None` marks a check that does not apply."""

    id: UtteranceId
    snr_db: float
    snr_ok: bool
    bandwidth_hz: float
    bandwidth_ok: bool
    rt60_s: float | None
    rt60_ok: bool | None
    lsd_db: float | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        """Whether every applicable check passed."""
        return self.error is None and self.snr_ok and self.bandwidth_ok and self.rt60_ok is not False

    def failures(self) -> list[str]:
        """Names of the failed checks."""
        checks = (("snr", self.snr_ok), ("bandwidth", self.bandwidth_ok), ("rt60", self.rt60_ok))
        failed = [name for name, ok in checks if ok is False]
        if self.error is not None:
            failed.append("error")
        return failed

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation, infinities as strings."""
        out = asdict(self)
        out["snr_db"] = self.snr_db if math.isfinite(self.snr_db) else str(self.snr_db)
        out["passed"] = self.passed
        return out


def measure_bandwidth(reverberant: ArrayLike, observed: ArrayLike, spec: DistortionSpec) -> float:
    """-3 dB bandwidth of the path from the reverberant speech to the observed output.

    Without a filter stage this is the raw half-power crossing of the measured
    response. With one, the design of the claimed family that best matches the
    whole measured response is found and its own -3 dB point is reported.
    """
    freqs, response = transfer_response(reverberant, observed)
    crossing = float(half_power_crossing(freqs, response))
    if spec.filter_family is None:
        return crossing
    order = spec.resolved_filter_order
    cutoff = fit_cutoff(freqs, response, spec.filter_family, min(crossing, 0.7 * NYQUIST), order)
    return float(half_power_frequency(design_lowpass(spec.filter_family, cutoff, order)))


def verify_degradation(
    clean: Waveform,
    degraded: Waveform,
    spec: DistortionSpec,
    target: Waveform | None = None,
) -> VerificationReport:
    """Measure SNR, RT60 and bandwidth of `degraded` and check them against `spec`.

    `clean` is the source the degradation started from. The speech stages of
    `spec` are re-run on it; the residual between `degraded` (with the recorded
    output gain undone) and that speech gives the SNR, the RT60 comes from the
    regenerated impulse response, and the bandwidth is the -3 dB point of the
    path from the reverberant speech to `degraded`. The LSD is reported
    against `target` (defaults to `clean`). Failures are carried in the report.
    """
    utterance_id = degraded.id or clean.id
    if len(clean) != len(degraded):
        msg = f"{utterance_id}: clean has {len(clean)} samples, degraded {len(degraded)}"
        raise LengthError(msg)

    path = speech_path(clean.samples, spec)
    observed = np.asarray(degraded.samples, dtype=np.float64) / spec.output_gain

    snr = measured_snr(path.speech, observed)
    if spec.noise_enabled:
        assert spec.snr_db is not None
        snr_ok = abs(snr - spec.snr_db) <= SNR_TOLERANCE_DB
    else:
        snr_ok = math.isinf(snr) or snr > 60.0

    bandwidth = measure_bandwidth(path.reverberant, observed, spec)
    if spec.filter_enabled:
        assert spec.cutoff_hz is not None
        bandwidth_ok = abs(bandwidth / spec.cutoff_hz - 1.0) <= BANDWIDTH_TOLERANCE
    else:
        bandwidth_ok = bandwidth >= (1.0 - BANDWIDTH_TOLERANCE) * NYQUIST

    rt60 = path.rt60_measured_s
    rt60_ok = None
    if spec.rt60_s is not None and rt60 is not None:
        rt60_ok = abs(rt60 / spec.rt60_s - 1.0) <= RT60_TOLERANCE

    reference = target if target is not None else clean
    distance = float(lsd(reference.samples, degraded.samples)) if len(reference) == len(degraded) else None

    return VerificationReport(
        id=utterance_id,
        snr_db=float(snr),
        snr_ok=bool(snr_ok),
        bandwidth_hz=bandwidth,
        bandwidth_ok=bool(bandwidth_ok),
        rt60_s=rt60,
        rt60_ok=rt60_ok,
        lsd_db=distance,
    )


def verify_corpus(manifest: str | Path, *, strict: bool = False) -> list[VerificationReport]:
    """Verify every pair of a corpus manifest.

    Pairs whose audio cannot be read are reported with an error. With
    `strict`, any failure raises `VerificationError` after all pairs are checked.
    """
    reports = []
    for entry in load_manifest(manifest):
        try:
            if entry.source_path is None:
                msg = "manifest entry has no source path"
                raise LengthError(msg)
            source = read_wav(entry.source_path)
            degraded = read_wav(entry.degraded_path, entry.id)
            target = read_wav(entry.clean_path, entry.id)
            report = verify_degradation(source, degraded, entry.spec, target=target)
        except DataError as e:
            logger.warning("%s: verification error: %s", entry.id, e)
            report = VerificationReport(
                id=entry.id,
                snr_db=math.nan,
                snr_ok=False,
                bandwidth_hz=math.nan,
                bandwidth_ok=False,
                rt60_s=None,
                rt60_ok=None,
                error=str(e),
            )
        if not report.passed:
            logger.warning("%s: failed %s", report.id, ", ".join(report.failures()))
        reports.append(report)

    n_passed = sum(r.passed for r in reports)
    logger.info("Verified %d pairs, %d passed", len(reports), n_passed)
    if strict and n_passed < len(reports):
        msg = f"{len(reports) - n_passed} of {len(reports)} pairs failed verification"
        raise VerificationError(msg)
    return reports
