"""Corpus evaluation and report aggregation."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import stats

from dmnet.audio import read_wav
from dmnet.constants import LSD_HOP, LSD_N_FFT, SI_SDR_CAP_DB
from dmnet.core import Split, UtteranceId, Waveform
from dmnet.errors import ConfigurationError, CorpusError, DataError, DMNetError, DomainError
from dmnet.simulation.corpus import load_manifest

from .intelligibility import stoi
from .measures import measured_snr, si_sdr
from .spectral import lsd

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

# Externally computed measures and their valid ranges
EXTERNAL_RANGES: dict[str, tuple[float, float]] = {
    "pesq": (-0.5, 4.5),
    "csig": (1.0, 5.0),
    "cbak": (1.0, 5.0),
    "covl": (1.0, 5.0),
    "srmr": (0.0, math.inf),
}
INTERNAL_METRICS = ("lsd_db", "stoi", "si_sdr_db", "snr_db")
# Column order of the printed table
TABLE_COLUMNS = ("pesq", "csig", "cbak", "covl", "srmr", "lsd_db", "stoi", "si_sdr_db", "snr_db")
COLUMN_TITLES = {
    "pesq": "PESQ",
    "csig": "CSIG",
    "cbak": "CBAK",
    "covl": "COVL",
    "srmr": "SRMR",
    "lsd_db": "LSD",
    "stoi": "STOI",
    "si_sdr_db": "SI-SDR",
    "snr_db": "SNR",
}


@dataclass(frozen=True, slots=True)
class EvalConfig:
    """Evaluation settings."""

    lsd_n_fft: int = LSD_N_FFT
    lsd_hop: int = LSD_HOP
    si_sdr_cap: float = SI_SDR_CAP_DB
    confidence: float = 0.95
    split: Split | None = None

    def __post_init__(self) -> None:
        """Check ranges."""
        if not 0 < self.lsd_hop <= self.lsd_n_fft:
            msg = f"need 0 < lsd_hop <= lsd_n_fft, got {self.lsd_hop}, {self.lsd_n_fft}"
            raise ConfigurationError(msg)
        if not 0.0 < self.confidence < 1.0:
            msg = f"confidence must lie in (0, 1), got {self.confidence}"
            raise ConfigurationError(msg)


@dataclass(frozen=True)
class UtteranceScores:
    """Metric values of one utterance. `None` marks a value that could not be computed."""

    id: UtteranceId
    lsd_db: float | None = None
    stoi: float | None = None
    si_sdr_db: float | None = None
    snr_db: float | None = None
    external: dict[str, float] = field(default_factory=dict)
    missing: bool = False
    error: str | None = None

    def values(self) -> dict[str, float]:
        """Available metric values by column name."""
        internal = {name: getattr(self, name) for name in INTERNAL_METRICS}
        return {k: v for k, v in {**internal, **self.external}.items() if v is not None}

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return asdict(self)


@dataclass(frozen=True)
class MetricSummary:
    """Mean of a metric with its confidence interval."""

    mean: float
    ci_low: float
    ci_high: float
    n: int


def summarize(values: Sequence[float], confidence: float = 0.95) -> MetricSummary:
    """Arithmetic mean and Student-t confidence interval."""
    data = np.asarray(values, dtype=np.float64)
    mean = float(data.mean())
    if data.size < 2:
        return MetricSummary(mean=mean, ci_low=mean, ci_high=mean, n=int(data.size))
    sem = float(stats.sem(data))
    if sem == 0.0:
        return MetricSummary(mean=mean, ci_low=mean, ci_high=mean, n=int(data.size))
    low, high = stats.t.interval(confidence, data.size - 1, loc=mean, scale=sem)
    return MetricSummary(mean=mean, ci_low=float(low), ci_high=float(high), n=int(data.size))


@dataclass(frozen=True)
class EvalReport:
    """Per-utterance table, aggregates and the settings that produced them."""

    per_utterance: list[UtteranceScores]
    aggregate: dict[str, MetricSummary]
    config: dict[str, Any]
    label: str = "restored"

    @property
    def missing(self) -> list[UtteranceId]:
        """Utterances without an output file."""
        return [u.id for u in self.per_utterance if u.missing]

    @property
    def failed(self) -> list[UtteranceId]:
        """Utterances whose files could not be read."""
        return [u.id for u in self.per_utterance if u.error is not None]

    def to_jsonl(self) -> str:
        """One object per utterance, then one aggregate object."""
        lines = [json.dumps(u.to_dict(), sort_keys=True) for u in self.per_utterance]
        aggregate = {
            "aggregate": {name: asdict(summary) for name, summary in self.aggregate.items()},
            "config": self.config,
            "label": self.label,
            "failed": self.failed,
            "missing": self.missing,
        }
        lines.append(json.dumps(aggregate, sort_keys=True))
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        """Plain-text table of means and confidence half-widths."""
        columns = [c for c in TABLE_COLUMNS if c in self.aggregate]
        scored = len(self.per_utterance) - len(self.missing) - len(self.failed)
        header = (
            f"# {self.label}: {scored} utterances scored, {len(self.missing)} missing, {len(self.failed)} failed; "
            f"LSD on {self.config.get('lsd_n_fft')}-point Hann STFT, "
            f"hop {self.config.get('lsd_hop')}; intervals at {self.config.get('confidence')}"
        )
        titles = " ".join(f"{COLUMN_TITLES[c]:>16}" for c in columns)
        cells = []
        for c in columns:
            s = self.aggregate[c]
            cells.append(f"{s.mean:8.3f} ±{(s.ci_high - s.ci_low) / 2:6.3f}")
        return f"{header}\n{titles}\n{' '.join(f'{cell:>16}' for cell in cells)}\n"

    def write(self, out_dir: str | Path, stem: str = "report") -> tuple[Path, Path]:
        """Write `<stem>.jsonl` and `<stem>.txt` into `out_dir`."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        jsonl = out_dir / f"{stem}.jsonl"
        text = out_dir / f"{stem}.txt"
        jsonl.write_text(self.to_jsonl(), encoding="utf-8")
        text.write_text(self.summary_text(), encoding="utf-8")
        return jsonl, text


def load_external(path: str | Path) -> dict[UtteranceId, dict[str, float]]:
    """Externally computed scores, one JSON object with an ``id`` per line.

    Unreadable or malformed lines and unknown measure names raise
    `ConfigurationError`; values outside their valid range raise `DomainError`.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        msg = f"{path}: cannot read external scores ({e})"
        raise ConfigurationError(msg) from e
    scores: dict[UtteranceId, dict[str, float]] = {}
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            utterance_id = UtteranceId(str(record.pop("id")))
            values = {str(name): float(value) for name, value in record.items()}
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as e:
            msg = f"{path}:{number}: malformed score record ({e!r})"
            raise ConfigurationError(msg) from e
        unknown = set(record) - set(EXTERNAL_RANGES)
        if unknown:
            msg = f"{path}:{number}: unknown measures {sorted(unknown)}, expected {sorted(EXTERNAL_RANGES)}"
            raise ConfigurationError(msg)
        for name, value in values.items():
            lo, hi = EXTERNAL_RANGES[name]
            if not lo <= value <= hi:
                msg = f"{path}:{number}: {name} = {value} outside [{lo}, {hi}]"
                raise DomainError(msg)
        scores[utterance_id] = values
    return scores


@dataclass(frozen=True)
class EvalRequest:
    """Inputs of one evaluation. Without `restored_dir` the degraded files are scored."""

    manifest: Path
    restored_dir: Path | None = None
    external: Path | None = None


class Evaluator:
    """Scores restored files against the clean side of a corpus."""

    def __init__(self, config: EvalConfig | None = None) -> None:
        self.config = config or EvalConfig()

    def score(self, ref: Waveform, est: Waveform, utterance_id: UtteranceId) -> UtteranceScores:
        """All internal metrics of one pair; a metric that fails is logged and left empty."""
        cfg = self.config

        def attempt(name: str, fn: Any) -> float | None:
            try:
                return float(fn())
            except DataError as e:
                logger.warning("%s: %s not computed: %s", utterance_id, name, e)
                return None

        snr = attempt("snr", lambda: measured_snr(ref.samples, est.samples))
        return UtteranceScores(
            id=utterance_id,
            lsd_db=attempt("lsd", lambda: lsd(ref.samples, est.samples, cfg.lsd_n_fft, cfg.lsd_hop)),
            stoi=attempt("stoi", lambda: stoi(ref.samples, est.samples)),
            si_sdr_db=attempt("si_sdr", lambda: si_sdr(ref.samples, est.samples, cfg.si_sdr_cap)),
            snr_db=min(snr, cfg.si_sdr_cap) if snr is not None else None,
        )

    def evaluate(self, request: EvalRequest) -> EvalReport:
        """Score every pair of the manifest and aggregate."""
        entries = load_manifest(request.manifest)
        if self.config.split is not None:
            entries = [e for e in entries if e.split is self.config.split]
        if not entries:
            msg = f"{request.manifest}: no utterances to evaluate"
            raise CorpusError(msg)
        external = load_external(request.external) if request.external is not None else {}

        rows = []
        for entry in entries:
            est_path = request.restored_dir / f"{entry.id}.wav" if request.restored_dir else entry.degraded_path
            if not est_path.is_file():
                logger.warning("%s: no output at %s", entry.id, est_path)
                rows.append(UtteranceScores(id=entry.id, missing=True))
                continue
            try:
                ref = read_wav(entry.clean_path, entry.id)
                est = read_wav(est_path, entry.id)
                scores = self.score(ref, est, entry.id)
            except DMNetError as e:
                logger.warning("%s: not scored: %s", entry.id, e)
                rows.append(UtteranceScores(id=entry.id, error=f"{type(e).__name__}: {e}"))
                continue
            if entry.id in external:
                scores = UtteranceScores(**{**asdict(scores), "external": external[entry.id]})
            rows.append(scores)

        aggregate = {}
        for column in TABLE_COLUMNS:
            values = [row.values()[column] for row in rows if not row.missing and column in row.values()]
            if values:
                aggregate[column] = summarize(values, self.config.confidence)
        config = asdict(self.config)
        config["split"] = self.config.split.value if self.config.split else None
        label = "restored" if request.restored_dir else "noisy"
        return EvalReport(per_utterance=rows, aggregate=aggregate, config=config, label=label)


def evaluate(
    manifest: str | Path,
    restored_dir: str | Path | None = None,
    external: str | Path | None = None,
    config: EvalConfig | None = None,
) -> EvalReport:
    """Evaluate restored files (or the degraded ones) of a corpus."""
    request = EvalRequest(
        manifest=Path(manifest),
        restored_dir=Path(restored_dir) if restored_dir is not None else None,
        external=Path(external) if external is not None else None,
    )
    return Evaluator(config).evaluate(request)
