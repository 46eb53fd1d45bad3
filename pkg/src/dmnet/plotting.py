"""Spectrogram figures."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from matplotlib.figure import Figure

from .constants import LSD_HOP, LSD_N_FFT, SAMPLE_RATE
from .metrics.spectral import power_spectrogram

if TYPE_CHECKING:
    from collections.abc import Mapping

    from numpy.typing import NDArray

    from .core import Waveform

logger = logging.getLogger(__name__)

FLOOR_DB = -80.0
COLORMAP = "magma"


@dataclass(frozen=True)
class SpectrogramPlot:
    """A written figure and the dB images drawn in it, (F, T) per panel."""

    path: Path
    images: dict[str, NDArray[np.float64]]
    freqs: NDArray[np.float64]


def spectrogram_images(
    panels: Mapping[str, Waveform],
    n_fft: int = LSD_N_FFT,
    hop: int = LSD_HOP,
    floor_db: float = FLOOR_DB,
) -> dict[str, NDArray[np.float64]]:
    """dB power spectrograms relative to the loudest bin over all panels, clipped at `floor_db`."""
    powers = {name: power_spectrogram(w.samples, n_fft, hop) for name, w in panels.items()}
    reference = max(float(p.max()) for p in powers.values()) or 1.0
    return {name: np.clip(10.0 * np.log10(p / reference + 1e-12), floor_db, 0.0) for name, p in powers.items()}


def plot_spectrograms(
    panels: Mapping[str, Waveform],
    out_path: str | Path,
    n_fft: int = LSD_N_FFT,
    hop: int = LSD_HOP,
) -> SpectrogramPlot:
    """Draw the panels side by side on one shared -80..0 dB colour scale and save the image."""
    out_path = Path(out_path)
    images = spectrogram_images(panels, n_fft, hop)
    freqs = np.fft.rfftfreq(n_fft, 1.0 / SAMPLE_RATE)

    fig = Figure(figsize=(4.0 * len(images) + 1.0, 3.5), layout="constrained")
    axes = fig.subplots(1, len(images), sharey=True, squeeze=False)[0]
    image = None
    for ax, (name, db) in zip(axes, images.items(), strict=True):
        duration = len(panels[name]) / SAMPLE_RATE
        image = ax.imshow(
            db,
            origin="lower",
            aspect="auto",
            extent=(0.0, duration, 0.0, SAMPLE_RATE / 2000.0),
            vmin=FLOOR_DB,
            vmax=0.0,
            cmap=COLORMAP,
        )
        ax.set_title(name)
        ax.set_xlabel("Time [s]")
    axes[0].set_ylabel("Frequency [kHz]")
    fig.colorbar(image, ax=list(axes), label="dB")

    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    logger.info("Wrote %s", out_path)
    return SpectrogramPlot(path=out_path, images=images, freqs=freqs)
