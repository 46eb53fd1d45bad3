"""Short-time objective intelligibility (classical, non-extended form), computed by `pystoi`."""

from __future__ import annotations

import warnings
from typing import TYPE_CHECKING

import numpy as np
from pystoi import stoi as _pystoi

from dmnet.constants import SAMPLE_RATE
from dmnet.errors import EnergyError, LengthError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

SEGMENT_MS = 384


def stoi(ref: ArrayLike, est: ArrayLike, sample_rate: int = SAMPLE_RATE) -> float:
    """Intelligibility score of `est` against `ref`, in [-1, 1].

    pystoi returns a placeholder of 1e-5 with a warning when fewer than one
    384 ms segment of active speech survives silence removal; that case is
    raised as a `LengthError` instead.
    """
    x = np.asarray(ref, dtype=np.float64)
    y = np.asarray(est, dtype=np.float64)
    if x.shape != y.shape:
        msg = f"reference has {x.shape[0]} samples, estimate {y.shape[0]}"
        raise LengthError(msg)
    if not np.any(x):
        msg = "reference is silent, STOI undefined"
        raise EnergyError(msg)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        score = float(_pystoi(x, y, sample_rate, extended=False))
    if any(issubclass(w.category, RuntimeWarning) and "Not enough STFT frames" in str(w.message) for w in caught):
        msg = f"too little active speech after silence removal, STOI needs at least {SEGMENT_MS} ms"
        raise LengthError(msg)
    return score
