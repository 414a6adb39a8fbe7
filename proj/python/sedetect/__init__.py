"""Spectral entropy signal detector (Python bindings)."""

import json

import numpy as np

from ._core import (
    ContractError,
    DegenerateClusters,
    InvalidInput,
    IoError,
    UndefinedQuantity,
    band_limited_snr,
    kmeans,
    median_filter,
    mix_at_snr,
    morse_filterbank,
    pulsed_sweep,
    simulate,
    soft_classify,
    spectral_entropy,
    surrogate_noise,
)
from ._core import detect_json as _detect_json


def detect(x, fs, **kwargs):
    """Run the detector and return the report as a dict.

    Per-sample scores come back as a numpy array under "scores".
    """
    report = json.loads(_detect_json(np.asarray(x, dtype=float), fs, **kwargs))
    if "scores" in report:
        report["scores"] = np.asarray(report["scores"])
    return report


__all__ = [
    "ContractError",
    "DegenerateClusters",
    "InvalidInput",
    "IoError",
    "UndefinedQuantity",
    "band_limited_snr",
    "detect",
    "kmeans",
    "median_filter",
    "mix_at_snr",
    "morse_filterbank",
    "pulsed_sweep",
    "simulate",
    "soft_classify",
    "spectral_entropy",
    "surrogate_noise",
]
