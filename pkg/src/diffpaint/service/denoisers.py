"""Denoiser resolution shared by the CLI and the job service.

A denoiser reference is either:
  - ``flat`` or ``flat:<sigma>``: a zero-mean isotropic image prior built at
    the canvas shape (always available, no training needed);
  - ``gmm:<path.json>``: an isotropic mixture loaded from a JSON file;
  - an inline dict ``{"gmm": {...}}`` (API form);
  - any other string: a path to trained toy-denoiser weights.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..denoiser import Denoiser, GmmDenoiser, GmmModel
from ..schedule import Schedule

DEFAULT_FLAT_SIGMA = 0.5


def resolve_denoiser(
    ref: str | dict | None, schedule: Schedule, event_shape: tuple[int, ...]
) -> Denoiser:
    if ref is None:
        ref = "flat"
    if isinstance(ref, dict):
        if "gmm" not in ref:
            raise ValueError("inline denoiser must be {'gmm': {...}}")
        return GmmDenoiser(GmmModel.from_dict(ref["gmm"]), schedule)
    if ref == "flat" or ref.startswith("flat:"):
        sigma = float(ref.split(":", 1)[1]) if ":" in ref else DEFAULT_FLAT_SIGMA
        model = GmmModel(
            weights=np.array([1.0]),
            means=np.zeros((1, *event_shape)),
            sigma=np.array([sigma]),
        )
        return GmmDenoiser(model, schedule)
    if ref.startswith("gmm:"):
        path = Path(ref.split(":", 1)[1])
        model = GmmModel.from_dict(json.loads(path.read_text()))
        return GmmDenoiser(model, schedule)
    from ..toy import ToyDenoiser  # deferred: pulls in torch

    den = ToyDenoiser.load(ref)
    if den.T != schedule.T:
        raise ValueError(f"weights trained for T={den.T}, schedule has T={schedule.T}")
    return den
