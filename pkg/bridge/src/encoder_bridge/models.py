"""Encoder model adapters.

A model is any object with a ``name`` string, an ``expected_rate_hz``
(``None`` accepts any declared rate), and an ``encode(samples, rate_hz)``
method returning a ``(T, D)`` float32 array. Weights are loaded once at
construction and never mutated afterwards.
"""

from __future__ import annotations

import importlib

import numpy as np


class ModelLoadError(ValueError):
    """Raised when a model spec cannot be resolved."""


class StubEchoModel:
    """Identity model for protocol tests: one frame whose vector is the input."""

    def __init__(self, expected_rate_hz: int | None = None):
        self.name = "stub-echo"
        self.expected_rate_hz = expected_rate_hz

    def encode(self, samples: np.ndarray, rate_hz: int) -> np.ndarray:
        return np.asarray(samples, dtype=np.float32)[None, :]


def load_model(spec: str, expected_rate_hz: int | None = None):
    """Resolve a model spec string.

    ``"stub"`` needs no weights. Anything else is a ``module:factory``
    path; the factory is called with no arguments and must return a model
    object (this is how real pre-trained encoders plug in without this
    package shipping their weights).
    """
    if spec == "stub":
        return StubEchoModel(expected_rate_hz=expected_rate_hz)
    module_name, _, attr = spec.partition(":")
    if not module_name or not attr:
        raise ModelLoadError(
            f"model spec {spec!r} is neither 'stub' nor a 'module:factory' path"
        )
    try:
        module = importlib.import_module(module_name)
        factory = getattr(module, attr)
    except (ImportError, AttributeError) as exc:
        raise ModelLoadError(f"cannot load model {spec!r}: {exc}") from exc
    model = factory()
    if expected_rate_hz is not None:
        model.expected_rate_hz = expected_rate_hz
    return model
