"""Monte Carlo verification of Gauss-Bonnet for manifolds with boundary."""

import json

from . import _core
from ._core import NumericalError, ValidationError, experiments, model_info, models, neumann_heat_kernel, spectral_note

__version__ = _core.version()

__all__ = [
    "NumericalError",
    "ValidationError",
    "calibrate",
    "cancellation_suite",
    "estimate_chi",
    "experiments",
    "model_info",
    "models",
    "neumann_heat_kernel",
    "run_config",
    "spectral_note",
]


def run_config(text, overrides=None, **keys):
    """Run a `key = value` config and return the report dict.

    `overrides` (for dotted keys such as "model.dimension") and keyword
    arguments replace keys of the text.
    """
    merged = {**(overrides or {}), **keys}
    return json.loads(_core.run_config(text, {k: str(v) for k, v in merged.items()}))


def estimate_chi(model, t, base_points, bridges, seed, params=None, steps=64, workers=0):
    return json.loads(
        _core.estimate_chi(model, dict(params or {}), t, base_points, bridges, seed, steps, workers)
    )


def cancellation_suite(seed, instances=100):
    return json.loads(_core.cancellation_suite(seed, instances))


def calibrate(dimensions=(2, 3, 4)):
    return json.loads(_core.calibrate(list(dimensions)))
