"""Multiscale routing operator for time series."""

import json

from . import _core
from ._core import RomanError, __version__

__all__ = ["transform", "generate", "RomanError", "__version__"]


def transform(values, scales, alpha=0.5, threads=1):
    """Route an N x C x L float array; returns (N x C' x L_base array, plan dict)."""
    routed, plan = _core.transform(values, scales, alpha, threads)
    return routed, json.loads(plan)


def generate(family, seed=0, length=512, n_train=500, n_test=250):
    """Synthetic task as a dict with X_train, y_train, X_test, y_test and metadata."""
    out = _core.generate(family, seed, length, n_train, n_test)
    out["metadata"] = json.loads(out["metadata"])
    return out
