"""Privatize multivariate time series with spectral-density-preserving filters."""

import json

from ._mapfilt import MapfiltError, default_config, rum, sample_acvf, simulate
from ._mapfilt import privatize as _privatize

__all__ = ["MapfiltError", "default_config", "privatize", "rum", "sample_acvf", "simulate"]


def privatize(values, config=None, names=None):
    """Privatize the leading ``nx`` columns of ``values``.

    ``config`` may be a dict or a JSON string. The result dict carries the
    released array ``y`` and the parsed ``report``.
    """
    if config is None:
        config = {}
    text = config if isinstance(config, str) else json.dumps(config)
    out = _privatize(values, text, list(names or []))
    out["report"] = json.loads(out["report"])
    return out
