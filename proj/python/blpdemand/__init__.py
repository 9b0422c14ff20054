"""Logit demand estimation: share inversion, OLS / two-way FE / 2SLS, instrument diagnostics."""

import json
import os
from pathlib import Path

from ._blpdemand import (
    BlpError,
    __version__,
    chi_square_upper_tail,
    f_upper_tail,
    invert_shares,
    predict_shares,
    shares_from_quantities,
)
from . import _blpdemand

__all__ = [
    "BlpError",
    "chi_square_upper_tail",
    "diagnose",
    "estimate",
    "f_upper_tail",
    "generate_market",
    "invert_shares",
    "predict_shares",
    "shares_from_quantities",
    "simulate",
]


def _spec(spec):
    """Returns (json text, base directory) for a spec given as a dict or a path."""
    if isinstance(spec, dict):
        return json.dumps(spec), ""
    path = Path(spec)
    return path.read_text(), str(path.parent)


def estimate(spec, data=None, method=None):
    """Estimates the demand equation. `spec` is a dict or a path to a JSON spec."""
    text, base = _spec(spec)
    return _blpdemand.estimate(text, os.fspath(data) if data is not None else None, base, method)


def diagnose(spec, data=None):
    """First-stage F test and, when over-identified, the Sargan J test."""
    text, base = _spec(spec)
    return _blpdemand.diagnose(text, os.fspath(data) if data is not None else None, base)


def simulate(config, replications=None, seed=None, threads=0):
    """Monte Carlo summaries, one per estimator in the config (a dict)."""
    return _blpdemand.simulate(json.dumps(config), replications, seed, threads)


def generate_market(config, path):
    """Writes one simulated panel as CSV."""
    _blpdemand.generate_market(json.dumps(config), os.fspath(path))
