"""Python access to the toeplitz_hc core: presets, classification, sections and eigenvectors."""

import json

import numpy as np

from . import _core
from ._core import ToeplitzError

__all__ = [
    "ToeplitzError",
    "example_ids",
    "example",
    "classify",
    "preimage_count",
    "section_apply",
    "eigenvectors",
]


def _symbol_text(symbol):
    return symbol if isinstance(symbol, str) else json.dumps(symbol)


def example_ids():
    return list(_core.example_ids())


def example(example_id, **params):
    """Fixture dict with keys id, params, symbol, h and notes."""
    return json.loads(_core.example(example_id, json.dumps(params)))


def classify(symbol, grid=512):
    """Condition report for a symbol dict, fixture dict or JSON string."""
    return json.loads(_core.classify(_symbol_text(symbol), grid))


def preimage_count(symbol, w, rho=1.0):
    return _core.preimage_count(_symbol_text(symbol), complex(w), rho)


def section_apply(symbol, x, dense=False):
    """T_n x for the n x n section, n = len(x)."""
    x = np.asarray(x, dtype=complex)
    return np.asarray(_core.section_apply(_symbol_text(symbol), list(x), dense))


def eigenvectors(symbol, lam, n=512):
    """One dict per monomial basis choice, with coeffs as a numpy array."""
    rows = _core.eigenvectors(_symbol_text(symbol), complex(lam), n)
    for r in rows:
        r["coeffs"] = np.asarray(r["coeffs"])
    return rows
