"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np


def check_counts(X) -> np.ndarray:
    """Validate and coerce a counts matrix to an int64 array of shape (n, k).

    Every entry must be a finite nonnegative integer; rows are experiment
    runs, columns are detector layers ordered front to back.
    """
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"counts must be a 2-d array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"counts must be non-empty, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"counts must be numeric, got dtype {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("counts must be finite")
    as_int = arr.astype(np.int64)
    if not np.array_equal(as_int, arr):
        raise ValueError("counts must be integer-valued")
    if np.any(as_int < 0):
        raise ValueError("counts must be nonnegative")
    return as_int


def check_probability(p: float, name: str = "p", *, open_low: bool = False,
                      open_high: bool = False) -> float:
    """Validate a probability, optionally excluding one or both endpoints."""
    p = float(p)
    if not np.isfinite(p):
        raise ValueError(f"{name} must be finite, got {p}")
    if p < 0.0 or p > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    if open_low and p == 0.0:
        raise ValueError(f"{name} must be > 0")
    if open_high and p == 1.0:
        raise ValueError(f"{name} must be < 1")
    return p


def check_positive(x: float, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {x}")
    return x


def check_nonnegative(x: float, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x < 0.0:
        raise ValueError(f"{name} must be a nonnegative finite number, got {x}")
    return x


def check_layer_count(k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"layer count k must be an integer >= 1, got {k}")
    return int(k)


def check_run_count(n: int, minimum: int = 1, name: str = "n") -> int:
    if int(n) != n or n < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {n}")
    return int(n)
