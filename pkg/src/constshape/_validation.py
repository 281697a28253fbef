"""Input validation helpers shared by the library, the estimator and the CLI."""

from __future__ import annotations

import math

import numpy as np

PROB_SUM_TOL = 1e-9


def check_power_of_four(m) -> int:
    """Return ``m`` as int if it is 4, 16, 64, 256, ... else raise ValueError."""
    m_int = int(m)
    if m_int != m or m_int < 4:
        raise ValueError(f"constellation size must be a power of four >= 4, got {m!r}")
    root = round(math.sqrt(m_int))
    if root * root != m_int or root & (root - 1) != 0:
        raise ValueError(f"constellation size must be a power of four, got {m}")
    return m_int


def as_prob_vector(p, m: int | None = None, *, name: str = "probs") -> np.ndarray:
    """Validate a probability vector: 1-D, finite, nonnegative, sums to 1."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if m is not None and arr.size != m:
        raise ValueError(f"{name} must have length {m}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"{name} must sum to 1, got {total!r}")
    return arr


def as_complex_points(c, m: int | None = None, *, name: str = "points") -> np.ndarray:
    """Coerce constellation points to a finite complex128 vector.

    Accepts a complex 1-D array or an (M, 2) real array of (re, im) pairs.
    """
    arr = np.asarray(c)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D complex array")
    if m is not None and arr.size != m:
        raise ValueError(f"{name} must have length {m}, got {arr.size}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} must be finite")
    return arr


def as_finite_logits(logits, m: int | None = None) -> np.ndarray:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("logits must be a nonempty 1-D array")
    if m is not None and arr.size != m:
        raise ValueError(f"logits must have length {m}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("logits must be finite")
    return arr


def as_labels(labels, m: int) -> np.ndarray:
    """Coerce bit labels to a distinct (M, K) uint8 matrix, K = ceil(log2 M).

    Accepts an (M, K) 0/1 array or a sequence of M equal-length bit strings.
    """
    k_expected = math.ceil(math.log2(m)) if m > 1 else 0
    if isinstance(labels, (list, tuple)) and labels and isinstance(labels[0], str):
        labels = [[int(ch) for ch in s] for s in labels]
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim == 1 and arr.size == m and k_expected == 0:
        arr = arr.reshape(m, 0)
    if arr.ndim != 2 or arr.shape[0] != m:
        raise ValueError(f"labels must be an ({m}, K) bit matrix")
    if arr.shape[1] != k_expected:
        raise ValueError(
            f"labels must carry {k_expected} bits per symbol for M={m}, got {arr.shape[1]}"
        )
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("labels must contain only 0/1 entries")
    if len({tuple(row) for row in arr.tolist()}) != m:
        raise ValueError("labels must be distinct")
    return arr.astype(np.uint8)


def as_rng(seed) -> np.random.Generator:
    """Pass through a Generator, otherwise seed a fresh PCG64 stream."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
