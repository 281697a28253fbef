"""Constellation state: points, probability logits, bit labels, and the
Maxwell-Boltzmann family used as the shaping baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._validation import (
    as_complex_points,
    as_finite_logits,
    as_labels,
    as_prob_vector,
    check_power_of_four,
)

LOG_FLOOR = 1e-300


class ShapingMode(Enum):
    """Which parameter group gradient ascent is allowed to move."""

    GEOMETRIC_ONLY = "geo"
    PROBABILISTIC_ONLY = "prob"
    JOINT = "joint"


def probabilities(logits) -> np.ndarray:
    """Softmax of the probability logits, computed with max-subtraction.

    Adding a constant to all logits leaves the result unchanged, so the
    logits are free parameters with no sum constraint.
    """
    arr = as_finite_logits(logits)
    shifted = arr - arr.max()
    w = np.exp(shifted)
    return w / w.sum()


def entropy_bits(probs) -> float:
    """Shannon entropy -sum p log2 p in bits; masses below 1e-300 contribute 0."""
    p = as_prob_vector(probs)
    mask = p > LOG_FLOOR
    return float(-(p[mask] * np.log2(p[mask])).sum())


def gray_labels(m: int) -> np.ndarray:
    """Per-axis binary-reflected Gray labels for the square grid of size M.

    The I-axis code word is concatenated with the Q-axis code word, so any
    two grid-adjacent points differ in exactly one bit.  Row order matches
    :func:`qam_init` (I level index outer, Q level index inner).
    """
    m = check_power_of_four(m)
    side = round(math.sqrt(m))
    bits_per_axis = side.bit_length() - 1
    axis = np.array(
        [[(i ^ (i >> 1)) >> b & 1 for b in range(bits_per_axis - 1, -1, -1)] for i in range(side)],
        dtype=np.uint8,
    )
    rows = []
    for u in range(side):
        for v in range(side):
            rows.append(np.concatenate([axis[u], axis[v]]))
    return np.asarray(rows, dtype=np.uint8)


def bit_marginals(probs, labels) -> np.ndarray:
    """Marginal bit probabilities, shape (K, 2) with columns (P(b=0), P(b=1))."""
    p = as_prob_vector(probs)
    lab = as_labels(labels, p.size)
    p1 = p @ lab.astype(np.float64)
    return np.stack([1.0 - p1, p1], axis=1)


def maxwell_boltzmann(points, nu: float) -> np.ndarray:
    """Probabilities p_m proportional to exp(-nu |c_m|^2), max-shifted for stability."""
    c = as_complex_points(points)
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    logw = -nu * (c.real**2 + c.imag**2)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


@dataclass(frozen=True)
class Constellation:
    """M complex points with trainable probability logits and fixed bit labels.

    points : (M,) complex, unnormalized; pass through :func:`normalized_points`
             before transmission so the mean power constraint holds.
    logits : (M,) float; probabilities are softmax(logits).
    labels : (M, K) 0/1 matrix, K = ceil(log2 M), rows distinct.

    Values are immutable; the arrays are marked read-only and updates go
    through :meth:`replace`.
    """

    points: np.ndarray
    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = as_complex_points(self.points)
        lg = as_finite_logits(self.logits, pts.size)
        lab = as_labels(self.labels, pts.size)
        for name, arr in (("points", pts), ("logits", lg), ("labels", lab)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    def probabilities(self) -> np.ndarray:
        return probabilities(self.logits)

    def normalized_points(self) -> np.ndarray:
        return normalized_points(self)

    def entropy_bits(self) -> float:
        return entropy_bits(self.probabilities())

    def mean_power(self) -> float:
        """Mean power sum p |c|^2 of the raw (unnormalized) points."""
        p = self.probabilities()
        return float(np.sum(p * (self.points.real**2 + self.points.imag**2)))

    def replace(self, *, points=None, logits=None) -> "Constellation":
        """New constellation with updated points and/or logits; labels never change."""
        return Constellation(
            points=self.points if points is None else points,
            logits=self.logits if logits is None else logits,
            labels=self.labels,
        )

    def label_strings(self) -> list[str]:
        return ["".join(str(b) for b in row) for row in self.labels.tolist()]

    def to_dict(self) -> dict:
        """JSON-ready form: probabilities are stored, logits recovered as ln(p)."""
        p = self.probabilities()
        return {
            "m": self.m,
            "points": [[float(c.real), float(c.imag)] for c in self.points],
            "probs": [float(x) for x in p],
            "labels": self.label_strings(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Constellation":
        m = int(data["m"])
        points = as_complex_points(data["points"], m)
        probs = as_prob_vector(data["probs"], m)
        logits = np.log(np.maximum(probs, LOG_FLOOR))
        return cls(points=points, logits=logits, labels=as_labels(data["labels"], m))


def normalized_points(constellation: Constellation) -> np.ndarray:
    """Points scaled so that sum_m p_m |c_m|^2 = 1.

    The scale depends on the probabilities, so it is recomputed on every call
    and gradients must flow through it.
    """
    power = constellation.mean_power()
    if power <= 0.0:
        raise ValueError("cannot normalize a constellation with zero mean power")
    return constellation.points / math.sqrt(power)


def qam_init(m: int) -> Constellation:
    """Square QAM grid with unit mean power, uniform logits and Gray labels.

    Grid coordinates are the odd integers per axis, scaled so that the mean
    power under the uniform distribution is exactly 1.
    """
    m = check_power_of_four(m)
    side = round(math.sqrt(m))
    levels = np.arange(-(side - 1), side, 2, dtype=np.float64)
    points = (levels[:, None] + 1j * levels[None, :]).ravel()
    scale = math.sqrt(2.0 * float(np.mean(levels**2)))
    return Constellation(
        points=points / scale,
        logits=np.zeros(m),
        labels=gray_labels(m),
    )
