"""Quota sampling: draw each symbol index close to B*p_m times, then permute.

This samples from the trainable distribution with no distributional
approximation; the only freedom is the integer rounding, resolved here by
largest-remainder apportionment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_prob_vector, as_rng


@dataclass(frozen=True)
class Batch:
    """A drawn training batch.

    indices : (B,) symbol indices in [0, M)
    counts  : (M,) occurrences per index; sums to B and deviates from B*p_m
              by at most 1 in absolute value.
    """

    indices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        for name in ("indices", "counts"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.indices.size


def quota_counts(probs, batch_size: int) -> np.ndarray:
    """Largest-remainder apportionment of ``batch_size`` draws among M cells.

    Every cell gets floor(B*p_m); the remaining units go to the largest
    fractional parts, ties broken toward the lower index.  The result sums
    to B exactly and |counts[m] - B*p_m| <= 1 for all m.
    """
    p = as_prob_vector(probs)
    b = int(batch_size)
    if b < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    quota = b * p
    counts = np.floor(quota).astype(np.int64)
    remainder = b - int(counts.sum())
    if remainder > 0:
        frac = quota - counts
        # stable sort on -frac keeps lower indices first among ties
        winners = np.argsort(-frac, kind="stable")[:remainder]
        counts[winners] += 1
    return counts


def sample_batch(probs, batch_size: int, rng) -> Batch:
    """Materialize the quota multiset and Fisher-Yates permute it.

    ``rng`` is a ``numpy.random.Generator`` (PCG64 via ``default_rng``) or a
    64-bit seed; identical (probs, batch_size, seed) give identical batches.
    """
    counts = quota_counts(probs, batch_size)
    gen = as_rng(rng)
    pool = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    return Batch(indices=gen.permutation(pool), counts=counts)
