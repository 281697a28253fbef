"""Exact Bayes demappers for the AWGN channel.

Symbol posteriors feed symbol-metric decoding, bitwise posteriors feed
bit-metric decoding.  All arithmetic stays in the log domain until the
boundary, so high-SNR likelihood spreads do not underflow.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .channel import AwgnChannel
from .constellation import LOG_FLOOR, Constellation


def smd_log_posterior(received, constellation: Constellation, channel: AwgnChannel) -> np.ndarray:
    """ln Q(c_m | y) for each point, shape (..., M).

    Q(c_m | y) = p_m exp(-|y - c~_m|^2 / sigma2) / sum_j p_j exp(-|y - c~_j|^2 / sigma2)

    with c~ the power-normalized points (normalization happens inside the
    call).  Max-shifted, so any constant added to all log-likelihoods cancels.
    """
    y = np.asarray(received, dtype=np.complex128)
    ctil = constellation.normalized_points()
    logp = np.log(np.maximum(constellation.probabilities(), LOG_FLOOR))
    d = y[..., None] - ctil
    logw = logp - (d.real**2 + d.imag**2) / channel.sigma2
    return logw - logsumexp(logw, axis=-1, keepdims=True)


def smd_posterior(received, constellation: Constellation, channel: AwgnChannel) -> np.ndarray:
    """Symbol posterior Q(c_m | y), shape (..., M); rows sum to 1."""
    return np.exp(smd_log_posterior(received, constellation, channel))


def bmd_posterior(received, constellation: Constellation, channel: AwgnChannel) -> np.ndarray:
    """Bitwise posteriors q(b_k = 1 | y), shape (..., K).

    Marginalizes the symbol posterior over the points whose label carries a
    one in position k.
    """
    logq = smd_log_posterior(received, constellation, channel)
    bits = constellation.labels.astype(bool)
    cols = []
    for k in range(constellation.bits_per_symbol):
        cols.append(logsumexp(logq[..., bits[:, k]], axis=-1))
    if not cols:
        return np.zeros(logq.shape[:-1] + (0,))
    return np.exp(np.stack(cols, axis=-1))
