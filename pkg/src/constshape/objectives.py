"""Achievable-rate objectives and their analytic gradients.

Two objectives, both in bits:

* MI  (symbol-metric decoding): input entropy minus the categorical cross
  entropy of the exact symbol posterior.
* GMI (bit-metric decoding): input entropy plus the expected sum of bitwise
  posterior log-scores.

Each evaluates in two modes: ``BatchMC`` averages over a quota-sampled batch
through the reparameterized channel, ``ExactQuadrature`` replaces the channel
average with a Gauss-Hermite rule and serves as the verification oracle.

The gradient with respect to the probability logits is assembled from three
pieces: the entropy derivative, the pathwise derivative of the averaged score
(through the prior inside the posterior, the power normalization, and the
reparameterized channel output), and a correction term equal to the expected
score conditioned on each symbol.  The correction exists because the sampling
distribution itself is trainable; differentiating the batch average alone
would drop it.  ``fd_gradient`` is the independent finite-difference oracle
all of this is checked against.

Gradients are hand-assembled for this fixed computational graph
(normalization -> channel -> exact-posterior demapper -> objective); there is
no general autodiff here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

import numpy as np
from scipy.special import logsumexp

from .channel import AwgnChannel, gh_grid
from .constellation import LOG_FLOOR, Constellation, entropy_bits
from .sampler import Batch, sample_batch

LN2 = math.log(2.0)
_LOG_OF_FLOOR = math.log(LOG_FLOOR)
_BLOCK = 1 << 14  # samples per streamed block


class ObjectiveKind(Enum):
    MI = "mi"
    GMI = "gmi"


@dataclass(frozen=True)
class BatchMC:
    """Monte Carlo over one quota-sampled batch; fully determined by the seed."""

    batch_size: int
    seed: int


@dataclass(frozen=True)
class ExactQuadrature:
    """Exact channel-output expectation with n Gauss-Hermite nodes per real dim."""

    nodes: int = 32


EvalMode = Union[BatchMC, ExactQuadrature]


@dataclass(frozen=True)
class Gradients:
    """Ascent gradient of an objective, in bits per unit parameter.

    d_logits : (M,) derivative w.r.t. the probability logits (softmax chain
               applied, so the entries always sum to zero).
    d_points : (2M,) derivative w.r.t. (Re c_0, Im c_0, Re c_1, ...) of the
               raw (unnormalized) points.
    """

    d_logits: np.ndarray
    d_points: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.d_logits, self.d_points])


# ---------------------------------------------------------------------------
# streamed evaluation core
# ---------------------------------------------------------------------------

def _exact_blocks(constellation, channel, nodes) -> Iterator[tuple]:
    """Yield (y, origins, w, cond_w) blocks for the quadrature expectation.

    w are joint weights p_m * v_node (summing to 1 overall), cond_w the
    per-origin conditional weights v_node.
    """
    ctil = constellation.normalized_points()
    p = constellation.probabilities()
    u, v = gh_grid(nodes).complex_rule()
    sigma = math.sqrt(channel.sigma2)
    per = max(1, _BLOCK // u.size)
    for start in range(0, constellation.m, per):
        idx = np.arange(start, min(start + per, constellation.m))
        y = (ctil[idx][:, None] + sigma * u[None, :]).ravel()
        origins = np.repeat(idx, u.size)
        w = (p[idx][:, None] * v[None, :]).ravel()
        yield y, origins, w, np.tile(v, idx.size)


def _batch_blocks(batch: Batch, received) -> Iterator[tuple]:
    """Yield (y, origins, w, cond_w) blocks for a sampled batch.

    w is 1/B; cond_w is 1/count[origin], which makes the correction
    accumulator the per-symbol conditional mean (symbols that never appear
    contribute nothing).
    """
    counts = batch.counts
    inv_counts = np.zeros(counts.size)
    np.divide(1.0, counts, out=inv_counts, where=counts > 0)
    y = np.asarray(received, dtype=np.complex128)
    b = batch.size
    for start in range(0, b, _BLOCK):
        sl = slice(start, min(start + _BLOCK, b))
        idx = batch.indices[sl]
        yield y[sl], idx, np.full(idx.size, 1.0 / b), inv_counts[idx]


def _scan(constellation, channel, kind, blocks: Iterable[tuple], want_grad: bool):
    """Accumulate the score average and its gradient pieces over sample blocks.

    Returns (value, corr, d_prior, g_norm):
      value   : sum_t w_t f_t, the weighted score average in bits
      corr    : (M,) conditional score mean per origin symbol (correction term)
      d_prior : (M,) derivative of the score average through the prior inside
                the posterior, holding everything else fixed
      g_norm  : (M,) complex gradient w.r.t. the normalized points, counting
                both their role as channel inputs (reparameterized) and as the
                demapper's reference points
    """
    ctil = constellation.normalized_points()
    p = constellation.probabilities()
    logp = np.log(np.maximum(p, LOG_FLOOR))
    bits = constellation.labels.astype(bool)
    m = constellation.m
    sigma2 = channel.sigma2

    value = 0.0
    corr = np.zeros(m)
    d_prior = np.zeros(m)
    g_norm = np.zeros(m, dtype=np.complex128)

    for y, origins, w, cond_w in blocks:
        rows = np.arange(y.size)
        diff = y[:, None] - ctil[None, :]
        logw = logp[None, :] - (diff.real**2 + diff.imag**2) / sigma2
        logq = logw - logsumexp(logw, axis=1, keepdims=True)

        if kind is ObjectiveKind.MI:
            f = logq[rows, origins] / LN2
        else:
            k_bits = bits.shape[1]
            sent = bits[origins]  # (T, K)
            logq_sent = np.empty((y.size, k_bits))
            for k in range(k_bits):
                on = bits[:, k]
                logq1 = logsumexp(logq[:, on], axis=1)
                logq0 = logsumexp(logq[:, ~on], axis=1)
                logq_sent[:, k] = np.where(sent[:, k], logq1, logq0)
            np.maximum(logq_sent, _LOG_OF_FLOOR, out=logq_sent)
            f = logq_sent.sum(axis=1) / LN2

        value += float(w @ f)
        corr += np.bincount(origins, weights=cond_w * f, minlength=m)

        if not want_grad:
            continue

        q = np.exp(logq)
        if kind is ObjectiveKind.MI:
            # d(ln2 * f)/dQ_r is the one-hot 1/Q at the transmitted symbol
            lam_q = np.zeros_like(q)
            lam_q[rows, origins] = 1.0
            mu = np.ones(y.size)
        else:
            # d(ln2 * f)/dQ_r = sum_k [r in transmitted bit set_k] / q_k
            inv_q = np.exp(-logq_sent)
            lam = np.zeros_like(q)
            for k in range(bits.shape[1]):
                on = bits[:, k]
                member = np.where(sent[:, k][:, None], on[None, :], ~on[None, :])
                lam += np.where(member, inv_q[:, k][:, None], 0.0)
            lam_q = lam * q
            mu = lam_q.sum(axis=1)

        coef = lam_q - mu[:, None] * q
        wcoef = w[:, None] * coef
        d_prior += wcoef.sum(axis=0)
        g_norm += (wcoef * diff).sum(axis=0)
        err_post = (q * diff).sum(axis=1)
        err_lam = (lam_q * diff).sum(axis=1)
        scatter = w * (mu * err_post - err_lam)
        g_norm += np.bincount(origins, weights=scatter.real, minlength=m) + 1j * np.bincount(
            origins, weights=scatter.imag, minlength=m
        )

    d_prior /= np.maximum(p, LOG_FLOOR) * LN2
    g_norm *= 2.0 / (sigma2 * LN2)
    return value, corr, d_prior, g_norm


def _draw_batch(constellation, channel, mode: BatchMC):
    rng = np.random.default_rng(mode.seed)
    batch = sample_batch(constellation.probabilities(), mode.batch_size, rng)
    sent = constellation.normalized_points()[batch.indices]
    return batch, channel.transmit(sent, rng)


def _blocks_for(constellation, channel, mode: EvalMode):
    if isinstance(mode, ExactQuadrature):
        return _exact_blocks(constellation, channel, mode.nodes)
    if isinstance(mode, BatchMC):
        return _batch_blocks(*_draw_batch(constellation, channel, mode))
    raise TypeError(f"unsupported evaluation mode: {mode!r}")


def _score_average(constellation, channel, kind, mode) -> float:
    value, _, _, _ = _scan(
        constellation, channel, kind, _blocks_for(constellation, channel, mode), want_grad=False
    )
    return value


# ---------------------------------------------------------------------------
# objective values
# ---------------------------------------------------------------------------

def cross_entropy(constellation: Constellation, channel: AwgnChannel, mode: EvalMode) -> float:
    """Categorical cross entropy of the symbol posterior, in bits (>= 0)."""
    return -_score_average(constellation, channel, ObjectiveKind.MI, mode)


def mi(constellation: Constellation, channel: AwgnChannel, mode: EvalMode) -> float:
    """Symbol-metric achievable rate: input entropy minus cross entropy, bits.

    With the exact-posterior demapper the quadrature mode equals the channel's
    mutual information for this input distribution.
    """
    return constellation.entropy_bits() - cross_entropy(constellation, channel, mode)


def gmi(
    constellation: Constellation,
    channel: AwgnChannel,
    mode: EvalMode,
    *,
    clamped: bool = True,
) -> float:
    """Bit-metric achievable rate in bits.

    Reported rates are clamped at zero; pass ``clamped=False`` for the raw
    value used during training, where the clamp would kill the gradient.
    """
    value = constellation.entropy_bits() + _score_average(
        constellation, channel, ObjectiveKind.GMI, mode
    )
    return max(0.0, value) if clamped else value


def objective_value(
    constellation: Constellation,
    channel: AwgnChannel,
    mode: EvalMode,
    kind: ObjectiveKind,
) -> float:
    """MI or unclamped GMI under one name, for callers generic in the objective."""
    if kind is ObjectiveKind.MI:
        return mi(constellation, channel, mode)
    return gmi(constellation, channel, mode, clamped=False)


# ---------------------------------------------------------------------------
# analytic gradients
# ---------------------------------------------------------------------------

def _assemble(constellation, value, corr, d_prior, g_norm, include_correction):
    p = constellation.probabilities()
    points = constellation.points
    power = constellation.mean_power()
    scale = math.sqrt(power)

    # d/dp before the softmax chain: entropy piece, pathwise-through-prior
    # piece, conditional-score correction, and the power-normalization chain
    # (the normalized points move when any probability moves).
    d_p = -(np.log(np.maximum(p, LOG_FLOOR)) + 1.0) / LN2 + d_prior
    if include_correction:
        d_p = d_p + corr
    radial = float(np.sum((np.conj(g_norm) * (points / scale)).real))
    d_p = d_p - (points.real**2 + points.imag**2) * radial / (2.0 * power)

    d_logits = p * (d_p - float(np.dot(p, d_p)))

    d_pts_complex = g_norm / scale - (radial / power) * (p * points)
    d_points = np.empty(2 * constellation.m)
    d_points[0::2] = d_pts_complex.real
    d_points[1::2] = d_pts_complex.imag

    total = constellation.entropy_bits() + value
    return total, Gradients(d_logits=d_logits, d_points=d_points)


def _gradient(constellation, channel, kind, mode, include_correction):
    pieces = _scan(
        constellation, channel, kind, _blocks_for(constellation, channel, mode), want_grad=True
    )
    return _assemble(constellation, *pieces, include_correction)


def grad_mi(
    constellation: Constellation,
    channel: AwgnChannel,
    mode: EvalMode,
    *,
    include_correction: bool = True,
) -> Gradients:
    """Ascent gradient of the MI objective.

    ``include_correction=False`` drops the conditional-score correction term;
    only useful to demonstrate that the finite-difference check then fails.
    """
    return _gradient(constellation, channel, ObjectiveKind.MI, mode, include_correction)[1]


def grad_gmi(
    constellation: Constellation,
    channel: AwgnChannel,
    mode: EvalMode,
    *,
    include_correction: bool = True,
) -> Gradients:
    """Ascent gradient of the (unclamped) GMI objective."""
    return _gradient(constellation, channel, ObjectiveKind.GMI, mode, include_correction)[1]


def batch_objective_and_gradient(
    constellation: Constellation,
    channel: AwgnChannel,
    batch: Batch,
    received,
    kind: ObjectiveKind,
    *,
    include_correction: bool = True,
) -> tuple[float, Gradients]:
    """Objective estimate and gradient for an already materialized batch.

    This is the training-loop entry point: the caller owns the rng stream
    that produced ``batch`` and ``received``.
    """
    pieces = _scan(constellation, channel, kind, _batch_blocks(batch, received), want_grad=True)
    return _assemble(constellation, *pieces, include_correction)


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

def pack_parameters(constellation: Constellation) -> np.ndarray:
    """Flatten to [logits..., Re c_0, Im c_0, ...], matching Gradients.as_vector."""
    out = np.empty(3 * constellation.m)
    out[: constellation.m] = constellation.logits
    out[constellation.m :: 2] = constellation.points.real
    out[constellation.m + 1 :: 2] = constellation.points.imag
    return out


def unpack_parameters(vector, template: Constellation) -> Constellation:
    m = template.m
    vector = np.asarray(vector, dtype=np.float64)
    return template.replace(
        logits=vector[:m], points=vector[m::2] + 1j * vector[m + 1 :: 2]
    )


def _central_difference(fn, x0, step: float) -> np.ndarray:
    """Second-order central differences of a scalar function, one coordinate at a time."""
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.empty(x0.size)
    for i in range(x0.size):
        hi = x0.copy()
        lo = x0.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (fn(hi) - fn(lo)) / (2.0 * step)
    return grad


def fd_gradient(
    constellation: Constellation,
    channel: AwgnChannel,
    kind: ObjectiveKind,
    step: float = 1e-5,
    gh_nodes: int = 32,
) -> Gradients:
    """Central finite differences of the exact-quadrature objective.

    Logits are perturbed directly (the softmax is re-evaluated), point
    coordinates likewise.  This shares no code with the analytic gradient
    path beyond the objective itself.
    """
    if not 1e-7 <= step <= 1e-3:
        raise ValueError(f"step must lie in [1e-7, 1e-3], got {step}")
    mode = ExactQuadrature(gh_nodes)

    def objective(x):
        return objective_value(unpack_parameters(x, constellation), channel, mode, kind)

    grad = _central_difference(objective, pack_parameters(constellation), step)
    return Gradients(d_logits=grad[: constellation.m], d_points=grad[constellation.m :])


def relative_gradient_error(candidate: Gradients, reference: Gradients) -> float:
    """Largest coordinate discrepancy, denominated by the reference gradient's
    max-norm (coordinate-wise relative error against the FD oracle)."""
    diff = candidate.as_vector() - reference.as_vector()
    denom = max(float(np.max(np.abs(reference.as_vector()))), 1e-30)
    return float(np.max(np.abs(diff))) / denom
