"""AWGN channel and the Gauss-Hermite machinery for exact output expectations.

The channel contract a model must satisfy to plug into the ascent loop:

* ``transmit(symbols, rng)`` draws outputs in reparameterized form, i.e. as a
  deterministic function of the input plus independently drawn noise, so
  pathwise gradients flow through the input;
* ``log_likelihood(received, sent)`` is the log channel density;
* ``expect_over_output(sent, grid, fn)`` evaluates E[fn(Y) | X=sent] exactly.

Only the AWGN instance ships; the rate objectives currently specialize to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from ._validation import as_rng


class Channel(Protocol):
    def transmit(self, symbols, rng) -> np.ndarray: ...

    def log_likelihood(self, received, sent) -> np.ndarray: ...

    def expect_over_output(self, sent, grid, fn) -> float: ...


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Hermite abscissae and weights for the weight function exp(-t^2).

    For Z ~ N(0, s^2):  E[f(Z)] = (1/sqrt(pi)) * sum_i w_i f(sqrt(2)*s*t_i).
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if abs(weights.sum() - math.sqrt(math.pi)) > 1e-10:
            raise ValueError("weights must sum to sqrt(pi)")
        if np.max(np.abs(nodes + nodes[::-1])) > 1e-10:
            raise ValueError("nodes must be symmetric about 0")
        for name, arr in (("nodes", nodes), ("weights", weights)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.nodes.size

    def complex_rule(self) -> tuple[np.ndarray, np.ndarray]:
        """Tensor-product rule for a unit circular complex Gaussian.

        Returns (u, v) with u complex offsets and v probability weights
        (sum v = 1) such that E[f(X + W)] = sum_k v_k f(X + sigma * u_k)
        for W circular complex Gaussian with total variance sigma^2.
        """
        u = (self.nodes[:, None] + 1j * self.nodes[None, :]).ravel()
        v = (self.weights[:, None] * self.weights[None, :]).ravel() / math.pi
        return u, v


def gh_grid(n: int) -> QuadratureGrid:
    """Gauss-Hermite rule with ``n`` nodes per real dimension, 1 <= n <= 128."""
    if not 1 <= int(n) <= 128:
        raise ValueError(f"node count must be in [1, 128], got {n}")
    nodes, weights = np.polynomial.hermite.hermgauss(int(n))
    return QuadratureGrid(nodes=nodes, weights=weights)


@dataclass(frozen=True)
class AwgnChannel:
    """Memoryless AWGN with circular complex noise of total variance sigma2.

    snr_db assumes unit mean signal power (guaranteed upstream by the power
    normalization), so sigma2 = 10^(-snr_db / 10).
    """

    snr_db: float
    sigma2: float

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2}")
        if abs(self.sigma2 - 10.0 ** (-self.snr_db / 10.0)) > 1e-12 * self.sigma2:
            raise ValueError("sigma2 inconsistent with snr_db")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "AwgnChannel":
        return cls(snr_db=float(snr_db), sigma2=10.0 ** (-float(snr_db) / 10.0))

    def transmit(self, symbols, rng) -> np.ndarray:
        """y = x + sqrt(sigma2/2) * (g_re + i g_im), g standard normal.

        The noise is a deterministic function of the rng stream alone, so the
        same seed applied to shifted inputs shifts the outputs identically.
        """
        x = np.asarray(symbols, dtype=np.complex128)
        gen = as_rng(rng)
        g = gen.standard_normal((x.size, 2))
        noise = math.sqrt(self.sigma2 / 2.0) * (g[:, 0] + 1j * g[:, 1])
        return x + noise.reshape(x.shape)

    def log_likelihood(self, received, sent) -> np.ndarray:
        """ln p(y|x) = -|y - x|^2 / sigma2 - ln(pi * sigma2), in nats."""
        y = np.asarray(received, dtype=np.complex128)
        x = np.asarray(sent, dtype=np.complex128)
        d = y - x
        return -(d.real**2 + d.imag**2) / self.sigma2 - math.log(math.pi * self.sigma2)

    def expect_over_output(self, sent, grid: QuadratureGrid, fn: Callable) -> float:
        """E[fn(Y) | X=sent] by the tensor-product Gauss-Hermite rule.

        ``fn`` must accept a complex ndarray and return an ndarray of values.
        """
        u, v = grid.complex_rule()
        y = complex(sent) + math.sqrt(self.sigma2) * u
        return float(np.sum(v * np.asarray(fn(y), dtype=np.float64)))
