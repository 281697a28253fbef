"""Ground-truth comparators: Maxwell-Boltzmann shaping and uniform QAM rates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import AwgnChannel
from .constellation import LOG_FLOOR, maxwell_boltzmann, qam_init
from .objectives import ExactQuadrature, ObjectiveKind, gmi, mi

NU_MAX = 5.0  # search range for the MB rate on the unit-power grid

_SCHEMES = ("uniform", "mb", "learned-pcs", "learned-geopcs", "learned-geo")


@dataclass(frozen=True)
class RateRecord:
    """One row of an output rate curve."""

    scheme: str
    m: int
    snr_db: float
    objective: ObjectiveKind
    rate_bits: float
    entropy_bits: float

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        slack = 1e-9
        chain_ok = (
            0.0 <= self.rate_bits <= self.entropy_bits + slack
            and self.entropy_bits <= math.log2(self.m) + slack
        )
        if not chain_ok:
            raise ValueError(
                f"rate chain violated: 0 <= {self.rate_bits} <= {self.entropy_bits}"
                f" <= log2({self.m})"
            )


@dataclass(frozen=True)
class MbResult:
    """Optimized Maxwell-Boltzmann point: rate parameter, probabilities, rate."""

    nu: float
    probs: np.ndarray
    rate_bits: float
    objective: ObjectiveKind


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fn, lo: float, hi: float, tol: float) -> float:
    """Golden-section maximizer of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def mb_rate(m: int, snr_db: float, nu: float, objective: ObjectiveKind, gh_nodes: int = 32) -> float:
    """Exact rate of the Maxwell-Boltzmann distribution with parameter nu on
    the unit-power QAM grid (renormalized per nu, like the trainable system)."""
    base = qam_init(m)
    channel = AwgnChannel.from_snr_db(snr_db)
    probs = maxwell_boltzmann(base.points, nu)
    shaped = base.replace(logits=np.log(np.maximum(probs, LOG_FLOOR)))
    mode = ExactQuadrature(gh_nodes)
    if objective is ObjectiveKind.MI:
        return mi(shaped, channel, mode)
    return gmi(shaped, channel, mode, clamped=False)


def mb_optimize(
    m: int, snr_db: float, objective: ObjectiveKind, gh_nodes: int = 32
) -> MbResult:
    """Maximize the exact MI or GMI over the Maxwell-Boltzmann family.

    Scalar golden-section search over nu in [0, 5] to |delta nu| <= 1e-6;
    the points stay on the QAM grid and are power-renormalized per nu.
    """
    nu = _golden_max(
        lambda x: mb_rate(m, snr_db, x, objective, gh_nodes), 0.0, NU_MAX, tol=1e-6
    )
    probs = maxwell_boltzmann(qam_init(m).points, nu)
    rate = mb_rate(m, snr_db, nu, objective, gh_nodes)
    if objective is ObjectiveKind.GMI:
        rate = max(0.0, rate)
    return MbResult(nu=nu, probs=probs, rate_bits=rate, objective=objective)


def uniform_rates(m: int, snr_grid, gh_nodes: int = 32) -> list[RateRecord]:
    """Exact MI and GMI of uniform Gray QAM at every SNR in the grid."""
    base = qam_init(m)
    entropy = base.entropy_bits()
    mode = ExactQuadrature(gh_nodes)
    records = []
    for snr_db in snr_grid:
        channel = AwgnChannel.from_snr_db(float(snr_db))
        records.append(
            RateRecord(
                scheme="uniform",
                m=m,
                snr_db=float(snr_db),
                objective=ObjectiveKind.MI,
                rate_bits=mi(base, channel, mode),
                entropy_bits=entropy,
            )
        )
        records.append(
            RateRecord(
                scheme="uniform",
                m=m,
                snr_db=float(snr_db),
                objective=ObjectiveKind.GMI,
                rate_bits=gmi(base, channel, mode),
                entropy_bits=entropy,
            )
        )
    return records
