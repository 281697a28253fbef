"""Adam-driven ascent loop tying sampler, channel, demapper and objectives
together under a shaping mode."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import AwgnChannel
from .constellation import Constellation, ShapingMode, qam_init
from .objectives import (
    ExactQuadrature,
    ObjectiveKind,
    batch_objective_and_gradient,
    objective_value,
)
from .sampler import sample_batch


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one training run (one SNR, one objective, one mode)."""

    m: int = 16
    snr_db: float = 8.0
    objective: ObjectiveKind = ObjectiveKind.MI
    mode: ShapingMode = ShapingMode.PROBABILISTIC_ONLY
    batch_size: int = 4000
    learning_rate: float = 5e-3
    steps: int = 3000
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    eval_every: int = 100
    gh_nodes: int = 32

    def validate(self) -> None:
        if self.batch_size < self.m:
            raise ValueError(f"batch_size must be >= m ({self.m}), got {self.batch_size}")
        if not 0.0 < self.learning_rate < 1.0:
            raise ValueError(f"learning_rate must lie in (0, 1), got {self.learning_rate}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")


@dataclass(frozen=True)
class TraceRecord:
    """One evaluation row: batch estimate at this step, exact value after the update."""

    step: int
    batch_objective: float
    exact_objective: float
    entropy_bits: float


@dataclass(frozen=True)
class TrainResult:
    constellation: Constellation
    trace: tuple[TraceRecord, ...]
    config: TrainConfig


class TrainingError(RuntimeError):
    """Raised when the objective or gradient turns non-finite; carries the step."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m1: np.ndarray
    m2: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m1=np.zeros(n), m2=np.zeros(n))


def adam_step(
    params,
    grads,
    state: AdamState,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update in the ascent direction (+lr)."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m1.shape:
        raise ValueError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.m1.shape}"
        )
    t = state.t + 1
    m1 = beta1 * state.m1 + (1.0 - beta1) * grads
    m2 = beta2 * state.m2 + (1.0 - beta2) * grads**2
    m1_hat = m1 / (1.0 - beta1**t)
    m2_hat = m2 / (1.0 - beta2**t)
    updated = params + learning_rate * m1_hat / (np.sqrt(m2_hat) + eps)
    return updated, AdamState(m1=m1, m2=m2, t=t)


def train(config: TrainConfig) -> TrainResult:
    """Run the full ascent loop from the QAM start.

    Per step: quota-sample a batch from the current probabilities, normalize,
    transmit through the reparameterized channel, evaluate the batch objective
    and its gradient (correction term included), mask the gradient per the
    shaping mode, and take one Adam step.  Every ``eval_every`` steps, and at
    the final step, the exact-quadrature objective of the updated
    constellation is appended to the trace.
    """
    config.validate()
    channel = AwgnChannel.from_snr_db(config.snr_db)
    current = qam_init(config.m)
    rng = np.random.default_rng(config.seed)
    exact_mode = ExactQuadrature(config.gh_nodes)
    m = config.m

    state = AdamState.zeros(3 * m)
    trace: list[TraceRecord] = []

    for step in range(1, config.steps + 1):
        probs = current.probabilities()
        batch = sample_batch(probs, config.batch_size, rng)
        sent = current.normalized_points()[batch.indices]
        received = channel.transmit(sent, rng)
        batch_value, grads = batch_objective_and_gradient(
            current, channel, batch, received, config.objective
        )

        d_logits = grads.d_logits
        d_points = grads.d_points
        if config.mode is ShapingMode.GEOMETRIC_ONLY:
            d_logits = np.zeros_like(d_logits)
        elif config.mode is ShapingMode.PROBABILISTIC_ONLY:
            d_points = np.zeros_like(d_points)

        grad_vec = np.concatenate([d_logits, d_points])
        if not (np.isfinite(batch_value) and np.all(np.isfinite(grad_vec))):
            raise TrainingError(f"non-finite objective or gradient at step {step}", step)

        params = np.concatenate(
            [current.logits, current.points.view(np.float64)]
        )
        params, state = adam_step(
            params,
            grad_vec,
            state,
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
        )
        current = current.replace(
            logits=params[:m], points=params[m::2] + 1j * params[m + 1 :: 2]
        )

        if step % config.eval_every == 0 or step == config.steps:
            trace.append(
                TraceRecord(
                    step=step,
                    batch_objective=batch_value,
                    exact_objective=objective_value(
                        current, channel, exact_mode, config.objective
                    ),
                    entropy_bits=current.entropy_bits(),
                )
            )

    return TrainResult(constellation=current, trace=tuple(trace), config=config)
