"""Joint geometric and probabilistic constellation shaping by gradient ascent
on achievable rates (MI for symbol-metric, GMI for bit-metric decoding) over
a differentiable AWGN channel."""

from .baselines import MbResult, RateRecord, mb_optimize, mb_rate, uniform_rates
from .channel import AwgnChannel, Channel, QuadratureGrid, gh_grid
from .constellation import (
    Constellation,
    ShapingMode,
    bit_marginals,
    entropy_bits,
    gray_labels,
    maxwell_boltzmann,
    normalized_points,
    probabilities,
    qam_init,
)
from .demapper import bmd_posterior, smd_log_posterior, smd_posterior
from .estimator import ConstellationShaper
from .objectives import (
    BatchMC,
    EvalMode,
    ExactQuadrature,
    Gradients,
    ObjectiveKind,
    batch_objective_and_gradient,
    cross_entropy,
    fd_gradient,
    gmi,
    grad_gmi,
    grad_mi,
    mi,
    objective_value,
    relative_gradient_error,
)
from .sampler import Batch, quota_counts, sample_batch
from .training import (
    AdamState,
    TraceRecord,
    TrainConfig,
    TrainResult,
    TrainingError,
    adam_step,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "AwgnChannel",
    "Batch",
    "BatchMC",
    "Channel",
    "Constellation",
    "ConstellationShaper",
    "EvalMode",
    "ExactQuadrature",
    "Gradients",
    "MbResult",
    "ObjectiveKind",
    "QuadratureGrid",
    "RateRecord",
    "ShapingMode",
    "TraceRecord",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "adam_step",
    "batch_objective_and_gradient",
    "bit_marginals",
    "bmd_posterior",
    "cross_entropy",
    "entropy_bits",
    "fd_gradient",
    "gh_grid",
    "gmi",
    "grad_gmi",
    "grad_mi",
    "gray_labels",
    "maxwell_boltzmann",
    "mb_optimize",
    "mb_rate",
    "mi",
    "normalized_points",
    "objective_value",
    "probabilities",
    "qam_init",
    "quota_counts",
    "relative_gradient_error",
    "sample_batch",
    "smd_log_posterior",
    "smd_posterior",
    "train",
    "uniform_rates",
]
