"""Desk-scale teacher/student distillation experiments."""

from .equivtransfer import TokenTaskSpec, TransferRun, transfer_run
from .experiments import (
    EXPERIMENTS,
    ExperimentResult,
    experiment_batch_size,
    experiment_equivariance,
    experiment_fig2,
    experiment_fig3,
    experiment_logsum,
)
from .nets import ToyNet
from .tasks import SyntheticTask
from .training import (
    ExperimentSpec,
    RunResult,
    TrainState,
    batch_grads,
    gradcheck_total_loss,
    train,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentResult",
    "ExperimentSpec",
    "RunResult",
    "SyntheticTask",
    "TokenTaskSpec",
    "ToyNet",
    "TrainState",
    "TransferRun",
    "batch_grads",
    "experiment_batch_size",
    "experiment_equivariance",
    "experiment_fig2",
    "experiment_fig3",
    "experiment_logsum",
    "gradcheck_total_loss",
    "train",
    "transfer_run",
]
