"""Projector training-dynamics theory: update rule, fixed points,
moving-average equivalence, spectra, decorrelation, low-rank gap."""

from .lowrank import LowRankGap, low_rank_gap
from .probes import correlation_table, decorrelation, record_spectrum
from .runner import run_dynamics
from .trajectory import TrajectoryRecord
from .updates import (
    WHITENED_TOL,
    CorrelationPair,
    DynamicsConfig,
    EmaResult,
    correlations,
    ema_equivalence,
    projector_velocity,
    step,
)

__all__ = [
    "WHITENED_TOL",
    "CorrelationPair",
    "DynamicsConfig",
    "EmaResult",
    "LowRankGap",
    "TrajectoryRecord",
    "correlation_table",
    "correlations",
    "decorrelation",
    "ema_equivalence",
    "low_rank_gap",
    "projector_velocity",
    "record_spectrum",
    "run_dynamics",
    "step",
]
