"""Projector-only training (student frozen) with full loss gradients."""

from __future__ import annotations

from itertools import islice

from ..errors import PreconditionError, UnsupportedConfigError
from ..kdcore import DistanceSpec, NormScheme, ProjectorState, distill_loss
from .probes import decorrelation, record_spectrum
from .trajectory import TrajectoryRecord
from .updates import DynamicsConfig


def run_dynamics(zs_stream, zt_stream, p: ProjectorState, norm: NormScheme,
                 spec: DistanceSpec, cfg: DynamicsConfig,
                 keep_weights: bool = False) -> TrajectoryRecord:
    """Train the projector alone on a stream of (zs, zt) batches.

    Updates follow wp <- (1 - weight_decay) * wp - learning_rate * grad,
    where grad comes from the full distillation pipeline. Records loss,
    decorrelation, and the normalized spectrum every record_every steps
    (evaluated before the update) plus a final post-update record.
    """
    if not p.is_linear:
        raise UnsupportedConfigError("run_dynamics records spectra: linear projector only")
    wp = p.layers[0].copy()
    record = TrajectoryRecord()

    last = None
    seen = 0
    for zs, zt in islice(zip(zs_stream, zt_stream), cfg.steps):
        proj = ProjectorState.linear(wp)
        res = distill_loss(zs, zt, proj, norm, spec)
        if seen % cfg.record_every == 0:
            record.append(
                seen, res.loss, decorrelation(zs, res.projected),
                record_spectrum(proj), weight=wp if keep_weights else None,
            )
        wp = (1.0 - cfg.weight_decay) * wp - cfg.learning_rate * res.grad_layers[0]
        last = (zs, zt)
        seen += 1
    if seen == 0:
        raise PreconditionError("empty batch stream")

    zs, zt = last
    proj = ProjectorState.linear(wp)
    res = distill_loss(zs, zt, proj, norm, spec)
    record.append(
        seen, res.loss, decorrelation(zs, res.projected),
        record_spectrum(proj), weight=wp if keep_weights else None,
    )
    return record
