"""Central finite-difference verification of every analytic gradient.

Each component draws seeded random instances, compares the analytic
gradient against (f(x + h e) - f(x - h e)) / 2h entry by entry, and
reports the worst relative error seen. The CLI's gradcheck subcommand
and the acceptance suite both run these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kdcore import (
    DistanceSpec,
    NormScheme,
    ProjectorState,
    distance,
    distance_grad,
    distill_loss,
    mlp_init,
    normalize,
    normalize_vjp,
    project_vjp,
    project_with_tape,
    task_loss,
)
from .dynamics import CorrelationPair, projector_velocity
from .linalg import Rng

DEFAULT_H = 1e-6
DEFAULT_TOLERANCE = 1e-5
DEFAULT_INSTANCES = 20
DEFAULT_SEED = 987_001

LOGSUM_ALPHAS = (1.0, 2.0, 3.0, 4.0, 4.7, 5.0)


def finite_difference_grad(f, x: np.ndarray, h: float = DEFAULT_H) -> np.ndarray:
    """Central differences of a scalar function over every entry of x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        up = x.copy()
        up[idx] += h
        down = x.copy()
        down[idx] -= h
        grad[idx] = (f(up) - f(down)) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, reference: np.ndarray) -> float:
    denom = max(float(np.linalg.norm(reference)), 1e-12)
    return float(np.linalg.norm(np.asarray(analytic) - np.asarray(reference))) / denom


@dataclass(frozen=True)
class ComponentReport:
    name: str
    max_rel_err: float
    tolerance: float
    instances: int

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tolerance


def _norm_instance(rng: Rng, scheme: NormScheme, h: float) -> float:
    z = rng.matrix(8, 8)
    upstream = rng.matrix(8, 8)
    analytic = normalize_vjp(z, scheme, upstream)
    fd = finite_difference_grad(
        lambda v: float(np.sum(upstream * normalize(v, scheme))), z, h
    )
    return relative_error(analytic, fd)


def _distance_instance(rng: Rng, spec: DistanceSpec, h: float) -> float:
    a = rng.matrix(6, 6)
    b = rng.matrix(6, 6)
    analytic = distance_grad(a, b, spec)
    fd = finite_difference_grad(lambda v: distance(v, b, spec), a, h)
    return relative_error(analytic, fd)


def _project_instance(rng: Rng, depth: int, h: float) -> float:
    p = mlp_init(rng, 5, 4, depth, hidden_width=6)
    zs = rng.matrix(7, 5)
    upstream = rng.matrix(7, 4)
    out, tape = project_with_tape(zs, p)
    g_zs, g_layers = project_vjp(p, tape, upstream)

    def value(zs_v, layers):
        o, _ = project_with_tape(zs_v, p.with_layers(layers))
        return float(np.sum(upstream * o))

    worst = relative_error(
        g_zs, finite_difference_grad(lambda v: value(v, p.layers), zs, h)
    )
    for k in range(depth):
        def f(w, k=k):
            layers = list(p.layers)
            layers[k] = w
            return value(zs, layers)

        worst = max(worst, relative_error(
            g_layers[k], finite_difference_grad(f, p.layers[k], h)
        ))
    return worst


def _task_loss_instance(rng: Rng, h: float) -> float:
    logits = rng.matrix(6, 4)
    labels = rng.integers(0, 4, size=6)
    _, grad = task_loss(logits, labels)
    fd = finite_difference_grad(lambda v: task_loss(v, labels)[0], logits, h)
    return relative_error(grad, fd)


def _distill_instance(rng: Rng, norm: NormScheme, spec: DistanceSpec,
                      depth: int, h: float) -> float:
    # output dim 6 keeps every group count in the sweep divisible
    p = mlp_init(rng, 4, 6, depth, hidden_width=6)
    zs = rng.matrix(6, 4)
    zt = rng.matrix(6, 6)
    res = distill_loss(zs, zt, p, norm, spec)

    def value(zs_v, layers):
        return distill_loss(zs_v, zt, p.with_layers(layers), norm, spec).loss

    worst = relative_error(
        res.grad_zs,
        finite_difference_grad(lambda v: value(v, p.layers), zs, h),
    )
    for k in range(depth):
        def f(w, k=k):
            layers = list(p.layers)
            layers[k] = w
            return value(zs, layers)

        worst = max(worst, relative_error(
            res.grad_layers[k], finite_difference_grad(f, p.layers[k], h)
        ))
    return worst


def _velocity_instance(rng: Rng, h: float) -> float:
    zs = rng.matrix(9, 4)
    zt = rng.matrix(9, 5)
    wp = rng.matrix(4, 5)
    pair = CorrelationPair(zs.T @ zs, zs.T @ zt)
    velocity = projector_velocity(pair, wp)
    fd = finite_difference_grad(
        lambda w: 0.5 * float(np.sum((zs @ w - zt) ** 2)), wp, h
    )
    return relative_error(velocity, -fd)


def component_suite() -> list[tuple[str, object]]:
    """(name, instance_fn) pairs; each instance_fn(rng, h) -> rel err."""
    suite = [
        ("normalize_vjp/none", lambda r, h: _norm_instance(r, NormScheme("none"), h)),
        ("normalize_vjp/l2_row", lambda r, h: _norm_instance(r, NormScheme("l2_row"), h)),
        ("normalize_vjp/batch", lambda r, h: _norm_instance(r, NormScheme("batch"), h)),
        ("normalize_vjp/group", lambda r, h: _norm_instance(r, NormScheme("group", groups=4), h)),
        ("distance_grad/frobenius",
         lambda r, h: _distance_instance(r, DistanceSpec("frobenius"), h)),
    ]
    for alpha in LOGSUM_ALPHAS:
        suite.append((
            f"distance_grad/logsum(alpha={alpha:g})",
            lambda r, h, a=alpha: _distance_instance(r, DistanceSpec("logsum", alpha=a), h),
        ))
    suite += [
        ("distance_grad/logsumexp",
         lambda r, h: _distance_instance(r, DistanceSpec("logsumexp", tau=0.8), h)),
        ("project/linear", lambda r, h: _project_instance(r, 1, h)),
        ("project/mlp3", lambda r, h: _project_instance(r, 3, h)),
        ("task_loss", lambda r, h: _task_loss_instance(r, h)),
        ("distill_loss/none+frobenius+linear",
         lambda r, h: _distill_instance(r, NormScheme("none"), DistanceSpec("frobenius"), 1, h)),
        ("distill_loss/batch+logsum4+linear",
         lambda r, h: _distill_instance(r, NormScheme("batch"), DistanceSpec("logsum", alpha=4.0), 1, h)),
        ("distill_loss/l2_row+logsumexp+linear",
         lambda r, h: _distill_instance(r, NormScheme("l2_row"), DistanceSpec("logsumexp", tau=0.8), 1, h)),
        ("distill_loss/group+logsum2+mlp2",
         lambda r, h: _distill_instance(r, NormScheme("group", groups=2), DistanceSpec("logsum", alpha=2.0), 2, h)),
        ("distill_loss/batch+frobenius+mlp3",
         lambda r, h: _distill_instance(r, NormScheme("batch"), DistanceSpec("frobenius"), 3, h)),
        ("dynamics/projector_velocity", lambda r, h: _velocity_instance(r, h)),
    ]
    return suite


def run_gradcheck(tolerance: float = DEFAULT_TOLERANCE,
                  instances: int = DEFAULT_INSTANCES,
                  seed: int = DEFAULT_SEED,
                  h: float = DEFAULT_H) -> list[ComponentReport]:
    reports = []
    for comp_index, (name, fn) in enumerate(component_suite()):
        worst = 0.0
        for i in range(instances):
            rng = Rng(seed + 1000 * comp_index + i, stream=11)
            worst = max(worst, fn(rng, h))
        reports.append(ComponentReport(name, worst, tolerance, instances))
    return reports
