"""Single executable for the lab: gradient checks, dynamics simulations,
experiments, equivariance scoring, and low-rank reports.

Exit codes: 0 success, 1 check/assertion failure, 2 usage/config error.
DLAB_THREADS caps the experiment worker pool (default 1, serial).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import gradcheck as gradcheck_mod
from ..dynamics import DynamicsConfig, low_rank_gap, run_dynamics
from ..equivariance import (
    CircularConvMixer,
    IdentityMap,
    SelfAttentionMap,
    TokenwiseMlp,
    Translation,
    load_token_batch,
    mu_T_suite,
    unit_circular_shifts,
)
from ..errors import (
    ConfigError,
    InputError,
    NumericError,
    PreconditionError,
    ShapeError,
    UnsupportedConfigError,
)
from ..kdcore import linear_init
from ..linalg import Rng
from ..trainlab.experiments import EXPERIMENTS
from .configs import distance_from_config, load_config, norm_from_config, take
from .plots import metric_chart, spectrum_fan_chart


def _out_dir(args, cfg) -> Path:
    out = args.out or cfg.get("out") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_gradcheck(args) -> int:
    cfg = load_config(args.config)
    tolerance = take(cfg, "tolerance", float, gradcheck_mod.DEFAULT_TOLERANCE)
    instances = take(cfg, "instances", int, gradcheck_mod.DEFAULT_INSTANCES)
    seed = take(cfg, "seed", int, gradcheck_mod.DEFAULT_SEED)
    reports = gradcheck_mod.run_gradcheck(tolerance, instances, seed)
    for rep in reports:
        flag = "PASS" if rep.passed else "FAIL"
        print(f"{flag}  {rep.name:<42} max_rel_err={rep.max_rel_err:.3e} "
              f"(tol {rep.tolerance:g}, {rep.instances} instances)")
    failed = [rep.name for rep in reports if not rep.passed]
    if args.out:
        payload = [
            {"name": r.name, "max_rel_err": r.max_rel_err,
             "tolerance": r.tolerance, "passed": r.passed}
            for r in reports
        ]
        (_out_dir(args, cfg) / "gradcheck.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
    if failed:
        print(f"gradcheck failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"gradcheck passed: {len(reports)} components")
    return 0


def cmd_dynamics(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else take(cfg, "seed", int, 0)
    steps = take(cfg, "steps", int, 200)
    batch = take(cfg, "batch", int, 64)
    ds = take(cfg, "student_dim", int, 16)
    dt = take(cfg, "teacher_dim", int, 24)
    dyn = DynamicsConfig(
        learning_rate=take(cfg, "learning_rate", float, 0.005),
        weight_decay=take(cfg, "weight_decay", float, 0.0),
        steps=steps,
        record_every=take(cfg, "record_every", int, 10),
    )
    norm = norm_from_config(cfg.get("norm"))
    dist = distance_from_config(cfg.get("distance"))

    rng = Rng(seed)
    target = rng.child(1).matrix(ds, dt)
    data_rng = rng.child(2)
    zs_batches, zt_batches = [], []
    for _ in range(steps):
        zs = data_rng.matrix(batch, ds)
        zs_batches.append(zs)
        zt_batches.append(zs @ target + 0.1 * data_rng.matrix(batch, dt))

    record = run_dynamics(zs_batches, zt_batches,
                          linear_init(rng.child(3), ds, dt), norm, dist, dyn)
    out = _out_dir(args, cfg) / "dynamics"
    record.save_csv(out / "trajectory.csv")
    print(f"wrote {out / 'trajectory.csv'} ({len(record)} records)")
    if args.plot:
        spectrum_fan_chart(record, "normalized singular values", out / "spectrum.svg")
        metric_chart({"loss": record}, "losses", "distillation loss", out / "loss.svg")
        print(f"wrote plots under {out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    name = args.experiment
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; choices: {', '.join(sorted(EXPERIMENTS))}"
        )
    seeds = cfg.get("seeds", list(range(10)))
    if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("config key 'seeds' must be a list of integers")
    kwargs = {}
    if name == "batch_size":
        if "samples_budget" in cfg:
            kwargs["samples_budget"] = take(cfg, "samples_budget", int, 51_200)
    elif "steps" in cfg:
        kwargs["steps"] = take(cfg, "steps", int, 0)
    out = _out_dir(args, cfg)
    result = EXPERIMENTS[name](seeds=seeds, out_dir=out, **kwargs)
    root = Path(out) / "runs" / name
    print(f"wrote {root / 'summary.json'} and {len(result.trajectories)} run CSVs")
    if args.plot:
        first = seeds[0]
        arm_records = {
            key.split("/", 1)[1]: rec
            for key, rec in result.trajectories.items()
            if key.startswith(f"{first}/")
        }
        for arm, rec in arm_records.items():
            if rec.spectrum_size:
                spectrum_fan_chart(rec, f"{name} seed {first} {arm} spectrum",
                                   root / "plots" / f"{arm}_spectrum.svg")
        metric_chart(arm_records, "losses", f"{name} seed {first} loss",
                     root / "plots" / "loss.svg")
        metric_chart(arm_records, "decorrelations", f"{name} seed {first} decorrelation",
                     root / "plots" / "decorrelation.svg")
        print(f"wrote plots under {root / 'plots'}")
    return 0


def _phi_from_config(cfg, batch) -> object:
    spec = cfg.get("phi", {"kind": "identity"})
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "identity")
    seed = int(spec.get("seed", 0))
    rng = Rng(seed, stream=21)
    if kind == "identity":
        return IdentityMap()
    if kind == "tokenwise_mlp":
        return TokenwiseMlp.create(rng, batch.c, int(spec.get("hidden", 2 * batch.c)),
                                   int(spec.get("depth", 2)))
    if kind == "self_attention":
        return SelfAttentionMap.create(rng, batch.c, batch.n)
    if kind == "conv_mixer":
        return CircularConvMixer.create(rng, batch.c, int(spec.get("kernel_size", 3)))
    raise ConfigError(f"unknown phi kind {kind!r}")


def _translations_from_config(cfg) -> list[Translation]:
    spec = cfg.get("translations", "unit_circular")
    if spec == "unit_circular":
        return unit_circular_shifts()
    if not isinstance(spec, list):
        raise ConfigError("translations must be 'unit_circular' or a list")
    out = []
    for item in spec:
        try:
            out.append(Translation(int(item["dy"]), int(item["dx"]),
                                   item.get("mode", "circular")))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad translation entry {item!r}") from exc
    return out


def cmd_equivariance(args) -> int:
    cfg = load_config(args.config)
    checkpoint = cfg.get("checkpoint")
    if not checkpoint:
        raise ConfigError("equivariance config needs a 'checkpoint' token batch path")
    if not Path(checkpoint).exists():
        raise ConfigError(f"checkpoint not found: {checkpoint}")
    batch = load_token_batch(checkpoint)
    phi = _phi_from_config(cfg, batch)
    translations = _translations_from_config(cfg)
    report = mu_T_suite(phi, [batch], translations)
    out = _out_dir(args, cfg) / "equivariance"
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    print(f"mu_T({report.phi_id}) = {report.mean:.6g} +/- {report.std:.6g} "
          f"over {report.n} pairs")
    print(f"wrote {out / 'report.json'}")
    return 0


def cmd_lowrank(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else take(cfg, "seed", int, 0)
    batch = take(cfg, "batch", int, 32)
    ds = take(cfg, "student_dim", int, 8)
    dt = take(cfg, "teacher_dim", int, 12)
    ranks = cfg.get("ranks", [1, 2, 3])
    if not isinstance(ranks, list) or not all(isinstance(r, int) for r in ranks):
        raise ConfigError("config key 'ranks' must be a list of integers")
    zs = Rng(seed, stream=31).orthonormal_columns(batch, ds)
    zt = Rng(seed, stream=32).matrix(batch, dt)
    rows = []
    for r in ranks:
        gap = low_rank_gap(zs, zt, r, rng=Rng(seed, stream=33 + r))
        rel = abs(gap.constrained_loss - gap.oracle_loss) / max(gap.oracle_loss, 1e-300)
        rows.append({"rank": r, "constrained_loss": gap.constrained_loss,
                     "oracle_loss": gap.oracle_loss, "relative_gap": rel})
        print(f"rank {r}: constrained={gap.constrained_loss:.9g} "
              f"oracle={gap.oracle_loss:.9g} rel_gap={rel:.3e}")
    out = _out_dir(args, cfg) / "lowrank"
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / 'report.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distillab",
        description="Distillation-recipe laboratory: gradient checks, projector "
                    "dynamics, qualitative experiments, equivariance scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--plot", action="store_true", help="emit SVG diagnostics")

    p = sub.add_parser("gradcheck", help="finite-difference checks of every gradient")
    common(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("dynamics", help="projector-only training simulation")
    common(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("experiment", help="run a seeded experiment")
    p.add_argument("experiment", help=f"one of: {', '.join(sorted(EXPERIMENTS))}")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("equivariance", help="score a token map's mu_T")
    common(p)
    p.set_defaults(func=cmd_equivariance)

    p = sub.add_parser("lowrank", help="rank-constrained loss vs SVD oracle")
    common(p)
    p.set_defaults(func=cmd_lowrank)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InputError, PreconditionError, ShapeError, UnsupportedConfigError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
