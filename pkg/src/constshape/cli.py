"""Command-line surface: train, eval, sweep, gradcheck.

Emits CSV/JSON artifacts only (no plotting).  Exit codes: 0 success, 1 a
gradcheck verdict failed, 2 flag error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import RateRecord, mb_optimize, uniform_rates
from .channel import AwgnChannel
from .constellation import (
    Constellation,
    LOG_FLOOR,
    ShapingMode,
    gray_labels,
    qam_init,
)
from .objectives import (
    ExactQuadrature,
    ObjectiveKind,
    fd_gradient,
    gmi,
    grad_gmi,
    grad_mi,
    mi,
    objective_value,
    relative_gradient_error,
)
from .training import TrainConfig, TrainResult, TrainingError, train

GRADCHECK_TOL = 1e-5
ABLATION_THRESHOLD = 1e-2


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        m=args.m,
        snr_db=args.snr_db,
        objective=ObjectiveKind(args.objective),
        mode=ShapingMode(args.mode),
        batch_size=args.batch,
        learning_rate=args.lr,
        steps=args.steps,
        seed=args.seed,
        eval_every=args.eval_every,
        gh_nodes=args.gh_nodes,
    )


def _add_train_flags(parser, with_mode=True):
    parser.add_argument("--m", type=int, default=16, help="constellation size (power of four)")
    if with_mode:
        parser.add_argument(
            "--mode", choices=["geo", "prob", "joint"], default="prob",
            help="which parameters to train",
        )
    parser.add_argument("--objective", choices=["mi", "gmi"], default="mi")
    parser.add_argument("--batch", type=int, default=4000, help="training batch size")
    parser.add_argument("--lr", type=float, default=5e-3, help="Adam learning rate")
    parser.add_argument("--steps", type=int, default=3000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--eval-every", type=int, default=100)
    parser.add_argument("--gh-nodes", type=int, default=32,
                        help="Gauss-Hermite nodes per real dimension for exact evaluation")


def _write_constellation(path: Path, constellation: Constellation) -> None:
    path.write_text(json.dumps(constellation.to_dict(), indent=2) + "\n")


def _write_trace(path: Path, result: TrainResult) -> None:
    lines = ["step,batch_obj,exact_obj,entropy"]
    for rec in result.trace:
        lines.append(
            f"{rec.step},{float(rec.batch_objective)!r},"
            f"{float(rec.exact_objective)!r},{float(rec.entropy_bits)!r}"
        )
    path.write_text("\n".join(lines) + "\n")


def _write_config(path: Path, config: TrainConfig) -> None:
    data = {
        "m": config.m,
        "snr_db": config.snr_db,
        "objective": config.objective.value,
        "mode": config.mode.value,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "steps": config.steps,
        "seed": config.seed,
        "adam_beta1": config.adam_beta1,
        "adam_beta2": config.adam_beta2,
        "adam_eps": config.adam_eps,
        "eval_every": config.eval_every,
        "gh_nodes": config.gh_nodes,
    }
    path.write_text(json.dumps(data, indent=2) + "\n")


def cmd_train(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _train_config(args)
    result = train(config)
    _write_constellation(out / "constellation.json", result.constellation)
    _write_trace(out / "trace.csv", result)
    _write_config(out / "config.json", config)
    final = result.trace[-1]
    print(
        f"trained m={config.m} snr={config.snr_db} dB {config.objective.value}"
        f" mode={config.mode.value}: exact {final.exact_objective:.6f} bits,"
        f" entropy {final.entropy_bits:.6f} bits -> {out}"
    )
    return 0


def cmd_eval(args) -> int:
    data = json.loads(Path(args.constellation).read_text())
    constellation = Constellation.from_dict(data)
    channel = AwgnChannel.from_snr_db(args.snr_db)
    mode = ExactQuadrature(args.gh_nodes)
    normalized = constellation.normalized_points()
    probs = constellation.probabilities()
    report = {
        "m": constellation.m,
        "snr_db": args.snr_db,
        "objective": args.objective,
        "mi": mi(constellation, channel, mode),
        "gmi": gmi(constellation, channel, mode),
        "entropy_bits": constellation.entropy_bits(),
        "mean_power": float(np.sum(probs * np.abs(normalized) ** 2)),
    }
    report["rate_bits"] = report[args.objective]
    print(json.dumps(report, indent=2))
    return 0


def _parse_snr_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(round((stop - start) / step))
        grid = [start + i * step for i in range(count + 1)]
        return [s for s in grid if s <= stop + 1e-9]
    return [float(p) for p in text.split(",") if p.strip()]


def cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = _parse_snr_grid(args.snr_grid)
    objective = ObjectiveKind(args.objective)
    mode = ExactQuadrature(args.gh_nodes)
    records: list[RateRecord] = []
    failures: list[str] = []

    for i, snr_db in enumerate(grid):
        channel = AwgnChannel.from_snr_db(snr_db)
        points_run = [
            ("uniform", None),
            ("mb", None),
            ("learned-pcs", ShapingMode.PROBABILISTIC_ONLY),
            ("learned-geopcs", ShapingMode.JOINT),
        ]
        for j, (scheme, shaping) in enumerate(points_run):
            try:
                if scheme == "uniform":
                    constellation = qam_init(args.m)
                elif scheme == "mb":
                    mb = mb_optimize(args.m, snr_db, objective, args.gh_nodes)
                    base = qam_init(args.m)
                    constellation = base.replace(
                        logits=np.log(np.maximum(mb.probs, LOG_FLOOR))
                    )
                else:
                    config = TrainConfig(
                        m=args.m,
                        snr_db=snr_db,
                        objective=objective,
                        mode=shaping,
                        batch_size=args.batch,
                        learning_rate=args.lr,
                        steps=args.steps,
                        seed=args.seed + 101 * i + j,
                        eval_every=args.eval_every,
                        gh_nodes=args.gh_nodes,
                    )
                    constellation = train(config).constellation
                rate = objective_value(constellation, channel, mode, objective)
                if objective is ObjectiveKind.GMI:
                    rate = max(0.0, rate)
                records.append(
                    RateRecord(
                        scheme=scheme,
                        m=args.m,
                        snr_db=snr_db,
                        objective=objective,
                        rate_bits=rate,
                        entropy_bits=constellation.entropy_bits(),
                    )
                )
                _write_constellation(
                    out / f"constellation_{scheme}_snr{snr_db:g}.json", constellation
                )
            except Exception as exc:  # per-point failure: record and move on
                failures.append(f"{scheme} @ {snr_db:g} dB: {exc}")

    lines = ["scheme,m,snr_db,objective,rate_bits,entropy_bits"]
    for rec in records:
        lines.append(
            f"{rec.scheme},{rec.m},{rec.snr_db:g},{rec.objective.value},"
            f"{float(rec.rate_bits)!r},{float(rec.entropy_bits)!r}"
        )
    (out / "curves.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {len(records)} records to {out / 'curves.csv'}")
    if failures:
        for failure in failures:
            print(f"failed: {failure}", file=sys.stderr)
        return 3
    return 0


def _random_constellation(m: int, rng) -> Constellation:
    points = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    logits = 0.7 * rng.standard_normal(m)
    return Constellation(points=points, logits=logits, labels=gray_labels(m))


def cmd_gradcheck(args) -> int:
    channel = AwgnChannel.from_snr_db(args.snr_db)
    objective = ObjectiveKind(args.objective)
    kind_grad = grad_mi if objective is ObjectiveKind.MI else grad_gmi
    rng = np.random.default_rng(args.seed)
    mode = ExactQuadrature(args.gh_nodes)
    worst = 0.0
    for trial in range(args.trials):
        constellation = _random_constellation(args.m, rng)
        analytic = kind_grad(
            constellation, channel, mode, include_correction=not args.ablate_correction
        )
        oracle = fd_gradient(constellation, channel, objective, step=args.step,
                             gh_nodes=args.gh_nodes)
        err = relative_gradient_error(analytic, oracle)
        worst = max(worst, err)
        norm = float(np.linalg.norm(oracle.as_vector()))
        print(f"trial {trial}: rel error {err:.3e} (fd gradient norm {norm:.3e})")
    if args.ablate_correction:
        ok = worst > ABLATION_THRESHOLD
        verdict = "confirmed" if ok else "NOT confirmed"
        print(f"ablation max rel error {worst:.3e}; expected failure {verdict}")
    else:
        ok = worst <= args.tol
        verdict = "within" if ok else "EXCEEDS"
        print(f"max rel error {worst:.3e} {verdict} tolerance {args.tol:g}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="constshape",
        description="Learn and evaluate geometric/probabilistic constellation shaping",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training job")
    _add_train_flags(p_train)
    p_train.add_argument("--snr-db", type=float, default=8.0)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a constellation JSON file")
    p_eval.add_argument("--constellation", required=True)
    p_eval.add_argument("--snr-db", type=float, required=True)
    p_eval.add_argument("--objective", choices=["mi", "gmi"], default="mi")
    p_eval.add_argument("--gh-nodes", type=int, default=32)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="rate curves over an SNR grid")
    _add_train_flags(p_sweep, with_mode=False)
    p_sweep.add_argument("--snr-grid", required=True,
                         help='"start:stop:step" or comma-separated dB values')
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_gc = sub.add_parser("gradcheck", help="analytic gradients vs finite differences")
    p_gc.add_argument("--m", type=int, default=16)
    p_gc.add_argument("--snr-db", type=float, default=8.0)
    p_gc.add_argument("--objective", choices=["mi", "gmi"], default="mi")
    p_gc.add_argument("--trials", type=int, default=5)
    p_gc.add_argument("--seed", type=int, default=0)
    p_gc.add_argument("--step", type=float, default=1e-5)
    p_gc.add_argument("--gh-nodes", type=int, default=32)
    p_gc.add_argument("--tol", type=float, default=GRADCHECK_TOL)
    p_gc.add_argument("--ablate-correction", action="store_true",
                      help="drop the correction term and confirm the check fails")
    p_gc.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
