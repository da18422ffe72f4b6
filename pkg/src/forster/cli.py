"""Command-line front door.

Subcommands: gen, transform, decompose, round, learn, eval, eigen-bench.
Reports are deterministic JSON (identical flags + seed give byte-identical
output); wall time goes to stderr so it never perturbs the report bytes.
Exit codes: 0 success, 1 algorithmic error (diagnostic JSON on stdout),
2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .datagen import generate, halfspace_oracle, parse_spec
from .decomposition import forster_subspace
from .eigen import EigenConfig, approx_eigendecomposition, verify_multiplicative
from .errors import BadSpec, ForsterError
from .io import (dump_report, load_labeled_set, load_model, load_point_set,
                 model_to_json, read_matrix_json, save_model, write_points_csv)
from .iteration import ForsterConfig, forster_transform
from .learner import LearnConfig, evaluate, learn_halfspace
from .linalg import PointSet
from .rounding import RoundConfig, round_transform


def _default_mode() -> str:
    mode = os.environ.get("FORSTER_MODE", "practical")
    if mode not in ("theory", "practical"):
        raise BadSpec("FORSTER_MODE must be 'theory' or 'practical'", value=mode)
    return mode


def _emit(report: dict, output: str | None) -> None:
    text = dump_report(report)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _forster_cfg(args) -> ForsterConfig:
    return ForsterConfig(epsilon=args.epsilon, mode=args.mode, seed=args.seed,
                         max_iters=args.max_iters)


def cmd_gen(args) -> dict:
    pts, labels, truth = generate(args.spec, args.seed, args.n, args.d)
    write_points_csv(args.output, pts, labels)
    sidecar = args.output + ".truth.json"
    dump_report(truth, sidecar)
    return {"subcommand": "gen", "spec": args.spec, "seed": args.seed,
            "n": args.n, "d": args.d, "output": args.output,
            "truth_sidecar": sidecar, "labeled": labels is not None}


def cmd_transform(args) -> dict:
    x = load_point_set(args.input)
    cfg = _forster_cfg(args)
    out = forster_transform(x, args.epsilon, cfg)
    report = {
        "subcommand": "transform", "seed": args.seed,
        "status": out.kind, "iterations": out.iterations,
        "final_potential": out.final_potential,
        "potential_trace": out.potential_trace,
        "config_echo": out.config_echo,
    }
    if out.is_transform:
        report["matrix"] = out.matrix.tolist()
    else:
        report["subspace_basis"] = out.subspace.basis.tolist()
        report["members"] = out.members
    return report


def cmd_decompose(args) -> dict:
    x = load_point_set(args.input)
    cfg = _forster_cfg(args)
    dec = forster_subspace(x, args.epsilon, cfg)
    return {
        "subcommand": "decompose", "seed": args.seed,
        "dim": dec.dim, "depth": dec.depth,
        "subspace_basis": dec.subspace.basis.tolist(),
        "matrix": dec.matrix.tolist(), "members": dec.members,
        "iterations": dec.iterations, "final_potential": dec.final_potential,
        "config_echo": cfg.echo(x.d, x.n),
    }


def cmd_round(args) -> dict:
    a = read_matrix_json(args.input_matrix)
    x = load_point_set(args.points)
    cfg = RoundConfig(zeta=args.zeta, threshold=args.threshold, seed=args.seed)
    rounded, rep = round_transform(a, x, cfg)
    return {
        "subcommand": "round", "seed": args.seed,
        "matrix": rounded.tolist(), "kappa_before": rep.kappa_before,
        "kappa_after": rep.kappa_after, "max_drift": rep.max_drift,
        "rounds": rep.rounds,
        "config_echo": {"zeta": args.zeta,
                        "threshold": cfg.resolved_threshold(a.shape[0])},
    }


def cmd_learn(args) -> dict:
    cfg = LearnConfig(epsilon=args.epsilon, delta=args.delta, seed=args.seed,
                      samples_per_round=args.samples_per_round, mode=args.mode)
    if args.oracle:
        parts = args.oracle.split(":")
        if parts[0] != "synthetic" or len(parts) < 2:
            raise BadSpec("oracle must look like synthetic:<d>[:w-seed][:margin]",
                          value=args.oracle)
        d = int(parts[1])
        w_seed = int(parts[2]) if len(parts) > 2 else args.seed + 1
        margin = float(parts[3]) if len(parts) > 3 else 0.0
        oracle = halfspace_oracle(d, w_seed, margin)
    elif args.train:
        data = load_labeled_set(args.train)

        def oracle(m, rng):
            idx = rng.integers(0, data.n, size=m)
            from .learner import LabeledSet
            return LabeledSet(data.points[idx], data.labels[idx])
    else:
        raise BadSpec("learn needs --train or --oracle")
    model, rep = learn_halfspace(oracle, cfg)
    if args.model_out:
        save_model(model, args.model_out)
    return {
        "subcommand": "learn", "seed": args.seed,
        "stages": len(model.stages), "rounds_used": rep.rounds_used,
        "samples_per_round": rep.samples_per_round,
        "unclassified_counts": rep.unclassified_counts,
        "model": model_to_json(model),
        "config_echo": {"epsilon": args.epsilon, "delta": args.delta,
                        "rounds_cap": rep.rounds_cap},
    }


def cmd_eval(args) -> dict:
    model = load_model(args.model)
    data = load_labeled_set(args.test)
    rates = evaluate(model, data)
    return {"subcommand": "eval", "n_test": data.n, **rates}


def cmd_eigen_bench(args) -> dict:
    rng = np.random.default_rng(args.seed)
    q, _ = np.linalg.qr(rng.standard_normal((args.d, args.d)))
    lam = np.logspace(0, -float(np.log10(args.kappa)), args.d)
    m = (q * lam) @ q.T
    m = (m + m.T) / 2.0
    cfg = EigenConfig(accuracy=args.eta, seed=args.seed, mode=args.mode)
    decomposition = approx_eigendecomposition(m, cfg)
    passed, worst = verify_multiplicative(m, decomposition, args.eta,
                                          trials=args.trials, seed=args.seed + 1)
    return {"subcommand": "eigen-bench", "seed": args.seed, "d": args.d,
            "kappa": args.kappa, "eta": args.eta,
            "worst_ratio": worst, "t_used": decomposition.meta.get("t_used"),
            "passed": bool(passed)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forster",
        description="Radial-isotropy transforms, certificates, and halfspace learning")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--spec", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--output", required=True)
    g.set_defaults(func=cmd_gen)

    for name, func in (("transform", cmd_transform), ("decompose", cmd_decompose)):
        t = sub.add_parser(name)
        t.add_argument("--input", required=True)
        t.add_argument("--epsilon", type=float, default=0.25)
        t.add_argument("--mode", choices=("theory", "practical"),
                       default=_default_mode())
        t.add_argument("--seed", type=int, default=0)
        t.add_argument("--max-iters", type=int, default=None)
        t.add_argument("--output", default=None)
        t.set_defaults(func=func)

    r = sub.add_parser("round")
    r.add_argument("--input-matrix", required=True)
    r.add_argument("--points", required=True)
    r.add_argument("--zeta", type=float, default=1e-3)
    r.add_argument("--threshold", type=float, default=None)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--output", default=None)
    r.set_defaults(func=cmd_round)

    l = sub.add_parser("learn")
    l.add_argument("--train", default=None)
    l.add_argument("--oracle", default=None)
    l.add_argument("--epsilon", type=float, default=0.1)
    l.add_argument("--delta", type=float, default=0.1)
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--samples-per-round", type=int, default=None)
    l.add_argument("--mode", choices=("theory", "practical"),
                   default=_default_mode())
    l.add_argument("--model-out", default=None)
    l.add_argument("--output", default=None)
    l.set_defaults(func=cmd_learn)

    e = sub.add_parser("eval")
    e.add_argument("--model", required=True)
    e.add_argument("--test", required=True)
    e.add_argument("--output", default=None)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("eigen-bench")
    b.add_argument("--d", type=int, default=6)
    b.add_argument("--kappa", type=float, default=1e6)
    b.add_argument("--eta", type=float, default=0.05)
    b.add_argument("--trials", type=int, default=10000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--mode", choices=("theory", "practical"),
                   default=_default_mode())
    b.add_argument("--output", default=None)
    b.set_defaults(func=cmd_eigen_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.monotonic()
    try:
        report = args.func(args)
    except ForsterError as exc:
        diagnostic = {"error": type(exc).__name__, "message": str(exc),
                      "details": _stringify(exc.details)}
        print(dump_report(diagnostic))
        return 1
    except OSError as exc:
        print(f"forster: {exc}", file=sys.stderr)
        return 2
    # gen's --output is the data file, not a report destination
    report_path = None if args.command == "gen" else getattr(args, "output", None)
    _emit(report, report_path)
    print(f"wall_time_s={time.monotonic() - start:.3f}", file=sys.stderr)
    return 0


def _stringify(details: dict) -> dict:
    out = {}
    for k, v in details.items():
        if isinstance(v, (int, float, str, bool, type(None))):
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = list(v)
        else:
            out[k] = str(v)
    return out


if __name__ == "__main__":
    sys.exit(main())
