"""Command-line interface: cost benchmark, sweeps, demo runs, invariant checks.

Every command is deterministic given --seed (falling back to the
TNMPCQEP_SEED environment variable, then 0); CSV outputs are byte-identical
across runs with identical flags and seed.  Exit codes: 0 success, 1 runtime
failure, 2 flag/usage error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

from . import bench, pipeline, qep, tn, verify
from .qsim import NOISE_KINDS, NoiseSpec

_FRONTENDS = ("mps", "ttn", "mera")


def _master_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("TNMPCQEP_SEED")
    return int(env) if env else 0


def _int_list(text: str):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _cell(v):
    return repr(v) if isinstance(v, float) else v


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[h]) for h in header])


def _noise_from(kind: str, p: float, gamma: float):
    if kind == "noiseless":
        return None
    return NoiseSpec(kind=kind, p=p, gamma_amp=gamma, gamma_phase=gamma)


# ------------------------------------------------------------------- commands


def _cmd_bench_mpc(args, parser) -> int:
    if args.theta < 1:
        parser.error(f"--theta must be >= 1, got {args.theta}")
    if args.n_min < 1 or args.n_max < args.n_min:
        parser.error("need 1 <= --n-min <= --n-max")
    if any(d < 1 for d in args.dims):
        parser.error("--dims must be positive")
    n_values = range(args.n_min, args.n_max + 1)
    rows = bench.sweep(n_values, args.dims, k=args.k, theta=args.theta,
                       division_strategy=args.strategy)
    bench.write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    print("scenario pair totals over the grid (active = 2x passive):")
    totals = {}
    for row in rows:
        totals[row["scenario"]] = totals.get(row["scenario"], 0) + row["total_bits"]
    print(f"  {'pair':<10}{'passive_bits':>16}{'active_bits':>16}{'ratio':>8}")
    for passive, active in ((1, 4), (2, 5), (3, 6)):
        pb, ab = totals.get(passive, 0), totals.get(active, 0)
        ratio = ab / pb if pb else float("nan")
        print(f"  S{passive} vs S{active:<4}{pb:>16}{ab:>16}{ratio:>8.2f}")
    return 0


def _load_or_synth(args, parser, seed: int):
    if (args.images is None) != (args.labels is None):
        parser.error("--images and --labels must be given together")
    if args.images is not None:
        return pipeline.load_idx(args.images, args.labels)
    return pipeline.synth_data(args.n, seed=seed)


def _cmd_encode(args, parser) -> int:
    seed = _master_seed(args)
    data = _load_or_synth(args, parser, seed)
    if args.params is not None:
        params = tn.load_params(args.params)
        if params.config.kind != args.kind:
            parser.error(f"bundle holds a {params.config.kind} frontend, not {args.kind}")
    else:
        params = tn.make_frontend(tn.FrontendConfig(kind=args.kind, seed=seed))
    feats = tn.encode_batch(data.images.reshape(len(data), -1), params)
    if args.save_params is not None:
        tn.save_params(params, args.save_params)
    header = ["index", "label"] + [f"x{j}" for j in range(feats.shape[1])]
    rows = [
        {"index": i, "label": int(data.labels[i]),
         **{f"x{j}": float(feats[i, j]) for j in range(feats.shape[1])}}
        for i in range(feats.shape[0])
    ]
    _write_csv(args.out, header, rows)
    print(f"encoded {feats.shape[0]} samples with the {args.kind} frontend -> {args.out}")
    return 0


def _cmd_qep_run(args, parser) -> int:
    seed = _master_seed(args)
    noise = _noise_from(args.noise, args.p, args.gamma)
    if noise is not None and args.nq > 10:
        parser.error(f"noisy runs are capped at 10 qubits, got --nq {args.nq}")
    data = _load_or_synth(args, parser, seed)
    frontend = tn.make_frontend(tn.FrontendConfig(kind=args.kind, seed=seed))
    feats = tn.encode_batch(data.images.reshape(len(data), -1), frontend)
    params = qep.make_qep(d=feats.shape[1], n_q=args.nq, mode=args.observables, seed=seed)
    rows = []
    for start in range(0, feats.shape[0], args.batch_size):
        chunk = feats[start:start + args.batch_size]
        _, diag = qep.qep_forward(chunk, params, noise=noise)
        rows.append({
            "batch_id": len(rows),
            "n_q": args.nq,
            "d_q": params.d_q,
            "alpha_mean": diag.alpha_mean,
            "q_std": diag.q_std,
            "noise_kind": "noiseless" if noise is None else noise.kind,
            "seed": seed,
        })
    qep.write_diagnostics_csv(rows, args.out)
    print(f"processed {feats.shape[0]} latents in {len(rows)} batches -> {args.out}")
    return 0


def _cmd_qubit_sweep(args, parser) -> int:
    if not args.nq:
        parser.error("--nq needs at least one qubit count")
    if any(n < 1 or n > 16 for n in args.nq):
        parser.error(f"--nq entries must lie in [1, 16], got {args.nq}")
    noise = _noise_from(args.noise, args.p, args.gamma)
    if noise is not None and max(args.nq) > 10:
        parser.error("noisy sweeps are capped at 10 qubits")
    master = _master_seed(args)
    base = pipeline.DemoConfig(kind=args.frontend, n_train=args.n_train,
                               n_test=args.n_test, seed=master)
    header = ["mode", "n_q", "d_q", "seed", "accuracy", "f1", "alpha_mean", "q_std"]
    rows = []
    for i in range(args.seeds):
        seed = master + i  # per-point seeds derive from the master by index
        batch = pipeline.synth_data(args.n_train + args.n_test, seed=seed)
        records = qep.qubit_sweep(batch, args.nq, noise=noise, seed=seed,
                                  config=replace(base, seed=seed))
        for rec in records:
            rows.append({"mode": "quantum", "n_q": rec["n_q"], "d_q": rec["d_q"],
                         "seed": rec["seed"], "accuracy": rec["accuracy"], "f1": rec["f1"],
                         "alpha_mean": rec["alpha_mean"], "q_std": rec["q_std"]})
    baseline = pipeline.run_demo(
        replace(base, mode="classical"),
        data=pipeline.synth_data(args.n_train + args.n_test, seed=master))
    rows.append({"mode": "classical", "n_q": 0, "d_q": 0, "seed": master,
                 "accuracy": baseline.metrics.accuracy, "f1": baseline.metrics.f1[1],
                 "alpha_mean": 0.0, "q_std": 0.0})
    _write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows ({len(rows) - 1} quantum + 1 classical baseline) to {args.out}")
    return 0


def _cmd_noise_sweep(args, parser) -> int:
    for kind in args.noise:
        if kind not in NOISE_KINDS:
            parser.error(f"unknown noise kind {kind!r}, expected one of {NOISE_KINDS}")
    if args.nq < 1:
        parser.error(f"--nq must be positive, got {args.nq}")
    if args.nq > 10 and any(kind != "noiseless" for kind in args.noise):
        parser.error(f"noisy runs are capped at 10 qubits, got --nq {args.nq}")
    master = _master_seed(args)
    seeds = [master + i for i in range(args.seeds)]
    cfg = pipeline.DemoConfig(kind=args.frontend, n_train=args.n_train, n_test=args.n_test)
    records = pipeline.noise_sweep(kinds=tuple(args.noise), seeds=seeds, n_q=args.nq,
                                   p=args.p, gamma=args.gamma, config=cfg)
    header = ["noise_kind", "seed", "n_q", "p", "gamma",
              "accuracy", "f1", "alpha_mean", "q_std"]
    _write_csv(args.out, header, records)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_pipeline_demo(args, parser) -> int:
    noise = _noise_from(args.noise, args.p, args.gamma)
    if noise is not None and args.nq > 10:
        parser.error(f"noisy runs are capped at 10 qubits, got --nq {args.nq}")
    cfg = pipeline.DemoConfig(kind=args.kind, mode=args.mode, secure=args.secure,
                              n_q=args.nq, noise=noise, seed=_master_seed(args),
                              n_train=args.n_train, n_test=args.n_test)
    report = pipeline.run_demo(cfg)
    text = report.to_json()
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote report to {args.out}")
    else:
        print(text)
    return 0


def _cmd_verify(args, parser) -> int:
    groups = None
    if args.group is not None:
        groups = [g.strip() for g in args.group.split(",") if g.strip()]
        for g in groups:
            if g not in verify.CHECK_GROUPS:
                parser.error(f"unknown group {g!r}, expected one of {verify.CHECK_GROUPS}")
    rows = verify.run_all(groups=groups, tn_params=args.params)
    width = max(len(f"{g}:{name}") for g, name, _, _ in rows)
    for g, name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {f'{g}:{name}':<{width}}  {detail}")
    failed = [f"{g}:{name}" for g, name, ok, _ in rows if not ok]
    if failed:
        print(f"{len(failed)} of {len(rows)} checks failed", file=sys.stderr)
        return 1
    print(f"all {len(rows)} checks passed")
    return 0


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tnmpcqep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: TNMPCQEP_SEED env var, then 0)")

    p = sub.add_parser("bench-mpc", help="closed-form communication cost grid")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--dims", type=_int_list, default=[64, 784])
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--theta", type=int, default=5)
    p.add_argument("--strategy", choices=bench.STRATEGIES, default=bench.RECIPROCAL_ONCE)
    p.add_argument("--out", default="bench.csv")
    add_seed(p)
    p.set_defaults(func=_cmd_bench_mpc)

    p = sub.add_parser("encode", help="run a tensor-network frontend over a batch")
    p.add_argument("--kind", choices=_FRONTENDS, default="ttn")
    p.add_argument("--n", type=int, default=8, help="synthetic sample count")
    p.add_argument("--images", default=None, help="IDX image file (with --labels)")
    p.add_argument("--labels", default=None, help="IDX label file (with --images)")
    p.add_argument("--params", default=None, help="load frontend parameters from a bundle")
    p.add_argument("--save-params", default=None, help="save the frontend bundle here")
    p.add_argument("--out", default="latents.csv")
    add_seed(p)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("qep-run", help="quantum processor diagnostics over a batch")
    p.add_argument("--kind", choices=_FRONTENDS, default="ttn")
    p.add_argument("--nq", type=int, default=8)
    p.add_argument("--observables", choices=qep.OBSERVABLE_MODES, default="nearest_neighbor")
    p.add_argument("--noise", choices=NOISE_KINDS, default="noiseless")
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--images", default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--out", default="qep_diagnostics.csv")
    add_seed(p)
    p.set_defaults(func=_cmd_qep_run)

    p = sub.add_parser("qubit-sweep", help="demo metrics per qubit count and seed")
    p.add_argument("--nq", type=_int_list, default=[4, 6, 8, 10, 12, 14, 16])
    p.add_argument("--frontend", choices=_FRONTENDS, default="ttn")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds per count")
    p.add_argument("--noise", choices=NOISE_KINDS, default="noiseless")
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--n-train", type=int, default=400)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--out", default="qubit_sweep.csv")
    add_seed(p)
    p.set_defaults(func=_cmd_qubit_sweep)

    p = sub.add_parser("noise-sweep", help="demo metrics per noise kind and seed")
    p.add_argument("--nq", type=int, default=8)
    p.add_argument("--noise", type=lambda s: [t.strip() for t in s.split(",")],
                   default=list(pipeline.NOISE_SWEEP_KINDS))
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--frontend", choices=_FRONTENDS, default="ttn")
    p.add_argument("--n-train", type=int, default=400)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--out", default="noise_sweep.csv")
    add_seed(p)
    p.set_defaults(func=_cmd_noise_sweep)

    p = sub.add_parser("pipeline-demo", help="one end-to-end run, JSON report")
    p.add_argument("--kind", choices=_FRONTENDS, default="ttn")
    p.add_argument("--mode", choices=("classical", "quantum"), default="quantum")
    p.add_argument("--secure", action="store_true")
    p.add_argument("--nq", type=int, default=8)
    p.add_argument("--noise", choices=NOISE_KINDS, default="noiseless")
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--n-train", type=int, default=400)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    add_seed(p)
    p.set_defaults(func=_cmd_pipeline_demo)

    p = sub.add_parser("verify", help="run the invariant suite, pass/fail per check")
    p.add_argument("--group", default=None,
                   help=f"comma-separated subset of {verify.CHECK_GROUPS}")
    p.add_argument("--params", default=None, help="also check a saved frontend bundle")
    add_seed(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except Exception as exc:  # runtime failure, distinct from flag errors
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
