"""Command-line interface: single trials, sweeps, convergence traces.

Exit codes: 0 success, 2 configuration error, 3 more hard trial failures than
``--max-failures`` allows.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

# single-threaded BLAS: trials are small and fan out across processes instead
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURES = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="flat key=value scenario file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--backend", choices=("numba", "numpy"), default=None,
                   help="force a solver lane (default: numba when available)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irsbeam",
                                 description="secure-estimation beamforming simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    single = sub.add_parser("run-single", help="run one trial and print the record as JSON")
    _add_common(single)
    single.add_argument("--method", default="jtrb",
                        choices=("jtrb", "no_irs", "random_phase", "brute_force_tiny"))
    single.add_argument("--trial", type=int, default=0)
    single.add_argument("--json-traces", action="store_true",
                        help="include the optimization trace in the JSON output")

    sweep = sub.add_parser("run-sweep", help="Monte Carlo sweep over N, P_T_dBm or eta")
    _add_common(sweep)
    sweep.add_argument("--sweep", required=True, metavar="VAR=v1,v2,...",
                       help="one of N=..., P_T_dBm=..., eta=...")
    sweep.add_argument("--trials", type=int, required=True)
    sweep.add_argument("--baselines", default="",
                       help="comma list from {no_irs,random_phase,brute_force_tiny}")
    sweep.add_argument("--out", required=True, help="output directory for CSV files")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--json-traces", action="store_true")
    sweep.add_argument("--max-failures", type=int, default=0,
                       help="tolerated hard (error:*) trial failures before exit code 3")

    conv = sub.add_parser("convergence", help="emit per-iteration gamma traces")
    _add_common(conv)
    conv.add_argument("--trials", type=int, required=True)
    conv.add_argument("--out", required=True)
    conv.add_argument("--jobs", type=int, default=1)
    return ap


def _load_config(args):
    from .config import ConfigError, load_config

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_updates(seed=args.seed)
        return cfg
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None


def _parse_sweep(expr: str):
    from .experiments import SWEEP_VARIABLES

    if "=" not in expr:
        raise ValueError(f"expected VAR=v1,v2,..., got {expr!r}")
    var, _, raw = expr.partition("=")
    var = var.strip()
    if var not in SWEEP_VARIABLES:
        raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {var!r}")
    values = tuple(float(v) for v in raw.split(",") if v.strip())
    if not values:
        raise ValueError("sweep needs at least one value")
    if var == "N":
        values = tuple(int(v) for v in values)
    return var, values


def _null_nans(obj):
    if isinstance(obj, float):
        import math

        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _null_nans(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_null_nans(v) for v in obj]
    return obj


def _cmd_run_single(args) -> int:
    from dataclasses import asdict

    from .experiments import run_trial, trace_payload

    cfg = _load_config(args)
    if cfg is None:
        return EXIT_CONFIG
    record, trace = run_trial(cfg, args.trial, args.method, keep_trace=True,
                              backend=args.backend)
    payload = asdict(record)
    if args.json_traces:
        payload["trace"] = trace_payload(trace)
    payload = _null_nans(payload)
    print(json.dumps(payload, indent=1))
    if record.status.startswith("error:"):
        return EXIT_FAILURES
    return EXIT_OK


def _cmd_run_sweep(args) -> int:
    from .experiments import SweepSpec, run_sweep

    cfg = _load_config(args)
    if cfg is None:
        return EXIT_CONFIG
    try:
        var, values = _parse_sweep(args.sweep)
        baselines = tuple(b.strip() for b in args.baselines.split(",") if b.strip())
        spec = SweepSpec(variable=var, values=values, trials=args.trials,
                         base=cfg, baselines=baselines)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_sweep(spec, out_dir=args.out, jobs=args.jobs,
                       json_traces=args.json_traces, backend=args.backend)
    hard = sum(1 for r in result.records if r.status.startswith("error:"))
    soft = sum(1 for r in result.records if not r.ok and not r.status.startswith("error:"))
    print(f"wrote {len(result.records)} records to {args.out} "
          f"(hard failures: {hard}, soft failures: {soft})")
    for row in result.aggregates:
        print(f"  {result.spec.variable}={row.swept_value:g} {row.method}: "
              f"mean MSE_FC={row.mean_mse_fc:.4g} (n={row.n_ok}, failed={row.n_failed})")
    if hard > args.max_failures:
        print(f"hard failures ({hard}) exceed --max-failures ({args.max_failures})",
              file=sys.stderr)
        return EXIT_FAILURES
    return EXIT_OK


def _convergence_task(args):
    from .experiments import run_trial

    cfg, trial, backend = args
    return trial, run_trial(cfg, trial, "jtrb", keep_trace=True, backend=backend)


def _cmd_convergence(args) -> int:
    cfg = _load_config(args)
    if cfg is None:
        return EXIT_CONFIG
    from concurrent.futures import ProcessPoolExecutor
    from pathlib import Path

    tasks = [(cfg, t, args.backend) for t in range(args.trials)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = sorted(pool.map(_convergence_task, tasks))
    else:
        results = [_convergence_task(t) for t in tasks]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["trial,outer_iteration,gamma_phase,gamma_weight"]
    hard = 0
    for trial, (record, trace) in results:
        if record.status.startswith("error:"):
            hard += 1
        for rec in trace.iterations:
            lines.append(f"{trial},{rec.index},{rec.gamma_phase!r},{rec.gamma_weight!r}")
    path = out / "convergence.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")
    return EXIT_FAILURES if hard else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run-single":
        return _cmd_run_single(args)
    if args.command == "run-sweep":
        return _cmd_run_sweep(args)
    return _cmd_convergence(args)


if __name__ == "__main__":
    sys.exit(main())
