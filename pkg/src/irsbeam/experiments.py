"""Monte Carlo harness: per-trial runs, parameter sweeps, baselines, CSV output.

A trial is fully determined by ``(seed, trial_index, method)``: geometry and
channels come from the counter-based stream, so aggregates are independent of
execution order and worker count.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, dbm_to_watts, watts_to_dbm
from .model import link_quality
from .optimizer import (InfeasibleAtFloor, OptimizationTrace, alternate,
                        optimize_weights_only)
from .scenario import ChannelSet, draw_channels, place_sensors, trial_stream

CSV_HEADER = ("method,swept_var,swept_value,trial,K,N,p_t_dbm,eta,mse_fc,mse_ed,"
              "snr_fc,snr_ed,gamma_final,iterations,status,wall_ms")

METHODS = ("jtrb", "no_irs", "random_phase", "brute_force_tiny")
SWEEP_VARIABLES = ("N", "P_T_dBm", "eta")
BASELINES = ("no_irs", "random_phase", "brute_force_tiny")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: which variable, its values, trials per value, baselines."""

    variable: str
    values: tuple
    trials: int
    base: ScenarioConfig
    baselines: tuple = ()

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if len(self.values) == 0:
            raise ValueError("values must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for b in self.baselines:
            if b not in BASELINES:
                raise ValueError(f"unknown baseline {b!r}")

    def config_for(self, value) -> ScenarioConfig:
        if self.variable == "N":
            return self.base.with_updates(N=int(value))
        if self.variable == "P_T_dBm":
            return self.base.with_updates(p_t=dbm_to_watts(float(value)))
        return self.base.with_updates(eta=float(value))


@dataclass(frozen=True)
class TrialRecord:
    method: str
    swept_var: str
    swept_value: float
    trial: int
    K: int
    N: int
    p_t_dbm: float
    eta: float
    mse_fc: float
    mse_ed: float
    snr_fc: float
    snr_ed: float
    gamma_final: float
    iterations: int
    status: str
    wall_ms: float

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_row(self) -> str:
        vals = [self.method, self.swept_var, _fmt(self.swept_value), str(self.trial),
                str(self.K), str(self.N), _fmt(self.p_t_dbm), _fmt(self.eta),
                _fmt(self.mse_fc), _fmt(self.mse_ed), _fmt(self.snr_fc), _fmt(self.snr_ed),
                _fmt(self.gamma_final), str(self.iterations), self.status, _fmt(self.wall_ms)]
        return ",".join(vals)


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def strip_irs(ch: ChannelSet) -> ChannelSet:
    """The no-IRS world: reflected paths removed, direct channels untouched."""
    K = ch.K
    return ChannelSet(H_I=np.zeros((0, K), dtype=np.complex128),
                      h_IF=np.zeros(0, dtype=np.complex128),
                      h_IE=np.zeros(0, dtype=np.complex128),
                      h_f=ch.h_f, h_e=ch.h_e, alpha=ch.alpha)


def run_trial(cfg: ScenarioConfig, trial_index: int, method: str = "jtrb",
              swept_var: str = "none", swept_value: float = math.nan,
              keep_trace: bool = False, backend: str | None = None):
    """One Monte Carlo trial; returns a TrialRecord (and the trace on request).

    Extraction failure and an infeasible floor are soft outcomes recorded in
    ``status``; unexpected exceptions become ``error:<type>`` records.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    rng = trial_stream(cfg.seed, trial_index)
    layout = place_sensors(cfg, rng)
    ch = draw_channels(layout, cfg, rng)
    t0 = time.perf_counter()
    trace = OptimizationTrace()
    status = "ok"
    try:
        if method == "jtrb":
            trace = alternate(ch, cfg, rng, backend=backend)
        elif method == "no_irs":
            trace = optimize_weights_only(strip_irs(ch), cfg, np.zeros(0), rng, backend=backend)
        elif method == "random_phase":
            phi = np.exp(2j * np.pi * rng.random(cfg.N))
            trace = optimize_weights_only(ch, cfg, phi, rng, backend=backend)
        else:  # brute_force_tiny
            pair, snr, gamma = brute_force_tiny(ch, cfg, phase_levels=8, backend=backend)
            trace.beamformer = pair
            trace.quality = link_quality(ch, pair, cfg)
            trace.gamma_final = gamma
            trace.termination = "converged"
        if not trace.succeeded:
            status = trace.termination
    except InfeasibleAtFloor:
        status = "infeasible_at_floor"
    except Exception as exc:  # noqa: BLE001 - harness boundary
        status = f"error:{type(exc).__name__}"
    wall_ms = (time.perf_counter() - t0) * 1e3

    lq = trace.quality
    record = TrialRecord(
        method=method, swept_var=swept_var, swept_value=swept_value, trial=trial_index,
        K=cfg.K, N=cfg.N, p_t_dbm=watts_to_dbm(cfg.p_t), eta=cfg.eta,
        mse_fc=lq.mse_fc if lq else math.nan,
        mse_ed=lq.mse_ed if lq else math.nan,
        snr_fc=lq.snr_fc if lq else math.nan,
        snr_ed=lq.snr_ed if lq else math.nan,
        gamma_final=trace.gamma_final,
        iterations=max(1, len(trace.iterations)) if trace.succeeded else len(trace.iterations),
        status=status, wall_ms=wall_ms)
    if keep_trace:
        return record, trace
    return record


@dataclass(frozen=True)
class AggregateRow:
    swept_value: float
    method: str
    n_ok: int
    n_failed: int
    mean_mse_fc: float
    std_mse_fc: float
    mean_mse_ed: float
    mean_snr_fc: float

    @property
    def stderr_mse_fc(self) -> float:
        return self.std_mse_fc / math.sqrt(self.n_ok) if self.n_ok else math.nan


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list[TrialRecord]
    aggregates: list[AggregateRow] = field(default_factory=list)

    def aggregate_for(self, value, method: str) -> AggregateRow:
        for row in self.aggregates:
            if row.method == method and row.swept_value == float(value):
                return row
        raise KeyError((value, method))


def _run_task(args):
    cfg, trial, method, var, value, backend = args
    return run_trial(cfg, trial, method, swept_var=var, swept_value=value, backend=backend)


def run_sweep(spec: SweepSpec, out_dir=None, jobs: int = 1,
              json_traces: bool = False, backend: str | None = None) -> SweepResult:
    """Run every (value, method, trial) combination and aggregate.

    Failed trials are excluded from the means but counted. With ``out_dir``
    the per-trial CSV (exact schema in :data:`CSV_HEADER`) and optionally
    per-trial JSON traces are written there.
    """
    methods = ("jtrb",) + tuple(spec.baselines)
    tasks = []
    for value in spec.values:
        cfg = spec.config_for(value)
        for method in methods:
            for trial in range(spec.trials):
                tasks.append((cfg, trial, method, spec.variable, float(value), backend))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=lambda r: (spec.values.index(_orig_value(spec, r.swept_value)),
                                methods.index(r.method), r.trial))

    aggregates = []
    for value in spec.values:
        for method in methods:
            group = [r for r in records
                     if r.method == method and r.swept_value == float(value)]
            ok = [r for r in group if r.ok]
            mses = np.array([r.mse_fc for r in ok])
            aggregates.append(AggregateRow(
                swept_value=float(value), method=method,
                n_ok=len(ok), n_failed=len(group) - len(ok),
                mean_mse_fc=float(np.mean(mses)) if ok else math.nan,
                std_mse_fc=float(np.std(mses, ddof=1)) if len(ok) > 1 else 0.0,
                mean_mse_ed=float(np.mean([r.mse_ed for r in ok])) if ok else math.nan,
                mean_snr_fc=float(np.mean([r.snr_fc for r in ok])) if ok else math.nan))
    result = SweepResult(spec=spec, records=records, aggregates=aggregates)
    if out_dir is not None:
        write_csv(records, Path(out_dir) / "trials.csv")
        write_summary(aggregates, Path(out_dir) / "summary.csv")
        if json_traces:
            _write_traces(spec, methods, Path(out_dir) / "traces", backend)
    return result


def _orig_value(spec: SweepSpec, value: float):
    for v in spec.values:
        if float(v) == value:
            return v
    return spec.values[0]


def write_csv(records, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER] + [r.csv_row() for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_summary(aggregates, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["swept_value,method,n_ok,n_failed,mean_mse_fc,std_mse_fc,mean_mse_ed,mean_snr_fc"]
    for a in aggregates:
        lines.append(f"{_fmt(a.swept_value)},{a.method},{a.n_ok},{a.n_failed},"
                     f"{_fmt(a.mean_mse_fc)},{_fmt(a.std_mse_fc)},{_fmt(a.mean_mse_ed)},"
                     f"{_fmt(a.mean_snr_fc)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_traces(spec, methods, trace_dir, backend):
    trace_dir = Path(trace_dir)
    trace_dir.mkdir(parents=True, exist_ok=True)
    for value in spec.values:
        cfg = spec.config_for(value)
        for method in methods:
            if method == "brute_force_tiny":
                continue
            for trial in range(spec.trials):
                _, trace = run_trial(cfg, trial, method, swept_var=spec.variable,
                                     swept_value=float(value), keep_trace=True,
                                     backend=backend)
                payload = trace_payload(trace)
                payload.update(method=method, swept_var=spec.variable,
                               swept_value=float(value), trial=trial)
                name = f"{method}_{spec.variable}{value}_t{trial}.json"
                (trace_dir / name).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def trace_payload(trace: OptimizationTrace) -> dict:
    """JSON-friendly view of one optimization trace."""
    return {
        "gamma_sequence": [float(g) for g in trace.gamma_sequence],
        "outer_gammas": [float(g) for g in trace.outer_gammas],
        "gamma_final": float(trace.gamma_final),
        "snr_extracted": float(trace.snr_extracted),
        "termination": trace.termination,
        "probes": trace.probes,
        "iterations": [
            {"index": rec.index, "gamma_phase": rec.gamma_phase,
             "gamma_weight": rec.gamma_weight,
             "phase_status": rec.phase_status, "weight_status": rec.weight_status,
             "rank_ratio_q": rec.rank_ratio_q, "rank_ratio_b": rec.rank_ratio_b}
            for rec in trace.iterations
        ],
    }


def brute_force_tiny(ch: ChannelSet, cfg: ScenarioConfig, phase_levels: int,
                     backend: str | None = None):
    """Exhaustive quantized-phase search with exact weight bisections.

    Independent near-optimum for validating the alternating scheme on tiny
    instances; the search is ``phase_levels ** N`` weight-step solves.
    Returns ``(pair, snr_fc, relaxed_gamma)`` of the best feasible grid point.
    """
    if ch.N > 3:
        raise ValueError(f"brute force limited to N <= 3, got N={ch.N}")
    if not 1 <= phase_levels <= 16:
        raise ValueError(f"phase_levels must be in [1, 16], got {phase_levels}")
    rng = trial_stream(cfg.seed, 0)
    best = None
    angles = 2.0 * np.pi * np.arange(phase_levels) / phase_levels
    for combo in itertools.product(angles, repeat=ch.N):
        phi = np.exp(1j * np.asarray(combo, dtype=float))
        trace = optimize_weights_only(ch, cfg, phi, rng, backend=backend)
        if not trace.succeeded:
            continue
        snr = trace.quality.snr_fc
        if best is None or snr > best[1]:
            best = (trace.beamformer, snr, trace.gamma_final)
    if best is None:
        raise InfeasibleAtFloor(0.0)
    return best
