#!/usr/bin/env python3
"""Compare the numba and pure-numpy solver lanes.

Times the max-slack interior-point kernel on representative feasibility
problems (the weight step at several sensor counts, the phase step at several
surface sizes) and one full optimization trial per size. Run:

    python benchmarks/bench_kernels.py [--repeats R]
"""
import argparse
import os
import time

for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np

from irsbeam import kernels
from irsbeam.config import ScenarioConfig
from irsbeam.forms import build_phase_forms, build_weight_forms, lifted_gram
from irsbeam.optimizer import alternate, phase_problem, weight_problem
from irsbeam.scenario import draw_channels, place_sensors, trial_stream
from irsbeam.sdp import _assemble, _auto_ball, check_feasibility


def _problem_battery():
    """Representative solver inputs: (label, assembled kernel arrays)."""
    battery = []
    for K, N in ((3, 6), (5, 20), (5, 40), (5, 100)):
        cfg = ScenarioConfig(K=K, N=N, seed=7)
        rng = trial_stream(cfg.seed, 0)
        ch = draw_channels(place_sensors(cfg, rng), cfg, rng)
        wf = build_weight_forms(ch, lifted_gram(np.ones(N)))
        wp = weight_problem(wf, 1.0, cfg)
        battery.append((f"weight K={K}", _assemble(wp, 2.0 * wp.trace_bound)))
        pf = build_phase_forms(ch, np.eye(K, dtype=complex) * cfg.p_t / K)
        pp = phase_problem(pf, 1.0, cfg)
        battery.append((f"phase  N={N}", _assemble(pp, 2.0 * pp.trace_bound)))
    return battery


def bench_kernel(repeats: int):
    print(f"{'problem':<14} {'dim':>5} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for label, (Ad, Aden, b, iseq, nd, kd) in _problem_battery():
        times = {}
        for backend in kernels.available_backends():
            kernels.solve_maxslack(Ad, Aden, b, iseq, 1e-7, 1e-7, 200, backend=backend)
            t0 = time.perf_counter()
            for _ in range(repeats):
                kernels.solve_maxslack(Ad, Aden, b, iseq, 1e-7, 1e-7, 200, backend=backend)
            times[backend] = (time.perf_counter() - t0) / repeats * 1e3
        np_ms = times.get("numpy", float("nan"))
        nb_ms = times.get("numba", float("nan"))
        speedup = np_ms / nb_ms if nb_ms and nb_ms == nb_ms else float("nan")
        print(f"{label:<14} {Ad.shape[1]:>5} {np_ms:>10.3f} {nb_ms:>10.3f} {speedup:>7.2f}x")


def bench_trial(repeats: int):
    print(f"\n{'trial':<14} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for K, N in ((3, 6), (5, 20)):
        cfg = ScenarioConfig(K=K, N=N, seed=11)
        times = {}
        for backend in kernels.available_backends():
            def one(trial):
                rng = trial_stream(cfg.seed, trial)
                ch = draw_channels(place_sensors(cfg, rng), cfg, rng)
                return alternate(ch, cfg, rng, backend=backend)

            one(0)
            t0 = time.perf_counter()
            for r in range(repeats):
                one(r + 1)
            times[backend] = (time.perf_counter() - t0) / repeats * 1e3
        np_ms = times.get("numpy", float("nan"))
        nb_ms = times.get("numba", float("nan"))
        speedup = np_ms / nb_ms if nb_ms and nb_ms == nb_ms else float("nan")
        print(f"K={K} N={N:<8} {np_ms:>10.1f} {nb_ms:>10.1f} {speedup:>7.2f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    print(f"backends available: {kernels.available_backends()}")
    for backend in kernels.available_backends():
        kernels.warmup(backend)
    bench_kernel(args.repeats)
    bench_trial(max(3, args.repeats // 4))


if __name__ == "__main__":
    main()
