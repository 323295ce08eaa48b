"""Secure parameter estimation in IRS-aided wireless sensor networks.

Joint transmit/reflective beamforming via alternating SDR feasibility
bisection, a verified small-scale SDP solver, and a reproducible Monte Carlo
experiment harness. Imports are lazy so that entry points can configure
threading before numpy loads.
"""
from __future__ import annotations

_EXPORTS = {
    "ScenarioConfig": "config",
    "ConfigError": "config",
    "load_config": "config",
    "parse_config": "config",
    "NodeLayout": "scenario",
    "ChannelSet": "scenario",
    "place_sensors": "scenario",
    "draw_channels": "scenario",
    "path_loss": "scenario",
    "trial_stream": "scenario",
    "BeamformerPair": "model",
    "EffectiveChannels": "model",
    "LinkQuality": "model",
    "effective_channel": "model",
    "link_quality": "model",
    "check_feasible": "model",
    "PhaseStepForms": "forms",
    "WeightStepForms": "forms",
    "build_phase_forms": "forms",
    "build_weight_forms": "forms",
    "eval_S_phase": "forms",
    "eval_T_phase": "forms",
    "eval_S_weight": "forms",
    "eval_T_weight": "forms",
    "SdpFeasibilityProblem": "sdp",
    "SdpOutcome": "sdp",
    "SdpStatus": "sdp",
    "check_feasibility": "sdp",
    "OptimizationTrace": "optimizer",
    "LiftedPair": "optimizer",
    "alternate": "optimizer",
    "bisect_step": "optimizer",
    "gamma_upper_bound": "optimizer",
    "rank_one_extract": "optimizer",
    "optimize_weights_only": "optimizer",
    "InfeasibleAtFloor": "optimizer",
    "ExtractionFailure": "optimizer",
    "SweepSpec": "experiments",
    "TrialRecord": "experiments",
    "run_trial": "experiments",
    "run_sweep": "experiments",
    "brute_force_tiny": "experiments",
}

__all__ = sorted(_EXPORTS)
__version__ = "0.1.0"


def __getattr__(name: str):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module 'irsbeam' has no attribute {name!r}")
    import importlib

    mod = importlib.import_module(f".{module}", __name__)
    value = getattr(mod, name)
    globals()[name] = value
    return value
