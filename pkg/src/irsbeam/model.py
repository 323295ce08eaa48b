"""Direct evaluation of a candidate design: effective channels, SNR/MSE at the
fusion center and the eavesdropper, transmit power, and constraint margins.

Everything here is a plain closed-form evaluation; the optimizer and its
lifted reformulations are tested against this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .scenario import ChannelSet

@dataclass(frozen=True)
class BeamformerPair:
    """Transmit weights ``beta`` (length K) and IRS coefficients ``phi``
    (length N, entries on the unit circle)."""

    beta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi)
        if phi.size and np.max(np.abs(np.abs(phi) - 1.0)) > 1e-6:
            raise ValueError("phi entries must have unit modulus")


@dataclass(frozen=True)
class EffectiveChannels:
    h_F: np.ndarray
    h_E: np.ndarray


@dataclass(frozen=True)
class LinkQuality:
    snr_fc: float
    snr_ed: float
    mse_fc: float
    mse_ed: float
    power: float


@dataclass(frozen=True)
class FeasibilityReport:
    power_ok: bool
    ed_ok: bool
    unit_modulus_ok: bool
    power_margin: float
    ed_margin: float
    modulus_margin: float

    @property
    def all_ok(self) -> bool:
        return self.power_ok and self.ed_ok and self.unit_modulus_ok


def effective_channel(ch: ChannelSet, phi: np.ndarray) -> EffectiveChannels:
    """Combine reflected and direct paths: ``h = h_I* D(phi) H_I + h_direct``."""
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.shape != (ch.N,):
        raise ValueError(f"phi must have length N={ch.N}, got shape {phi.shape}")
    if ch.N == 0:
        return EffectiveChannels(h_F=ch.h_f.copy(), h_E=ch.h_e.copy())
    reflected = phi[:, None] * ch.H_I  # D(phi) @ H_I without forming the diagonal
    return EffectiveChannels(
        h_F=ch.h_IF @ reflected + ch.h_f,
        h_E=ch.h_IE @ reflected + ch.h_e,
    )


def snr_from_parts(num: float, beta_term: float, sigma2_o: float, sigma2_rx: float) -> float:
    return num / (sigma2_o * beta_term + sigma2_rx)


def _side_quality(h: np.ndarray, alpha: np.ndarray, beta: np.ndarray,
                  sigma2_o: float, sigma2_rx: float) -> float:
    num = abs(h @ (alpha * beta)) ** 2  # |h (alpha o beta)|^2
    beta_term = float(np.sum(np.abs(beta) ** 2 * np.abs(h) ** 2))
    return snr_from_parts(num, beta_term, sigma2_o, sigma2_rx)


def transmit_power(alpha: np.ndarray, beta: np.ndarray, sigma2_o: float) -> float:
    """Average network power ``sum_k (|alpha_k|^2 + sigma2_o) |beta_k|^2``."""
    return float(np.sum((np.abs(alpha) ** 2 + sigma2_o) * np.abs(beta) ** 2))


def link_quality(ch: ChannelSet, bf: BeamformerPair, cfg: ScenarioConfig) -> LinkQuality:
    """SNR, LMMSE MSE (``1/(1+snr)``) and transmit power of a candidate pair."""
    beta = np.asarray(bf.beta, dtype=np.complex128)
    if beta.shape != (cfg.K,):
        raise ValueError(f"beta must have length K={cfg.K}")
    eff = effective_channel(ch, bf.phi)
    snr_fc = _side_quality(eff.h_F, ch.alpha, beta, cfg.sigma2_o, cfg.sigma2_f)
    snr_ed = _side_quality(eff.h_E, ch.alpha, beta, cfg.sigma2_o, cfg.sigma2_e)
    return LinkQuality(
        snr_fc=snr_fc,
        snr_ed=snr_ed,
        mse_fc=1.0 / (1.0 + snr_fc),
        mse_ed=1.0 / (1.0 + snr_ed),
        power=transmit_power(ch.alpha, beta, cfg.sigma2_o),
    )


def check_feasible(ch: ChannelSet, bf: BeamformerPair, cfg: ScenarioConfig,
                   tol: float = 1e-9) -> FeasibilityReport:
    """Constraint report with signed margins (positive = satisfied)."""
    lq = link_quality(ch, bf, cfg)
    phi = np.asarray(bf.phi)
    modulus_dev = float(np.max(np.abs(np.abs(phi) - 1.0))) if phi.size else 0.0
    power_margin = cfg.p_t - lq.power
    ed_margin = cfg.eta - lq.snr_ed if math.isfinite(cfg.eta) else math.inf
    return FeasibilityReport(
        power_ok=lq.power <= cfg.p_t * (1.0 + tol),
        ed_ok=(not math.isfinite(cfg.eta)) or lq.snr_ed <= cfg.eta * (1.0 + tol),
        unit_modulus_ok=modulus_dev <= tol,
        power_margin=power_margin,
        ed_margin=ed_margin,
        modulus_margin=-modulus_dev,
    )
