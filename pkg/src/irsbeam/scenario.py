"""Network geometry, path loss, and random channel generation.

Randomness is counter-based: every trial derives its own Philox stream from
``(seed, trial_index)``, and each channel tensor within a trial draws from its
own child stream. Results therefore do not depend on execution order or on
how many IRS elements other draws consumed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig


@dataclass(frozen=True)
class NodeLayout:
    """Positions (meters) of all nodes for one deployment."""

    sensor_positions: np.ndarray  # (K, 2)
    irs_pos: np.ndarray
    fc_pos: np.ndarray
    ed_pos: np.ndarray


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every channel plus the observation gains.

    ``H_I`` is N x K (sensors to IRS), ``h_IF``/``h_IE`` are length-N rows
    (IRS to FC / ED), ``h_f``/``h_e`` are length-K rows (direct links),
    ``alpha`` the length-K observation gains.
    """

    H_I: np.ndarray
    h_IF: np.ndarray
    h_IE: np.ndarray
    h_f: np.ndarray
    h_e: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        N, K = self.H_I.shape
        if self.h_IF.shape != (N,) or self.h_IE.shape != (N,):
            raise ValueError("IRS-side vectors inconsistent with H_I")
        if self.h_f.shape != (K,) or self.h_e.shape != (K,) or self.alpha.shape != (K,):
            raise ValueError("sensor-side vectors inconsistent with H_I")
        for arr in (self.H_I, self.h_IF, self.h_IE, self.h_f, self.h_e, self.alpha):
            if arr.size and not np.all(np.isfinite(arr.view(np.float64))):
                raise ValueError("non-finite channel entry")

    @property
    def K(self) -> int:
        return self.h_f.shape[0]

    @property
    def N(self) -> int:
        return self.h_IF.shape[0]


def trial_stream(seed: int, trial_index: int = 0) -> np.random.Generator:
    """Deterministic stream for one trial, independent across trial indices."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.Philox(seq))


def path_loss(d: float, mu_db: float, d0: float, nu: float) -> float:
    """Linear power gain ``10^(mu_db/10) * (d/d0)^(-nu)`` at distance ``d``."""
    if d <= 0:
        raise ValueError(f"distance must be > 0, got {d}")
    if d0 <= 0:
        raise ValueError(f"reference distance must be > 0, got {d0}")
    return 10.0 ** (mu_db / 10.0) * (d / d0) ** (-nu)


def place_sensors(config: ScenarioConfig, rng: np.random.Generator) -> NodeLayout:
    """Drop K sensors i.i.d. uniformly in the square deployment region."""
    pos = config.region * rng.random((config.K, 2))
    return NodeLayout(
        sensor_positions=pos,
        irs_pos=np.asarray(config.irs_pos, dtype=float),
        fc_pos=np.asarray(config.fc_pos, dtype=float),
        ed_pos=np.asarray(config.ed_pos, dtype=float),
    )


def _cn_samples(rng: np.random.Generator, shape) -> np.ndarray:
    # circularly symmetric complex Gaussian, unit variance per entry
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def _distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(a) - b, axis=-1)


def draw_channels(
    layout: NodeLayout, config: ScenarioConfig, rng: np.random.Generator
) -> ChannelSet:
    """Draw one fading realization for every link.

    Each entry is sqrt(path loss) times a unit-variance circularly symmetric
    complex Gaussian; IRS-side links use ``nu_irs_links``, direct links
    ``nu_direct_links``. Five child streams (one per channel tensor) keep the
    direct channels identical no matter what N is.
    """
    if layout.sensor_positions.shape != (config.K, 2):
        raise ValueError("layout inconsistent with config")
    K, N = config.K, config.N
    gains = lambda d, nu: path_loss_array(d, config.mu_db, config.d0, nu)  # noqa: E731

    d_si = _distances(layout.sensor_positions, layout.irs_pos)  # (K,)
    d_sf = _distances(layout.sensor_positions, layout.fc_pos)
    d_se = _distances(layout.sensor_positions, layout.ed_pos)
    d_if = float(np.linalg.norm(layout.irs_pos - layout.fc_pos))
    d_ie = float(np.linalg.norm(layout.irs_pos - layout.ed_pos))

    sub = rng.spawn(5)
    H_I = np.sqrt(gains(d_si, config.nu_irs_links))[None, :] * _cn_samples(sub[0], (N, K))
    h_IF = np.sqrt(gains(d_if, config.nu_irs_links)) * _cn_samples(sub[1], N)
    h_IE = np.sqrt(gains(d_ie, config.nu_irs_links)) * _cn_samples(sub[2], N)
    h_f = np.sqrt(gains(d_sf, config.nu_direct_links)) * _cn_samples(sub[3], K)
    h_e = np.sqrt(gains(d_se, config.nu_direct_links)) * _cn_samples(sub[4], K)
    return ChannelSet(H_I=H_I, h_IF=h_IF, h_IE=h_IE, h_f=h_f, h_e=h_e, alpha=config.alphas())


def path_loss_array(d, mu_db: float, d0: float, nu: float):
    """Vectorized ``path_loss`` with the same domain checks."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be > 0")
    if d0 <= 0:
        raise ValueError(f"reference distance must be > 0, got {d0}")
    return 10.0 ** (mu_db / 10.0) * (d / d0) ** (-nu)
