"""Scenario configuration: physical and algorithmic parameters plus file parsing.

Noise powers and the transmit budget are stored in linear watts internally;
the config-file loader also accepts the matching ``*_dbm`` keys and converts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace


class ConfigError(ValueError):
    """Invalid configuration file or parameter values."""


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w) + 30.0


@dataclass(frozen=True)
class ScenarioConfig:
    """All knobs for one network scenario and one optimizer run.

    Geometry is 2-D; sensors are drawn uniformly in ``[0, region]^2`` while the
    reflecting surface, fusion center and eavesdropper sit at fixed positions.
    ``eta`` is the linear ceiling on the eavesdropper SNR (``math.inf``
    disables the constraint), ``epsilon`` the bisection tolerance on the
    epigraph variable.
    """

    K: int = 5
    N: int = 20
    region: float = 40.0
    irs_pos: tuple[float, float] = (60.0, 20.0)
    fc_pos: tuple[float, float] = (65.0, 25.0)
    ed_pos: tuple[float, float] = (70.0, 15.0)
    mu_db: float = -30.0
    d0: float = 1.0
    nu_irs_links: float = 2.0
    nu_direct_links: float = 3.0
    sigma2_o: float = 1e-10
    sigma2_f: float = 1e-10
    sigma2_e: float = 1e-10
    p_t: float = 1.0
    eta: float = 1.0
    alpha_spec: tuple[complex, ...] | None = None
    epsilon: float = 0.01
    n_iter: int = 10
    seed: int = 0
    phi_init: str = "ones"
    bisection_restart: bool = False
    delta: float = 1e-3
    m_randomization: int = 1000

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.N < 0:
            raise ConfigError(f"N must be >= 0, got {self.N}")
        if self.region < 0:
            raise ConfigError(f"region must be >= 0, got {self.region}")
        for name in ("sigma2_o", "sigma2_f", "sigma2_e", "p_t", "eta", "epsilon"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.d0 <= 0:
            raise ConfigError(f"d0 must be > 0, got {self.d0}")
        if self.n_iter < 1:
            raise ConfigError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.m_randomization < 1:
            raise ConfigError("m_randomization must be >= 1")
        if self.phi_init not in ("ones", "random"):
            raise ConfigError(f"phi_init must be 'ones' or 'random', got {self.phi_init!r}")
        if self.alpha_spec is not None and len(self.alpha_spec) != self.K:
            raise ConfigError(
                f"alpha_spec must have exactly K={self.K} entries, got {len(self.alpha_spec)}"
            )

    def alphas(self):
        """Observation gains as a complex array (all-ones unless overridden)."""
        import numpy as np

        if self.alpha_spec is None:
            return np.ones(self.K, dtype=np.complex128)
        return np.asarray(self.alpha_spec, dtype=np.complex128)

    def with_updates(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


# Keys that may be given in dBm in config files, mapped to the linear field.
_DBM_KEYS = {
    "sigma2_o_dbm": "sigma2_o",
    "sigma2_f_dbm": "sigma2_f",
    "sigma2_e_dbm": "sigma2_e",
    "p_t_dbm": "p_t",
}

_PAIR_KEYS = {"irs_pos", "fc_pos", "ed_pos"}
_INT_KEYS = {"K", "N", "n_iter", "seed", "m_randomization"}
_BOOL_KEYS = {"bisection_restart"}
_STR_KEYS = {"phi_init"}


def _parse_scalar(key: str, raw: str):
    if key in _INT_KEYS:
        return int(raw)
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"bad boolean for {key}: {raw!r}")
    if key in _STR_KEYS:
        return raw
    if raw.lower() in ("inf", "infinity"):
        return math.inf
    return float(raw)


def parse_config(text: str) -> ScenarioConfig:
    """Parse flat ``key = value`` text into a ScenarioConfig.

    Unknown keys are a hard error; a linear key and its ``_dbm`` twin may not
    both appear. ``#`` starts a comment, blank lines are skipped.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    values: dict[str, object] = {}
    seen_raw: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in seen_raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen_raw.add(key)
        if key in _DBM_KEYS:
            target = _DBM_KEYS[key]
            if target in values:
                raise ConfigError(f"line {lineno}: {key!r} conflicts with {target!r}")
            values[target] = dbm_to_watts(float(raw))
            continue
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in _DBM_KEYS.values() and key in values:
            raise ConfigError(f"line {lineno}: {key!r} conflicts with its _dbm twin")
        if key in _PAIR_KEYS:
            parts = [p for p in raw.replace(",", " ").split() if p]
            if len(parts) != 2:
                raise ConfigError(f"line {lineno}: {key} needs two coordinates, got {raw!r}")
            values[key] = (float(parts[0]), float(parts[1]))
        elif key == "alpha_spec":
            entries = [p for p in raw.split(",") if p.strip()]
            try:
                values[key] = tuple(complex(p.strip().replace(" ", "")) for p in entries)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad alpha_spec entry: {exc}") from exc
        else:
            values[key] = _parse_scalar(key, raw)
    try:
        return ScenarioConfig(**values)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
