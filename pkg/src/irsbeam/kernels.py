"""Backend selection for the interior-point core.

The algorithm in :mod:`irsbeam._ipm` is written once against the numba-
compilable numpy subset. Here it is instantiated twice: a ``numba`` lane
(functions compiled with ``@njit(cache=True)``) and a pure-``numpy`` lane
(the same code objects executed by CPython). The env variable
``IRSBEAM_BACKEND`` picks the default lane (``numba`` when available,
``numpy`` otherwise); ``benchmarks/bench_kernels.py`` compares the two.
"""
from __future__ import annotations

import os
import types

from . import _ipm

ENV_VAR = "IRSBEAM_BACKEND"
_LANE_FUNCS = ("_chol_ok", "_pd_step_len", "_pos_step_len", "_tstar",
               "_row_vals", "_sym", "_solve_maxslack")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def _instantiate(jit):
    """Rebuild the solver call graph with every function passed through jit.

    Each function gets a fresh globals namespace in which the names of its
    helpers resolve to the jitted versions, so the whole call chain stays
    inside one lane.
    """
    g = dict(_ipm.__dict__)
    out = {}
    for name in _LANE_FUNCS:
        f = getattr(_ipm, name)
        rebound = types.FunctionType(f.__code__, g, f.__name__, f.__defaults__)
        jf = jit(rebound)
        g[name] = jf
        out[name] = jf
    return out


_numpy_lane = _instantiate(lambda f: f)
_numba_lane = None
if HAS_NUMBA:
    _numba_lane = _instantiate(lambda f: numba.njit(cache=True)(f))


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def default_backend() -> str:
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not HAS_NUMBA:
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return choice
    return "numba" if HAS_NUMBA else "numpy"


def get_lane(backend: str | None = None) -> dict:
    name = backend if backend is not None else default_backend()
    if name == "numba":
        if _numba_lane is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _numba_lane
    if name == "numpy":
        return _numpy_lane
    raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")


def solve_maxslack(Ad, Aden, b, iseq, tol, decide_tol, max_iter,
                   backend: str | None = None):
    """Dispatch one max-slack solve to the selected lane."""
    lane = get_lane(backend)
    return lane["_solve_maxslack"](Ad, Aden, b, iseq, tol, decide_tol, max_iter)


def warmup(backend: str | None = None) -> None:
    """Trigger jit compilation (or a no-op on the numpy lane) on a toy problem."""
    import numpy as np

    Ad = np.ones((1, 2)) / np.sqrt(2.0)
    Aden = np.zeros((1, 2, 2))
    Aden[0, 0, 0] = 1.0
    b = np.array([4.0, 1.0])
    iseq = np.array([False, False])
    solve_maxslack(Ad, Aden, b, iseq, 1e-7, 1e-7, 50, backend=backend)
