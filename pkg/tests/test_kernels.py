import numpy as np
import pytest

from irsbeam import kernels
from irsbeam.sdp import SdpFeasibilityProblem, check_feasibility


def _random_problem(rng):
    n = int(rng.integers(1, 6))
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    X0 = np.outer(v, v.conj()) + 0.3 * np.eye(n)
    cons = []
    for _ in range(int(rng.integers(1, 5))):
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = 0.5 * (M + M.conj().T)
        val = float(np.real(np.sum(A.conj() * X0)))
        margin = float(rng.uniform(-0.4, 0.6))
        cons.append((A, "<=", val + margin))
    return SdpFeasibilityProblem(dim=n, constraints=tuple(cons))


def test_lanes_agree_on_status():
    if not kernels.HAS_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(0)
    for _ in range(25):
        p = _random_problem(rng)
        a = check_feasibility(p, backend="numpy")
        b = check_feasibility(p, backend="numba")
        assert a.status is b.status


def test_lane_outputs_match_bitwise():
    if not kernels.HAS_NUMBA:
        pytest.skip("numba unavailable")
    Ad = np.array([[0.6, 0.8], [1.0, 0.0]])
    Aden = np.zeros((1, 2, 2))
    Aden[0] = np.array([[0.0, 0.7], [0.7, 0.1]])
    b = np.array([4.0, 1.0, 0.3])
    iseq = np.array([False, True, False])
    out_np = kernels.solve_maxslack(Ad, Aden, b, iseq, 1e-7, 1e-7, 100, backend="numpy")
    out_nb = kernels.solve_maxslack(Ad, Aden, b, iseq, 1e-7, 1e-7, 100, backend="numba")
    assert out_np[0] == out_nb[0]
    np.testing.assert_allclose(out_np[1], out_nb[1], rtol=1e-9, atol=1e-12)
    assert out_np[2] == pytest.approx(out_nb[2], rel=1e-9)


def test_backend_selection_env(monkeypatch):
    monkeypatch.setenv(kernels.ENV_VAR, "numpy")
    assert kernels.default_backend() == "numpy"
    monkeypatch.delenv(kernels.ENV_VAR)
    assert kernels.default_backend() in kernels.available_backends()


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.get_lane("fortran")


def test_warmup_runs_all_lanes():
    for be in kernels.available_backends():
        kernels.warmup(be)
