import os

# keep BLAS single-threaded: the suite runs many tiny factorizations where
# thread sync dominates, and the Monte Carlo pieces fan out across processes
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from irsbeam import kernels
from irsbeam.config import ScenarioConfig
from irsbeam.scenario import ChannelSet


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load the cached) jit lane once so timing-sensitive tests
    # never pay compilation inside their budget
    for backend in kernels.available_backends():
        kernels.warmup(backend)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


def synth_channels(rng: np.random.Generator, K: int, N: int,
                   scale: float = 1.0) -> ChannelSet:
    """O(1)-magnitude random channels for algebra-level tests."""
    def cn(*shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    return ChannelSet(H_I=cn(N, K), h_IF=cn(N), h_IE=cn(N),
                      h_f=cn(K), h_e=cn(K), alpha=cn(K))


def unit_alpha_channels(rng: np.random.Generator, K: int, N: int,
                        scale: float = 1.0) -> ChannelSet:
    ch = synth_channels(rng, K, N, scale)
    return ChannelSet(H_I=ch.H_I, h_IF=ch.h_IF, h_IE=ch.h_IE,
                      h_f=ch.h_f, h_e=ch.h_e,
                      alpha=np.ones(K, dtype=np.complex128))


@pytest.fixture
def small_cfg():
    return ScenarioConfig(K=3, N=6, seed=1234)
