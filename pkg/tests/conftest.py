import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from capbound.optimize import OptimizerConfig

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fast_cfg():
    return OptimizerConfig(restarts=6, grid=(20, 40, 40))


def naive_entropy(rho):
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log2(w)))


def naive_ptrace_second(rho, da, db):
    """Keep the first factor, loop over the second."""
    out = np.zeros((da, da), dtype=complex)
    for j in range(db):
        e = np.zeros(db)
        e[j] = 1
        P = np.kron(np.eye(da), e[None, :])
        out += P @ rho @ P.conj().T
    return out


def naive_ptrace_first(rho, da, db):
    out = np.zeros((db, db), dtype=complex)
    for i in range(da):
        e = np.zeros(da)
        e[i] = 1
        P = np.kron(e[None, :], np.eye(db))
        out += P @ rho @ P.conj().T
    return out
