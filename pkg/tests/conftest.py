import numpy as np
import pytest

from tcrystal.features.models import BathConfig, ModelKind, SpinModel


def rand_density_matrix(dim, rng):
    tmp0 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = tmp0 @ tmp0.conj().T
    return rho / np.trace(rho).real


def rand_hermitian(dim, rng):
    tmp0 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (tmp0 + tmp0.conj().T) / 2


def rand_unitary(dim, rng):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(233)


@pytest.fixture
def lmg3():
    return SpinModel(kind=ModelKind.LMG, n_qubits=3, J=1.0, B=0.5)


@pytest.fixture
def xxz_ring():
    return SpinModel(kind=ModelKind.XXZ, n_qubits=4, J=1.0, B=0.5, periodic=True)


@pytest.fixture
def cold_bath():
    return BathConfig(beta=float('inf'), field=0.5, tau=0.5, gamma=1.0)
