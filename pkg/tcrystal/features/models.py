#!/usr/bin/env python3
"""
Spin models, auxiliary bath states, initial states and observables

Builds the LMG and XXZ Hamiltonians, the thermal ancilla state and the
closed-form LMG spectral predictions. Units: hbar = 1, J = 1 by default;
frequencies are angular.
"""

import logging
import math
import numbers
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations

import numpy as np

from .errors import ConfigError, DimensionError, InvalidStateError
from .tensor import ComplexMatrix, DensityMatrix, StateVector, eigh, kron, normalize

logger = logging.getLogger(__name__)

# gamma * tau above this is reported as violating gamma*tau << 1
GAMMA_TAU_WARN = 0.1

_PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=np.complex128),
    'y': np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    'z': np.array([[1, 0], [0, -1]], dtype=np.complex128),
    'i': np.eye(2, dtype=np.complex128),
}
_PAULI['plus'] = (_PAULI['x'] + 1j * _PAULI['y']) / 2
_PAULI['minus'] = (_PAULI['x'] - 1j * _PAULI['y']) / 2

_KETS = {
    '0': np.array([1, 0], dtype=np.complex128),
    '1': np.array([0, 1], dtype=np.complex128),
    '+': np.array([1, 1], dtype=np.complex128) / math.sqrt(2),
    '-': np.array([1, -1], dtype=np.complex128) / math.sqrt(2),
}


class ModelKind(str, Enum):
    LMG = 'lmg'
    XXZ = 'xxz'


@dataclass(frozen=True)
class SpinModel:
    """Hamiltonian specification; `periodic` and `delta` only affect XXZ"""
    kind: ModelKind
    n_qubits: int
    J: float = 1.0
    B: float = 0.5
    periodic: bool = False
    delta: float = 0.0

    def __post_init__(self):
        if not isinstance(self.kind, ModelKind):
            try:
                object.__setattr__(self, 'kind', ModelKind(str(self.kind).lower()))
            except ValueError:
                raise ConfigError(f"Unknown model kind '{self.kind}' (expected lmg or xxz)")
        if isinstance(self.n_qubits, bool) or not isinstance(self.n_qubits, (int, np.integer)) or self.n_qubits < 2:
            raise ConfigError(f"n_qubits must be an integer >= 2, got {self.n_qubits!r}")
        for name in ('J', 'B', 'delta'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value):
                raise ConfigError(f"{name} must be a finite number, got {value!r}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def hamiltonian(self) -> ComplexMatrix:
        if self.kind is ModelKind.LMG:
            return lmg_hamiltonian(self)
        return xxz_hamiltonian(self)


@dataclass(frozen=True)
class BathConfig:
    """Collisional bath: ancilla temperature and field, collision duration, arrival rate

    The ancilla free Hamiltonian is H_A = -field * sigma_z, so its Gibbs state has
    level splitting 2 * field.
    """
    beta: float
    field: float
    tau: float
    gamma: float
    include_ancilla_hamiltonian: bool = False

    def __post_init__(self):
        if math.isnan(self.beta) or self.beta < 0:
            raise InvalidStateError(f"beta must be >= 0 or inf, got {self.beta}")
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.gamma * self.tau > GAMMA_TAU_WARN:
            logger.warning(f"⚠️ gamma*tau = {self.gamma * self.tau:.3g} does not satisfy gamma*tau << 1")

    @property
    def splitting(self) -> float:
        return 2.0 * self.field

    def ancilla_state(self) -> DensityMatrix:
        return thermal_ancilla(self.beta, self.splitting)

    def ancilla_hamiltonian(self) -> ComplexMatrix:
        return -self.field * pauli('z')


@dataclass(frozen=True)
class SpectralPrediction:
    e_nu: float
    e_mu: float
    degeneracy_mu: int
    lam: float


def pauli(axis: str) -> ComplexMatrix:
    """Pauli matrix for axis in {x, y, z, i, plus, minus}; sigma_pm = (sigma_x pm i sigma_y)/2"""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise InvalidStateError(f"Unknown Pauli axis '{axis}'")


def lowering() -> ComplexMatrix:
    """|0><1|: takes the excited state of -B sigma_z to the ground state |0>"""
    return pauli('plus')


def raising() -> ComplexMatrix:
    """|1><0|: the thermal excitation jump"""
    return pauli('minus')


def embed(op, site: int, n_qubits: int) -> ComplexMatrix:
    """Place a single-qubit operator at 1-based `site` of an n-qubit register"""
    if not 1 <= site <= n_qubits:
        raise DimensionError(f"Site {site} outside 1..{n_qubits}")
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (2, 2):
        raise DimensionError(f"embed expects a 2x2 operator, got {op.shape}")
    factors = [_PAULI['i']] * n_qubits
    factors[site - 1] = op
    return kron(*factors)


def _flip_flop(i: int, j: int, n: int) -> ComplexMatrix:
    return (embed(_PAULI['x'], i, n) @ embed(_PAULI['x'], j, n)
            + embed(_PAULI['y'], i, n) @ embed(_PAULI['y'], j, n))


def _total_z(n: int) -> ComplexMatrix:
    return sum(embed(_PAULI['z'], i, n) for i in range(1, n + 1))


def lmg_hamiltonian(model: SpinModel) -> ComplexMatrix:
    """-(J/N) sum_{i<j} (XX + YY) - B sum Z"""
    if model.kind is not ModelKind.LMG:
        raise ConfigError(f"lmg_hamiltonian called with a {model.kind.value} model")
    n = model.n_qubits
    coupling = sum(_flip_flop(i, j, n) for i, j in combinations(range(1, n + 1), 2))
    return -(model.J / n) * coupling - model.B * _total_z(n)


def xxz_hamiltonian(model: SpinModel) -> ComplexMatrix:
    """J sum_i (XX + YY) + delta J sum_i ZZ + B sum Z over nearest neighbours"""
    if model.kind is not ModelKind.XXZ:
        raise ConfigError(f"xxz_hamiltonian called with a {model.kind.value} model")
    n = model.n_qubits
    bonds = [(i, i + 1) for i in range(1, n)]
    if model.periodic and n > 2:
        bonds.append((n, 1))
    h = model.B * _total_z(n)
    for i, j in bonds:
        h = h + model.J * _flip_flop(i, j, n)
        if model.delta:
            h = h + model.delta * model.J * embed(_PAULI['z'], i, n) @ embed(_PAULI['z'], j, n)
    return h


def thermal_ancilla(beta: float, field_a: float) -> DensityMatrix:
    """diag(p0, 1 - p0) with p0 = (1 + tanh(beta * field_a / 2)) / 2; beta = inf gives |0><0|"""
    if math.isnan(beta) or beta < 0:
        raise InvalidStateError(f"beta must be >= 0 or inf, got {beta}")
    if field_a == 0 or beta == 0:
        p0 = 0.5
    else:
        p0 = (1.0 + math.tanh(beta * field_a / 2.0)) / 2.0
    return np.diag([p0, 1.0 - p0]).astype(np.complex128)


def initial_state(labels) -> StateVector:
    """Product state from per-qubit labels in {0, 1, +, -}"""
    kets = []
    for label in labels:
        key = str(label).replace('−', '-')
        if key not in _KETS:
            raise InvalidStateError(f"Invalid qubit label '{label}' (expected 0, 1, + or -)")
        kets.append(_KETS[key])
    if not kets:
        raise InvalidStateError("Initial state needs at least one qubit label")
    return normalize(kron(*[k.reshape(-1, 1) for k in kets]).ravel())


def collective_sx(n_qubits: int) -> ComplexMatrix:
    if n_qubits < 1:
        raise DimensionError("collective_sx needs at least one qubit")
    return sum(embed(_PAULI['x'], i, n_qubits) for i in range(1, n_qubits + 1))


def site_observables(n_qubits: int, axes: str = 'x') -> dict[str, ComplexMatrix]:
    """Named single-site Pauli observables, e.g. {'sx1': ..., 'sx2': ...}"""
    return {f"s{axis}{site}": embed(_PAULI[axis], site, n_qubits)
            for axis in axes for site in range(1, n_qubits + 1)}


def resolve_observables(names, n_qubits: int) -> dict[str, ComplexMatrix]:
    """Map observable names (sx2, sz1, Sx) to operators"""
    observables = {}
    for name in names:
        if name == 'Sx':
            observables[name] = collective_sx(n_qubits)
            continue
        if len(name) < 3 or name[0] != 's' or name[1] not in 'xyz' or not name[2:].isdigit():
            raise ConfigError(f"Unknown observable '{name}' (expected e.g. sx2, sz1 or Sx)")
        observables[name] = embed(_PAULI[name[1]], int(name[2:]), n_qubits)
    return observables


def lmg_prediction(n_qubits: int, B: float) -> SpectralPrediction:
    """Dark-state energies and oscillation frequency of the LMG model at J = 1"""
    if n_qubits < 3:
        raise ConfigError("The LMG model needs N >= 3 to support stable oscillations")
    e_nu = -n_qubits * B
    e_mu = 2.0 / n_qubits - (n_qubits - 2) * B
    return SpectralPrediction(e_nu=e_nu, e_mu=e_mu, degeneracy_mu=n_qubits - 1, lam=e_mu - e_nu)


def spectrum_sweep(model: SpinModel, B_values) -> list[tuple[float, np.ndarray]]:
    """Full sorted spectrum for each field value"""
    rows = []
    for b in B_values:
        values, _ = eigh(replace(model, B=float(b)).hamiltonian())
        rows.append((float(b), values))
    logger.info(f"✅ Spectrum sweep: {model.kind.value} N={model.n_qubits}, {len(rows)} field values")
    return rows
