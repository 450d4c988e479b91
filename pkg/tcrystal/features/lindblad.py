#!/usr/bin/env python3
"""
GKSL master-equation dynamics

Builds the column-stacked Liouvillian of a Hamiltonian plus weighted jump
operators, extracts its steady space and gap, and propagates density matrices
on a time grid. The thermal bath acts on qubit 1 only.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from tcrystal import config
from .collision import TrajectoryRecord
from .errors import DimensionError, InvalidStateError, NumericalError
from .models import SpinModel, embed, lowering, raising
from .tensor import (
    ComplexMatrix,
    DensityMatrix,
    as_matrix,
    expm_general,
    hermitize,
    kernel_projector,
    require_hermitian,
    spost,
    spre,
    unvec,
    vec,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LindbladSpec:
    hamiltonian: ComplexMatrix
    jumps: tuple

    def __post_init__(self):
        h = require_hermitian(self.hamiltonian)
        object.__setattr__(self, 'hamiltonian', h)
        jumps = []
        for op, rate in self.jumps:
            op = as_matrix(op)
            if op.shape != h.shape:
                raise DimensionError(f"Jump operator shape {op.shape} does not match H {h.shape}")
            if not rate >= 0:
                raise InvalidStateError(f"Jump rates must be non-negative, got {rate}")
            jumps.append((op, float(rate)))
        object.__setattr__(self, 'jumps', tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class Liouvillian:
    dim: int
    matrix: ComplexMatrix


@dataclass(frozen=True)
class SteadySpace:
    """Hilbert-Schmidt orthonormal Hermitian basis of ker L and the canonical steady state"""
    basis: list
    rho_inf: DensityMatrix

    @property
    def dimension(self) -> int:
        return len(self.basis)


def occupation_number(beta: float, splitting: float) -> float:
    """Bose occupation 1 / (exp(beta * splitting) - 1); zero at beta = inf"""
    if math.isnan(beta) or beta < 0:
        raise InvalidStateError(f"beta must be >= 0 or inf, got {beta}")
    if math.isinf(beta):
        return 0.0
    if beta * splitting <= 0:
        raise InvalidStateError("Thermal occupation diverges for beta * splitting <= 0")
    return 1.0 / math.expm1(beta * splitting)


def build_liouvillian(spec: LindbladSpec) -> Liouvillian:
    """L = -i(1 kron H - H^T kron 1) + sum_k r_k [conj(L_k) kron L_k - (spre + spost)(L_k^dagger L_k) / 2]"""
    h = spec.hamiltonian
    generator = -1j * (spre(h) - spost(h))
    for op, rate in spec.jumps:
        if rate == 0:
            continue
        number = op.conj().T @ op
        generator = generator + rate * (np.kron(op.conj(), op) - 0.5 * (spre(number) + spost(number)))
    return Liouvillian(dim=spec.dim, matrix=generator)


def gksl_spec(model: SpinModel, Gamma: float, n_bar: float) -> LindbladSpec:
    """Thermal damping of qubit 1: (lowering, Gamma(n+1)) and, for n > 0, (raising, Gamma n)"""
    if not Gamma > 0:
        raise InvalidStateError(f"Gamma must be positive, got {Gamma}")
    if math.isnan(n_bar) or n_bar < 0:
        raise InvalidStateError(f"n_bar must be non-negative, got {n_bar}")
    n = model.n_qubits
    jumps = [(embed(lowering(), 1, n), Gamma * (n_bar + 1.0))]
    if n_bar > 0:
        jumps.append((embed(raising(), 1, n), Gamma * n_bar))
    return LindbladSpec(hamiltonian=model.hamiltonian(), jumps=tuple(jumps))


def _hermitian_basis(kernel: np.ndarray, dim: int) -> list:
    # Real-linear span of the Hermitian and anti-Hermitian parts of each kernel vector
    real_rows = []
    for column in kernel.T:
        x = unvec(column, dim)
        for part in (hermitize(x), hermitize(-1j * x)):
            v = vec(part)
            real_rows.append(np.concatenate([v.real, v.imag]))
    u, s, _ = np.linalg.svd(np.array(real_rows).T, full_matrices=False)
    rank = kernel.shape[1]
    basis = []
    for col in u[:, :rank].T:
        half = col.size // 2
        basis.append(hermitize(unvec(col[:half] + 1j * col[half:], dim)))
    return basis


def steady_state_from(L: Liouvillian, rho0, tol: float = 1e-8) -> DensityMatrix:
    """Infinite-time average reached from rho0: the kernel projection of rho0"""
    projector, _ = kernel_projector(L.matrix, rcond=tol)
    rho = hermitize(unvec(projector @ vec(as_matrix(rho0)), L.dim))
    trace = np.trace(rho).real
    if trace <= 0:
        raise NumericalError("Projected steady state has non-positive trace")
    return rho / trace


def steady_space(L: Liouvillian, tol: float = 1e-8) -> SteadySpace:
    """Basis of the fixed-point space; canonical rho_inf is reached from the maximally mixed state"""
    projector, kernel = kernel_projector(L.matrix, rcond=tol)
    basis = _hermitian_basis(kernel, L.dim)
    rho = hermitize(unvec(projector @ vec(np.eye(L.dim) / L.dim), L.dim))
    rho = rho / np.trace(rho).real
    logger.debug(f"✅ Steady space of dimension {len(basis)}")
    return SteadySpace(basis=basis, rho_inf=rho)


def liouvillian_spectrum(L: Liouvillian) -> np.ndarray:
    """Eigenvalues sorted by descending real part"""
    values = np.linalg.eigvals(L.matrix)
    return values[np.argsort(-values.real, kind='stable')]


def liouvillian_gap(L: Liouvillian, tol: float = 1e-8) -> float:
    values = np.linalg.eigvals(L.matrix)
    decaying = values.real[values.real < -tol]
    if decaying.size == 0:
        raise NumericalError("Liouvillian has no decaying modes; the gap is undefined")
    return float(-decaying.max())


def _rk4(matrix: ComplexMatrix, v: np.ndarray, duration: float, max_step: float) -> np.ndarray:
    steps = max(1, int(math.ceil(duration / max_step)))
    h = duration / steps
    for _ in range(steps):
        k1 = matrix @ v
        k2 = matrix @ (v + 0.5 * h * k1)
        k3 = matrix @ (v + 0.5 * h * k2)
        k4 = matrix @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def evolve(spec: LindbladSpec, rho0, t_grid, observables: dict, method: str = 'auto',
           on_step: Optional[Callable[[float, DensityMatrix], None]] = None,
           run_config: Optional[dict] = None) -> TrajectoryRecord:
    """Propagate rho0 over t_grid (starting at 0) by exact exponentials or fixed-step RK4"""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0.0:
        raise InvalidStateError("t_grid must be a 1-D grid starting at 0")
    if t_grid.size > 1 and not np.all(np.diff(t_grid) > 0):
        raise InvalidStateError("t_grid must be strictly increasing")
    rho0 = as_matrix(rho0)
    if rho0.shape != (spec.dim, spec.dim):
        raise DimensionError(f"Initial state shape {rho0.shape} does not match dimension {spec.dim}")
    if method == 'auto':
        method = 'exact' if spec.dim <= config.SUPEROP_MAX_DIM else 'rk4'
    if method not in ('exact', 'rk4'):
        raise InvalidStateError(f"Unknown propagation method '{method}'")

    L = build_liouvillian(spec)
    names = list(observables)
    ops = [as_matrix(observables[name]) for name in names]
    propagators = {}
    max_step = 1e-3 / max(np.linalg.norm(L.matrix), 1e-300)

    v = vec(rho0)
    rows = []
    previous = 0.0
    logger.debug(f"🔬 GKSL evolution ({method}) over {t_grid.size} grid points")
    for t in t_grid:
        dt = t - previous
        if dt > 0:
            if method == 'exact':
                key = round(dt, 12)
                if key not in propagators:
                    propagators[key] = expm_general(L.matrix * dt)
                v = propagators[key] @ v
            else:
                v = _rk4(L.matrix, v, dt, max_step)
        previous = t
        rho = unvec(v, spec.dim)
        rows.append([np.real(np.trace(op @ rho)) for op in ops])
        if on_step is not None:
            on_step(float(t), rho)

    values = np.array(rows, dtype=float).reshape(t_grid.size, len(names))
    snapshot = {'engine': 'lindblad', 'method': method,
                'jump_rates': [rate for _, rate in spec.jumps]}
    snapshot.update(run_config or {})
    return TrajectoryRecord(times=t_grid,
                            observables={name: values[:, i] for i, name in enumerate(names)},
                            seed=0, collision_count=0, config=snapshot, engine='lindblad')


def model_config(model: SpinModel, Gamma: float, n_bar: float) -> dict:
    model_cfg = asdict(model)
    model_cfg['kind'] = model.kind.value
    return {'model': model_cfg, 'Gamma': Gamma, 'n_bar': n_bar}
