#!/usr/bin/env python3
"""
Stochastic repeated-interaction (collision model) engine

A system register of N qubits evolves freely for a random waiting time, then
qubit 1 collides with a fresh thermal ancilla for a duration tau; the ancilla is
traced out and discarded. The ancilla is the last tensor factor (site N + 1).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from tcrystal import config
from .errors import DimensionError, InvalidStateError, NumericalError
from .models import BathConfig, SpinModel, embed, pauli
from .tensor import (
    ComplexMatrix,
    DensityMatrix,
    as_matrix,
    eigh,
    expm_unitary,
    frobenius_inner,
    frobenius_norm,
    hermitize,
    kernel_projector,
    kron,
    require_hermitian,
    unvec,
    validate_density_matrix,
    vec,
)

logger = logging.getLogger(__name__)

WaitingTimeSampler = Callable[[np.random.Generator, float], float]


@dataclass(frozen=True)
class CollisionChannel:
    """Reduced single-collision map rho -> sum_k Omega_k rho Omega_k^dagger"""
    system_dim: int
    kraus_ops: tuple
    tau: float
    theta: float
    hamiltonian: Optional[ComplexMatrix] = field(default=None, repr=False, compare=False)

    def apply(self, rho) -> DensityMatrix:
        rho = as_matrix(rho)
        if rho.shape != (self.system_dim, self.system_dim):
            raise DimensionError(f"Channel acts on dimension {self.system_dim}, got {rho.shape}")
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.abs(total - np.eye(self.system_dim)).max())


@dataclass
class TrajectoryRecord:
    """Time-stamped expectation values from one run of either engine"""
    times: np.ndarray
    observables: dict
    seed: int
    collision_count: int
    config: dict = field(default_factory=dict)
    engine: str = 'collision'

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.observables = {name: np.asarray(values, dtype=float)
                            for name, values in self.observables.items()}
        for name, values in self.observables.items():
            if values.shape != self.times.shape:
                raise DimensionError(f"Observable '{name}' has {values.size} samples for {self.times.size} times")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise InvalidStateError("Trajectory times must be strictly increasing")

    def series(self, name: str) -> np.ndarray:
        try:
            return self.observables[name]
        except KeyError:
            raise InvalidStateError(f"Record has no observable '{name}' (have {sorted(self.observables)})")


@dataclass(frozen=True)
class ChannelSpectrum:
    eigenvalues: np.ndarray
    peripheral: np.ndarray
    fixed_point: DensityMatrix


@dataclass(frozen=True)
class OscillationCheck:
    """Projection of Lambda[A rho_inf] onto A rho_inf against exp(+-i lam (tau + theta))"""
    mu: complex
    residual_plus: float
    residual_minus: float

    @property
    def sign(self) -> int:
        return 1 if self.residual_plus <= self.residual_minus else -1

    @property
    def residual(self) -> float:
        return min(self.residual_plus, self.residual_minus)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; one stream per seed"""
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_waiting_time(rng: np.random.Generator, gamma: float) -> float:
    """Exponential waiting time with density gamma * exp(-gamma * theta)"""
    if not gamma > 0:
        raise InvalidStateError(f"gamma must be positive, got {gamma}")
    return float(rng.exponential(1.0 / gamma))


def fixed_waiting_time(rng: np.random.Generator, gamma: float) -> float:
    """Deterministic arrivals every 1/gamma"""
    if not gamma > 0:
        raise InvalidStateError(f"gamma must be positive, got {gamma}")
    return 1.0 / gamma


SAMPLERS = {
    'exponential': sample_waiting_time,
    'fixed': fixed_waiting_time,
}


def interaction_hamiltonian() -> ComplexMatrix:
    """(XX + YY) / 2 on (q1, ancilla): unit flip-flop between |01> and |10>"""
    return 0.5 * (kron(pauli('x'), pauli('x')) + kron(pauli('y'), pauli('y')))


def collision_generator(H_S, ancilla_hamiltonian=None) -> ComplexMatrix:
    """H_S kron 1_A + H_int on sites (1, N+1), optionally + 1_S kron H_A"""
    H_S = require_hermitian(H_S)
    dim = H_S.shape[0]
    n = int(round(math.log2(dim)))
    if 2 ** n != dim:
        raise DimensionError(f"System dimension {dim} is not a power of two")
    total = n + 1
    h_int = 0.5 * sum(embed(pauli(a), 1, total) @ embed(pauli(a), total, total) for a in ('x', 'y'))
    generator = np.kron(H_S, np.eye(2)) + h_int
    if ancilla_hamiltonian is not None:
        generator = generator + np.kron(np.eye(dim), as_matrix(ancilla_hamiltonian))
    return generator


def collision_unitary(H_S, tau: float, ancilla_hamiltonian=None) -> ComplexMatrix:
    """exp(-i tau (H_S + H_int)) on the system plus ancilla"""
    return expm_unitary(collision_generator(H_S, ancilla_hamiltonian), tau)


def _trace_ancilla(joint: ComplexMatrix, dim: int) -> ComplexMatrix:
    return joint.reshape(dim, 2, dim, 2).trace(axis1=1, axis2=3)


def apply_collision(rho_S, rho_A, U) -> DensityMatrix:
    """Tr_A[U (rho_S kron rho_A) U^dagger]"""
    rho_S, rho_A, U = as_matrix(rho_S), as_matrix(rho_A), as_matrix(U)
    dim = rho_S.shape[0]
    if rho_A.shape != (2, 2) or U.shape != (2 * dim, 2 * dim):
        raise DimensionError(f"Cannot compose rho_S {rho_S.shape}, rho_A {rho_A.shape} and U {U.shape}")
    return _trace_ancilla(U @ np.kron(rho_S, rho_A) @ U.conj().T, dim)


def _ancilla_kraus(W: ComplexMatrix, rho_A) -> list:
    """Omega_{ab} = sqrt(p_a) <b| W |a> over the eigenbasis of rho_A"""
    rho_A = validate_density_matrix(rho_A)
    dim = W.shape[0] // 2
    probabilities, basis = eigh(rho_A)
    probabilities = np.clip(probabilities, 0.0, None)
    blocks = W.reshape(dim, 2, dim, 2)
    ops = []
    for alpha in range(2):
        for beta in range(2):
            ket_a, ket_b = basis[:, alpha], basis[:, beta]
            ops.append(math.sqrt(probabilities[alpha])
                       * np.einsum('b,ibja,a->ij', ket_b.conj(), blocks, ket_a))
    return ops


def kraus_set(H_S, tau: float, theta: float, rho_A, ancilla_hamiltonian=None) -> CollisionChannel:
    """Kraus operators of free evolution for theta followed by one collision"""
    H_S = require_hermitian(H_S)
    dim = H_S.shape[0]
    U_coll = collision_unitary(H_S, tau, ancilla_hamiltonian)
    W = U_coll @ np.kron(expm_unitary(H_S, theta), np.eye(2))
    channel = CollisionChannel(system_dim=dim, kraus_ops=tuple(_ancilla_kraus(W, rho_A)),
                               tau=tau, theta=theta, hamiltonian=H_S)
    err = channel.completeness_error()
    if err > config.KRAUS_TOL:
        raise NumericalError(f"Kraus completeness violated: {err:.3e}")
    return channel


def channel_for(model: SpinModel, bath: BathConfig, theta: float) -> CollisionChannel:
    h_a = bath.ancilla_hamiltonian() if bath.include_ancilla_hamiltonian else None
    return kraus_set(model.hamiltonian(), bath.tau, theta, bath.ancilla_state(), h_a)


def channel_superoperator(channel: CollisionChannel) -> ComplexMatrix:
    """Column-stacked superoperator sum_k conj(Omega_k) kron Omega_k"""
    if channel.system_dim > config.SUPEROP_MAX_DIM:
        raise DimensionError(f"Superoperator for dimension {channel.system_dim} exceeds "
                             f"the limit {config.SUPEROP_MAX_DIM}")
    return sum(np.kron(k.conj(), k) for k in channel.kraus_ops)


def _fixed_point(superop: ComplexMatrix, rcond: float) -> DensityMatrix:
    dim = int(round(math.sqrt(superop.shape[0])))
    projector, _ = kernel_projector(superop - np.eye(superop.shape[0]), rcond=rcond)
    rho = hermitize(unvec(projector @ vec(np.eye(dim) / dim), dim))
    return rho / np.trace(rho).real


def channel_spectrum(superop, tol: float = 1e-8) -> ChannelSpectrum:
    """Eigenvalues by descending modulus, peripheral part and fixed point"""
    superop = as_matrix(superop)
    eigenvalues = np.linalg.eigvals(superop)
    eigenvalues = eigenvalues[np.argsort(-np.abs(eigenvalues), kind='stable')]
    if not np.any(np.abs(eigenvalues - 1.0) < tol):
        raise NumericalError("Channel spectrum has no eigenvalue within tolerance of 1")
    peripheral = eigenvalues[np.abs(eigenvalues) >= 1.0 - tol]
    return ChannelSpectrum(eigenvalues=eigenvalues, peripheral=peripheral,
                           fixed_point=_fixed_point(superop, rcond=tol))


def oscillation_check(channel: CollisionChannel, A, rho_inf, lam: float) -> OscillationCheck:
    """Compare Lambda[A rho_inf] with exp(+-i lam (tau + theta)) A rho_inf"""
    target = as_matrix(A) @ as_matrix(rho_inf)
    norm = frobenius_norm(target)
    if norm < 1e-12:
        raise NumericalError("A rho_inf vanishes; the symmetry has no weight on the fixed point")
    image = channel.apply(target)
    duration = channel.tau + channel.theta
    mu = frobenius_inner(target, image) / norm ** 2
    residuals = [frobenius_norm(image - np.exp(s * 1j * lam * duration) * target) / norm
                 for s in (1, -1)]
    return OscillationCheck(mu=mu, residual_plus=residuals[0], residual_minus=residuals[1])


def _config_snapshot(model: SpinModel, bath: BathConfig, n_collisions: int,
                     record_substeps: int, sampler_name: str) -> dict:
    model_cfg = asdict(model)
    model_cfg['kind'] = model.kind.value
    return {
        'model': model_cfg,
        'bath': asdict(bath),
        'n_collisions': n_collisions,
        'record_substeps': record_substeps,
        'sampler': sampler_name,
    }


def run_trajectory(model: SpinModel, psi0, bath: BathConfig, n_collisions: int,
                   observables: dict, seed: int,
                   record_substeps: int = config.DEFAULT_RECORD_SUBSTEPS,
                   sampler: WaitingTimeSampler = sample_waiting_time,
                   on_collision: Optional[Callable[[int, float, DensityMatrix], None]] = None,
                   ) -> TrajectoryRecord:
    """Alternate free evolution for a sampled theta_j and a collision with a fresh ancilla

    Observables are recorded at t = 0, at `record_substeps` interior points of each
    free flight and after every collision. The state is propagated in the
    eigenbasis of H_S so free evolution is an elementwise phase.
    """
    if n_collisions < 1:
        raise InvalidStateError(f"n_collisions must be >= 1, got {n_collisions}")
    if record_substeps < 0:
        raise InvalidStateError(f"record_substeps must be >= 0, got {record_substeps}")
    H_S = model.hamiltonian()
    dim = model.dim
    psi0 = np.asarray(psi0, dtype=np.complex128).ravel()
    if psi0.size != dim:
        raise DimensionError(f"Initial state has dimension {psi0.size}, model needs {dim}")
    for name, op in observables.items():
        require_hermitian(op)
        if op.shape != (dim, dim):
            raise DimensionError(f"Observable '{name}' has shape {op.shape}, expected {(dim, dim)}")

    energies, V = eigh(H_S)
    gaps = energies[:, None] - energies[None, :]
    h_a = bath.ancilla_hamiltonian() if bath.include_ancilla_hamiltonian else None
    U_coll = collision_unitary(H_S, bath.tau, h_a)
    kraus = [V.conj().T @ k @ V for k in _ancilla_kraus(U_coll, bath.ancilla_state())
             if np.abs(k).max() > 0]
    obs_names = list(observables)
    obs_eig = [V.conj().T @ observables[name] @ V for name in obs_names]

    def measure_rho(rho):
        return [np.einsum('ij,ji->', o, rho).real for o in obs_eig]

    def measure_psi(psi):
        return [np.vdot(psi, o @ psi).real for o in obs_eig]

    rng = make_rng(seed)
    thetas = [sampler(rng, bath.gamma) for _ in range(n_collisions)]
    times, rows = [0.0], []
    psi = V.conj().T @ psi0
    rows.append(measure_psi(psi))
    rho = None
    t = 0.0
    logger.debug(f"🔬 Trajectory: {model.kind.value} N={model.n_qubits}, {n_collisions} collisions, seed={seed}")
    for j, theta in enumerate(thetas):
        if theta > 0:
            for k in range(1, record_substeps + 1):
                dt = theta * k / (record_substeps + 1)
                times.append(t + dt)
                if rho is None:
                    rows.append(measure_psi(np.exp(-1j * energies * dt) * psi))
                else:
                    rows.append(measure_rho(rho * np.exp(-1j * gaps * dt)))
        if rho is None:
            psi = np.exp(-1j * energies * theta) * psi
            rho = np.outer(psi, psi.conj())
        else:
            rho = rho * np.exp(-1j * gaps * theta)
        rho = sum(k @ rho @ k.conj().T for k in kraus)
        t += theta + bath.tau
        times.append(t)
        rows.append(measure_rho(rho))
        if on_collision is not None:
            on_collision(j, t, V @ rho @ V.conj().T)

    values = np.array(rows, dtype=float).reshape(len(times), len(obs_names))
    sampler_name = next((name for name, fn in SAMPLERS.items() if fn is sampler), 'custom')
    record = TrajectoryRecord(
        times=np.array(times),
        observables={name: values[:, i] for i, name in enumerate(obs_names)},
        seed=int(seed),
        collision_count=n_collisions,
        config=_config_snapshot(model, bath, n_collisions, record_substeps, sampler_name),
        engine='collision',
    )
    logger.debug(f"✅ Trajectory finished at t={t:.2f} with {len(times)} samples")
    return record
