#!/usr/bin/env python3
"""
Dynamical symmetries: construction and certification

A dynamical symmetry A satisfies (i) [H, A] rho_inf = -lam A rho_inf and
(ii) [L_k, A] rho_inf = [L_k^dagger, A] L_k rho_inf = 0 for every jump L_k.
With this convention an outer product |u><v| of eigenvectors has lam = E_v - E_u.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from tcrystal import config
from .collision import CollisionChannel
from .errors import DimensionError, InvalidStateError, NumericalError
from .models import embed, lowering, raising
from .tensor import (
    ComplexMatrix,
    as_matrix,
    commutator,
    eigh,
    expm_unitary,
    frobenius_inner,
    frobenius_norm,
    outer,
)

logger = logging.getLogger(__name__)

# Below this, A rho_inf (relative to |A| |rho|) counts as zero
WEIGHT_TOL = 1e-8
# Steady-state elements with less relative weight are left out of condition (i) in certify
CERTIFY_WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class DynamicalSymmetry:
    operator: ComplexMatrix
    label: str
    support_note: str = ''
    lam: Optional[float] = None

    def __post_init__(self):
        op = as_matrix(self.operator)
        norm = frobenius_norm(op)
        if not math.isfinite(norm) or norm == 0:
            raise InvalidStateError(f"Symmetry '{self.label}' must be a nonzero finite operator")
        object.__setattr__(self, 'operator', op)


@dataclass
class SymmetryReport:
    """Residuals of both conditions; verdicts are residual < tol"""
    label: str
    lambda_est: float
    residual_i: float
    residual_ii_minus: float
    residual_ii_plus: float
    tol: float
    overlap_with_initial: complex = 0j
    jump_residuals: dict = field(default_factory=dict)

    @property
    def lambda_abs(self) -> float:
        return abs(self.lambda_est)

    @property
    def sign(self) -> int:
        return 1 if self.lambda_est >= 0 else -1

    @property
    def verdict_i(self) -> bool:
        return self.residual_i < self.tol

    @property
    def verdict_ii_minus(self) -> bool:
        return self.residual_ii_minus < self.tol

    @property
    def verdict_ii_plus(self) -> bool:
        return self.residual_ii_plus < self.tol

    @property
    def verdict_ii(self) -> bool:
        return all(max(pair) < self.tol for pair in self.jump_residuals.values())

    @property
    def supported(self) -> bool:
        """Dissipative time crystal supported: every residual below tol"""
        return self.verdict_i and self.verdict_ii

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'lambda_est': self.lambda_est,
            'lambda_abs': self.lambda_abs,
            'sign': self.sign,
            'residuals': {
                'i': self.residual_i,
                'ii_minus': self.residual_ii_minus,
                'ii_plus': self.residual_ii_plus,
                'per_jump': {name: list(pair) for name, pair in self.jump_residuals.items()},
            },
            'verdict': {
                'i': self.verdict_i,
                'ii_minus': self.verdict_ii_minus,
                'ii_plus': self.verdict_ii_plus,
                'supported': self.supported,
            },
            'overlap_with_initial': [self.overlap_with_initial.real, self.overlap_with_initial.imag],
            'tol': self.tol,
        }


def _ket(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=np.complex128)
    psi[int(bits, 2)] = 1.0
    return psi


def _unit(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def lmg_symmetry_n3() -> DynamicalSymmetry:
    """|000><phi| with phi = (|010> - |001>)/sqrt(2)"""
    psi = _ket('000')
    phi = _unit(_ket('010') - _ket('001'))
    return DynamicalSymmetry(operator=outer(psi, phi), label='lmg_n3',
                             support_note='q2 and q3 differ between bra and ket; q1 is |0> in both')


def xxz_symmetry_a1() -> DynamicalSymmetry:
    """1 (q1) kron |vartheta1><phi1| on q2..q4"""
    vartheta = _unit(_ket('001') - _ket('100'))
    phi = _unit(_ket('011') - _ket('110'))
    return DynamicalSymmetry(operator=np.kron(np.eye(2), outer(vartheta, phi)), label='xxz_a1',
                             support_note='q3 is the only qubit that differs between bra and ket; '
                                          'q1 carries the identity')


def xxz_symmetry_a2() -> DynamicalSymmetry:
    """|vartheta2><0000| with vartheta2 = (|0100> - |0001>)/sqrt(2)"""
    vartheta = _unit(_ket('0100') - _ket('0001'))
    return DynamicalSymmetry(operator=outer(vartheta, _ket('0000')), label='xxz_a2',
                             support_note='q1 is |0> in bra and ket; the ket is the antisymmetric '
                                          'q2/q4 single excitation')


def thermal_jumps(n_qubits: int, n_bar: float) -> dict:
    """Named bath jumps on q1: 'minus' always, 'plus' only for n_bar > 0"""
    jumps = {'minus': embed(lowering(), 1, n_qubits)}
    if n_bar > 0:
        jumps['plus'] = embed(raising(), 1, n_qubits)
    return jumps


def _states(rho_inf) -> list:
    if isinstance(rho_inf, np.ndarray) and rho_inf.ndim == 2:
        return [as_matrix(rho_inf)]
    states = [as_matrix(rho) for rho in rho_inf]
    if not states:
        raise InvalidStateError("At least one steady state is required")
    return states


def _proportional(a: ComplexMatrix, b: ComplexMatrix) -> bool:
    overlap = abs(frobenius_inner(a, b))
    return math.isclose(overlap, frobenius_norm(a) * frobenius_norm(b), rel_tol=1e-9)


def _named_jumps(jumps) -> dict:
    """Accept a name -> operator mapping, bare operators or (operator, rate) pairs"""
    if isinstance(jumps, dict):
        return {name: as_matrix(op) for name, op in jumps.items()}
    named = {}
    for idx, item in enumerate(jumps):
        op = as_matrix(item[0] if isinstance(item, tuple) else item)
        name = f'k{idx}'
        n = int(round(math.log2(op.shape[0])))
        if 2 ** n == op.shape[0]:
            if _proportional(op, embed(lowering(), 1, n)):
                name = 'minus'
            elif _proportional(op, embed(raising(), 1, n)):
                name = 'plus'
        named[name] = op
    return named


def check_condition_i(H, A, rho_inf) -> tuple[float, float]:
    """Best real lam for [H, A] rho = -lam A rho and the relative residual"""
    H, A, rho = as_matrix(H), as_matrix(A), as_matrix(rho_inf)
    if not H.shape == A.shape == rho.shape:
        raise DimensionError(f"Shapes differ: H {H.shape}, A {A.shape}, rho {rho.shape}")
    weight = A @ rho
    norm = frobenius_norm(weight)
    if norm <= WEIGHT_TOL * max(frobenius_norm(A) * frobenius_norm(rho), 1e-300):
        raise NumericalError("A rho_inf vanishes; the symmetry has no weight on the steady state")
    image = commutator(H, A) @ rho
    lam = -frobenius_inner(weight, image).real / norm ** 2
    residual = frobenius_norm(image + lam * weight) / norm
    return float(lam), float(residual)


def check_condition_ii(L_k, A, rho_inf) -> tuple[float, float]:
    """Relative norms of [L, A] rho and [L^dagger, A] L rho"""
    L, A, rho = as_matrix(L_k), as_matrix(A), as_matrix(rho_inf)
    if not L.shape == A.shape == rho.shape:
        raise DimensionError(f"Shapes differ: L {L.shape}, A {A.shape}, rho {rho.shape}")
    scale = frobenius_norm(A) * frobenius_norm(rho)
    if scale == 0:
        return 0.0, 0.0
    first = frobenius_norm(commutator(L, A) @ rho) / scale
    second = frobenius_norm(commutator(L.conj().T, A) @ L @ rho) / scale
    return float(first), float(second)


def certify(H, jumps, A, rho_inf, tol: float = 1e-7, label: str = '', rho0=None) -> SymmetryReport:
    """Worst-case residuals of both conditions over the given steady state(s)"""
    if isinstance(A, DynamicalSymmetry):
        label = label or A.label
        A = A.operator
    A = as_matrix(A)
    states = _states(rho_inf)
    named = _named_jumps(jumps)

    lam, residual_i, weighted = 0.0, 0.0, 0
    for rho in states:
        if frobenius_norm(A @ rho) <= CERTIFY_WEIGHT_FLOOR * frobenius_norm(A) * frobenius_norm(rho):
            continue
        lam_k, res_k = check_condition_i(H, A, rho)
        if weighted == 0 or res_k > residual_i:
            lam, residual_i = lam_k, res_k
        weighted += 1
    if weighted == 0:
        raise NumericalError(f"Symmetry '{label}' has no weight on any steady state")

    jump_residuals = {}
    for name, op in named.items():
        pairs = [check_condition_ii(op, A, rho) for rho in states]
        jump_residuals[name] = (max(p[0] for p in pairs), max(p[1] for p in pairs))

    overlap = 0j
    if rho0 is not None:
        overlap = frobenius_inner(A, as_matrix(rho0)) / frobenius_norm(A)

    report = SymmetryReport(
        label=label,
        lambda_est=lam,
        residual_i=residual_i,
        residual_ii_minus=max(jump_residuals.get('minus', (0.0, 0.0))),
        residual_ii_plus=max(jump_residuals.get('plus', (0.0, 0.0))),
        tol=tol,
        overlap_with_initial=complex(overlap),
        jump_residuals=jump_residuals,
    )
    status = '✅' if report.supported else '⚠️'
    logger.info(f"{status} Certified '{label}': |lam|={report.lambda_abs:.6g}, "
                f"res_i={residual_i:.2e}, supported={report.supported}")
    return report


def kraus_condition_check(channel: CollisionChannel, A, rho_inf) -> float:
    """Max over Kraus operators of |[Omega_k, A] rho| / (|A| |rho|) in the interaction picture

    Omega_k is taken relative to the free evolution U_S(tau + theta) common to all
    collisions; without a stored Hamiltonian the lab-frame operators are used.
    """
    A, rho = as_matrix(A), as_matrix(rho_inf)
    if A.shape != (channel.system_dim, channel.system_dim) or rho.shape != A.shape:
        raise DimensionError(f"Channel dimension {channel.system_dim} does not match A {A.shape}")
    scale = frobenius_norm(A) * frobenius_norm(rho)
    if scale == 0:
        return 0.0
    frame = np.eye(channel.system_dim)
    if channel.hamiltonian is not None:
        frame = expm_unitary(channel.hamiltonian, channel.tau + channel.theta).conj().T
    return max(frobenius_norm(commutator(frame @ k, A) @ rho) / scale for k in channel.kraus_ops)


def _eigenspaces(energies: np.ndarray, tol: float) -> list:
    groups, start = [], 0
    for idx in range(1, energies.size + 1):
        if idx == energies.size or energies[idx] - energies[idx - 1] > tol:
            groups.append((float(np.mean(energies[start:idx])), np.arange(start, idx)))
            start = idx
    return groups


def _null_directions(M: np.ndarray, tol: float) -> np.ndarray:
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=np.complex128)
    if M.shape[0] < n:
        M = np.vstack([M, np.zeros((n - M.shape[0], n), dtype=M.dtype)])
    _, s, vh = np.linalg.svd(M, full_matrices=False)
    cutoff = tol * max(1.0, s.max(initial=0.0))
    return vh[s <= cutoff].conj().T


def search_symmetries(H, jumps, rho_inf, tol: float = 1e-7, energy_tol: float = 1e-8,
                      include_static: bool = False) -> list:
    """Eigen-operators A = sum P_i C_ij P_j at a common frequency satisfying condition (ii)

    Candidates are the constraint null-space directions with nonzero weight A rho_inf,
    one group per frequency lam = E_j - E_i. Static (lam = 0) groups are skipped unless
    include_static is set.
    """
    H = as_matrix(H)
    dim = H.shape[0]
    if dim > config.SEARCH_MAX_DIM:
        raise DimensionError(f"Symmetry search limited to dimension {config.SEARCH_MAX_DIM}, got {dim}")
    energies, V = eigh(H)
    spaces = _eigenspaces(energies, energy_tol)
    states = [V.conj().T @ rho @ V for rho in _states(rho_inf)]
    ops = [V.conj().T @ op @ V for op in _named_jumps(jumps).values()]

    pairs = []
    for i, (e_i, idx_i) in enumerate(spaces):
        for j, (e_j, idx_j) in enumerate(spaces):
            lam = e_j - e_i
            if i == j and not include_static:
                continue
            pairs.append((lam, idx_i, idx_j))
    pairs.sort(key=lambda p: p[0])

    groups, current = [], []
    for pair in pairs:
        if current and pair[0] - current[-1][0] > energy_tol:
            groups.append(current)
            current = []
        current.append(pair)
    if current:
        groups.append(current)

    candidates = []
    logger.info(f"🔬 Symmetry search over {len(groups)} frequency groups (dimension {dim})")
    for group in groups:
        lam = float(np.mean([p[0] for p in group]))
        if abs(lam) <= energy_tol and not include_static:
            continue
        units = [(a, b) for _, idx_i, idx_j in group for a in idx_i for b in idx_j]
        constraints, weights = [], []
        for a, b in units:
            e_a = np.zeros(dim, dtype=np.complex128)
            e_a[a] = 1.0
            col, wcol = [], []
            for rho in states:
                for L in ops:
                    Lrho = L @ rho
                    Ld = L.conj().T
                    # [L, E_ab] rho and [L^dagger, E_ab] L rho for the matrix unit E_ab
                    first = np.outer(L[:, a], rho[b, :]) - np.outer(e_a, Lrho[b, :])
                    second = np.outer(Ld[:, a], Lrho[b, :]) - np.outer(e_a, (Ld @ Lrho)[b, :])
                    col.extend([first.ravel(), second.ravel()])
                wcol.append(np.outer(e_a, rho[b, :]).ravel())
            constraints.append(np.concatenate(col) if col else np.zeros(0, dtype=np.complex128))
            weights.append(np.concatenate(wcol))
        M = np.array(constraints).T
        null = _null_directions(M, tol)
        if null.shape[1] == 0:
            continue
        W = np.array(weights).T @ null
        _, s, vh = np.linalg.svd(W, full_matrices=False)
        for coeffs in (null @ vh[s > tol].conj().T).T:
            A_eig = np.zeros((dim, dim), dtype=np.complex128)
            for (a, b), c in zip(units, coeffs):
                A_eig[a, b] = c
            A = V @ A_eig @ V.conj().T
            A = A / frobenius_norm(A)
            candidates.append(DynamicalSymmetry(
                operator=A, label=f'lam={lam:.6g}#{len(candidates)}',
                support_note=f'{len(group)} eigenspace pair(s) at frequency {lam:.6g}', lam=lam))
    logger.info(f"✅ Found {len(candidates)} symmetry candidates")
    return candidates
