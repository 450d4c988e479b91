#!/usr/bin/env python3
"""
Dense complex linear algebra on multi-qubit Hilbert spaces

Operators, state vectors and density matrices are plain numpy arrays of
dtype complex128. Qubit 1 is the leftmost (most significant) tensor factor.
Superoperators use column-stacking: vec(A X B) = (B^T kron A) vec(X).
"""

import logging
from functools import reduce

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from tcrystal import config
from .errors import DimensionError, InvalidStateError, NotHermitianError, NumericalError

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
StateVector = NDArray[np.complex128]
DensityMatrix = NDArray[np.complex128]


def as_matrix(m) -> ComplexMatrix:
    """Coerce to a 2-D complex array"""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"Expected a matrix, got array with shape {arr.shape}")
    return arr


def _require_square(m: ComplexMatrix) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {m.shape}")


def _require_same_shape(a: ComplexMatrix, b: ComplexMatrix) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"Shape mismatch: {a.shape} vs {b.shape}")


def hermiticity_error(m) -> float:
    """Max entrywise |M - M^dagger|"""
    m = as_matrix(m)
    _require_square(m)
    return float(np.abs(m - m.conj().T).max()) if m.size else 0.0


def require_hermitian(m, tol: float = config.HERMITIAN_TOL) -> ComplexMatrix:
    m = as_matrix(m)
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitianError(f"Operator is not Hermitian: max|H - H^dagger| = {err:.3e} > {tol:.1e}")
    return m


def validate_density_matrix(rho, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                            eig_tol: float = 1e-10) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity; return the matrix unchanged"""
    rho = as_matrix(rho)
    err = hermiticity_error(rho)
    if err > herm_tol:
        raise InvalidStateError(f"Density matrix not Hermitian (error {err:.3e})")
    trace = np.trace(rho)
    if abs(trace - 1.0) > trace_tol:
        raise InvalidStateError(f"Density matrix trace {trace.real:.12f} differs from 1")
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if min_eig < -eig_tol:
        raise InvalidStateError(f"Density matrix has negative eigenvalue {min_eig:.3e}")
    return rho


def normalize(psi) -> StateVector:
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidStateError("Cannot normalize the zero vector")
    return psi / norm


def kron(*ops) -> ComplexMatrix:
    """Kronecker product of one or more operators, left to right"""
    if not ops:
        raise DimensionError("kron needs at least one operand")
    return reduce(np.kron, [np.asarray(op, dtype=np.complex128) for op in ops])


def partial_trace(rho, qubit_count: int, keep) -> DensityMatrix:
    """Reduced density matrix on the 1-based qubits in `keep`, original order kept"""
    rho = as_matrix(rho)
    dim = 2 ** qubit_count
    if rho.shape != (dim, dim):
        raise DimensionError(f"Density matrix shape {rho.shape} does not match {qubit_count} qubits")
    keep = set(keep)
    if not keep:
        raise DimensionError("partial_trace needs a nonempty keep set")
    if not keep <= set(range(1, qubit_count + 1)):
        raise DimensionError(f"Qubit indices {sorted(keep)} outside 1..{qubit_count}")

    tensor = rho.reshape([2] * (2 * qubit_count))
    remaining = qubit_count
    for q in sorted(set(range(qubit_count)) - {k - 1 for k in keep}, reverse=True):
        tensor = np.trace(tensor, axis1=q, axis2=q + remaining)
        remaining -= 1
    kept_dim = 2 ** len(keep)
    return tensor.reshape(kept_dim, kept_dim)


def eigh(h, tol: float = config.HERMITIAN_TOL):
    """Eigenvalues ascending and orthonormal eigenvector columns of a Hermitian matrix"""
    h = require_hermitian(h, tol)
    # Symmetrize so roundoff in the input does not leak into the spectrum
    values, vectors = scipy.linalg.eigh((h + h.conj().T) / 2)
    return values, vectors


def expm_unitary(h, t: float, tol: float = config.HERMITIAN_TOL) -> ComplexMatrix:
    """exp(-i h t) from the spectral decomposition of h"""
    values, vectors = eigh(h, tol)
    return (vectors * np.exp(-1j * values * t)) @ vectors.conj().T


def expm_general(m) -> ComplexMatrix:
    """Matrix exponential by scaling and squaring with a degree-13 Pade kernel"""
    m = as_matrix(m)
    _require_square(m)
    return scipy.linalg.expm(m)


def commutator(a, b) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    _require_same_shape(a, b)
    return a @ b - b @ a


def frobenius_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dagger b)"""
    a, b = as_matrix(a), as_matrix(b)
    _require_same_shape(a, b)
    return complex(np.vdot(a, b))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a)))


def outer(a, b) -> ComplexMatrix:
    """|a><b|"""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"State dimensions differ: {a.size} vs {b.size}")
    return np.outer(a, b.conj())


def vec(m) -> NDArray[np.complex128]:
    """Column-stacking vectorization"""
    return as_matrix(m).reshape(-1, order='F')


def unvec(v, dim: int | None = None) -> ComplexMatrix:
    v = np.asarray(v, dtype=np.complex128).ravel()
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError(f"Vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order='F')


def spre(a) -> ComplexMatrix:
    """Superoperator of left multiplication X -> a X"""
    a = as_matrix(a)
    return np.kron(np.eye(a.shape[0]), a)


def spost(b) -> ComplexMatrix:
    """Superoperator of right multiplication X -> X b"""
    b = as_matrix(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def kernel_projector(generator, rcond: float = 1e-8):
    """Spectral projector onto the kernel of a superoperator generator

    Returns (P, R) with R an orthonormal basis of the right kernel and
    P = R (L^dagger R)^-1 L^dagger built from the left kernel L. Assumes the zero
    eigenvalue is semisimple, which holds for Lindbladians and for S - 1 with S
    a CPTP channel.
    """
    generator = as_matrix(generator)
    _require_square(generator)
    right = scipy.linalg.null_space(generator, rcond=rcond)
    left = scipy.linalg.null_space(generator.conj().T, rcond=rcond)
    if right.shape[1] == 0:
        raise NumericalError("Generator has an empty kernel at the requested tolerance")
    if right.shape[1] != left.shape[1]:
        raise NumericalError(f"Left and right kernels differ in dimension "
                             f"({left.shape[1]} vs {right.shape[1]})")
    overlap = left.conj().T @ right
    return right @ np.linalg.solve(overlap, left.conj().T), right


def hermitize(m) -> ComplexMatrix:
    m = as_matrix(m)
    return (m + m.conj().T) / 2


def expectation(op, rho) -> float:
    """Re Tr(op rho)"""
    return float(np.real(np.trace(as_matrix(op) @ as_matrix(rho))))
