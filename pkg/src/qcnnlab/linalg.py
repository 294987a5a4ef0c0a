"""Complex linear algebra primitives shared by the simulation modules.

Matrices are plain complex128 ndarrays in row-major order. Qubit 0 is the
most significant bit of the computational-basis index, so an n-qubit basis
state |q0 q1 ... q_{n-1}> has index sum(q_k * 2**(n-1-k)).
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
IDENTITY_2 = np.eye(2, dtype=complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dims multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max() <= tol


def partial_trace(rho: np.ndarray, n_qubits: int, keep: set[int] | list[int] | tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix on the kept qubits (ascending order).

    rho must be 2^n x 2^n. Raises ValueError on dimension mismatch or an
    empty/invalid keep set.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = 1 << n_qubits
    if rho.shape != (dim, dim):
        raise ValueError(f"expected {dim}x{dim} density matrix, got {rho.shape}")
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n_qubits:
        raise ValueError(f"keep set {keep} out of range for {n_qubits} qubits")

    t = rho.reshape((2,) * (2 * n_qubits))
    # Trace row axis q against column axis n+q for every discarded qubit.
    traced = 0
    for q in range(n_qubits):
        if q in keep:
            continue
        row = q - traced
        col = (n_qubits - traced) + q - traced
        t = np.trace(t, axis1=row, axis2=col)
        traced += 1
    k = len(keep)
    return t.reshape(1 << k, 1 << k)


def eig_hermitian_2x2(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[float, float]:
    """Closed-form eigenvalues of a 2x2 Hermitian matrix, descending."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {m.shape}")
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    tr = (m[0, 0] + m[1, 1]).real
    det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
    disc = max(tr * tr - 4.0 * det, 0.0)
    root = np.sqrt(disc)
    return ((tr + root) / 2.0, (tr - root) / 2.0)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of (a - b), both Hermitian, same dims."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (is_hermitian(a) and is_hermitian(b)):
        raise ValueError("trace_distance requires Hermitian inputs")
    eigs = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.abs(eigs).sum())


def projector(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| of a state vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())
