# linalg.py
"""Dense complex matrix helpers for one to three qubits.

Subsystem order is fixed as A (x) B (x) C, qubit A being the slowest-varying
index of the 8-dimensional computational basis.
"""
from functools import reduce
from typing import Iterable, Union

import numpy as np
from numpy.typing import NDArray

from seqwit.config import HERMITIAN_TOL

ComplexMatrix = NDArray[np.complex128]

ALLOWED_DIMS = (1, 2, 4, 8)
SUBSYSTEMS = ("A", "B", "C")

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SX, SY, SZ])


def as_matrix(m) -> ComplexMatrix:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"Expected a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] not in ALLOWED_DIMS or arr.shape[1] not in ALLOWED_DIMS:
        raise ValueError(f"Matrix dimensions {arr.shape} outside {ALLOWED_DIMS}")
    return arr


def kron(a, b) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    return as_matrix(np.kron(a, b))


def kron_all(*ops) -> ComplexMatrix:
    return reduce(kron, ops)


def dagger(m) -> ComplexMatrix:
    return np.conjugate(np.asarray(m, dtype=complex)).T


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.all(np.abs(m - dagger(m)) <= tol))


def expectation(op, rho) -> float:
    """Real part of Tr[op rho]; both Hermitian in every use."""
    return float(np.real(np.einsum("ij,ji->", np.asarray(op), np.asarray(rho))))


def purity(rho) -> float:
    return expectation(rho, rho)


def _subsystem_index(label: Union[str, int]) -> int:
    if isinstance(label, str) and label.upper() in SUBSYSTEMS:
        return SUBSYSTEMS.index(label.upper())
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool) and 0 <= label < len(SUBSYSTEMS):
        return int(label)
    raise ValueError(f"Invalid subsystem index: {label!r} (expected one of {SUBSYSTEMS} or 0-2)")


def partial_trace(m, keep: Iterable[Union[str, int]]) -> ComplexMatrix:
    """Reduce an 8x8 operator to the kept subsystems, order preserved."""
    m = as_matrix(m)
    if m.shape != (8, 8):
        raise ValueError(f"partial_trace expects an 8x8 operator, got {m.shape}")
    kept = sorted({_subsystem_index(k) for k in keep})

    rows, cols = list("abc"), list("def")
    for i in range(3):
        if i not in kept:
            cols[i] = rows[i]
    out = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, m.reshape([2] * 6))
    dim = 2 ** len(kept)
    return np.asarray(reduced, dtype=complex).reshape(dim, dim)


def eig_hermitian(m) -> NDArray[np.float64]:
    """Ascending real spectrum of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise ValueError("eig_hermitian requires a Hermitian matrix (tolerance 1e-12)")
    return np.linalg.eigvalsh(m)


def min_eigenvalue(m) -> float:
    return float(eig_hermitian(m)[0])
