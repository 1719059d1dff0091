"""Orthonormal Hermitian operator bases used for the operator-matrix representation.

Every channel, state and POVM effect in this package is expressed in one fixed
basis per dimension: the normalized Pauli strings for d = 2**q and the
generalized Gell-Mann matrices otherwise.  The first element is always
proportional to the identity, so the coefficient vector of a density operator
has first entry 1/sqrt(d).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

PAULI_LETTERS = "IXYZ"


def pauli_strings(num_qubits: int) -> list[str]:
    """Canonical ordering of Pauli labels: lexicographic in (I, X, Y, Z)."""
    return ["".join(s) for s in product(PAULI_LETTERS, repeat=num_qubits)]


def pauli_matrix(label: str) -> np.ndarray:
    """Unnormalized Pauli string operator for a label like ``"XZ"``."""
    out = np.array([[1.0 + 0j]])
    for ch in label:
        out = np.kron(out, _PAULI_1Q[ch])
    return out


def _gell_mann(d: int) -> list[np.ndarray]:
    # identity first, then symmetric, antisymmetric, diagonal; all trace-orthonormal
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            mats.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            mats.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        for j in range(l):
            m[j, j] = 1
        m[l, l] = -l
        mats.append(m / np.sqrt(l * (l + 1)))
    return mats


@lru_cache(maxsize=None)
def operator_basis(dim: int) -> np.ndarray:
    """Return the canonical orthonormal Hermitian basis as a (dim**2, dim, dim) array.

    Normalized Pauli strings when dim is a power of two, generalized Gell-Mann
    matrices otherwise.  Orthonormal under Tr[b_j^dag b_k] = delta_jk.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    q = dim.bit_length() - 1
    if 2**q == dim:
        mats = [pauli_matrix(s) / np.sqrt(dim) for s in pauli_strings(q)]
    else:
        mats = _gell_mann(dim)
    return np.array(mats)


def basis_labels(dim: int) -> list[str]:
    q = dim.bit_length() - 1
    if 2**q == dim:
        return pauli_strings(q)
    return [f"gm{j}" for j in range(dim * dim)]


def check_orthonormality(dim: int, tol: float = 1e-12) -> float:
    """Max deviation of Tr[b_j^dag b_k] from the identity Gram matrix."""
    b = operator_basis(dim)
    gram = np.einsum("aij,bij->ab", b.conj(), b)
    return float(np.max(np.abs(gram - np.eye(dim * dim))))
