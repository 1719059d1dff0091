"""Noise-model library: implementation maps for the simulation studies.

All constructors return :class:`~rblab.fourier.ImplementationMap` instances
whose elements are verified completely positive and trace non-increasing,
except where a model is explicitly built to probe CP violations.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .fourier import ImplementationMap, representation_map
from .groups import Representation
from .superop import SuperOp, depolarizing, from_unitary, operator_basis


def gate_independent(rep: Representation, noise: SuperOp,
                     verify: bool = True) -> ImplementationMap:
    """phi(g) = noise . omega(g): one fixed channel after every ideal gate."""
    base = representation_map(rep)
    mats = noise.mat[None, :, :] @ base.mats
    imap = ImplementationMap(rep.group, mats, base.dim, label="gate_independent")
    if verify:
        imap.verify_physical()
    return imap


def depolarizing_noise(rep: Representation, p: float) -> ImplementationMap:
    base = representation_map(rep)
    return gate_independent(rep, depolarizing(base.dim, p))


def anisotropic_pauli(rep: Representation, decays: tuple[float, float, float]
                      ) -> ImplementationMap:
    """Single-qubit Pauli channel with transfer matrix diag(1, a, b, c)."""
    base = representation_map(rep)
    if base.dim != 2:
        raise ValueError("anisotropic Pauli noise is a single-qubit model")
    lam = SuperOp(2, np.diag([1.0, *decays]).astype(complex))
    return gate_independent(rep, lam)


def _axis_angle(u: np.ndarray) -> tuple[np.ndarray, float]:
    # strip the global phase via the determinant, then read off the SU(2) form
    det = np.linalg.det(u)
    v = u / np.sqrt(det)
    cos_half = np.clip(np.real(np.trace(v)) / 2.0, -1.0, 1.0)
    angle = 2.0 * np.arccos(abs(cos_half))
    if np.real(np.trace(v)) < 0:
        v = -v
    sx = -np.imag(v[0, 1] + v[1, 0]) / 2
    sy = -np.real(v[0, 1] - v[1, 0]) / 2
    sz = -np.imag(v[0, 0] - v[1, 1]) / 2
    n = np.array([sx, sy, sz])
    norm = np.linalg.norm(n)
    if norm < 1e-12:
        return np.array([0.0, 0.0, 1.0]), 0.0
    return n / norm, angle


def _rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    h = axis[0] * sx + axis[1] * sy + axis[2] * sz
    return expm(-0.5j * angle * h)


def overrotation(rep: Representation, theta: float,
                 axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
                 ) -> ImplementationMap:
    """Coherent gate-dependent noise: every gate overshoots its own rotation.

    Each single-qubit gate U = exp(-i phi/2 n.sigma) is replaced by the
    rotation through phi + theta about the same axis n.  The identity has no
    axis of its own, so it is rotated through theta about the supplied default
    axis (an always-on drive).  Qubit groups only.
    """
    if rep.unitaries is None or rep.unitaries.shape[1] != 2:
        raise ValueError("overrotation noise is defined for single-qubit groups")
    default = np.asarray(axis, dtype=float)
    default = default / np.linalg.norm(default)
    ops = []
    for u in rep.unitaries:
        n, angle = _axis_angle(u)
        if angle < 1e-12:
            noisy = _rotation(default, theta)
        else:
            noisy = _rotation(n, angle + theta)
        ops.append(from_unitary(noisy))
    imap = ImplementationMap(rep.group, np.array([o.mat for o in ops]), 2,
                             cp=True, trace_nonincreasing=True, label="overrotation")
    return imap


# ---------------------------------------------------------------------------
# the CP/fidelity counterexample family (single qubit, Pauli basis)
# ---------------------------------------------------------------------------

def shelving_t(gamma: float) -> np.ndarray:
    return np.array([
        [1, 0, 0, 0],
        [0, np.sqrt(gamma), 0, 0],
        [0, 0, np.sqrt(gamma), 0],
        [1 - gamma, 0, 0, gamma],
    ], dtype=complex)


def squeeze_m1(alpha: float) -> np.ndarray:
    return np.diag([1.0, alpha, 1.0, 1.0]).astype(complex)


def stretch_m2(alpha: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, 1.0 / alpha]).astype(complex)


def counterexample_maps(alpha: float, gamma: float
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three building blocks T(gamma), M1(alpha), M2(alpha)."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    return shelving_t(gamma), squeeze_m1(alpha), stretch_m2(alpha)


def counterexample_ix_a(rep: Representation, alpha: float, gamma: float,
                        verify: bool = True) -> ImplementationMap:
    """phi(g) = T(gamma) M1(alpha) omega(g) M2(alpha) on the 1q Clifford group.

    Every phi(g) is CP in the verified parameter range while the in-between
    noise M2 T M1 can fail to be; construction aborts if some phi(g) is not CP.
    """
    t, m1, m2 = counterexample_maps(alpha, gamma)
    base = representation_map(rep)
    mats = (t @ m1)[None, :, :] @ base.mats @ m2[None, :, :]
    imap = ImplementationMap(rep.group, mats, 2, label="counterexample_ix_a")
    if verify:
        imap.verify_physical()
    return imap


def gauge_noise_matrix(alpha: float, gamma: float) -> np.ndarray:
    """The in-between noise M2(alpha) T(gamma) M1(alpha) of the counterexample."""
    t, m1, m2 = counterexample_maps(alpha, gamma)
    return m2 @ t @ m1


# ---------------------------------------------------------------------------
# stochastic leakage cascade (high fidelity, wildly non-exponential data)
# ---------------------------------------------------------------------------

def leak_transition_matrix(dim: int, level: int, mu: float) -> np.ndarray:
    """Row-stochastic cascade: basis states 0..level-2 hop up, level-1 absorbs.

    Entry conventions: S[i, i] = mu and S[i, i+1] = 1 - mu for i < level - 1;
    S[i, i] = 1 for i >= level - 1.
    """
    if not 1 <= level < dim:
        raise ValueError("need 1 <= level < dim")
    if not 0 <= mu <= 1:
        raise ValueError("mu must lie in [0, 1]")
    s = np.eye(dim)
    for i in range(level - 1):
        s[i, i] = mu
        s[i, i + 1] = 1 - mu
    return s


def leak_channel_superop(dim: int, level: int, mu: float) -> SuperOp:
    """Channel |i><j| -> delta_ij Sum_k S[i,k] |k><k| built from the cascade."""
    s = leak_transition_matrix(dim, level, mu)
    b = operator_basis(dim)
    d2 = dim * dim
    mat = np.zeros((d2, d2), dtype=complex)
    # Kraus operators sqrt(S[i,k]) |k><i|
    for i in range(dim):
        for k in range(dim):
            if s[i, k] == 0.0:
                continue
            kr = np.zeros((dim, dim), dtype=complex)
            kr[k, i] = np.sqrt(s[i, k])
            mat += np.einsum("jyx,yw,kwz,xz->jk", b.conj(), kr, b, kr.conj())
    return SuperOp(dim, mat)


def stochastic_leak(rep: Representation, level: int, mu: float,
                    verify: bool = True) -> ImplementationMap:
    """phi(g)(X) = Lambda(P X P) + U_g (1-P) X (1-P) U_g^dag.

    P projects on the first ``level`` basis states; inside that block the gate
    is replaced by the classical cascade, outside it acts ideally.  Trace
    preserving and CP by construction.
    """
    if rep.unitaries is None:
        raise ValueError("representation must carry unitaries")
    dim = rep.unitaries.shape[1]
    s = leak_transition_matrix(dim, level, mu)
    b = operator_basis(dim)
    d2 = dim * dim
    q = np.zeros((dim, dim), dtype=complex)
    for i in range(level, dim):
        q[i, i] = 1.0

    kraus_block = []
    for i in range(level):
        for k in range(dim):
            if s[i, k] == 0.0:
                continue
            kr = np.zeros((dim, dim), dtype=complex)
            kr[k, i] = np.sqrt(s[i, k])
            kraus_block.append(kr)

    mats = np.zeros((rep.group.order, d2, d2), dtype=complex)
    for gidx, u in enumerate(rep.unitaries):
        mat = np.zeros((d2, d2), dtype=complex)
        for kr in kraus_block:
            mat += np.einsum("jyx,yw,kwz,xz->jk", b.conj(), kr, b, kr.conj())
        uq = u @ q
        mat += np.einsum("jyx,yw,kwz,xz->jk", b.conj(), uq, b, uq.conj())
        mats[gidx] = mat
    imap = ImplementationMap(rep.group, mats, dim, label="stochastic_leak")
    if verify:
        imap.verify_physical()
    return imap
