"""Operator-matrix (transfer-matrix) representation of states, effects and channels.

A superoperator on d x d operators is stored as a d^2 x d^2 matrix in the
canonical Hermitian basis of :mod:`rblab.basis`,

    mat[j, k] = Tr[ b_j^dag  E(b_k) ].

States become length-d^2 coefficient vectors, POVM effects become co-vectors,
and Born probabilities are plain inner products.  Hermiticity-preserving maps
have real matrices in this basis; trace preservation is equivalent to the
first row being (1, 0, ..., 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .basis import operator_basis

DIAMOND_MAX_DIM = 8


@dataclass(frozen=True)
class SuperOp:
    """A linear map on d x d operators in the canonical Hermitian basis."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        d2 = self.dim * self.dim
        if self.mat.shape != (d2, d2):
            raise ValueError(f"matrix shape {self.mat.shape} does not match dim {self.dim}")
        object.__setattr__(self, "mat", np.asarray(self.mat))

    def __matmul__(self, other: "SuperOp") -> "SuperOp":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return SuperOp(self.dim, self.mat @ other.mat)

    def apply(self, state_vec: np.ndarray) -> np.ndarray:
        return self.mat @ state_vec

    def is_trace_preserving(self, tol: float = 1e-10) -> bool:
        e0 = np.zeros(self.dim * self.dim)
        e0[0] = 1.0
        return bool(np.max(np.abs(self.mat[0] - e0)) <= tol)

    def is_unital(self, tol: float = 1e-10) -> bool:
        e0 = np.zeros(self.dim * self.dim)
        e0[0] = 1.0
        return bool(np.max(np.abs(self.mat[:, 0] - e0)) <= tol)

    def hermiticity_residual(self) -> float:
        """Imaginary content of the matrix; zero iff the map preserves Hermiticity."""
        return float(np.max(np.abs(self.mat.imag)))

    def to_json(self) -> str:
        flat = [[float(z.real), float(z.imag)] for z in self.mat.ravel()]
        return json.dumps({"dim": self.dim, "mat": flat})

    @staticmethod
    def from_json(text: str) -> "SuperOp":
        obj = json.loads(text)
        d2 = obj["dim"] ** 2
        mat = np.array([complex(re, im) for re, im in obj["mat"]]).reshape(d2, d2)
        return SuperOp(obj["dim"], mat)


# ---------------------------------------------------------------------------
# vectorization of states and effects
# ---------------------------------------------------------------------------

def state_vector(rho: np.ndarray) -> np.ndarray:
    """Coefficient vector |rho>> with entries Tr[b_k^dag rho]."""
    d = rho.shape[0]
    b = operator_basis(d)
    return np.einsum("kij,ij->k", b.conj(), rho)


def effect_covector(pi: np.ndarray) -> np.ndarray:
    """Co-vector <<Pi| with entries Tr[Pi b_k]."""
    d = pi.shape[0]
    b = operator_basis(d)
    return np.einsum("ij,kji->k", pi, b)


def devectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    """Operator Sum_k vec_k b_k from a coefficient vector."""
    b = operator_basis(dim)
    return np.einsum("k,kij->ij", vec, b)


def born_probability(effect_vec: np.ndarray, op: SuperOp, state_vec: np.ndarray) -> float:
    """<<Pi| E |rho>> = Tr[Pi E(rho)] (real part; imaginary residue is numerical)."""
    return float(np.real(effect_vec @ op.mat @ state_vec))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def identity_superop(dim: int) -> SuperOp:
    return SuperOp(dim, np.eye(dim * dim, dtype=complex))


def zero_superop(dim: int) -> SuperOp:
    return SuperOp(dim, np.zeros((dim * dim, dim * dim), dtype=complex))


def from_kraus(kraus: list[np.ndarray]) -> SuperOp:
    """Superoperator rho -> Sum_a K_a rho K_a^dag from Kraus operators."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    d = kraus[0].shape[0]
    for k in kraus:
        if k.shape != (d, d):
            raise ValueError("all Kraus operators must be square with equal dimension")
    b = operator_basis(d)
    mat = np.zeros((d * d, d * d), dtype=complex)
    for k in kraus:
        mat += np.einsum("jyx,yw,kwz,xz->jk", b.conj(), k, b, k.conj())
    return SuperOp(d, mat)


def from_unitary(u: np.ndarray) -> SuperOp:
    """Conjugation channel rho -> U rho U^dag."""
    return from_kraus([u])


def depolarizing(dim: int, p: float) -> SuperOp:
    """rho -> (1-p) rho + p Tr[rho] 1/d; transfer matrix diag(1, 1-p, ..., 1-p)."""
    diag = np.full(dim * dim, 1.0 - p, dtype=complex)
    diag[0] = 1.0
    return SuperOp(dim, np.diag(diag))


def generalized_depolarizing(projectors: list[np.ndarray], decays: list[float],
                             dim: int) -> SuperOp:
    """Sum_lambda f_lambda P_lambda for isotypic projectors P_lambda."""
    mat = np.zeros((dim * dim, dim * dim), dtype=complex)
    for p, f in zip(projectors, decays):
        mat += f * p
    return SuperOp(dim, mat)


# ---------------------------------------------------------------------------
# Choi matrix, complete positivity
# ---------------------------------------------------------------------------

def to_choi(op: SuperOp) -> np.ndarray:
    """Choi matrix J(E) = Sum_ij E(|i><j|) (x) |i><j| (output factor first)."""
    d = op.dim
    b = operator_basis(d)
    j4 = np.einsum("lk,lab,kij->aibj", op.mat, b, b.conj())
    return j4.reshape(d * d, d * d)


def from_choi(choi: np.ndarray, dim: int) -> SuperOp:
    b = operator_basis(dim)
    j4 = choi.reshape(dim, dim, dim, dim)
    mat = np.einsum("lab,kij,aibj->lk", b.conj(), b, j4)
    return SuperOp(dim, mat)


def min_choi_eigenvalue(op: SuperOp) -> float:
    """Smallest eigenvalue of the Hermitian part of the Choi matrix."""
    j = to_choi(op)
    j = (j + j.conj().T) / 2
    return float(np.linalg.eigvalsh(j)[0])


def is_cp(op: SuperOp, tol: float = 1e-9) -> bool:
    """Complete positivity test: Choi matrix PSD up to -tol."""
    return min_choi_eigenvalue(op) >= -tol


def is_trace_nonincreasing(op: SuperOp, tol: float = 1e-9) -> bool:
    """Check Sum_a K_a^dag K_a <= 1 via the partial trace of the Choi matrix."""
    d = op.dim
    j4 = to_choi(op).reshape(d, d, d, d)
    red = np.einsum("aiaj->ij", j4)
    evs = np.linalg.eigvalsh((red + red.conj().T) / 2)
    return bool(evs[-1] <= 1 + tol)


# ---------------------------------------------------------------------------
# diamond norm
# ---------------------------------------------------------------------------

def diamond_norm(op: SuperOp, solver: str | None = None) -> float:
    """Completely bounded trace norm via the Watrous semidefinite program.

    Solves

        maximize    Re <J(E), X>
        subject to  [[1 (x) rho0, X], [X^dag, 1 (x) rho1]] >= 0,
                    rho0, rho1 density matrices,

    whose optimum equals ||E||_diamond for every linear map E.  Restricted to
    dim <= 8 by design; larger inputs are rejected.
    """
    import cvxpy as cp

    d = op.dim
    if d > DIAMOND_MAX_DIM:
        raise ValueError(
            f"diamond norm is gated at dim <= {DIAMOND_MAX_DIM} (got {d}); "
            "this package targets desk-scale verification")
    if np.max(np.abs(op.mat)) < 1e-14:
        return 0.0
    j = to_choi(op)
    d2 = d * d

    rho0 = cp.Variable((d, d), hermitian=True)
    rho1 = cp.Variable((d, d), hermitian=True)
    x = cp.Variable((d2, d2), complex=True)
    block = cp.bmat([
        [cp.kron(np.eye(d), rho0), x],
        [x.H, cp.kron(np.eye(d), rho1)],
    ])
    constraints = [block >> 0, rho0 >> 0, rho1 >> 0,
                   cp.trace(rho0) == 1, cp.trace(rho1) == 1]
    objective = cp.Maximize(cp.real(cp.trace(j.conj().T @ x)))
    prob = cp.Problem(objective, constraints)

    solvers = [solver] if solver else ["CLARABEL", "SCS"]
    last_err = None
    inaccurate = None
    for s in solvers:
        try:
            kwargs = {}
            if s == "SCS":
                kwargs = {"eps": 1e-9, "max_iters": 100_000}
            prob.solve(solver=s, **kwargs)
            if prob.status == "optimal":
                return float(prob.value)
            if prob.status == "optimal_inaccurate" and inaccurate is None:
                inaccurate = float(prob.value)
        except Exception as exc:  # solver-specific failures: try the next one
            last_err = exc
    if inaccurate is not None:
        import warnings

        warnings.warn("diamond norm SDP reached reduced accuracy only "
                      f"(value {inaccurate:.6g})")
        return inaccurate
    raise RuntimeError(f"diamond norm SDP failed to converge: {last_err or prob.status}")


def diamond_distance(a: SuperOp, b: SuperOp, solver: str | None = None) -> float:
    return diamond_norm(SuperOp(a.dim, a.mat - b.mat), solver=solver)


# ---------------------------------------------------------------------------
# fidelities
# ---------------------------------------------------------------------------

def entanglement_fidelity(a: SuperOp, b: SuperOp) -> float:
    """F_e(a, b) = Re Tr[b^dag a] / d^2 (equals <Omega|(1 x b^dag a)|Omega>)."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return float(np.real(np.trace(b.mat.conj().T @ a.mat))) / a.dim**2


def avg_fidelity(a: SuperOp, b: SuperOp) -> float:
    """Average gate fidelity via F_avg = (d F_e + 1) / (d + 1)."""
    d = a.dim
    return (d * entanglement_fidelity(a, b) + 1.0) / (d + 1.0)
