"""Matrix-valued Fourier analysis of implementation maps.

An implementation map assigns a (generally non-homomorphic) superoperator to
every group element.  Its Fourier transform at an irrep sigma_lambda is the
group average

    F(phi)[sigma_lambda] = |G|^-1 Sum_g  conj(sigma_lambda(g)) (x) phi(g),

a (d_lambda d^2) x (d_lambda d^2) matrix.  Representations transform to
orthogonal projectors whose rank equals the irrep multiplicity; convolution of
maps becomes a product of blocks.  Blocks are kept per irrep, never assembled
into one big direct sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import FiniteGroup, Irrep, IrrepCatalog, Representation
from .superop import SuperOp, diamond_norm, is_cp


@dataclass
class ImplementationMap:
    """Group-indexed family of superoperators phi(g), stored as one array."""

    group: FiniteGroup
    mats: np.ndarray  # (order, d^2, d^2)
    dim: int
    cp: bool | None = None
    trace_nonincreasing: bool | None = None
    label: str = ""

    @staticmethod
    def from_superops(group: FiniteGroup, ops: list[SuperOp], label: str = "",
                      verify: bool = False) -> "ImplementationMap":
        dim = ops[0].dim
        mats = np.array([op.mat for op in ops])
        imap = ImplementationMap(group, mats, dim, label=label)
        if verify:
            imap.verify_physical()
        return imap

    def op(self, g: int) -> SuperOp:
        return SuperOp(self.dim, self.mats[g])

    def verify_physical(self, tol: float = 1e-9) -> None:
        """Assert every phi(g) is CP with diamond norm at most one."""
        from .superop import is_trace_nonincreasing

        for g in range(self.group.order):
            if not is_cp(self.op(g), tol=tol):
                raise ValueError(f"phi(g={g}) failed the complete-positivity check")
            if not is_trace_nonincreasing(self.op(g), tol=tol):
                raise ValueError(f"phi(g={g}) is trace increasing")
        self.cp = True
        self.trace_nonincreasing = True


def representation_map(rep: Representation) -> ImplementationMap:
    """The ideal implementation: phi = omega."""
    dim = round(np.sqrt(rep.dim))
    if dim * dim != rep.dim:
        raise ValueError("reference representation must act on operator space")
    return ImplementationMap(rep.group, rep.matrices.astype(complex), dim,
                             cp=True, trace_nonincreasing=True, label="reference")


def weighted_map(phi: ImplementationMap, nu: np.ndarray) -> ImplementationMap:
    """nu-weighted map g -> |G| nu(g) phi(g) (the effective map of non-uniform RB)."""
    n = phi.group.order
    mats = (n * np.asarray(nu))[:, None, None] * phi.mats
    return ImplementationMap(phi.group, mats, phi.dim, label=f"{phi.label}|weighted")


def fourier_block(phi: ImplementationMap, irrep: Irrep) -> np.ndarray:
    """F(phi)[sigma_lambda] as an explicit matrix."""
    n = phi.group.order
    block = np.einsum("gab,gij->aibj", irrep.sigma.conj(), phi.mats) / n
    dl = irrep.dim * phi.dim**2
    return block.reshape(dl, dl)


def fourier_blocks(phi: ImplementationMap, catalog: IrrepCatalog) -> dict[str, np.ndarray]:
    return {ir.label: fourier_block(phi, ir) for ir in catalog}


def block_projector_residual(block: np.ndarray) -> float:
    """Frobenius norm of B^2 - B; zero for Fourier transforms of representations."""
    return float(np.linalg.norm(block @ block - block))


def convolve(phi: ImplementationMap, psi: ImplementationMap) -> ImplementationMap:
    """(phi * psi)(g) = |G|^-1 Sum_g' phi(g g'^-1) psi(g')."""
    if phi.group is not psi.group and phi.group.order != psi.group.order:
        raise ValueError("maps must live on the same group")
    g = phi.group
    n = g.order
    out = np.zeros_like(phi.mats)
    for gp in range(n):
        left = phi.mats[g.cayley[:, g.inverse[gp]]]
        out += left @ psi.mats[gp]
    return ImplementationMap(g, out / n, phi.dim, label=f"({phi.label})*({psi.label})")


def delta_identity_map(group: FiniteGroup, dim: int) -> ImplementationMap:
    """Convolution identity: g -> |G| [g = e] id."""
    d2 = dim * dim
    mats = np.zeros((group.order, d2, d2), dtype=complex)
    mats[group.identity] = group.order * np.eye(d2)
    return ImplementationMap(group, mats, dim, label="delta_e")


def inverse_fourier(blocks: dict[str, np.ndarray], catalog: IrrepCatalog,
                    g: int) -> np.ndarray:
    """Reconstruct phi(g) = Sum_lambda d_lambda Tr_V[ B_lambda (conj sigma(g^-1) (x) 1) ].

    Faithful for arbitrary maps only when the catalog is complete (it carries
    every irrep of the group); otherwise exact only for maps supported on the
    catalog's Fourier modes.
    """
    ginv = catalog.group.inv(g)
    d2 = catalog.rep.dim
    out = np.zeros((d2, d2), dtype=complex)
    for ir in catalog:
        b4 = blocks[ir.label].reshape(ir.dim, d2, ir.dim, d2)
        out += ir.dim * np.einsum("aibj,ba->ij", b4, ir.sigma[ginv].conj())
    return out


def parseval_residual(phi: ImplementationMap, psi: ImplementationMap,
                      catalog: IrrepCatalog) -> float:
    """|LHS - RHS| of the Parseval identity over the catalog's irreps.

    A residual above tolerance on random maps signals an incomplete irrep set.
    """
    n = phi.group.order
    lhs = np.einsum("gij,gij->", phi.mats.conj(), psi.mats) / n
    rhs = 0.0 + 0.0j
    for ir in catalog:
        bp = fourier_block(phi, ir)
        bq = fourier_block(psi, ir)
        rhs += ir.dim * np.trace(bp.conj().T @ bq)
    return float(abs(lhs - rhs))


def fourier_norms(phi: ImplementationMap) -> tuple[float, float]:
    """(max, mean) of the per-element diamond norms; the two Fourier-operator norms."""
    vals = [diamond_norm(phi.op(g)) for g in range(phi.group.order)]
    return float(np.max(vals)), float(np.mean(vals))
