"""Filtered RB: project the decay of a single irreducible sector out of RB data.

The filter function alpha_lambda(g, i) = <<Pi_i| P_lambda conj(omega)(g) |rho_0>>
correlates RB data taken with varying ending gates against one irrep; the
normalized average k_lambda(m) then follows that irrep's matrix exponential
alone.  Because the ending gate can absorb the inversion, the default data
collection is inversion-free: a length-m run applies m random gates, computes
their product h classically, and weighs the observed outcome by
N_lambda^-1 alpha_lambda(i, h).

Measurement with a random-Clifford computational POVM (a state 3-design) makes
the estimator's variance dimension-independent; linear cross-entropy
benchmarking is the same construction for the full unitary group with the
adjoint filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import weighted_map
from .groups import Irrep, IrrepCatalog, clifford_unitaries
from .rbsim import RBConfig, _sequence_rng
from .superop import (SuperOp, devectorize, effect_covector, from_unitary,
                      state_vector)

BLIND_FILTER_TOL = 1e-12


class BlindFilterError(RuntimeError):
    """N_lambda vanishes: this SPAM pair cannot see the requested irrep."""


@dataclass
class FilterSpec:
    """Precomputed filter data for one irrep and one SPAM pair."""

    irrep: Irrep
    rep_mats: np.ndarray            # omega(g) superoperator matrices
    rho_vec: np.ndarray             # |rho_0>>
    effect_vecs: np.ndarray         # rows <<Pi_i|
    normalization: float

    def value(self, g: int, i: int) -> complex:
        """alpha_lambda(g, i) = <<Pi_i| P_lambda conj(omega(g)) |rho_0>>."""
        vec = self.irrep.projector @ self.rep_mats[g].conj() @ self.rho_vec
        return complex(self.effect_vecs[i] @ vec)

    def values_all_g(self) -> np.ndarray:
        """alpha as an (n_outcomes, |G|) table."""
        vecs = np.einsum("ab,gbc,c->ga", self.irrep.projector,
                         self.rep_mats.conj(), self.rho_vec)
        return np.einsum("ia,ga->ig", self.effect_vecs, vecs)


def raw_normalization(catalog: IrrepCatalog, irrep: Irrep, rho_vec: np.ndarray,
                      effect_vecs: np.ndarray) -> complex:
    """Direct double sum N_lambda = |G|^-1 Sum_{g,i} alpha(g,i) <<Pi_i|omega(g)|rho_0>>."""
    mats = catalog.rep.matrices
    filt = np.einsum("ia,ab,gbc,c->ig", effect_vecs, irrep.projector,
                     mats.conj(), rho_vec)
    plain = np.einsum("ia,gab,b->ig", effect_vecs, mats, rho_vec)
    return complex(np.sum(filt * plain) / catalog.group.order)


def design_normalization(irrep: Irrep, rho: np.ndarray, n_effects: int) -> float:
    """Closed-form N_lambda for a POVM {(d/|I|) |chi_i><chi_i|} that is a 2-design:

        N_lambda = d / ((d+1) |I|) * [ Tr P_lambda(rho) + Tr(rho P_lambda(rho)) ].

    Follows from Sum_i Pi_i (x) Pi_i = d/((d+1)|I|) (1 + SWAP) and the
    unitary invariance that absorbs the group average.
    """
    d = rho.shape[0]
    p_rho = devectorize(irrep.projector @ state_vector(rho), d)
    val = np.trace(p_rho) + np.trace(rho @ p_rho)
    return float(np.real(val)) * d / ((d + 1) * n_effects)


def build_filter(catalog: IrrepCatalog, label: str, rho: np.ndarray,
                 povm: list[np.ndarray]) -> FilterSpec:
    irrep = catalog.get(label)
    rho_vec = state_vector(rho)
    effect_vecs = np.array([effect_covector(pi) for pi in povm])
    n_lam = raw_normalization(catalog, irrep, rho_vec, effect_vecs)
    if abs(n_lam) < BLIND_FILTER_TOL:
        raise BlindFilterError(f"N_{label} = {n_lam:.2e}: filter is blind to this "
                               "state/POVM pair")
    return FilterSpec(irrep, catalog.rep.matrices, rho_vec, effect_vecs,
                      float(np.real(n_lam)))


# ---------------------------------------------------------------------------
# exact filtered data
# ---------------------------------------------------------------------------

def filtered_data(config: RBConfig, catalog: IrrepCatalog, label: str, m: int,
                  include_inversion: bool = False,
                  normalize: bool = True) -> float:
    """Exact k_lambda(m) = |G|^-1 Sum_{h,i} N^-1 alpha(h,i) p(i, m, h).

    Inversion-free by default: p(i, m, h) is the probability of outcome i
    after m random gates conditioned on their product being h.  With
    include_inversion=True the protocol's compiled final gate is kept and h
    plays the ending-gate role.  normalize=False returns the bare correlator
    (used to measure cross-irrep leakage even where N_lambda vanishes).
    """
    from .rbsim import sequence_average_maps

    spec = None
    if normalize:
        spec = build_filter(catalog, label, config.state, config.povm)
        alpha = spec.values_all_g() / spec.normalization
    else:
        irrep = catalog.get(label)
        rho_vec = state_vector(config.state)
        effect_vecs = np.array([effect_covector(pi) for pi in config.povm])
        alpha = FilterSpec(irrep, catalog.rep.matrices, rho_vec, effect_vecs,
                           1.0).values_all_g()
    state = config.state_vec()
    eff = config.effect_vecs()
    phi_m = None
    for mm, fam in sequence_average_maps(config, m, include_final=include_inversion):
        if mm == m:
            phi_m = fam
    table = np.einsum("ik,gkl,l->ig", eff, phi_m.mats, state)
    return float(np.real(np.sum(alpha * table) / config.group.order))


# ---------------------------------------------------------------------------
# the sampled estimator
# ---------------------------------------------------------------------------

@dataclass
class CliffordDesignPOVM:
    """Computational-basis measurement conjugated by a random Clifford.

    Effects (1/|C|) C|x><x|C^dag over all (C, x); the multi-qubit Clifford
    group is a unitary 3-design, so each orbit is a state 3-design and the
    filtered-RB estimator variance is dimension-independent.
    """

    unitaries: np.ndarray

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def n_effects(self) -> int:
        return len(self.unitaries) * self.dim

    def sample_setting(self, rng: np.random.Generator) -> int:
        return int(rng.integers(len(self.unitaries)))

    def effect(self, c_index: int, x: int) -> np.ndarray:
        col = self.unitaries[c_index][:, x]
        return np.outer(col, col.conj()) / len(self.unitaries)

    def effect_vec(self, c_index: int, x: int) -> np.ndarray:
        return effect_covector(self.effect(c_index, x))

    def outcome_probabilities(self, c_index: int, state_vec: np.ndarray) -> np.ndarray:
        """Born probabilities of x given setting C (they sum to one)."""
        u = self.unitaries[c_index]
        rho = devectorize(state_vec, self.dim)
        rotated = u.conj().T @ rho @ u
        return np.clip(np.real(np.diag(rotated)), 0.0, None)

    def completeness_residual(self) -> float:
        total = sum(self.effect(c, x) for c in range(len(self.unitaries))
                    for x in range(self.dim))
        return float(np.max(np.abs(total - np.eye(self.dim))))


def threedesign_povm(num_qubits: int, allow_large: bool = False) -> CliffordDesignPOVM:
    if num_qubits > 2:
        raise ValueError("design POVM enumeration is gated at q <= 2")
    return CliffordDesignPOVM(clifford_unitaries(num_qubits,
                                                 allow_large=allow_large or num_qubits == 2))


def haar_state_moment(povm: CliffordDesignPOVM, psi: np.ndarray, power: int,
                      draws: int, seed: int = 0) -> float:
    """Monte Carlo E |<chi|psi>|^(2 power) over the POVM's states |chi> = C|x>."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    d = povm.dim
    total = 0.0
    for _ in range(draws):
        c = povm.sample_setting(rng)
        x = int(rng.integers(d))
        amp = np.abs(np.vdot(povm.unitaries[c][:, x], psi)) ** 2
        total += amp**power
    return total / draws


def haar_moment_value(d: int, power: int) -> float:
    """Exact Haar moment E |<chi|psi>|^(2 power) = (power)! (d-1)! / (d-1+power)!."""
    from math import factorial

    return factorial(power) * factorial(d - 1) / factorial(d - 1 + power)


def estimate_filtered(config: RBConfig, catalog: IrrepCatalog, label: str, m: int,
                      n_samples: int, seed: int = 0,
                      design_povm: CliffordDesignPOVM | None = None,
                      include_inversion: bool = False) -> float:
    """Monte Carlo estimator of k_lambda(m): single-shot, inversion-free default.

    Per sample: draw a length-m sequence, propagate the noisy state, draw one
    measurement setting (fresh each sample when a design POVM is used), draw
    one outcome, and weigh it by N_lambda^-1 alpha_lambda(outcome, h) with h
    the classically computed sequence product (or the uniformly random ending
    gate when the compiled inversion is kept).  Unbiased for k_lambda(m).
    """
    g = config.group
    irrep = catalog.get(label)
    rho_vec = state_vector(config.state)

    if design_povm is None:
        effect_vecs = np.array([effect_covector(pi) for pi in config.povm])
        n_lam = raw_normalization(catalog, irrep, rho_vec, effect_vecs)
    else:
        n_lam = design_normalization(irrep, config.state, design_povm.n_effects)
    if abs(n_lam) < BLIND_FILTER_TOL:
        raise BlindFilterError(f"N_{label} vanishes for this SPAM pair")
    if n_samples <= 0:
        raise ValueError("need at least one sample")

    filt_cache = np.einsum("ab,gbc,c->ga", irrep.projector,
                           catalog.rep.matrices.conj(), rho_vec)
    eff_plain = (np.array([effect_covector(pi) for pi in config.povm])
                 if design_povm is None else None)

    total = 0.0
    for l in range(n_samples):
        rng = _sequence_rng(seed, 0, l)
        n_gates = m * config.period
        if config.schedule is not None:
            gates = [int(rng.choice(g.order, p=config.step_distribution(i + 1)))
                     for i in range(n_gates)]
        else:
            gates = list(rng.choice(g.order, size=n_gates, p=config.nu)) if n_gates \
                else []
        vec = config.state_vec()
        h = g.identity
        for gate in gates:
            vec = config.phi.mats[gate] @ vec
            h = g.mult(gate, h)
        if include_inversion:
            g_end = int(rng.integers(g.order))
            vec = config.phi.mats[g.mult(g_end, g.inv(h))] @ vec
            h = g_end
        vec = config.m_noise.mat @ vec

        if design_povm is None:
            probs = np.clip(np.real(eff_plain @ vec), 0, None)
            loss = max(0.0, 1.0 - probs.sum())
            pvec = np.append(probs, loss)
            outcome = int(rng.choice(len(pvec), p=pvec / pvec.sum()))
            if outcome == len(probs):
                continue  # lost shot carries zero filter weight
            alpha = complex(eff_plain[outcome] @ filt_cache[h])
        else:
            c = design_povm.sample_setting(rng)
            probs = design_povm.outcome_probabilities(c, vec)
            pvec = probs / probs.sum()
            x = int(rng.choice(design_povm.dim, p=pvec))
            alpha = complex(design_povm.effect_vec(c, x) @ filt_cache[h])
        total += np.real(alpha) / n_lam
    return total / n_samples


# ---------------------------------------------------------------------------
# linear cross-entropy benchmarking
# ---------------------------------------------------------------------------

def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian with phase fix."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _haar_two_copy_twirl(d: int) -> np.ndarray:
    """E_U [omega(U) (x) omega(U)] on the coefficient-vector tensor square.

    In the Hermitian basis the unitary channel splits as 1 (+) O(U) with O the
    (d^2-1)-dimensional adjoint block; the integral is the projector onto the
    two invariant pair sectors.
    """
    d2 = d * d
    p = np.zeros((d2 * d2, d2 * d2))
    p[0, 0] = 1.0
    for a in range(1, d2):
        for b in range(1, d2):
            p[a * d2 + a, b * d2 + b] += 1.0 / (d2 - 1)
    return p


def twirled_channel(noise: SuperOp) -> tuple[float, float]:
    """(trivial, adjoint) eigenvalues of the Haar twirl of a channel."""
    s_tr = float(np.real(noise.mat[0, 0]))
    f_adj = float(np.real(np.trace(noise.mat[1:, 1:]))) / (noise.dim**2 - 1)
    return s_tr, f_adj


def xeb_exact(noise: SuperOp, ms, sp_noise: SuperOp | None = None,
              m_noise: SuperOp | None = None) -> np.ndarray:
    """Exact F_XEB,m for gate-independent noise phi(U) = noise . omega(U).

    Uses phi^{*m}(U) = noise omega(U) T^{m-1} with T the Haar twirl of the
    noise, and the exact two-copy Haar integral for the ideal-weight
    correlation; the result decays as A_tr s_tr^m + A_adj f_adj^m.
    """
    d = noise.dim
    sp = sp_noise.mat if sp_noise is not None else np.eye(d * d)
    mm = m_noise.mat if m_noise is not None else np.eye(d * d)
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    rho_vec = sp @ state_vector(rho)
    effects = [np.outer(np.eye(d)[:, x], np.eye(d)[:, x].conj()) for x in range(d)]
    eff_ideal = np.array([effect_covector(pi) for pi in effects])
    eff_noisy = eff_ideal @ (mm @ noise.mat)  # rows <<Pi_x| E_M Lambda
    s_tr, f_adj = twirled_channel(noise)
    p2 = _haar_two_copy_twirl(d)
    ideal_rho = state_vector(rho)

    out = []
    for m in ms:
        t_pow = np.ones(d * d)
        t_pow[0] = s_tr ** (m - 1)
        t_pow[1:] = f_adj ** (m - 1)
        v = np.kron(ideal_rho, t_pow * rho_vec)
        val = 0.0
        for x in range(d):
            w = np.kron(eff_ideal[x], eff_noisy[x])
            val += np.real(w @ p2 @ v)
        out.append(d * val)
    return np.array(out)


def xeb_sample(noise: SuperOp, m: int, n_circuits: int, seed: int = 0,
               shots: int | None = None) -> float:
    """Monte Carlo F_XEB,m: random Haar circuits, noisy propagation, ideal weights.

    shots=None computes the per-circuit cross-correlation
    d Sum_x p_noisy(x) p_ideal(x) exactly (shot noise removed); an integer
    draws that many outcomes from the noisy distribution and averages
    d * p_ideal(x_observed).
    """
    d = noise.dim
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    total = 0.0
    for _ in range(n_circuits):
        psi = np.eye(d)[:, 0].astype(complex)
        vec = state_vector(rho)
        for _step in range(m):
            u = haar_unitary(d, rng)
            psi = u @ psi
            vec = noise.mat @ (from_unitary(u).mat @ vec)
        p_ideal = np.abs(psi) ** 2
        rho_out = devectorize(vec, d)
        p_noisy = np.clip(np.real(np.diag(rho_out)), 0, None)
        if shots is None:
            total += d * float(p_noisy @ p_ideal)
        else:
            pvec = p_noisy / p_noisy.sum()
            draws = rng.multinomial(shots, pvec)
            total += d * float(draws @ p_ideal) / shots
    return total / n_circuits


def xeb_normalization(d: int, n_samples: int, seed: int = 0,
                      batch: int = 2000) -> float:
    """Monte Carlo of d E_U Sum_x |<x|U|0>|^4; the Haar value is 2d/(d+1)."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    total = 0.0
    left = n_samples
    while left > 0:
        k = min(batch, left)
        z = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
        q, r = np.linalg.qr(z)
        diag = np.einsum("bii->bi", r)
        q = q * (diag / np.abs(diag))[:, None, :]
        total += float(np.sum(np.abs(q[:, :, 0]) ** 4))
        left -= k
    return d * total / n_samples
