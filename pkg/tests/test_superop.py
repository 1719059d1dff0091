import numpy as np
import pytest
from numpy.testing import assert_allclose

from rblab.basis import check_orthonormality, operator_basis, pauli_matrix
from rblab import superop as so


def haar_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_basis_orthonormality(d):
    assert check_orthonormality(d) <= 1e-12


def test_basis_identity_first():
    for d in (2, 3, 4):
        b = operator_basis(d)
        assert_allclose(b[0], np.eye(d) / np.sqrt(d), atol=1e-14)


def test_from_kraus_identity():
    op = so.from_kraus([np.eye(2)])
    assert_allclose(op.mat, np.eye(4), atol=1e-14)


def test_from_kraus_depolarizing_diagonal():
    p = 0.37
    kraus = [np.sqrt(1 - 3 * p / 4) * np.eye(2)]
    kraus += [np.sqrt(p / 4) * pauli_matrix(s) for s in "XYZ"]
    op = so.from_kraus(kraus)
    assert_allclose(op.mat, np.diag([1, 1 - p, 1 - p, 1 - p]).astype(complex),
                    atol=1e-12)


def test_from_kraus_matches_brute_force_basis_expansion():
    # oracle: apply the Kraus sum to each basis element directly
    rng = np.random.default_rng(0)
    for d in (2, 3):
        ks = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
              for _ in range(2)]
        op = so.from_kraus(ks)
        b = operator_basis(d)
        brute = np.zeros((d * d, d * d), dtype=complex)
        for k in range(d * d):
            out = sum(kr @ b[k] @ kr.conj().T for kr in ks)
            for j in range(d * d):
                brute[j, k] = np.trace(b[j].conj().T @ out)
        assert_allclose(op.mat, brute, atol=1e-12)


def test_from_kraus_dimension_mismatch():
    with pytest.raises(ValueError):
        so.from_kraus([np.eye(2), np.eye(3)])


def test_composition_homomorphism():
    rng = np.random.default_rng(1)
    for d in (2, 3):
        k1 = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        k2 = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        assert_allclose((so.from_kraus([k2]) @ so.from_kraus([k1])).mat,
                        so.from_kraus([k2 @ k1]).mat, atol=1e-12)


def test_born_rule_random():
    rng = np.random.default_rng(2)
    for d in (2, 3):
        for _ in range(5):
            rho = random_state(d, rng)
            pi = rng.standard_normal((d, d))
            pi = pi + pi.T
            ks = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))]
            op = so.from_kraus(ks)
            lhs = so.born_probability(so.effect_covector(pi), op,
                                      so.state_vector(rho))
            rhs = np.real(np.trace(pi @ (ks[0] @ rho @ ks[0].conj().T)))
            assert abs(lhs - rhs) < 1e-12


def test_trace_preserving_first_row():
    rng = np.random.default_rng(3)
    u = haar_unitary(3, rng)
    op = so.from_unitary(u)
    e0 = np.zeros(9)
    e0[0] = 1
    assert np.max(np.abs(op.mat[0] - e0)) < 1e-10
    assert op.is_trace_preserving()


def test_hermiticity_preserving_real_matrix():
    rng = np.random.default_rng(4)
    ks = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))]
    assert so.from_kraus(ks).hermiticity_residual() < 1e-10


def test_choi_roundtrip_and_cp():
    op = so.depolarizing(2, 0.2)
    j = so.to_choi(op)
    assert np.max(np.abs(j - j.conj().T)) < 1e-12
    assert_allclose(so.from_choi(j, 2).mat, op.mat, atol=1e-12)
    assert so.is_cp(op)


def test_identity_choi_is_maximally_entangled_projector():
    op = so.identity_superop(2)
    j = so.to_choi(op)
    omega = np.zeros(4, dtype=complex)
    omega[0] = omega[3] = 1.0  # |00> + |11>
    assert_allclose(j, np.outer(omega, omega.conj()), atol=1e-12)


def test_transpose_map_not_cp():
    b = operator_basis(2)
    tmat = np.einsum("jxy,kyx->jk", b.conj(), b)
    tr = so.SuperOp(2, tmat)
    assert so.min_choi_eigenvalue(tr) < -0.4
    assert not so.is_cp(tr)


def test_counterexample_gauge_noise_not_cp():
    # the in-between noise of the construction at gamma = 0 and alpha = 0.5
    from rblab.noise import gauge_noise_matrix

    n = so.SuperOp(2, gauge_noise_matrix(0.5, 0.0))
    assert not so.is_cp(n)
    assert so.min_choi_eigenvalue(n) < -1e-3


def test_serialization_roundtrip():
    op = so.depolarizing(2, 0.13)
    back = so.SuperOp.from_json(op.to_json())
    assert back.dim == 2
    assert_allclose(back.mat, op.mat, atol=0)


# ---------------------------------------------------------------------------
# diamond norm
# ---------------------------------------------------------------------------

def _diamond_oracle(op, rng, restarts=60, refine=True):
    """Ancilla maximization: max over pure states of ||(Delta x id)(psi)||_1."""
    d = op.dim
    b = operator_basis(d)
    # Delta(E_ik) via transfer matrix: coefficients of E_ik, propagate, expand
    e_imgs = np.zeros((d, d, d, d), dtype=complex)
    for i in range(d):
        for k in range(d):
            eik = np.zeros((d, d), dtype=complex)
            eik[i, k] = 1.0
            cvec = np.einsum("lab,ab->l", b.conj(), eik)
            out = np.einsum("l,lab->ab", op.mat @ cvec, b)
            e_imgs[:, :, i, k] = out

    def objective(x):
        psi = x[:d * d] + 1j * x[d * d:]
        psi = psi / np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj()).reshape(d, d, d, d)
        out = np.einsum("abik,ijkl->ajbl", e_imgs, rho).reshape(d * d, d * d)
        return -np.sum(np.linalg.svd(out, compute_uv=False))

    best = 0.0
    best_x = None
    for _ in range(restarts):
        x = rng.standard_normal(2 * d * d)
        val = -objective(x)
        if val > best:
            best, best_x = val, x
    if refine:
        from scipy.optimize import minimize

        res = minimize(objective, best_x, method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
        best = max(best, -res.fun)
    return best


def test_diamond_norm_zero_and_identity():
    assert so.diamond_norm(so.zero_superop(2)) == 0.0
    assert abs(so.diamond_norm(so.identity_superop(2)) - 1.0) < 1e-7


def test_diamond_norm_cptp_is_one():
    rng = np.random.default_rng(5)
    u = haar_unitary(2, rng)
    assert abs(so.diamond_norm(so.from_unitary(u)) - 1.0) < 1e-7


def test_diamond_norm_depolarizing_vs_oracle():
    rng = np.random.default_rng(6)
    delta = so.SuperOp(2, so.depolarizing(2, 0.1).mat - np.eye(4))
    sdp = so.diamond_norm(delta)
    oracle = _diamond_oracle(delta, rng)
    assert abs(sdp - oracle) < 1e-4
    assert abs(sdp - 0.15) < 1e-7  # known value 3p/2 for qubit depolarizing


def test_diamond_norm_lower_bounds_from_states():
    # sampled ancilla-free trace norms never exceed the SDP value
    rng = np.random.default_rng(7)
    k = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    k = k / np.sqrt(np.linalg.eigvalsh(k.conj().T @ k)[-1])
    delta = so.SuperOp(2, so.from_kraus([k]).mat - np.eye(4))
    val = so.diamond_norm(delta)
    for _ in range(25):
        rho = random_state(2, rng)
        sig = random_state(2, rng)
        diff_vec = delta.mat @ (so.state_vector(rho) - so.state_vector(sig))
        out = so.devectorize(diff_vec, 2)
        tn = np.sum(np.abs(np.linalg.eigvalsh((out + out.conj().T) / 2)))
        assert tn <= 2 * val + 1e-6


def test_diamond_norm_dimension_gate():
    with pytest.raises(ValueError):
        so.diamond_norm(so.identity_superop(9))


# ---------------------------------------------------------------------------
# fidelities
# ---------------------------------------------------------------------------

def test_fidelity_identity():
    ident = so.identity_superop(2)
    assert abs(so.entanglement_fidelity(ident, ident) - 1) < 1e-14
    assert abs(so.avg_fidelity(ident, ident) - 1) < 1e-14


def test_fidelity_depolarizing_affine_relation():
    # F_avg(Dep_f) = f + (1 - f)/d for a single adjoint decay f
    for f in (0.9, 0.7):
        dep = so.SuperOp(2, np.diag([1, f, f, f]).astype(complex))
        favg = so.avg_fidelity(dep, so.identity_superop(2))
        assert abs(favg - (f + (1 - f) / 2)) < 1e-12


def test_fidelity_unitary_invariance():
    rng = np.random.default_rng(8)
    u = so.from_unitary(haar_unitary(3, rng))
    assert abs(so.entanglement_fidelity(u, u) - 1) < 1e-12


def test_fidelities_in_unit_interval_for_cptp():
    rng = np.random.default_rng(9)
    for _ in range(5):
        u1 = so.from_unitary(haar_unitary(2, rng))
        dep = so.depolarizing(2, rng.uniform(0, 1))
        fe = so.entanglement_fidelity(dep @ u1, u1)
        assert -1e-10 <= fe <= 1 + 1e-10
