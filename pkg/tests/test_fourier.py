import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_cp_map
from rblab.fourier import (ImplementationMap, block_projector_residual, convolve,
                           delta_identity_map, fourier_block, fourier_blocks,
                           fourier_norms, inverse_fourier, parseval_residual,
                           representation_map, weighted_map)
from rblab.noise import depolarizing_noise
from rblab.superop import depolarizing, diamond_norm, SuperOp


def test_representation_blocks_are_projectors(pauli1, clifford1):
    for _, rep, cat in (pauli1, clifford1):
        ref = representation_map(rep)
        for ir in cat:
            block = fourier_block(ref, ir)
            assert block_projector_residual(block) <= 1e-9
            assert abs(np.trace(block) - ir.multiplicity) <= 1e-8


def test_block_vanishes_for_absent_irrep(pauli1, clifford1):
    # feed sigma_lambda of one group's irrep catalog a representation that
    # does not contain it: restrict omega to the trivial component only
    group, rep, cat = clifford1
    triv = cat.get("trivial").projector
    proj_map = ImplementationMap(group, np.broadcast_to(
        triv, (group.order, 4, 4)).copy().astype(complex), 2)
    block = fourier_block(proj_map, cat.get("adjoint"))
    assert np.linalg.norm(block) <= 1e-10


def test_depolarizing_block_eigenvalue(clifford1):
    group, rep, cat = clifford1
    p = 0.23
    phi = depolarizing_noise(rep, p)
    block = fourier_block(phi, cat.get("adjoint"))
    vals = np.sort_complex(np.linalg.eigvals(block))
    nonzero = vals[np.abs(vals) > 1e-10]
    assert len(nonzero) == 1
    assert abs(nonzero[0] - (1 - p)) < 1e-10


def test_convolution_identity(pauli1):
    group, rep, _ = pauli1
    rng = np.random.default_rng(0)
    phi = random_cp_map(group, 2, rng)
    delta = delta_identity_map(group, 2)
    assert_allclose(convolve(phi, delta).mats, phi.mats, atol=1e-12)


def test_convolution_fourier_homomorphism(pauli1):
    group, rep, cat = pauli1
    rng = np.random.default_rng(1)
    phi = random_cp_map(group, 2, rng)
    psi = random_cp_map(group, 2, rng)
    conv = convolve(phi, psi)
    for ir in cat:
        lhs = fourier_block(conv, ir)
        rhs = fourier_block(phi, ir) @ fourier_block(psi, ir)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_block_product_chain_of_three(pauli1):
    group, _, cat = pauli1
    rng = np.random.default_rng(2)
    maps = [random_cp_map(group, 2, rng) for _ in range(3)]
    chain = convolve(maps[0], convolve(maps[1], maps[2]))
    for ir in cat:
        lhs = fourier_block(chain, ir)
        rhs = (fourier_block(maps[0], ir) @ fourier_block(maps[1], ir)
               @ fourier_block(maps[2], ir))
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_representation_convolution_idempotent(clifford1):
    _, rep, _ = clifford1
    ref = representation_map(rep)
    assert_allclose(convolve(ref, ref).mats, ref.mats, atol=1e-10)


def test_parseval(pauli1):
    group, rep, cat = pauli1
    rng = np.random.default_rng(3)
    phi = random_cp_map(group, 2, rng)
    psi = random_cp_map(group, 2, rng)
    assert parseval_residual(phi, psi, cat) <= 1e-10
    ref = representation_map(rep)
    assert parseval_residual(ref, ref, cat) <= 1e-10
    zero = ImplementationMap(group, np.zeros_like(phi.mats), 2)
    assert parseval_residual(zero, zero, cat) == 0.0


def test_parseval_flags_incomplete_catalog(clifford1):
    # the Clifford catalog only carries the irreps inside omega, so random
    # maps leave a visible residual: this is the documented diagnostic
    group, _, cat = clifford1
    rng = np.random.default_rng(4)
    phi = random_cp_map(group, 2, rng)
    assert parseval_residual(phi, phi, cat) > 1e-3


def test_inverse_fourier_reconstructs(pauli1):
    group, _, cat = pauli1
    rng = np.random.default_rng(5)
    phi = random_cp_map(group, 2, rng)
    blocks = fourier_blocks(phi, cat)
    for g in range(group.order):
        assert np.max(np.abs(inverse_fourier(blocks, cat, g) - phi.mats[g])) < 1e-9


def test_weighted_representation_block(pauli1):
    # uniform-weighted representation keeps the idempotent trace-n_lambda blocks
    group, rep, cat = pauli1
    ref = representation_map(rep)
    nu = np.full(group.order, 1 / group.order)
    wmap = weighted_map(ref, nu)
    for ir in cat:
        block = fourier_block(wmap, ir)
        assert block_projector_residual(block) < 1e-10
        assert abs(np.trace(block) - ir.multiplicity) < 1e-10


def test_fourier_norms_cptp(pauli1):
    group, rep, _ = pauli1
    ref = representation_map(rep)
    mx, mean = fourier_norms(ref)
    assert abs(mx - 1) < 1e-6 and abs(mean - 1) < 1e-6
    nu = np.full(group.order, 1 / group.order)
    mx2, mean2 = fourier_norms(weighted_map(ref, nu))
    assert abs(mx2 - 1) < 1e-6 and abs(mean2 - 1) < 1e-6


def test_mean_norm_gate_independent(clifford1):
    # || phi - omega || has identical diamond norm for every g, so the mean
    # norm equals the single-channel distance
    group, rep, _ = clifford1
    p = 0.05
    phi = depolarizing_noise(rep, p)
    ref = representation_map(rep)
    diff = ImplementationMap(group, phi.mats - ref.mats, 2)
    single = diamond_norm(SuperOp(2, depolarizing(2, p).mat - np.eye(4)))
    mx, mean = fourier_norms(diff)
    assert abs(mean - single) < 1e-6
    assert abs(mx - single) < 1e-6


def test_submultiplicativity_max_mean(pauli1):
    group, _, cat = pauli1
    rng = np.random.default_rng(6)
    phi = random_cp_map(group, 2, rng)
    psi = random_cp_map(group, 2, rng)
    conv = convolve(phi, psi)
    mx_c, _ = fourier_norms(conv)
    mx_p, mean_p = fourier_norms(phi)
    mx_q, mean_q = fourier_norms(psi)
    assert mx_c <= mx_p * mean_q + 1e-6


def test_verify_physical_flags(pauli1):
    group, _, _ = pauli1
    rng = np.random.default_rng(7)
    phi = random_cp_map(group, 2, rng)
    phi.verify_physical()
    assert phi.cp and phi.trace_nonincreasing
    bad = ImplementationMap(group, phi.mats * 1.5, 2)
    with pytest.raises(ValueError):
        bad.verify_physical()
