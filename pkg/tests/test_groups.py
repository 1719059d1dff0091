import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rblab.groups import (FiniteGroup, GroupError, build_catalog, build_clifford_1q,
                          build_pauli_group, clifford_unitaries, irrep_projectors)


def test_pauli_group_order_and_tables():
    for q in (1, 2):
        group, rep = build_pauli_group(q)
        assert group.order == 4**q
        group.check()
        assert rep.homomorphism_residual() < 1e-10
        assert rep.unitarity_residual() < 1e-10


def test_pauli_group_q_limit():
    with pytest.raises(GroupError):
        build_pauli_group(4)


def test_pauli_q1_four_one_dim_irreps(pauli1):
    _, _, cat = pauli1
    assert len(cat) == 4
    assert all(ir.dim == 1 and ir.multiplicity == 1 for ir in cat)
    assert cat.is_complete
    for ir in cat:  # characters take values +-1
        assert np.max(np.abs(np.abs(ir.characters) - 1)) < 1e-10


def test_pauli_q2_decomposition(pauli2):
    # brute-force character inner products fix the multiplicities
    group, rep, cat = pauli2
    assert cat.maschke_check() == 16
    assert all(ir.multiplicity == 1 for ir in cat)
    n = group.order
    for ir in cat:
        brute = np.vdot(ir.characters, np.einsum("gii->g", rep.matrices)) / n
        assert abs(brute - ir.multiplicity) < 1e-10


def test_clifford_order_and_closure(clifford1):
    group, rep, _ = clifford1
    assert group.order == 24
    group.check()
    # exhaustive closure: all 24 * 24 products land in the set
    assert group.cayley.min() >= 0 and group.cayley.max() < 24
    assert rep.homomorphism_residual() < 1e-10


def test_clifford_irrep_content(clifford1):
    _, _, cat = clifford1
    labels = {ir.label: (ir.dim, ir.multiplicity) for ir in cat}
    assert labels == {"trivial": (1, 1), "adjoint": (3, 1)}
    assert not cat.is_complete  # S4 has five irreps; omega carries two


def test_character_orthonormality(clifford1, pauli2):
    for _, _, cat in (clifford1, pauli2):
        n = cat.group.order
        for i1 in cat:
            for i2 in cat:
                ip = np.vdot(i1.characters, i2.characters) / n
                assert abs(ip - (1.0 if i1.label == i2.label else 0.0)) < 1e-10


def test_characters_are_class_functions(clifford1):
    group, _, cat = clifford1
    rng = np.random.default_rng(0)
    for ir in cat:
        for _ in range(40):
            h, g = rng.integers(0, group.order, 2)
            conj = group.mult(group.mult(h, g), group.inv(h))
            assert abs(ir.characters[conj] - ir.characters[g]) < 1e-10


def test_projector_invariants(clifford1, pauli1):
    for group, rep, cat in (clifford1, pauli1):
        total = np.zeros((rep.dim, rep.dim), dtype=complex)
        for ir in cat:
            p = ir.projector
            assert np.max(np.abs(p @ p - p)) < 1e-10
            for ir2 in cat:
                if ir2.label != ir.label:
                    assert np.max(np.abs(p @ ir2.projector)) < 1e-10
            for g in range(group.order):  # P commutes with omega(g)
                comm = p @ rep.matrices[g] - rep.matrices[g] @ p
                assert np.max(np.abs(comm)) < 1e-10
            total += p
        assert_allclose(total, np.eye(rep.dim), atol=1e-10)


def test_character_projector_formula(clifford1):
    _, rep, cat = clifford1
    chars = [ir.characters for ir in cat]
    dims = [ir.dim for ir in cat]
    for ir, p in zip(cat, irrep_projectors(rep, chars, dims)):
        assert_allclose(p, ir.projector, atol=1e-9)
        rank = round(float(np.real(np.trace(p))))
        assert rank == ir.dim * ir.multiplicity


def test_trivial_projector_is_identity_component(clifford1):
    _, _, cat = clifford1
    p = cat.get("trivial").projector
    target = np.zeros((4, 4))
    target[0, 0] = 1.0
    assert_allclose(p, target, atol=1e-10)
    # adjoint projector is its complement
    assert_allclose(cat.get("adjoint").projector, np.eye(4) - target, atol=1e-10)


def test_pauli_axis_projectors(pauli1):
    # four rank-1 projectors onto the four Pauli axes, by brute-force average
    group, rep, cat = pauli1
    for k, label in enumerate(["trivial", "pauli:X", "pauli:Y", "pauli:Z"]):
        p = cat.get(label).projector
        target = np.zeros((4, 4))
        target[k, k] = 1.0
        assert_allclose(p, target, atol=1e-10)


def test_maschke_sum(pauli1, pauli2, clifford1):
    for _, rep, cat in (pauli1, pauli2, clifford1):
        assert cat.maschke_check() == rep.dim


def test_clifford_2q_gate():
    with pytest.raises(GroupError):
        clifford_unitaries(2)
    with pytest.raises(GroupError):
        clifford_unitaries(3, allow_large=True)


def test_group_json_roundtrip(pauli1):
    group, rep, _ = pauli1
    text = group.to_json(unitaries=rep.unitaries)
    back, unis = FiniteGroup.from_json(text)
    assert back.order == group.order
    assert np.array_equal(back.cayley, group.cayley)
    assert np.array_equal(back.inverse, group.inverse)
    assert unis.shape == rep.unitaries.shape
    assert np.max(np.abs(unis - rep.unitaries)) < 1e-12
    parsed = json.loads(text)
    assert parsed["identity"] == group.identity
