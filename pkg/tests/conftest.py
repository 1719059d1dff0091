import numpy as np
import pytest

from rblab.groups import build_catalog, build_clifford_1q, build_pauli_group


@pytest.fixture(scope="session")
def pauli1():
    group, rep = build_pauli_group(1)
    return group, rep, build_catalog(group, rep)


@pytest.fixture(scope="session")
def pauli2():
    group, rep = build_pauli_group(2)
    return group, rep, build_catalog(group, rep)


@pytest.fixture(scope="session")
def clifford1():
    group, rep = build_clifford_1q()
    return group, rep, build_catalog(group, rep)


@pytest.fixture
def zero_state():
    rho = np.zeros((2, 2), dtype=complex)
    rho[0, 0] = 1.0
    return rho


@pytest.fixture
def survival_povm(zero_state):
    return [zero_state.copy(), np.eye(2) - zero_state]


def random_cp_map(group, dim, rng, n_kraus=2, trace_preserving=False):
    """Random CP trace-non-increasing implementation map (shared test helper)."""
    from rblab.fourier import ImplementationMap
    from rblab.superop import from_kraus

    mats = []
    for _ in range(group.order):
        ks = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
              for _ in range(n_kraus)]
        s = sum(k.conj().T @ k for k in ks)
        if trace_preserving:
            import scipy.linalg

            w = np.linalg.inv(scipy.linalg.sqrtm(s))
            ks = [k @ w for k in ks]
        else:
            lam = np.linalg.eigvalsh(s)[-1]
            ks = [k / np.sqrt(lam) for k in ks]
        mats.append(from_kraus(ks).mat)
    return ImplementationMap(group, np.array(mats), dim)
