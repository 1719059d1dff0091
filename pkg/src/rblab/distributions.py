"""Sampling distributions over gate groups, their convolutions and mixing times."""

from __future__ import annotations

import numpy as np

from .groups import FiniteGroup

MAX_MIXING_POWER = 10_000


class MixingError(RuntimeError):
    """The support of the distribution generates a proper subgroup."""


def uniform(group: FiniteGroup) -> np.ndarray:
    return np.full(group.order, 1.0 / group.order)


def peaked(group: FiniteGroup, g: int) -> np.ndarray:
    nu = np.zeros(group.order)
    nu[g] = 1.0
    return nu


def mixture(group: FiniteGroup, base: np.ndarray, epsilon: float) -> np.ndarray:
    """(1 - epsilon) * uniform + epsilon * base."""
    return (1 - epsilon) * uniform(group) + epsilon * np.asarray(base)


def generator_supported(group: FiniteGroup, subset: list[int],
                        weights: list[float] | None = None) -> np.ndarray:
    if not subset:
        raise ValueError("empty support")
    nu = np.zeros(group.order)
    if weights is None:
        weights = [1.0 / len(subset)] * len(subset)
    total = float(sum(weights))
    for g, w in zip(subset, weights):
        nu[g] += w / total
    return nu


def validate_distribution(nu: np.ndarray, tol: float = 1e-12) -> None:
    nu = np.asarray(nu)
    if np.any(nu < -tol):
        raise ValueError("negative probability in sampling distribution")
    if abs(float(nu.sum()) - 1.0) > tol:
        raise ValueError("sampling distribution does not sum to one")


class InterleavedSchedule:
    """Per-step distributions of standard interleaved RB.

    Steps are 1-based: odd steps draw uniformly, even steps apply the fixed
    interleaving gate.  A sequence length m means m/2 (random, C) pairs.
    """

    def __init__(self, group: FiniteGroup, gate: int):
        self.group = group
        self.gate = gate
        self._uniform = uniform(group)
        self._peaked = peaked(group, gate)

    def dist(self, step: int) -> np.ndarray:
        return self._uniform if step % 2 == 1 else self._peaked


def convolve_dist(group: FiniteGroup, nu: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """(nu * mu)(g) = Sum_g' nu(g g'^-1) mu(g'): law of a product of two draws."""
    out = np.zeros(group.order)
    for gp in range(group.order):
        if mu[gp] == 0.0:
            continue
        out += nu[group.cayley[:, group.inverse[gp]]] * mu[gp]
    return out


def dist_power(group: FiniteGroup, nu: np.ndarray, k: int) -> np.ndarray:
    """k-fold convolution nu^{*k}; k = 0 gives the point mass at the identity."""
    out = peaked(group, group.identity)
    for _ in range(k):
        out = convolve_dist(group, out, nu)
    return out


def l1_to_uniform(nu: np.ndarray) -> float:
    n = len(nu)
    return float(np.sum(np.abs(np.asarray(nu) - 1.0 / n)))


def mixing_time(group: FiniteGroup, nu: np.ndarray, delta: float,
                max_power: int = MAX_MIXING_POWER) -> int:
    """Smallest k >= 1 with || nu^{*k} - uniform ||_1 <= delta.

    Returns 0 when nu itself is already delta-close to uniform (no burn-in is
    needed; the non-uniform theorem applies directly).  Raises
    :class:`MixingError` when no such k exists below ``max_power``, which
    happens exactly when the support generates a proper subgroup: the walk
    then never leaves that subgroup's cosets.
    """
    if l1_to_uniform(nu) <= delta:
        return 0
    cur = np.asarray(nu, dtype=float)
    for k in range(1, max_power + 1):
        if l1_to_uniform(cur) <= delta:
            return k
        cur = convolve_dist(group, cur, nu)
    raise MixingError(
        f"distribution failed to mix to l1 <= {delta} within {max_power} convolutions; "
        "its support generates a proper subgroup")
