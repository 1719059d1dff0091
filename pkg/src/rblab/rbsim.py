"""Randomized-benchmarking data collection: Monte Carlo and exact engines.

The Monte Carlo path simulates the experiment literally: sample a sequence,
propagate the state vector through the noisy gates, append the compiled
ending-times-inverse gate, draw multinomial shots.  The exact engine computes
the same expectations with the randomness summed out, by iterating the
convolution  phi * (nu phi)^{*m}  of the effective per-step map; evaluated at
the ending gate this is the matrix of the whole averaged experiment.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .fourier import ImplementationMap, convolve, delta_identity_map, weighted_map
from .groups import FiniteGroup, Representation
from .superop import SuperOp, effect_covector, identity_superop, state_vector

LOSS_OUTCOME = -1
NEGATIVE_PROBABILITY_TOL = 1e-9


class NegativeProbabilityError(RuntimeError):
    """A sequence produced probability < -1e-9; the inputs are not CP."""


@dataclass
class RBConfig:
    """Input parameters of one RB experiment (the full knob list of the protocol)."""

    group: FiniteGroup
    rep: Representation
    phi: ImplementationMap
    lengths: list[int]
    state: np.ndarray                     # density matrix rho_0
    povm: list[np.ndarray]                # POVM effects
    nu: np.ndarray | None = None          # shared per-step distribution
    schedule: object | None = None        # per-step distributions (interleaved)
    ending_gate: int | None = None
    randomize_ending: bool = False
    sp_noise: SuperOp | None = None
    m_noise: SuperOp | None = None
    shots: int = 100
    sequences: int = 50
    seed: int = 0
    povm_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        d = self.state.shape[0]
        if self.nu is None and self.schedule is None:
            self.nu = dist.uniform(self.group)
        if self.nu is not None:
            dist.validate_distribution(self.nu)
        if not self.lengths:
            raise ValueError("need at least one sequence length")
        if self.ending_gate is None:
            self.ending_gate = self.group.identity
        total = sum(self.povm)
        if np.max(np.abs(total - np.eye(d))) > 1e-10:
            raise ValueError("POVM effects do not sum to the identity")
        if self.sp_noise is None:
            self.sp_noise = identity_superop(d)
        if self.m_noise is None:
            self.m_noise = identity_superop(d)
        if not self.povm_labels:
            self.povm_labels = [str(i) for i in range(len(self.povm))]

    @property
    def dim(self) -> int:
        return self.state.shape[0]

    @property
    def period(self) -> int:
        """Gates per effective step: 2 for an interleaved schedule, else 1.

        Sequence lengths are always counted in effective steps, so an
        interleaved experiment at length m applies 2 m gates.
        """
        return 2 if self.schedule is not None else 1

    def state_vec(self) -> np.ndarray:
        return self.sp_noise.mat @ state_vector(self.state)

    def effect_vecs(self) -> np.ndarray:
        return np.array([self.m_noise.mat @ effect_covector(pi) for pi in self.povm])

    def step_distribution(self, step: int) -> np.ndarray:
        if self.schedule is not None:
            return self.schedule.dist(step)
        return self.nu

    def content_hash(self) -> str:
        blob = {
            "order": self.group.order,
            "phi": np.round(self.phi.mats, 12).tobytes().hex()[:64],
            "lengths": list(map(int, self.lengths)),
            "ending_gate": int(self.ending_gate),
            "randomize_ending": bool(self.randomize_ending),
            "shots": int(self.shots),
            "sequences": int(self.sequences),
            "seed": int(self.seed),
            "state": np.round(self.state, 12).tobytes().hex(),
            "nu": None if self.nu is None else np.round(self.nu, 12).tolist(),
        }
        return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RBDataset:
    """Estimated outcome frequencies, one row per (outcome, length)."""

    rows: list[dict]
    config_hash: str
    seed: int

    def p_hat(self, outcome, m: int) -> float:
        for r in self.rows:
            if r["povm_index"] == outcome and r["m"] == m:
                return r["p_hat"]
        raise KeyError((outcome, m))

    def to_csv(self, path) -> None:
        from .runio import write_csv

        write_csv(path, ["povm_index", "m", "g_end", "p_hat", "shots", "sequences"],
                  [[r["povm_index"], r["m"], r["g_end"], r["p_hat"], r["shots"],
                    r["sequences"]] for r in self.rows],
                  sidecar={"config_hash": self.config_hash, "seed": self.seed})


def _sequence_rng(seed: int, m_index: int, seq_index: int) -> np.random.Generator:
    # counter-based stream split: identical draws no matter how work is scheduled
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(m_index, seq_index))
    return np.random.Generator(np.random.Philox(ss))


def _sample_indices(rng: np.random.Generator, nu: np.ndarray, size: int) -> np.ndarray:
    return rng.choice(len(nu), size=size, p=nu)


def run_rb(config: RBConfig) -> RBDataset:
    """Execute the data-collection phase and return averaged outcome estimators.

    Deterministic given the seed: per-(length, sequence) RNG streams are derived
    by counter-based splitting, so any parallel schedule reproduces the serial
    result bit for bit.
    """
    g = config.group
    eff = config.effect_vecs()
    n_out = len(config.povm)
    rows = []
    warned = False
    for mi, m in enumerate(config.lengths):
        counts = np.zeros(n_out + 1)  # final slot collects loss
        for s in range(config.sequences):
            rng = _sequence_rng(config.seed, mi, s)
            n_gates = m * config.period
            if config.schedule is not None:
                gates = [int(_sample_indices(rng, config.step_distribution(i + 1), 1)[0])
                         for i in range(n_gates)]
            else:
                gates = list(_sample_indices(rng, config.nu, n_gates)) if n_gates else []
            g_end = (int(rng.integers(g.order)) if config.randomize_ending
                     else config.ending_gate)
            vec = config.state_vec()
            total = g.identity
            for gate in gates:
                vec = config.phi.mats[gate] @ vec
                total = g.mult(gate, total)
            g_fin = g.mult(g_end, g.inv(total))
            vec = config.phi.mats[g_fin] @ vec
            probs = np.real(eff @ vec)
            if np.min(probs) < -NEGATIVE_PROBABILITY_TOL:
                raise NegativeProbabilityError(
                    f"outcome probability {np.min(probs):.3e} at m={m}")
            if np.min(probs) < 0 and not warned:
                warnings.warn("clipping tiny negative probabilities to zero")
                warned = True
            probs = np.clip(probs, 0.0, 1.0)
            loss = max(0.0, 1.0 - float(probs.sum()))
            pvec = np.append(probs, loss)
            pvec = pvec / pvec.sum()
            counts += rng.multinomial(config.shots, pvec)
        total_shots = config.shots * config.sequences
        for i in range(n_out):
            rows.append({"povm_index": config.povm_labels[i], "m": m,
                         "g_end": config.ending_gate, "p_hat": counts[i] / total_shots,
                         "shots": config.shots, "sequences": config.sequences})
        rows.append({"povm_index": "loss", "m": m, "g_end": config.ending_gate,
                     "p_hat": counts[n_out] / total_shots, "shots": config.shots,
                     "sequences": config.sequences})
    return RBDataset(rows, config.content_hash(), config.seed)


# ---------------------------------------------------------------------------
# exact engine
# ---------------------------------------------------------------------------

def effective_step_map(config: RBConfig) -> ImplementationMap:
    """The single map whose m-fold convolution reproduces one protocol layer.

    Shared distribution nu gives (nu phi); an interleaved schedule gives the
    pair map (nu_C phi) * phi, in which case one "step" is one (random, C)
    pair.
    """
    if config.schedule is None:
        return weighted_map(config.phi, config.nu)
    sched = config.schedule
    peaked_map = weighted_map(config.phi, sched.dist(2))
    uniform_map = weighted_map(config.phi, sched.dist(1))
    return convolve(peaked_map, uniform_map)


def sequence_average_maps(config: RBConfig, max_m: int,
                          include_final: bool = True):
    """Yield (m, Phi_m) for m = 0..max_m with Phi_m(g) = (phi * step^{*m})(g).

    With include_final=False the leading inversion-step factor phi is dropped,
    yielding step^{*m} itself (the inversion-free variant used by filtering).
    """
    step = effective_step_map(config)
    acc = delta_identity_map(config.group, config.dim)
    for m in range(max_m + 1):
        if m > 0:
            acc = convolve(step, acc)
        final = convolve(config.phi, acc) if include_final else acc
        yield m, final


def exact_probability_table(config: RBConfig, lengths: list[int] | None = None
                            ) -> dict[int, np.ndarray]:
    """p(i, m, g_end) for all outcomes and ending gates, exactly.

    Returns {m: array of shape (n_outcomes, |G|)} including expectation over
    gate draws and shots.  With randomize_ending the g_end axis is averaged.
    """
    lengths = list(config.lengths if lengths is None else lengths)
    state = config.state_vec()
    eff = config.effect_vecs()
    want = set(lengths)
    out = {}
    for m, phi_m in sequence_average_maps(config, max(lengths)):
        if m in want:
            table = np.real(np.einsum("ik,gkl,l->ig", eff, phi_m.mats, state))
            out[m] = table
    return out


def exact_probability(config: RBConfig, outcome: int, m: int,
                      g_end: int | None = None) -> float:
    """Exact expectation of p_hat(outcome, m) for one ending gate."""
    table = exact_probability_table(config, [m])[m]
    if config.randomize_ending:
        return float(np.mean(table[outcome]))
    g_end = config.ending_gate if g_end is None else g_end
    return float(table[outcome, g_end])
