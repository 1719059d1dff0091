"""Finite gate groups, their adjoint representations, and irreducible sectors.

Groups are stored projectively (global phases quotiented out): the adjoint
action rho -> U rho U^dag kills phases, so this loses nothing downstream while
keeping the tables small.  Character data is computed numerically from the
adjoint representation rather than transcribed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .basis import PAULI_LETTERS, pauli_matrix, pauli_strings
from .superop import SuperOp, from_unitary

# letterwise single-qubit Pauli products, phases dropped
_LETTER_PRODUCT = {
    ("I", "I"): "I", ("I", "X"): "X", ("I", "Y"): "Y", ("I", "Z"): "Z",
    ("X", "I"): "X", ("X", "X"): "I", ("X", "Y"): "Z", ("X", "Z"): "Y",
    ("Y", "I"): "Y", ("Y", "X"): "Z", ("Y", "Y"): "I", ("Y", "Z"): "X",
    ("Z", "I"): "Z", ("Z", "X"): "Y", ("Z", "Y"): "X", ("Z", "Z"): "I",
}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE_S = np.array([[1, 0], [0, 1j]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


class GroupError(ValueError):
    pass


@dataclass
class FiniteGroup:
    """Group given by index tables: cayley[i, j] = index of g_i * g_j."""

    order: int
    cayley: np.ndarray
    inverse: np.ndarray
    identity: int
    element_labels: list[str] = field(default_factory=list)

    def mult(self, i: int, j: int) -> int:
        return int(self.cayley[i, j])

    def inv(self, i: int) -> int:
        return int(self.inverse[i])

    def check(self, rng=None, triples: int = 200) -> None:
        """Spot-check associativity and verify inverse/permutation structure."""
        n = self.order
        for i in range(n):
            if self.cayley[i, self.inverse[i]] != self.identity:
                raise GroupError("inverse table inconsistent with Cayley table")
            if len(set(self.cayley[i])) != n or len(set(self.cayley[:, i])) != n:
                raise GroupError("Cayley rows/columns are not permutations")
        rng = rng or np.random.default_rng(0)
        for _ in range(triples):
            a, b, c = rng.integers(0, n, size=3)
            if self.mult(self.mult(a, b), c) != self.mult(a, self.mult(b, c)):
                raise GroupError("associativity violated")

    def to_json(self, unitaries: np.ndarray | None = None) -> str:
        obj = {
            "order": self.order,
            "cayley": self.cayley.tolist(),
            "inverse": self.inverse.tolist(),
            "identity": self.identity,
            "labels": self.element_labels,
        }
        if unitaries is not None:
            obj["unitaries"] = [[[float(z.real), float(z.imag)] for z in u.ravel()]
                                for u in unitaries]
            obj["udim"] = int(unitaries.shape[1])
        return json.dumps(obj)

    @staticmethod
    def from_json(text: str) -> tuple["FiniteGroup", np.ndarray | None]:
        obj = json.loads(text)
        g = FiniteGroup(obj["order"], np.array(obj["cayley"], dtype=np.int64),
                        np.array(obj["inverse"], dtype=np.int64), obj["identity"],
                        obj.get("labels", []))
        unis = None
        if "unitaries" in obj:
            d = obj["udim"]
            unis = np.array([[complex(re, im) for re, im in u] for u in obj["unitaries"]])
            unis = unis.reshape(g.order, d, d)
        return g, unis


@dataclass
class Representation:
    """Per-element matrices rho(g); flagged when it is the adjoint superoperator rep."""

    group: FiniteGroup
    matrices: np.ndarray  # (order, dr, dr)
    is_adjoint: bool = False
    unitaries: np.ndarray | None = None  # underlying U_g when is_adjoint

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def homomorphism_residual(self, rng=None, pairs: int = 100) -> float:
        rng = rng or np.random.default_rng(0)
        worst = 0.0
        for _ in range(pairs):
            i, j = rng.integers(0, self.group.order, size=2)
            k = self.group.mult(i, j)
            worst = max(worst, float(np.max(np.abs(
                self.matrices[i] @ self.matrices[j] - self.matrices[k]))))
        return worst

    def unitarity_residual(self) -> float:
        eye = np.eye(self.dim)
        return max(float(np.max(np.abs(m.conj().T @ m - eye))) for m in self.matrices)


@dataclass
class Irrep:
    """One irreducible sector of a reference representation."""

    label: str
    dim: int                  # d_lambda
    multiplicity: int         # n_lambda in the target representation
    characters: np.ndarray    # chi_lambda(g) for every group element
    projector: np.ndarray     # isotypic projector on the rep space
    block_basis: np.ndarray   # (dim_rep, d_lambda) orthonormal basis of one copy
    sigma: np.ndarray         # (order, d_lambda, d_lambda) unitary irrep matrices


@dataclass
class IrrepCatalog:
    group: FiniteGroup
    rep: Representation
    irreps: list[Irrep]

    def __iter__(self):
        return iter(self.irreps)

    def __len__(self):
        return len(self.irreps)

    def get(self, label: str) -> Irrep:
        for ir in self.irreps:
            if ir.label == label:
                return ir
        raise KeyError(f"no irrep labeled {label!r}; have "
                       f"{[ir.label for ir in self.irreps]}")

    @property
    def is_complete(self) -> bool:
        """True when the catalog holds every irrep of the group (Sum d^2 = |G|)."""
        return sum(ir.dim**2 for ir in self.irreps) == self.group.order

    def maschke_check(self) -> int:
        return sum(ir.dim * ir.multiplicity for ir in self.irreps)


# ---------------------------------------------------------------------------
# group builders
# ---------------------------------------------------------------------------

def _pauli_string_product(a: str, b: str) -> str:
    return "".join(_LETTER_PRODUCT[(x, y)] for x, y in zip(a, b))


def build_pauli_group(num_qubits: int):
    """Projective q-qubit Pauli group (order 4**q) with its adjoint representation.

    The adjoint action is diagonal in the Pauli basis, so the 4**q characters
    are read off exactly and each irrep is one-dimensional.
    """
    if not 1 <= num_qubits <= 3:
        raise GroupError("Pauli group builder supports 1 <= q <= 3")
    labels = pauli_strings(num_qubits)
    index = {s: i for i, s in enumerate(labels)}
    n = len(labels)
    cayley = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            cayley[i, j] = index[_pauli_string_product(a, b)]
    inverse = np.array([int(np.where(cayley[i] == 0)[0][0]) for i in range(n)])
    group = FiniteGroup(n, cayley, inverse, identity=0, element_labels=labels)
    unitaries = np.array([pauli_matrix(s) for s in labels])
    mats = np.array([from_unitary(u).mat for u in unitaries])
    rep = Representation(group, mats, is_adjoint=True, unitaries=unitaries)
    return group, rep


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    # divide by the phase of the first near-maximal entry; entry magnitudes in
    # these groups sit in well-separated classes, so the pick is float-stable
    flat = u.ravel()
    mags = np.abs(flat)
    k = int(np.argmax(mags > mags.max() * (1 - 1e-6)))
    return u / (flat[k] / mags[k])


def _unitary_key(u: np.ndarray, decimals: int = 8) -> bytes:
    c = _canonical_phase(u)
    return (np.round(c, decimals) + 0.0).tobytes()  # + 0.0 folds -0.0 into 0.0


def _close_under_products(generators: list[np.ndarray], limit: int) -> list[np.ndarray]:
    elements = [_canonical_phase(np.eye(generators[0].shape[0], dtype=complex))]
    seen = {_unitary_key(elements[0])}
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for gen in generators:
                cand = _canonical_phase(gen @ elements[i])
                key = _unitary_key(cand)
                if key not in seen:
                    seen.add(key)
                    elements.append(cand)
                    nxt.append(len(elements) - 1)
                    if len(elements) > limit:
                        raise GroupError("group closure exceeded the expected order")
        frontier = nxt
    return elements


def _tables_from_unitaries(elements: list[np.ndarray]):
    n = len(elements)
    index = {_unitary_key(u): i for i, u in enumerate(elements)}
    cayley = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            key = _unitary_key(_canonical_phase(elements[i] @ elements[j]))
            cayley[i, j] = index[key]
    identity = index[_unitary_key(np.eye(elements[0].shape[0], dtype=complex))]
    inverse = np.array([int(np.where(cayley[i] == identity)[0][0]) for i in range(n)])
    return cayley, inverse, identity


def build_clifford_1q():
    """Projective single-qubit Clifford group (24 elements) with adjoint rep."""
    elements = _close_under_products([HADAMARD, PHASE_S], limit=24)
    if len(elements) != 24:
        raise GroupError(f"expected 24 projective Cliffords, got {len(elements)}")
    cayley, inverse, identity = _tables_from_unitaries(elements)
    group = FiniteGroup(24, cayley, inverse, identity,
                        element_labels=[f"c{i}" for i in range(24)])
    unitaries = np.array(elements)
    mats = np.array([from_unitary(u).mat for u in unitaries])
    rep = Representation(group, mats, is_adjoint=True, unitaries=unitaries)
    return group, rep


def clifford_unitaries(num_qubits: int, allow_large: bool = False) -> np.ndarray:
    """Element list of the projective Clifford group as unitaries.

    q = 2 (11520 elements) is feature-gated behind ``allow_large`` since the
    closure takes a few seconds and downstream tables would be substantial.
    """
    if num_qubits == 1:
        _, rep = build_clifford_1q()
        return rep.unitaries
    if num_qubits == 2:
        if not allow_large:
            raise GroupError("pass allow_large=True to enumerate the 11520-element "
                             "two-qubit Clifford group")
        h1 = np.kron(HADAMARD, np.eye(2))
        h2 = np.kron(np.eye(2), HADAMARD)
        s1 = np.kron(PHASE_S, np.eye(2))
        s2 = np.kron(np.eye(2), PHASE_S)
        elements = _close_under_products([h1, h2, s1, s2, CZ], limit=11520)
        if len(elements) != 11520:
            raise GroupError(f"expected 11520 projective Cliffords, got {len(elements)}")
        return np.array(elements)
    raise GroupError("Clifford enumeration supports q <= 2 only")


# ---------------------------------------------------------------------------
# irreducible content of a representation
# ---------------------------------------------------------------------------

def irrep_projectors(rep: Representation, characters: list[np.ndarray],
                     dims: list[int]) -> list[np.ndarray]:
    """Character projectors P_lambda = (d_lambda/|G|) Sum_g conj(chi_lambda(g)) rho(g)."""
    n = rep.group.order
    out = []
    for chi, d in zip(characters, dims):
        p = np.einsum("g,gij->ij", np.conj(chi), rep.matrices) * (d / n)
        out.append(p)
    return out


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups = [[order[0]]]
    for idx in order[1:]:
        if abs(values[idx] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return [np.array(g) for g in groups]


def catalog_from_adjoint(group: FiniteGroup, rep: Representation,
                         seed: int = 7, tol: float = 1e-8) -> IrrepCatalog:
    """Decompose a reference representation into irreducible sectors numerically.

    A random element of the commutant (a twirled symmetric matrix) is
    eigendecomposed; eigenspace clusters give invariant subspaces, which are
    merged into isotypic components by equality of characters.  Works for the
    multiplicity-free and multiplicity-bearing cases alike; retries with fresh
    randomness if an accidental eigenvalue collision produces a non-invariant
    cluster.
    """
    n = group.order
    dim = rep.dim
    mats = rep.matrices
    rng = np.random.default_rng(seed)

    for _attempt in range(8):
        h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        h = h + h.conj().T
        tw = np.einsum("gij,jk,glk->il", mats, h, mats.conj()) / n
        tw = (tw + tw.conj().T) / 2
        evals, evecs = np.linalg.eigh(tw)
        clusters = _cluster(evals, tol=1e-6 * max(1.0, float(np.max(np.abs(evals)))))
        bases = [evecs[:, c] for c in clusters]
        ok = all(_is_invariant(mats, b, tol) for b in bases)
        if ok:
            break
    else:
        raise GroupError("failed to find a clean commutant eigendecomposition")

    entries = []  # (character, [bases of copies])
    for b in bases:
        chi = np.einsum("ki,gkl,li->g", b.conj(), mats, b)
        for ent in entries:
            if np.max(np.abs(ent[0] - chi)) < 1e-6:
                ent[1].append(b)
                break
        else:
            entries.append([chi, [b]])

    irreps = []
    for chi, copies in entries:
        d_lam = copies[0].shape[1]
        norm = np.vdot(chi, chi) / n
        if abs(norm - 1) > 1e-6:
            raise GroupError("cluster character is not irreducible; wrong character table")
        proj = sum(b @ b.conj().T for b in copies)
        basis = copies[0]
        sigma = np.einsum("ki,gkl,lj->gij", basis.conj(), mats, basis)
        label = _irrep_label(chi, basis, d_lam, group, len(irreps))
        irreps.append(Irrep(label, d_lam, len(copies), chi, proj, basis, sigma))

    total = sum(ir.dim * ir.multiplicity for ir in irreps)
    if total != dim:
        raise GroupError(f"Maschke sum {total} does not match rep dimension {dim}")
    return IrrepCatalog(group, rep, sorted(irreps, key=lambda ir: (ir.dim, ir.label)))


def _is_invariant(mats: np.ndarray, basis: np.ndarray, tol: float) -> bool:
    p = basis @ basis.conj().T
    comm = np.einsum("gij,jk->gik", mats, p) - np.einsum("ij,gjk->gik", p, mats)
    return float(np.max(np.abs(comm))) < max(tol, 1e-7)


def _irrep_label(chi: np.ndarray, basis: np.ndarray, d_lam: int,
                 group: FiniteGroup, idx: int) -> str:
    if d_lam == 1 and np.max(np.abs(chi - 1)) < 1e-8:
        return "trivial"
    # one-dimensional sector aligned with a single Pauli-basis direction
    is_pauli_group = bool(group.element_labels) and all(
        c in PAULI_LETTERS for c in group.element_labels[0])
    if d_lam == 1 and is_pauli_group:
        weights = np.abs(basis[:, 0]) ** 2
        k = int(np.argmax(weights))
        labels = pauli_strings(len(group.element_labels[0]))
        if weights[k] > 1 - 1e-8 and k < len(labels):
            return f"pauli:{labels[k]}"
    if d_lam == 1:
        return f"irrep1_{idx}"
    if d_lam == basis.shape[0] - 1:
        return "adjoint"
    return f"irrep{d_lam}_{idx}"


def build_catalog(group: FiniteGroup, rep: Representation, seed: int = 7) -> IrrepCatalog:
    """Catalog of the irreducible content of ``rep``, with sanity checks applied."""
    cat = catalog_from_adjoint(group, rep, seed=seed)
    # cross-check the eigenspace projectors against the character formula
    chars = [ir.characters for ir in cat]
    dims = [ir.dim for ir in cat]
    for ir, p_char in zip(cat, irrep_projectors(rep, chars, dims)):
        if np.max(np.abs(ir.projector - p_char)) > 1e-7:
            raise GroupError(f"projector mismatch for irrep {ir.label}")
        rank = round(float(np.real(np.trace(p_char))))
        if rank % ir.dim != 0:
            raise GroupError(f"non-integer multiplicity for irrep {ir.label}")
        if rank // ir.dim != ir.multiplicity:
            raise GroupError(f"multiplicity mismatch for irrep {ir.label}")
    return cat
