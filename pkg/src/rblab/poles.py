"""Pole extraction from decay signals: Hankel subspace methods and conditioning.

A signal y_0..y_M that is a linear combination of exponentials z_i^m has a
Hankel matrix of rank n with a Vandermonde factorization.  ESPRIT reads the
poles off the shift-invariance of the dominant singular subspace; MUSIC scans
an inverse noise-space correlation function.  The conditioning of the
associated Vandermonde matrices, including its large-M asymptote, controls the
noise amplification of both methods.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MUSIC_CAP = 1e12
RANK_TOL = 1e-13


class RankDeficiencyError(RuntimeError):
    """Signal carries fewer modes than requested."""

    def __init__(self, requested: int, achieved: int):
        super().__init__(f"requested {requested} poles but the signal supports "
                         f"only {achieved}")
        self.requested = requested
        self.achieved = achieved


@dataclass
class PoleSet:
    """Extracted poles, sorted dominant-first, with optional coefficients."""

    poles: np.ndarray
    coefficients: np.ndarray | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        order = sorted(range(len(self.poles)),
                       key=lambda k: (-abs(self.poles[k]), -self.poles[k].real,
                                      -self.poles[k].imag))
        self.poles = np.asarray(self.poles)[order]
        if self.coefficients is not None:
            self.coefficients = np.asarray(self.coefficients)[order]
        if len(self.poles) and np.max(np.abs(self.poles)) > 1.1:
            self.notes.append("pole magnitude exceeds 1.1; data is not a decay")


def hankel(y: np.ndarray, window: int) -> np.ndarray:
    """(window+1) x (M-window+1) Hankel matrix H[j, k] = y[j + k]."""
    y = np.asarray(y)
    m_max = len(y) - 1
    if not 1 <= window < m_max:
        raise ValueError(f"need 1 <= window < {m_max}")
    return np.array([y[j:j + m_max - window + 1] for j in range(window + 1)])


def default_window(n_points: int) -> int:
    """Square-ish Hankel convention: window = floor(M / 2)."""
    return (n_points - 1) // 2


def exponential_signal(poles, coefficients, m_max: int) -> np.ndarray:
    """y_m = Sum_i a_i z_i^m for m = 0..m_max."""
    z = np.asarray(poles, dtype=complex)
    a = np.asarray(coefficients, dtype=complex)
    vals = np.power.outer(z, np.arange(m_max + 1)).T @ a
    if np.max(np.abs(vals.imag)) < 1e-12:
        return vals.real
    return vals


def esprit(y: np.ndarray, window: int | None = None, n_poles: int = 1,
           dps: int | None = None) -> PoleSet:
    """Shift-invariance pole estimation on the dominant singular subspace.

    The SVD of the Hankel matrix gives an orthonormal basis U of the signal
    column space; dropping its last/first row yields U0, U1 with
    U1 = U0 Phi in the noiseless case, and the eigenvalues of Phi are the
    poles.  Degenerate (polynomially modulated) signals return the pole
    repeated according to its multiplicity; noise splits such clusters into
    near-regular polygons (see :func:`group_degenerate`).

    Tightly clustered pole sets (the F1 family beyond four poles) carry
    singular values below double precision even for exact data; pass ``dps``
    to run the identical algorithm in mpmath arithmetic at that many digits
    (the input may then be a list of mpmath numbers from
    :func:`exponential_signal_mp`).
    """
    if dps is not None:
        return _esprit_mp(y, window, n_poles, dps)
    y = np.asarray(y)
    if window is None:
        window = default_window(len(y))
    h = hankel(y, window)
    if n_poles > min(h.shape[0] - 1, h.shape[1]):
        raise ValueError("n_poles exceeds what the Hankel window supports")
    u, s, _ = np.linalg.svd(h, full_matrices=False)
    achieved = int(np.sum(s > RANK_TOL * max(s[0], 1e-300)))
    if achieved < n_poles:
        raise RankDeficiencyError(n_poles, achieved)
    u_sig = u[:, :n_poles]
    phi = np.linalg.pinv(u_sig[:-1]) @ u_sig[1:]
    poles = np.linalg.eigvals(phi)
    coeffs, *_ = np.linalg.lstsq(
        np.power.outer(poles, np.arange(len(y))).T, y.astype(complex), rcond=None)
    return PoleSet(poles, coefficients=coeffs)


def exponential_signal_mp(poles, coefficients, m_max: int, dps: int = 40) -> list:
    """Exact multi-exponential signal in mpmath arithmetic (for hard pole sets)."""
    import mpmath as mp

    with mp.workdps(dps):
        zs = [mp.mpmathify(z) for z in poles]
        cs = [mp.mpmathify(c) for c in coefficients]
        return [sum(c * z**m for c, z in zip(cs, zs)) for m in range(m_max + 1)]


def _esprit_mp(y, window: int | None, n_poles: int, dps: int) -> PoleSet:
    import mpmath as mp

    with mp.workdps(dps):
        vals = [mp.mpmathify(v) for v in y]
        m_max = len(vals) - 1
        if window is None:
            window = m_max // 2
        rows, cols = window + 1, m_max - window + 1
        h = mp.matrix(rows, cols)
        for i in range(rows):
            for j in range(cols):
                h[i, j] = vals[i + j]
        u, s, _ = mp.svd(h)
        if s[n_poles - 1] < mp.mpf(10) ** (-(dps - 5)) * s[0]:
            raise RankDeficiencyError(n_poles, int(sum(
                1 for k in range(min(rows, cols))
                if s[k] > mp.mpf(10) ** (-(dps - 5)) * s[0])))
        u0 = mp.matrix(rows - 1, n_poles)
        u1 = mp.matrix(rows - 1, n_poles)
        for i in range(rows - 1):
            for j in range(n_poles):
                u0[i, j] = u[i, j]
                u1[i, j] = u[i + 1, j]
        phi = mp.matrix(n_poles, n_poles)
        for j in range(n_poles):
            col, _ = mp.qr_solve(u0, u1[:, j])
            for i in range(n_poles):
                phi[i, j] = col[i]
        eigvals, _ = mp.eig(phi)
        poles = np.array([complex(v) for v in eigvals])
    return PoleSet(poles)


def music_spectrum(y: np.ndarray, window: int, n_poles: int,
                   grid: np.ndarray) -> np.ndarray:
    """Inverse noise-space correlation R^-1(z) = ||w(z)|| / ||P_noise w(z)||.

    w(z) is the Vandermonde vector (1, z, ..., z^window) matching the Hankel
    column space; exact poles give infinite peaks, capped at 1e12.
    """
    grid = np.asarray(grid, dtype=complex)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    h = hankel(np.asarray(y), window)
    u, _, _ = np.linalg.svd(h, full_matrices=False)
    u_sig = u[:, :n_poles]
    powers = np.power.outer(grid, np.arange(window + 1))  # rows w(z)^T
    norms = np.linalg.norm(powers, axis=1)
    proj = powers - (powers @ u_sig.conj()) @ u_sig.T  # P_noise w(z), transposed
    noise_norms = np.linalg.norm(proj, axis=1)
    with np.errstate(divide="ignore"):
        vals = norms / noise_norms
    return np.minimum(np.nan_to_num(vals, posinf=MUSIC_CAP), MUSIC_CAP)


def noise_correlation(y: np.ndarray, window: int, n_poles: int,
                      grid: np.ndarray) -> np.ndarray:
    """R(z) = ||P_noise w(z)|| / ||w(z)||, the quantity the perturbation bound controls."""
    inv = music_spectrum(y, window, n_poles, grid)
    return 1.0 / inv


def group_degenerate(poles: np.ndarray, radius: float):
    """Greedy clustering of poles within a radius: heuristic regrouping of
    noise-split degenerate eigenvalues.  Returns [(center, multiplicity), ...]."""
    remaining = list(np.asarray(poles, dtype=complex))
    groups = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        rest = []
        for z in remaining:
            if abs(z - seed) <= radius:
                members.append(z)
            else:
                rest.append(z)
        remaining = rest
        groups.append((np.mean(members), len(members)))
    return groups


# ---------------------------------------------------------------------------
# Vandermonde conditioning
# ---------------------------------------------------------------------------

def vandermonde(z, m_cols: int) -> np.ndarray:
    """n x M matrix with rows (1, z_i, z_i^2, ..., z_i^{M-1})."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.power.outer(z, np.arange(m_cols))


def cond2(z, m_cols: int) -> float:
    """Two-norm condition number sigma_max / sigma_min of the Vandermonde matrix."""
    s = np.linalg.svd(vandermonde(z, m_cols), compute_uv=False)
    return float(s[0] / s[-1])


def asymptotic_cond(z) -> float:
    """Large-M limit of cond2: sqrt(kappa_2(C)) with C_ij = 1/(1 - z_i conj(z_j))."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.max(np.abs(z)) >= 1:
        raise ValueError("asymptotic conditioning requires |z_i| < 1")
    c = 1.0 / (1.0 - np.outer(z, z.conj()))
    s = np.linalg.svd(c, compute_uv=False)
    if s[-1] <= 0 or not np.isfinite(s[0] / s[-1]):
        raise np.linalg.LinAlgError("correlation matrix C(z) is singular")
    return float(np.sqrt(s[0] / s[-1]))


def hausdorff(z, zp) -> float:
    """Symmetric Hausdorff distance between two pole sets."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zp = np.atleast_1d(np.asarray(zp, dtype=complex))
    if z.size == 0 or zp.size == 0:
        raise ValueError("pole sets must be nonempty")
    dmat = np.abs(z[:, None] - zp[None, :])
    return float(max(dmat.min(axis=1).max(), dmat.min(axis=0).max()))


# ---------------------------------------------------------------------------
# pole families from the conditioning study
# ---------------------------------------------------------------------------

def pole_family(name: str, n: int, alpha: float | None = None) -> PoleSet:
    """Named families from the conditioning study.

    'lin' is the linear grid z_j = alpha + j (1 - alpha) / n.  'F<a>' starts
    at 0.9 and packs the remaining infidelity geometrically,
    z_j = 1 - 10^{-(1 + j/a)}, e.g. F1 = (0.9, 0.99, 0.999, ...) and
    F2 = (0.9, 0.9684, 0.99, 0.9968, ...).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if name == "lin":
        if alpha is None:
            raise ValueError("the linear family needs alpha")
        step = (1.0 - alpha) / n
        z = alpha + step * np.arange(n)
        return PoleSet(z.astype(complex))
    if name.startswith("F"):
        a = float(name[1:]) if len(name) > 1 else alpha
        if a is None or a <= 0:
            raise ValueError("family F needs a positive parameter, e.g. 'F1'")
        z = 1.0 - np.power(10.0, -(1.0 + np.arange(n) / a))
        return PoleSet(z.astype(complex))
    raise ValueError(f"unknown pole family {name!r} (use 'lin' or 'F<a>')")


# ---------------------------------------------------------------------------
# sampling complexity
# ---------------------------------------------------------------------------

def bernstein_samples(m_len: int, var_bound: float, eps: float, delta: float) -> int:
    """Matrix-Bernstein sample count N >= 4 max{M var/eps^2, 2/(3 eps)} log(M/delta).

    Guarantees spectral-norm Hankel deviation at most eps with probability
    1 - delta for mean estimators of M points with per-point variance bound.
    """
    if not (0 < eps and 0 < delta < 1):
        raise ValueError("eps and delta must be positive (delta < 1)")
    n = 4.0 * max(m_len * var_bound / eps**2, 2.0 / (3.0 * eps)) * np.log(m_len / delta)
    return int(np.ceil(n))


def sampling_complexity(z, m_len: int, var_bound: float, eps_tilde: float,
                        delta: float) -> int:
    """Total samples for an eps_tilde-accurate noise-correlation function.

    Max of the two displayed requirements, with kappa_2 evaluated on the
    half-length Vandermonde matrix and z_hat the smallest pole magnitude.
    """
    if m_len % 2:
        raise ValueError("M must be even (square-Hankel convention)")
    kappa = cond2(z, m_len // 2)
    z_hat = float(np.min(np.abs(np.atleast_1d(z))))
    log_term = np.log(m_len / delta)
    n1 = 8.0 * kappa**4 / z_hat**2 * m_len * var_bound / eps_tilde**2 * log_term
    n2 = 16.0 / 3.0 * kappa**2 / z_hat / eps_tilde * log_term
    return int(np.ceil(max(n1, n2)))


def empirical_hankel_deviation(true_y: np.ndarray, n_samples: int, eps: float,
                               trials: int, seed: int = 0) -> float:
    """Fraction of trials with ||Hankel(p_hat) - Hankel(p)||_2 > eps.

    Each trial draws binomial(n_samples, y_m) counts per point; the deviation
    uses the same square-ish Hankel window on truth and estimate.
    """
    y = np.asarray(true_y, dtype=float)
    if np.any(y < 0) or np.any(y > 1):
        raise ValueError("binomial sampling needs values in [0, 1]")
    window = default_window(len(y))
    h_true = hankel(y, window)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    failures = 0
    for _ in range(trials):
        p_hat = rng.binomial(n_samples, y) / n_samples
        dev = np.linalg.norm(hankel(p_hat, window) - h_true, 2)
        failures += dev > eps
    return failures / trials
