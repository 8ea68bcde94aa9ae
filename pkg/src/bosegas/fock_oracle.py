"""Brute-force validation layer on a truncated multi-mode Fock space.

Everything is a dense matrix in the occupation-number basis with a hard
cutoff per mode, so field, resolvent, Weyl and Gibbs operators can be
checked by plain linear algebra.  Truncation artifacts concentrate at the
occupation cutoff; identity residuals are therefore measured on the
low-occupation block (total occupation at most n_max - 2).
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.linalg import expm

FOCK_DIMENSION_CAP = 4096
LOW_BLOCK_MARGIN = 2

ModeVector = np.ndarray  # complex amplitudes <mode_j, f>, length = number of modes


@dataclass(frozen=True)
class TruncatedFock:
    """M bosonic modes with per-mode occupation cutoff n_max."""

    n_modes: int
    n_max: int
    mode_energies: tuple

    def __post_init__(self):
        if self.n_modes < 1 or self.n_max < 1:
            raise ValueError("need at least one mode and occupation 1")
        if len(self.mode_energies) != self.n_modes:
            raise ValueError("one energy per mode required")
        if any(e <= 0 for e in self.mode_energies):
            raise ValueError("mode energies must be strictly positive")
        if self.dimension > FOCK_DIMENSION_CAP:
            raise ValueError(
                f"dimension {self.dimension} exceeds cap {FOCK_DIMENSION_CAP}")

    @property
    def dimension(self) -> int:
        return (self.n_max + 1) ** self.n_modes


def _check_amplitudes(space: TruncatedFock, c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.shape != (space.n_modes,):
        raise ValueError(f"expected {space.n_modes} mode amplitudes, got shape {c.shape}")
    return c


@lru_cache(maxsize=8)
def occupations(space: TruncatedFock) -> np.ndarray:
    """Occupation tuples of the basis states, shape (dimension, n_modes)."""
    levels = range(space.n_max + 1)
    return np.array(list(product(levels, repeat=space.n_modes)), dtype=np.int64)


@lru_cache(maxsize=8)
def annihilators(space: TruncatedFock):
    """Dense per-mode annihilation matrices A_j."""
    n = space.n_max + 1
    a = np.diag(np.sqrt(np.arange(1, n)), k=1)
    eye = np.eye(n)
    out = []
    for j in range(space.n_modes):
        mats = [a if i == j else eye for i in range(space.n_modes)]
        acc = mats[0]
        for m in mats[1:]:
            acc = np.kron(acc, m)
        out.append(acc)
    return tuple(out)


def annihilator_combination(space: TruncatedFock, c) -> np.ndarray:
    """a(f) = sum_j conj(c_j) A_j (antilinear in the test function)."""
    c = _check_amplitudes(space, c)
    ops = annihilators(space)
    return sum(np.conj(cj) * op for cj, op in zip(c, ops))


def field_matrix(space: TruncatedFock, c) -> np.ndarray:
    """Hermitian field operator 2^{-1/2} sum_j (conj(c_j) A_j + c_j A_j^dag)."""
    lower = annihilator_combination(space, c) / np.sqrt(2.0)
    return lower + lower.conj().T


def weyl_matrix(space: TruncatedFock, c) -> np.ndarray:
    """exp(i * field_matrix); unitary up to truncation."""
    return expm(1j * field_matrix(space, c))


def resolvent_matrix(space: TruncatedFock, lam: complex, c) -> np.ndarray:
    """(i lam - phi(f))^{-1} by dense solve; norm bounded by 1/|Re lam|."""
    lam = complex(lam)
    if lam.real == 0.0:
        raise ValueError("resolvent requires Re(lambda) != 0")
    phi = field_matrix(space, c)
    r = np.linalg.solve(1j * lam * np.eye(space.dimension) - phi, np.eye(space.dimension))
    _assert_resolvent_norm(r, lam)
    return r


def _assert_resolvent_norm(r: np.ndarray, lam: complex):
    # spot check on deterministic vectors; the bound is exact for the
    # normal matrix i*lam - phi, whose spectrum stays |Re lam| off the axis
    dim = r.shape[0]
    rng = np.random.default_rng(7)
    for _ in range(3):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        ratio = np.linalg.norm(r @ v) / np.linalg.norm(v)
        if ratio > (1.0 + 1e-9) / abs(lam.real):
            raise AssertionError(f"resolvent norm bound violated: {ratio} > 1/|Re lam|")


def low_block_mask(space: TruncatedFock, margin: int = LOW_BLOCK_MARGIN) -> np.ndarray:
    """Basis states with total occupation <= n_max - margin."""
    return occupations(space).sum(axis=1) <= space.n_max - margin


def low_block_deviation(space: TruncatedFock, a: np.ndarray, b: np.ndarray,
                        margin: int = LOW_BLOCK_MARGIN) -> float:
    """Max-norm of (a - b) restricted to the low-occupation block."""
    mask = low_block_mask(space, margin)
    diff = (a - b)[np.ix_(mask, mask)]
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def gibbs_weights(space: TruncatedFock, beta: float, mu: float) -> np.ndarray:
    """Normalized diagonal of exp(-beta (H - mu N)) in the occupation basis."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    eps = np.asarray(space.mode_energies)
    if mu >= eps.min():
        raise ValueError(f"mu = {mu} must lie below the lowest mode energy {eps.min()}")
    occ = occupations(space)
    log_w = -beta * occ @ (eps - mu)
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def gibbs_expectation(space: TruncatedFock, beta: float, mu: float, matrix: np.ndarray) -> complex:
    """Tr(rho M) for the truncated Gibbs density operator."""
    return complex(np.dot(gibbs_weights(space, beta, mu), np.diag(matrix)))


def time_evolution_phases(space: TruncatedFock, mu: float, t: float) -> np.ndarray:
    """Diagonal of exp(i t (H - mu N))."""
    occ = occupations(space)
    eps = np.asarray(space.mode_energies)
    return np.exp(1j * t * occ @ (eps - mu))


def evolve(space: TruncatedFock, mu: float, t: float, matrix: np.ndarray) -> np.ndarray:
    """Heisenberg evolution e^{it(H - mu N)} M e^{-it(H - mu N)}."""
    ph = time_evolution_phases(space, mu, t)
    return (ph[:, None] * matrix) * np.conj(ph)[None, :]


def gauge_average_matrix(space: TruncatedFock, matrix: np.ndarray, m: int,
                         n_phases: int | None = None) -> np.ndarray:
    """Discrete harmonic average (1/2pi) int du e^{imu} e^{iuN} M e^{-iuN}.

    The integrand is a trigonometric polynomial of degree at most
    M * n_max + |m|, so the trapezoid rule is exact once n_phases exceeds
    that range.
    """
    harmonic_range = space.n_modes * space.n_max + abs(m)
    if n_phases is None:
        n_phases = 4 * harmonic_range
    if n_phases <= harmonic_range:
        raise ValueError("n_phases must exceed the harmonic range of the integrand")
    total = occupations(space).sum(axis=1)
    out = np.zeros_like(matrix, dtype=complex)
    for k in range(n_phases):
        u = 2.0 * np.pi * k / n_phases
        ph = np.exp(1j * u * total)
        out += np.exp(1j * m * u) * (ph[:, None] * matrix * np.conj(ph)[None, :])
    return out / n_phases


def number_operator(space: TruncatedFock, c) -> np.ndarray:
    """a*(f) a(f) as a dense Hermitian matrix."""
    low = annihilator_combination(space, c)
    return low.conj().T @ low


def regularized_number_expectation(space: TruncatedFock, beta: float, mu: float, c,
                                   eps_reg: float) -> float:
    """Gibbs expectation of (1/eps)(1 - (1 + eps a*(f)a(f))^{-1}).

    Monotonically nondecreasing as eps_reg decreases, with limit
    <a*(f)a(f)>.
    """
    if eps_reg <= 0:
        raise ValueError("regularization parameter must be positive")
    k = number_operator(space, c)
    g = np.linalg.solve(np.eye(space.dimension) + eps_reg * k, np.eye(space.dimension))
    val = gibbs_expectation(space, beta, mu, (np.eye(space.dimension) - g) / eps_reg)
    return float(val.real)


def inverse_number_expectation(space: TruncatedFock, beta: float, mu: float, c) -> float:
    """Gibbs expectation of (1 + a*(f)a(f))^{-1}, the condensation probe."""
    k = number_operator(space, c)
    g = np.linalg.solve(np.eye(space.dimension) + k, np.eye(space.dimension))
    return float(gibbs_expectation(space, beta, mu, g).real)


def weyl_conjugated_resolvent(space: TruncatedFock, e, lam: complex, c, n_terms: int,
                              margin: int | None = None):
    """Compare W(e)^dag R(lam, f) W(e) against its resolvent power series.

    The conjugation shifts the field by the real pairing l = Im<e, f>, and
    the shifted resolvent expands as sum_{n>=1} l^{n-1} R(lam, f)^n, a
    norm-convergent series whenever |<e, f>| < |Re lam| (the pairing
    modulus bounds l over the whole phase circle of f).  Returns
    (direct, series, low-block deviation).

    Resolvents mix occupations over a range that scales with sqrt(n_max),
    so the comparison block keeps only total occupation <= n_max/4 by
    default; pass `margin` to override.
    """
    e = _check_amplitudes(space, e)
    c = _check_amplitudes(space, c)
    lam = complex(lam)
    pairing = complex(np.vdot(e, c))
    if abs(pairing) >= abs(lam.real):
        raise ValueError(
            f"|<e,f>| = {abs(pairing):g} must stay below |Re lam| = {abs(lam.real):g}")
    r = resolvent_matrix(space, lam, c)
    w = weyl_matrix(space, e)
    direct = w.conj().T @ r @ w
    l0 = pairing.imag
    series = np.zeros_like(r)
    power = r.copy()
    for n in range(1, n_terms + 1):
        series += (l0 ** (n - 1)) * power
        if n < n_terms:
            power = power @ r
    if margin is None:
        margin = space.n_max - space.n_max // 4
    return direct, series, low_block_deviation(space, direct, series, margin)
