"""Single-particle layer: Hermite-basis test functions and trap spectra.

Test functions are finite complex combinations of orthonormal Hermite
functions at a common length scale.  The harmonic trap at length scale L
acts diagonally on the scale-L basis with eigenvalues (2|k| + s)/L^2, and
the Fourier transform maps the scale-sigma basis onto the scale-1/sigma
basis up to powers of -i, so both trap spectra and free momentum-space
weights are available in closed form.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import product

import numpy as np

from .quadrature import gauss_hermite, gauss_legendre, legendre_panel

PRUNE_EPS = 1e-14
GROUND_OVERLAP_TOL = 1e-10
MIXED_SCALE_NODES = 128
DIVERGENCE_STAGES = 12
DIVERGENCE_GROWTH_TRIGGER = 10.0
DIVERGENCE_TOTAL_CAP = 1e6


class DimensionMismatchError(ValueError):
    pass


class ScaleOverflowError(OverflowError):
    """Trace is finite but too large to represent at the requested scale."""


def hermite_functions(nmax: int, x):
    """Orthonormal Hermite functions h_0..h_nmax at points x, shape (nmax+1, ...).

    Stable normalized recurrence; the Gaussian weight is folded in, so the
    rows are L^2-orthonormal on the line.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape, dtype=float)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, nmax + 1):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def hermite_polynomials(nmax: int, x):
    """Hermite polynomial parts of the basis functions (no Gaussian weight).

    Row n equals hermite_functions row n times exp(x^2/2); used when the
    Gaussian has been absorbed into a quadrature weight.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape, dtype=float)
    out[0] = np.pi ** -0.25 * np.ones_like(x)
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, nmax + 1):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


@dataclass
class TestFunction:
    """Finite Hermite-coefficient vector over R^s at basis scale `scale`.

    coeffs maps s-tuples of non-negative integers to complex amplitudes;
    entries below PRUNE_EPS are dropped on construction.
    """

    __test__ = False  # not a pytest class, despite the name

    dim: int
    scale: float
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        pruned = {}
        for k, c in self.coeffs.items():
            k = tuple(int(i) for i in k)
            if len(k) != self.dim or any(i < 0 for i in k):
                raise ValueError(f"bad multi-index {k} for dim {self.dim}")
            c = complex(c)
            if abs(c) >= PRUNE_EPS:
                pruned[k] = pruned.get(k, 0.0) + c
        self.coeffs = pruned

    # -- small linear algebra ------------------------------------------------

    def norm_squared(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        """Largest total Hermite index present (0 for the zero function)."""
        return max((sum(k) for k in self.coeffs), default=0)

    def axis_degree(self) -> int:
        return max((max(k) for k in self.coeffs), default=0)

    def scaled(self, z: complex) -> "TestFunction":
        return TestFunction(self.dim, self.scale, {k: z * c for k, c in self.coeffs.items()})

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if other.dim != self.dim or other.scale != self.scale:
            raise DimensionMismatchError("can only add test functions on the same basis")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return TestFunction(self.dim, self.scale, out)

    # -- pointwise evaluation --------------------------------------------------

    def evaluate(self, points):
        """Position-space values at points of shape (..., dim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.dim:
            raise DimensionMismatchError("point dimension mismatch")
        nmax = self.axis_degree()
        # per-axis tables: h_n(x_i / sigma) / sqrt(sigma)
        tables = [hermite_functions(nmax, pts[..., i] / self.scale) / np.sqrt(self.scale)
                  for i in range(self.dim)]
        vals = np.zeros(pts.shape[:-1], dtype=complex)
        for k, c in self.coeffs.items():
            term = np.full(pts.shape[:-1], c, dtype=complex)
            for i, ki in enumerate(k):
                term = term * tables[i][ki]
            vals += term
        return vals

    def evaluate_momentum(self, points):
        """Momentum-space values; Hermite functions are Fourier eigenfunctions.

        The scale-sigma basis function with index k transforms to
        (-i)^{|k|} times the scale-1/sigma basis function.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.dim:
            raise DimensionMismatchError("point dimension mismatch")
        nmax = self.axis_degree()
        tables = [hermite_functions(nmax, pts[..., i] * self.scale) * np.sqrt(self.scale)
                  for i in range(self.dim)]
        vals = np.zeros(pts.shape[:-1], dtype=complex)
        for k, c in self.coeffs.items():
            term = np.full(pts.shape[:-1], c * (-1j) ** (sum(k) % 4), dtype=complex)
            for i, ki in enumerate(k):
                term = term * tables[i][ki]
            vals += term
        return vals


def basis_function(dim: int, scale: float, index) -> TestFunction:
    return TestFunction(dim, scale, {tuple(index): 1.0})


def gaussian(dim: int, scale: float = 1.0, amplitude: complex = 1.0) -> TestFunction:
    """The normalized Gaussian ground-state profile (all-zero Hermite index)."""
    return TestFunction(dim, scale, {(0,) * dim: amplitude})


# -- Hamiltonians ------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicTrap:
    """h = P^2 + Q^2 / L^4: eigenvalues (2|k| + s)/L^2, eigenbasis at scale L."""

    length: float
    dim: int

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("trap length must be positive")
        if self.dim < 1:
            raise ValueError("dim must be positive")

    @property
    def scale(self) -> float:
        return self.length

    def eigenvalue(self, index) -> float:
        return (2.0 * sum(index) + self.dim) / self.length ** 2

    def level_energy(self, level: int) -> float:
        """Energy of total index |k| = level."""
        return (2.0 * level + self.dim) / self.length ** 2

    @property
    def ground_energy(self) -> float:
        return self.dim / self.length ** 2

    @property
    def gap(self) -> float:
        """First excited minus ground energy."""
        return 2.0 / self.length ** 2

    def eigenfunction(self, index) -> TestFunction:
        return basis_function(self.dim, self.length, index)


@dataclass(frozen=True)
class FreeLaplacian:
    """h = P^2 on R^s; purely continuous spectrum [0, inf)."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")

    @property
    def ground_energy(self) -> float:
        return 0.0


HamiltonianModel = HarmonicTrap | FreeLaplacian


class LimitKind(Enum):
    TRAP_GROUND = "trap_ground"
    FREE_ZERO_MODE = "free_zero_mode"


class DomainStatus(Enum):
    REGULAR = "regular"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class DomainVerdict:
    status: DomainStatus
    diagnostic: float

    @property
    def is_regular(self) -> bool:
        return self.status is DomainStatus.REGULAR


# -- inner products ----------------------------------------------------------


@lru_cache(maxsize=128)
def _cross_gram(scale_a: float, scale_b: float, deg_a: int, deg_b: int, nodes: int):
    """1D Gram matrix <h_a^{scale_a}, h_b^{scale_b}> by exact Gauss-Hermite.

    The integrand is a polynomial of degree <= deg_a + deg_b against the
    combined Gaussian weight, so the rule is exact once the node count
    covers the degree.
    """
    alpha = 0.5 * (scale_a ** -2 + scale_b ** -2)
    n = max(nodes, (deg_a + deg_b) // 2 + 2)
    t, w = gauss_hermite(n)
    with np.errstate(under="ignore"):
        mod_w = np.exp(np.log(w) + t * t)  # weights with e^{-t^2} removed
    x = t / np.sqrt(alpha)
    ha = hermite_functions(deg_a, x / scale_a) / np.sqrt(scale_a)
    hb = hermite_functions(deg_b, x / scale_b) / np.sqrt(scale_b)
    return (ha * mod_w) @ hb.T / np.sqrt(alpha)


def inner_product(f: TestFunction, g: TestFunction) -> complex:
    """Sesquilinear <f, g>, antilinear in the first slot.

    Equal scales reduce to the coefficient dot product; mixed scales are
    evaluated by Gauss-Hermite quadrature of the position-space product,
    which is exact for the finite-degree integrand.
    """
    if f.dim != g.dim:
        raise DimensionMismatchError(f"dim {f.dim} != {g.dim}")
    if f.scale == g.scale:
        return complex(sum(np.conj(c) * g.coeffs.get(k, 0.0) for k, c in f.coeffs.items()))
    gram = _cross_gram(f.scale, g.scale, f.axis_degree(), g.axis_degree(), MIXED_SCALE_NODES)
    total = 0.0 + 0.0j
    for k, c in f.coeffs.items():
        for k2, d in g.coeffs.items():
            o = 1.0
            for a, b in zip(k, k2):
                o *= gram[a, b]
            total += np.conj(c) * d * o
    return complex(total)


def norm(f: TestFunction) -> float:
    return np.sqrt(f.norm_squared())


def gauge_rotate(f: TestFunction, u: float) -> TestFunction:
    """Multiply f by the phase e^{iu}; preserves all inner products."""
    return f.scaled(np.exp(1j * u))


# -- spectral operations -----------------------------------------------------


def partition_function(model: HarmonicTrap, beta: float) -> float:
    """Tr e^{-beta h} for the trap, closed form (2 sinh(beta/L^2))^{-s}.

    Raises ScaleOverflowError when beta/L^2 is so small that the (finite)
    trace exceeds the floating-point range worth reporting.
    """
    if not isinstance(model, HarmonicTrap):
        raise TypeError("partition_function requires a harmonic trap")
    if beta <= 0:
        raise ValueError("beta must be positive")
    arg = beta / model.length ** 2
    if arg < 1e-8:
        raise ScaleOverflowError(
            f"beta/L^2 = {arg:g} too small: trace ~ (2 beta/L^2)^-s is finite but huge")
    return float((2.0 * np.sinh(arg)) ** -model.dim)


def partition_function_spectral(model: HarmonicTrap, beta: float, levels: int = 200) -> float:
    """Truncated eigenvalue sum, the independent check on the closed form."""
    per_axis = np.exp(-beta * (2.0 * np.arange(levels) + 1.0) / model.length ** 2)
    return float(per_axis.sum() ** model.dim)


def ground_overlap(model: HarmonicTrap, f: TestFunction) -> complex:
    return inner_product(model.eigenfunction((0,) * model.dim), f)


def project_out_ground(model: HarmonicTrap, f: TestFunction) -> TestFunction:
    """Remove the trap ground-state component of f.

    f must live on the model's eigenbasis scale; for other scales the
    result is not a single-scale coefficient vector (convert first with
    `expand_in_model_basis`).
    """
    if f.scale != model.scale:
        raise ValueError("project_out_ground requires f on the model's basis scale")
    out = dict(f.coeffs)
    out.pop((0,) * f.dim, None)
    return TestFunction(f.dim, f.scale, out)


def expand_in_model_basis(model: HarmonicTrap, f: TestFunction, *, tail_tol: float = 1e-12,
                          max_level: int = 600) -> TestFunction:
    """Re-express f on the trap eigenbasis scale, truncating at `tail_tol`.

    The per-coefficient overlaps are exact (Gauss-Hermite on a finite-degree
    integrand); truncation keeps squared-norm tail below tail_tol.
    """
    if f.scale == model.scale:
        return f
    target = f.norm_squared()
    coeffs = {}
    captured = 0.0
    for level in range(max_level + 1):
        for k in _indices_at_level(f.dim, level):
            c = inner_product(model.eigenfunction(k), f)
            if abs(c) >= PRUNE_EPS:
                coeffs[k] = c
                captured += abs(c) ** 2
        if target - captured < tail_tol * max(target, 1.0):
            return TestFunction(f.dim, model.scale, coeffs)
    raise ValueError(
        f"basis conversion did not capture the norm within {max_level} levels "
        f"(missing {target - captured:g})")


def _indices_at_level(dim: int, level: int):
    """All multi-indices with total degree `level`."""
    if dim == 1:
        yield (level,)
        return
    for first in range(level + 1):
        for rest in _indices_at_level(dim - 1, level - first):
            yield (first,) + rest


# -- momentum-space angular machinery ----------------------------------------


@lru_cache(maxsize=32)
def sphere_rule(dim: int, degree: int):
    """Quadrature on the unit sphere exact for polynomials up to `degree`.

    Returns (directions, weights) with weights summing to the sphere
    surface measure.  s = 1 uses the two points, s = 2 a trapezoid in
    angle, s = 3 a Gauss-Legendre x trapezoid product rule.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        n = max(degree + 2, 8)
        theta = 2.0 * np.pi * np.arange(n) / n
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return dirs, np.full(n, 2.0 * np.pi / n)
    if dim == 3:
        n_theta = degree // 2 + 2
        n_phi = max(degree + 2, 4)
        c, wc = gauss_legendre(n_theta)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        sin_t = np.sqrt(1.0 - c ** 2)
        dirs = np.stack([
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
            np.outer(c, np.ones(n_phi)).ravel(),
        ], axis=1)
        w = np.outer(wc, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
        return dirs, w
    raise NotImplementedError(f"sphere rule for dim {dim} not implemented")


def angular_cross_average(f: TestFunction, g: TestFunction, radii):
    """S(r) = integral over the sphere of conj(f~) g~ at |p| = r.

    Exact in the angular variables since the integrand restricted to a
    sphere is a polynomial of the direction of bounded degree.
    """
    radii = np.asarray(radii, dtype=float)
    dirs, w = sphere_rule(f.dim, f.degree() + g.degree())
    pts = radii[:, None, None] * dirs[None, :, :]
    fv = f.evaluate_momentum(pts)
    gv = g.evaluate_momentum(pts)
    return (np.conj(fv) * gv) @ w


def momentum_cutoff(f: TestFunction, g: TestFunction, tol_exponent: float = 45.0) -> float:
    """Radius beyond which conj(f~) g~ is below e^{-tol_exponent}."""
    sigma_sq = 0.5 * (f.scale ** 2 + g.scale ** 2)
    deg = f.degree() + g.degree() + max(f.dim, 2)
    r = np.sqrt(2.0 * tol_exponent / sigma_sq)
    for _ in range(8):
        r = np.sqrt(2.0 * (tol_exponent + deg * np.log(max(r, 1.0))) / sigma_sq)
    return float(r)


# -- domain classification -----------------------------------------------------


def domain_classify(model, limit_kind: LimitKind, f: TestFunction) -> DomainVerdict:
    """Classify f as Regular or Divergent for the given limit.

    TRAP_GROUND: divergent iff f overlaps the trap ground state.
    FREE_ZERO_MODE: probes the small-momentum integral of |f~(p)|^2/p^2 by
    halving an inner radial cutoff 12 times; divergent when the increments
    grow past 10x the first one, fail to decay, or the total runs away.
    """
    if f.is_zero():
        raise ValueError("cannot classify the zero function")
    if limit_kind is LimitKind.TRAP_GROUND:
        if not isinstance(model, HarmonicTrap):
            raise TypeError("TRAP_GROUND classification requires a harmonic trap")
        overlap = abs(ground_overlap(model, f))
        status = DomainStatus.DIVERGENT if overlap > GROUND_OVERLAP_TOL else DomainStatus.REGULAR
        return DomainVerdict(status, float(overlap))
    if limit_kind is not LimitKind.FREE_ZERO_MODE:
        raise ValueError(f"unknown limit kind {limit_kind}")

    s = f.dim
    p_max = momentum_cutoff(f, f)
    cutoffs = (p_max / 32.0) * 0.5 ** np.arange(DIVERGENCE_STAGES)

    def segment(a: float, b: float) -> float:
        r, w = legendre_panel(a, b, 32)
        dens = np.real(angular_cross_average(f, f, r))
        return float(np.sum(w * dens * r ** (s - 3)))

    outer = sum(segment(a, b) for a, b in
                zip(np.linspace(cutoffs[0], p_max, 17)[:-1], np.linspace(cutoffs[0], p_max, 17)[1:]))
    increments = [segment(cutoffs[j], cutoffs[j - 1]) for j in range(1, DIVERGENCE_STAGES)]
    total = outer + sum(increments)
    grew = increments[-1] > DIVERGENCE_GROWTH_TRIGGER * max(increments[0], 1e-300)
    # a constant-increment tail is the logarithmic-divergence signature
    stalled = increments[-1] > 0.5 * increments[0]
    if grew or stalled or total > DIVERGENCE_TOTAL_CAP:
        return DomainVerdict(DomainStatus.DIVERGENT, float(total))
    return DomainVerdict(DomainStatus.REGULAR, float(total))
