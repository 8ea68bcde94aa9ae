"""Condensation diagnostics: densities, local particle counts, averaging.

The trapped critical density comes from a heat-kernel (Mehler) series with
the ground mode removed; the free critical density from a radial Bose
integral.  Local particle numbers over a box are summed over a sine-mode
basis, with mode values obtained from exact per-axis overlap or momentum
integrals.  Bessel factors implement the time average that restores gauge
invariance of coherently shifted states.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .quadrature import legendre_panel, refine_radial
from .single_particle import (
    DomainStatus,
    FreeLaplacian,
    HarmonicTrap,
    LimitKind,
    TestFunction,
    domain_classify,
    hermite_functions,
    _indices_at_level,
)
from .quasifree import (
    Averaging,
    CoherentShift,
    LimitLabel,
    QuasifreeSpec,
    ResolventWord,
    Thermal,
    resolvent_word_expectation,
)
from .special import j0

MEHLER_SERIES_MIN_TERMS = 5
MEHLER_SERIES_TOL = 1e-14
SPECTRAL_EXPONENT_CUTOFF = 40.0
NORMALITY_INCREMENT_FLOOR = 1e-3
HEAT_TERMS_FREE_BOX = 400


class _DivergentType:
    """Particle-number value on directions without a particle interpretation."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Divergent"


DIVERGENT = _DivergentType()


@dataclass(frozen=True)
class Region:
    """Axis-aligned box with nonempty interior."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower/upper corners must have equal positive length")
        if any(b <= a for a, b in zip(self.lower, self.upper)):
            raise ValueError("region must have nonempty interior")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self):
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))


@dataclass
class DensityProfile:
    """Sampled local density; non-negative and mirror symmetric for our models."""

    dim: int
    beta: float
    points: list  # (position tuple, density)

    def __post_init__(self):
        for x, rho in self.points:
            if rho < 0:
                raise ValueError(f"negative density {rho} at {x}")

    def mirror_deviation(self) -> float:
        """Max |rho(x) - rho(-x)| over pairs present in the sample."""
        table = {tuple(np.round(x, 12)): rho for x, rho in self.points}
        worst = 0.0
        for x, rho in self.points:
            mirrored = tuple(np.round([-xi for xi in x], 12))
            if mirrored in table:
                worst = max(worst, abs(rho - table[mirrored]))
        return worst


# -- particle numbers -----------------------------------------------------------


def number_expectation(spec: QuasifreeSpec, f: TestFunction):
    """omega(a*(f) a(f)) = <f,f>_omega - ||f||^2/2 + |pairing|^2/2.

    Returns DIVERGENT when a limit form gives f no particle
    interpretation.  The shift quadratic |pairing|^2/2 equals
    |<e, f>|^2 under the displacement normalization and survives Bessel
    averaging unchanged (the time average of a modulus squared).
    """
    if f.is_zero():
        return 0.0
    label = spec.form.label
    if isinstance(label, LimitLabel):
        if domain_classify(label.model, label.kind, f).status is DomainStatus.DIVERGENT:
            return DIVERGENT
    value = complex(spec.form(f, f, 0.0)).real - 0.5 * f.norm_squared()
    if spec.shift is not None:
        p = spec.shift.pairing(f)
        if p is None:
            return DIVERGENT
        value += 0.5 * abs(p) ** 2
    return float(value)


# -- Mehler kernel and trapped critical density ---------------------------------


def mehler_kernel(tau: float, x, y, dim: int | None = None) -> float:
    """Position-space kernel of e^{-tau (P^2 + Q^2)} on R^s."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError("x and y must have the same dimension")
    s = dim if dim is not None else x.size
    coth = 1.0 / np.tanh(2.0 * tau)
    csch = 1.0 / np.sinh(2.0 * tau)
    expo = -0.5 * (coth * (x @ x + y @ y) - 2.0 * csch * (x @ y))
    return float((2.0 * np.pi * np.sinh(2.0 * tau)) ** (-s / 2.0) * np.exp(expo))


def mehler_kernel_spectral(tau: float, x, y, dim: int, levels: int = 40) -> float:
    """Eigenfunction-sum oracle for the kernel, truncated at `levels`."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    hx = hermite_functions(levels, x)
    hy = hermite_functions(levels, y)
    total = 0.0
    for m in range(levels + 1):
        for k in _indices_at_level(dim, m):
            term = np.exp(-tau * (2.0 * m + dim))
            for i, ki in enumerate(k):
                term *= hx[ki, i] * hy[ki, i]
            total += term
    return float(total)


def critical_density_trap(beta: float, dim: int, x) -> float:
    """Local density of the trapped thermal cloud at maximal chemical potential.

    Heat-series form: pi^{-s/2} sum_n [(1 - e^{-4 n beta})^{-s/2}
    e^{-tanh(n beta) x^2} - e^{-x^2}]; terms decay like e^{-2 n beta}.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xsq = float(x @ x)
    total = 0.0
    n = 1
    while True:
        term = (1.0 - np.exp(-4.0 * n * beta)) ** (-dim / 2.0) * np.exp(
            -np.tanh(n * beta) * xsq) - np.exp(-xsq)
        total += term
        if n >= MEHLER_SERIES_MIN_TERMS and abs(term) < MEHLER_SERIES_TOL * max(abs(total), 1e-300):
            break
        n += 1
        if n > 100000:
            raise RuntimeError("trapped density series failed to settle")
    return float(np.pi ** (-dim / 2.0) * total)


def critical_density_trap_spectral(beta: float, dim: int, x, levels: int | None = None) -> float:
    """Eigenfunction-sum oracle: sum over excited levels of the Bose weight
    times |e_k(x)|^2."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if levels is None:
        levels = int(np.ceil(SPECTRAL_EXPONENT_CUTOFF / (2.0 * beta))) + 2
    hx = hermite_functions(levels, x)
    total = 0.0
    for m in range(1, levels + 1):
        weight = 1.0 / np.expm1(2.0 * beta * m)
        shell = 0.0
        for k in _indices_at_level(dim, m):
            prod = 1.0
            for i, ki in enumerate(k):
                prod *= hx[ki, i] ** 2
            shell += prod
        total += weight * shell
    return float(total)


# -- trapped box counts and the trace bound --------------------------------------


def _axis_mode_integrals(length: float, a: float, b: float, max_index: int) -> np.ndarray:
    """int_a^b h_k^L(x)^2 dx for k = 0..max_index, by panelled quadrature."""
    n_panels = max(4, int(np.ceil((b - a) * np.sqrt(2.0 * max_index + 1.0) / length)) + 2)
    edges = np.linspace(a, b, n_panels + 1)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xn, wn = legendre_panel(lo, hi, 24)
        nodes.append(xn)
        weights.append(wn)
    xn = np.concatenate(nodes)
    wn = np.concatenate(weights)
    h = hermite_functions(max_index, xn / length) / np.sqrt(length)
    return (h * h) @ wn


def _trap_level_sums(trap: HarmonicTrap, region: Region, max_level: int) -> np.ndarray:
    """G_m = sum over |k| = m of prod_i int_O |h_{k_i}|^2, via convolution."""
    per_axis = [_axis_mode_integrals(trap.length, lo, hi, max_level)
                for lo, hi in zip(region.lower, region.upper)]
    g = per_axis[0]
    for nxt in per_axis[1:]:
        g = np.convolve(g, nxt)
    return g[:max_level + 1]


def trap_number_bound(beta: float, length: float, region: Region):
    """Expected box count of the trapped limit state and its O-free bound.

    value = sum over excited levels of the Bose weight times the box
    overlap; bound = 2/(beta*gap) e^{beta eps_1/2} Tr e^{-beta h/2}, which
    does not depend on the region.  The bound follows from
    (e^x - 1)^{-1} <= e^{-x/2}/(x/2) on the excited spectrum.
    """
    trap = HarmonicTrap(length, region.dim)
    max_level = int(np.ceil(SPECTRAL_EXPONENT_CUTOFF * length ** 2 / (2.0 * beta))) + 2
    g = _trap_level_sums(trap, region, max_level)
    m = np.arange(1, max_level + 1)
    weights = 1.0 / np.expm1(beta * trap.gap * m)
    value = float(np.sum(weights * g[1:]))
    half_trace = (2.0 * np.sinh(0.5 * beta / length ** 2)) ** (-region.dim)
    bound = float(2.0 / (beta * trap.gap) * np.exp(0.5 * beta * trap.ground_energy) * half_trace)
    if not value <= bound:
        raise AssertionError(f"trace bound violated: value {value} > bound {bound}")
    return value, bound


def trap_box_number(beta: float, mu, trap: HarmonicTrap, region: Region,
                    boundary: bool = False) -> float:
    """Box particle count at interior mu, or of the limit state (boundary)."""
    max_level = int(np.ceil(
        (SPECTRAL_EXPONENT_CUTOFF + (0 if boundary else beta * max(trap.ground_energy - mu, 0.0)))
        * trap.length ** 2 / (2.0 * beta))) + 2
    g = _trap_level_sums(trap, region, max_level)
    m = np.arange(0, max_level + 1)
    if boundary:
        weights = np.zeros(max_level + 1)
        weights[1:] = 1.0 / np.expm1(beta * trap.gap * m[1:])
    else:
        weights = 1.0 / np.expm1(beta * (trap.level_energy(0) - mu + trap.gap * m))
    return float(np.sum(weights * g))


# -- free critical density --------------------------------------------------------


def free_critical_density(beta: float, dim: int):
    """(2 pi)^{-s} int dp (e^{beta p^2} - 1)^{-1}; Divergent for s <= 2.

    The radial integrand r^{s-1}/(e^{beta r^2}-1) is bounded for s >= 3
    (the pole cancels against the measure), so plain panel refinement
    applies after splitting off nothing; the small-r limit r^{s-3}/beta is
    finite.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if dim <= 2:
        return DIVERGENT
    from math import gamma
    surface = 2.0 * np.pi ** (dim / 2.0) / gamma(dim / 2.0)
    outer = np.sqrt(700.0 / beta)

    def integrand(r):
        return r ** (dim - 1) / np.expm1(beta * r * r)

    with np.errstate(over="ignore"):
        radial = refine_radial(integrand, outer, 1e-12)
    return float((2.0 * np.pi) ** (-dim) * surface * radial.real)


def free_critical_density_series(beta: float, dim: int, terms: int = 20000) -> float:
    """Heat-series oracle sum_n (4 pi beta n)^{-s/2} with an Euler-Maclaurin tail."""
    n = np.arange(1, terms + 1, dtype=float)
    s = dim / 2.0
    partial = np.sum((4.0 * np.pi * beta * n) ** (-s))
    # Euler-Maclaurin tail: sum_{n>N} n^{-s} = N^{1-s}/(s-1) - N^{-s}/2 + s N^{-s-1}/12 - ...
    big_n = float(terms)
    tail = big_n ** (1.0 - s) / (s - 1.0) - 0.5 * big_n ** (-s) + s * big_n ** (-s - 1.0) / 12.0
    return float(partial + (4.0 * np.pi * beta) ** (-s) * tail)


# -- Bessel machinery --------------------------------------------------------------


def bessel_factor(shift: CoherentShift, word: ResolventWord, u) -> float:
    """J0 of the modulus of the rotated pairing sum over the word's factors.

    The argument is sum_j u_j e^{i t_j freq} pairing(f_j); at u = 0 the
    factor is 1, and it vanishes when the sum hits a zero of J0.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (len(word),):
        raise ValueError("one integration variable per word factor required")
    z = 0.0j
    for uj, (_, fj, tj) in zip(u, word.factors):
        p = shift.pairing(fj)
        if p is None:
            return 0.0
        z += uj * p * np.exp(1j * tj * shift.frequency)
    return float(j0(abs(z)))


def phase_average_oracle(z: complex, n_theta: int = 4096) -> float:
    """(1/2pi) int_0^{2pi} e^{i Im(e^{i theta} z)} d theta, the J0 mechanism.

    Trapezoid rule; spectrally accurate for this entire periodic
    integrand.
    """
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    vals = np.exp(1j * np.imag(np.exp(1j * theta) * z))
    return float(np.mean(vals).real)


def central_decomposition_check(spec: QuasifreeSpec, word: ResolventWord,
                                n_phases: int = 64) -> float:
    """Two routes to the averaged-state word expectation.

    (a) Bessel factor inside the quadrature; (b) mean over the gauge
    circle of the plain shifted expectation.  Their difference vanishes
    because the Bessel factor is the phase average of the shift
    exponential.
    """
    if spec.averaging is not Averaging.BESSEL:
        raise ValueError("central decomposition compares against the Bessel-averaged state")
    averaged = resolvent_word_expectation(spec, word)
    plain = QuasifreeSpec(spec.form, spec.shift, Averaging.NONE)
    acc = 0.0j
    for k in range(n_phases):
        acc += resolvent_word_expectation(plain, word.gauge_rotated(2.0 * np.pi * k / n_phases))
    return float(abs(averaged - acc / n_phases))


# -- local normality ----------------------------------------------------------------


class NormalityVerdict(Enum):
    LOCALLY_NORMAL = "locally_normal"
    NOT_LOCALLY_NORMAL = "not_locally_normal"
    INCONCLUSIVE = "inconclusive"


@dataclass
class LocalNormalityReport:
    partial_sums: list
    verdict: NormalityVerdict
    modes: list
    divergent_modes: list
    region: Region
    estimate: float
    note: str = ""

    @property
    def per_volume(self) -> float:
        return self.estimate / self.region.volume


def _sine_momentum_density(k: int, width: float, q: np.ndarray) -> np.ndarray:
    """|FT of the k-th unit sine mode|^2 at momenta q (width = box width)."""
    q0 = k * np.pi / width
    trig = np.sin(0.5 * q * width) if k % 2 == 0 else np.cos(0.5 * q * width)
    num = (2.0 / (np.pi * width)) * q0 ** 2 * 2.0 * trig ** 2
    den = (q0 * q0 - q * q) ** 2
    safe = np.abs(q0 * q0 - q * q) > 1e-8 * q0 * q0
    out = np.empty_like(q)
    out[safe] = num[safe] / den[safe]
    out[~safe] = width / (4.0 * np.pi)
    return out


def _free_axis_heat_table(width: float, beta: float, k_max: int, n_terms: int) -> np.ndarray:
    """T[n, k] = int e^{-(n+1) beta q^2} |sine-mode-k FT|^2 dq, k = 1..k_max."""
    q_hi = k_max * np.pi / width + np.sqrt(50.0 / beta) + 5.0 / width
    n_panels = max(24, int(np.ceil(q_hi * width / np.pi)) + 8)
    edges = np.linspace(0.0, q_hi, n_panels + 1)
    qs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = legendre_panel(lo, hi, 16)
        qs.append(x)
        ws.append(w)
    q = np.concatenate(qs)
    w = np.concatenate(ws)
    dens = np.stack([_sine_momentum_density(k, width, q) for k in range(1, k_max + 1)])
    table = np.empty((n_terms, k_max))
    with np.errstate(under="ignore"):
        for n in range(1, n_terms + 1):
            gauss = np.exp(-n * beta * q * q) * w
            table[n - 1] = 2.0 * dens @ gauss
    return table


def _box_modes(dim: int, per_axis: int):
    """Sine-mode multi-indices ordered by box energy sum(k^2)."""
    modes = list(_all_boxes(dim, per_axis))
    modes.sort(key=lambda k: (sum(i * i for i in k), k))
    return modes


def _all_boxes(dim, per_axis):
    if dim == 1:
        for k in range(1, per_axis + 1):
            yield (k,)
        return
    for k in range(1, per_axis + 1):
        for rest in _all_boxes(dim - 1, per_axis):
            yield (k,) + rest


def _axis_sine_overlaps(trap: HarmonicTrap, lo: float, hi: float,
                        max_hermite: int, max_sine: int) -> np.ndarray:
    """O[a, k] = int_box h_a^L(x) sine_k(x) dx."""
    width = hi - lo
    oscillations = np.sqrt(2.0 * max_hermite + 1.0) / trap.length + max_sine * np.pi / width
    n_panels = max(6, int(np.ceil(width * oscillations / 4.0)) + 4)
    edges = np.linspace(lo, hi, n_panels + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = legendre_panel(a, b, 24)
        xs.append(x)
        ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    h = hermite_functions(max_hermite, x / trap.length) / np.sqrt(trap.length)
    karr = np.arange(1, max_sine + 1)
    sines = np.sqrt(2.0 / width) * np.sin(np.outer(karr, (x - lo)) * np.pi / width)
    return (h * w) @ sines.T


def local_normality_report(spec: QuasifreeSpec, region: Region,
                           basis_size: int) -> LocalNormalityReport:
    """Partial particle counts over a box sine-mode basis with a verdict.

    Trapped states project the modes onto the regular (ground-free)
    complement, so every partial sum is finite and bounded by the trace
    bound.  Free limit states mark modes outside the regular domain as
    divergent; their presence forces NOT_LOCALLY_NORMAL.  Otherwise the
    verdict follows the last-quartile increments against the floor
    NORMALITY_INCREMENT_FLOOR times the accumulated sum, with a
    power-law tail extrapolation supplying the limit estimate.
    """
    label = spec.form.label
    if isinstance(label, LimitLabel):
        beta, model, kind = label.beta, label.model, label.kind
        boundary = True
    elif isinstance(label, Thermal):
        beta, model, kind = label.beta, label.model, None
        boundary = False
    else:
        raise ValueError("local normality needs a thermal or limit form")
    if region.dim != model.dim:
        raise ValueError("region dimension must match the model")

    per_axis = max(2, int(np.ceil(basis_size ** (1.0 / region.dim))) + 2)
    modes = _box_modes(region.dim, per_axis)

    if isinstance(model, HarmonicTrap):
        values, divergent = _trap_mode_values(beta, label, model, region, modes, boundary)
    else:
        values, divergent = _free_mode_values(beta, label, region, modes, boundary)

    # enumerate the basis by decreasing contribution so that increment
    # decay is meaningful for the verdict
    kept = sorted(((k, v) for k, v in zip(modes, values) if v is not None),
                  key=lambda kv: -kv[1])[:basis_size]
    modes_kept = [k for k, _ in kept]
    increments = [v for _, v in kept]
    partial = list(np.cumsum(increments))

    if divergent:
        return LocalNormalityReport(partial, NormalityVerdict.NOT_LOCALLY_NORMAL,
                                    modes_kept, divergent, region,
                                    float("inf"),
                                    note="modes outside the regular domain have no particle interpretation")

    total = partial[-1]
    tail = increments[3 * len(increments) // 4:]
    floor = NORMALITY_INCREMENT_FLOOR * total
    note = ""
    if isinstance(model, FreeLaplacian):
        # box-mode counts converge only like 1/k^2 per axis, so the limit
        # is estimated by extending the mode lattice explicitly
        estimate = _free_lattice_total(region.widths, beta)
        note = "limit estimated from an extended sine-mode lattice"
    else:
        estimate = total + _power_tail_estimate(increments)
    if max(tail) < floor:
        verdict = NormalityVerdict.LOCALLY_NORMAL
    elif min(tail) >= floor:
        verdict = NormalityVerdict.NOT_LOCALLY_NORMAL
    else:
        verdict = NormalityVerdict.INCONCLUSIVE
    return LocalNormalityReport(partial, verdict, modes_kept, [], region, estimate, note)


def _power_tail_estimate(increments) -> float:
    """Tail of a power-law decaying increment sequence, from the last quartile.

    Fits c * j^{-alpha} through the quartile means and sums the Hurwitz
    tail; returns 0 for super-fast (already negligible) decay.
    """
    m = len(increments)
    if m < 8:
        return 0.0
    quart = np.asarray(increments[3 * m // 4:], dtype=float)
    j = np.arange(3 * m // 4 + 1, m + 1, dtype=float)
    positive = quart > 0
    if positive.sum() < 4:
        return 0.0
    lj, lv = np.log(j[positive]), np.log(quart[positive])
    alpha, logc = np.polyfit(lj, lv, 1)
    alpha = -alpha
    if alpha <= 1.05:
        return 0.0
    c = np.exp(logc)
    return float(c * hurwitz_zeta(alpha, m + 1))


def _free_axis_heat_sums(width: float, beta: float, n_terms: int,
                         k_explicit: int = 256) -> np.ndarray:
    """S[n] = sum over ALL sine modes k of the axis heat integral T_n(k).

    Modes up to k_explicit are integrated exactly; beyond, the mode's
    momentum density is flat 1/k^2 leakage at thermal momenta, giving the
    closed tail (2/(pi w)) (w/(k pi))^2 * int e^{-n beta q^2} T(q) dq with
    T = 4cos^2 (odd k) or 4sin^2 (even k) of qw/2.
    """
    table = _free_axis_heat_table(width, beta, k_explicit, n_terms)
    sums = table.sum(axis=1)
    n = np.arange(1, n_terms + 1, dtype=float)
    # int_0^inf e^{-a q^2} (1 +/- cos(q w)) dq, a = n beta
    root = 0.5 * np.sqrt(np.pi / (n * beta))
    damp = np.exp(-width * width / (4.0 * n * beta))
    odd_int = 2.0 * root * (1.0 + damp)
    even_int = 2.0 * root * (1.0 - damp)
    ks = np.arange(k_explicit + 1, 400000)
    inv_sq = (width / (np.pi * ks)) ** 2
    odd_w = inv_sq[ks % 2 == 1].sum()
    even_w = inv_sq[ks % 2 == 0].sum()
    # common prefactor of |FT|^2 ~ (2/(pi w)) (w/(k pi))^2 T(q)
    sums = sums + (2.0 / (np.pi * width)) * 2.0 * (odd_w * odd_int + even_w * even_int)
    return sums


def _free_lattice_total(widths, beta: float, n_terms: int = HEAT_TERMS_FREE_BOX) -> float:
    """Box particle count summed over the full sine-mode lattice.

    Product of per-axis heat sums per heat index, with a power-law tail in
    the heat index (the product decays like n^{-s/2}).
    """
    per_axis = [_free_axis_heat_sums(w, beta, n_terms) for w in widths]
    prod = per_axis[0].copy()
    for nxt in per_axis[1:]:
        prod = prod * nxt
    total = float(prod.sum())
    s_half = len(widths) / 2.0
    if s_half > 1.05:
        n0 = float(n_terms)
        total += float(prod[-1] * n0 ** s_half * hurwitz_zeta(s_half, n0 + 1.0))
    return total


def _trap_mode_values(beta, label, trap, region, modes, boundary):
    mu = None if boundary else label.mu
    max_level = int(np.ceil(
        (SPECTRAL_EXPONENT_CUTOFF + (0.0 if boundary else beta * max(trap.ground_energy - mu, 0.0)))
        * trap.length ** 2 / (2.0 * beta))) + 2
    max_sine = max(max(k) for k in modes)
    overlaps = [_axis_sine_overlaps(trap, lo, hi, max_level, max_sine)
                for lo, hi in zip(region.lower, region.upper)]
    m = np.arange(0, max_level + 1)
    if boundary:
        weights = np.zeros(max_level + 1)
        weights[1:] = 1.0 / np.expm1(beta * trap.gap * m[1:])
    else:
        weights = 1.0 / np.expm1(beta * (trap.level_energy(0) - mu + trap.gap * m))
    values = []
    for k in modes:
        per_axis = [np.abs(overlaps[i][:, k[i] - 1]) ** 2 for i in range(region.dim)]
        g = per_axis[0]
        for nxt in per_axis[1:]:
            g = np.convolve(g, nxt)
        values.append(float(np.sum(weights * g[:max_level + 1])))
    return values, []


def _free_mode_values(beta, label, region, modes, boundary):
    dim = region.dim
    if not boundary:
        raise NotImplementedError("free local counts are provided for the mu = 0 limit")
    divergent = []
    if dim <= 2:
        # all-odd sine modes keep a nonzero momentum-space value at 0 and
        # fall outside the domain of |P|^{-1}
        divergent = [k for k in modes if all(ki % 2 == 1 for ki in k)]
    widths = region.widths
    k_max = max(max(k) for k in modes)
    tables = [_free_axis_heat_table(w, beta, k_max, HEAT_TERMS_FREE_BOX) for w in widths]
    values = []
    for k in modes:
        if dim <= 2 and all(ki % 2 == 1 for ki in k):
            values.append(None)
            continue
        prod = tables[0][:, k[0] - 1]
        for i in range(1, dim):
            prod = prod * tables[i][:, k[i] - 1]
        total = float(np.sum(prod))
        # power-law heat tail: the product decays like n^{-dim/2}
        last = prod[-1]
        if last > 0 and dim >= 3:
            n0 = float(HEAT_TERMS_FREE_BOX)
            total += float(last * n0 ** (dim / 2.0) * hurwitz_zeta(dim / 2.0, n0 + 1.0))
        values.append(total)
    return values, divergent
