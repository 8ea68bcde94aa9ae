"""Thermal two-point forms, their limits, and equilibrium checks.

The trapped form acts diagonally on the trap eigenbasis; for test
functions on another basis scale the evaluator switches to a heat-kernel
series whose terms are exact Gaussian integrals.  The free form is a
radial-angular momentum-space quadrature with stable Bose weights and an
explicit subtraction of the 1/(beta p^2) singular part at zero chemical
potential.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .quadrature import gauss_hermite, refine_radial
from .single_particle import (
    DomainStatus,
    FreeLaplacian,
    HamiltonianModel,
    HarmonicTrap,
    LimitKind,
    TestFunction,
    angular_cross_average,
    domain_classify,
    expand_in_model_basis,
    hermite_polynomials,
    inner_product,
    momentum_cutoff,
    project_out_ground,
)
from .quasifree import (
    LimitLabel,
    QuasifreeSpec,
    ResolventWord,
    SesquiForm,
    Thermal,
    Vacuum,
    resolvent_word_expectation,
)

HEAT_SERIES_TOL = 1e-16
HEAT_SERIES_MIN_TERMS = 5
HEAT_SERIES_MAX_TERMS = 2000
FREE_RTOL = 1e-10
CLUSTERING_TOL = 1e-3


class _AnnihilatedType:
    """Value of a limit form on directions it annihilates."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Annihilated"


ANNIHILATED = _AnnihilatedType()


class Verdict(Enum):
    CONVERGED = "converged"
    NOT_CONVERGED = "not_converged"


@dataclass
class ConvergenceReport:
    """(parameter, deviation) pairs with a convergence verdict.

    Converged requires at least two entries, a final deviation below the
    tolerance, and deviations decreasing over the trailing half of the
    scan.
    """

    entries: list
    verdict: Verdict
    tol: float
    note: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_deviations(cls, parameters, deviations, tol, note="", extra=None):
        entries = list(zip(parameters, deviations))
        if len(entries) < 2 or not deviations[-1] < tol:
            return cls(entries, Verdict.NOT_CONVERGED, tol, note, extra or {})
        tail = deviations[len(deviations) // 2:]
        decreasing = all(b < a for a, b in zip(tail, tail[1:]))
        verdict = Verdict.CONVERGED if decreasing else Verdict.NOT_CONVERGED
        return cls(entries, verdict, tol, note, extra or {})


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature, chemical potential and single-particle model.

    mu must stay strictly below the bottom of the spectrum; boundary
    values are reached through the limit forms instead.
    """

    beta: float
    mu: float
    model: HamiltonianModel

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        bottom = self.model.ground_energy
        if not self.mu < bottom:
            raise ValueError(
                f"mu = {self.mu} must lie strictly below the spectral bottom {bottom}")


def _bose_minus(x):
    """(e^x - 1)^{-1}, stable for small and large x > 0."""
    return 1.0 / np.expm1(x)


def _bose_plus(x):
    """e^x (e^x - 1)^{-1} = (1 - e^{-x})^{-1}."""
    return -1.0 / np.expm1(-x)


def _bose_minus_regular(x):
    """(e^x - 1)^{-1} - 1/x, analytic through x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    out[small] = -0.5 + xs / 12.0 - xs ** 3 / 720.0
    xl = x[~small]
    out[~small] = 1.0 / np.expm1(xl) - 1.0 / xl
    return out


# -- trapped evaluator ---------------------------------------------------------


def _trap_eigen_sum(beta, mu, model, f, g, t, continued, ground_shift=False):
    """Exact spectral sum for f, g on the trap eigenbasis scale.

    Returns (1/2)(sum_k A_k n_+ e^{it eta_k} + conj(sum_k A_k n_- e^{it eta_k}))
    with A_k = conj(c_k) d_k; the outer conjugation carries the swapped
    argument order of the lower Bose term.  Continuation to t + i*beta
    swaps the two Bose weights.  With ground_shift the chemical potential
    sits at the ground energy and the all-zero index is excluded (the
    limit form on its regular domain).
    """
    upper = 0.0j
    lower = 0.0j
    mu_eff = model.ground_energy if ground_shift else mu
    for k, ck in f.coeffs.items():
        dk = g.coeffs.get(k)
        if dk is None:
            continue
        if ground_shift and sum(k) == 0:
            continue
        eta = model.eigenvalue(k) - mu_eff
        x = beta * eta
        npl, nmi = _bose_plus(x), _bose_minus(x)
        if continued:
            npl, nmi = nmi, npl
        amp = np.conj(ck) * dk * np.exp(1j * t * eta)
        upper += amp * npl
        lower += amp * nmi
    return 0.5 * (upper + np.conj(lower))


def _mehler_cross_matrix(tau, scale_f, scale_g, model: HarmonicTrap, deg_f, deg_g):
    """<h_a^{scale_f}, e^{-tau h} h_b^{scale_g}> for the trap, all a, b at once.

    The heat kernel, the basis Gaussians and the Hermite polynomial parts
    combine into polynomial x Gaussian integrands, integrated exactly by a
    rotated tensor Gauss-Hermite rule.
    """
    L = model.length
    theta = tau / L ** 2
    c = 1.0 / np.tanh(2.0 * theta)
    s = 1.0 / np.sinh(2.0 * theta)
    q1 = 0.5 / scale_f ** 2 + 0.5 * c / L ** 2
    q2 = 0.5 / scale_g ** 2 + 0.5 * c / L ** 2
    q12 = 0.5 * s / L ** 2
    quad = np.array([[q1, -q12], [-q12, q2]])
    lam, vec = np.linalg.eigh(quad)
    n_nodes = (deg_f + deg_g) // 2 + 2
    tns, wns = gauss_hermite(n_nodes)
    u = tns[:, None] / np.sqrt(lam[0])
    v = tns[None, :] / np.sqrt(lam[1])
    x = vec[0, 0] * u + vec[0, 1] * v
    y = vec[1, 0] * u + vec[1, 1] * v
    pf = hermite_polynomials(deg_f, x / scale_f) / np.sqrt(scale_f)
    pg = hermite_polynomials(deg_g, y / scale_g) / np.sqrt(scale_g)
    w2 = wns[:, None] * wns[None, :]
    pref = (1.0 / L) / np.sqrt(2.0 * np.pi * np.sinh(2.0 * theta) * lam[0] * lam[1])
    return pref * np.einsum("axy,xy,bxy->ab", pf, w2, pg)


def _trap_heat_propagated(tau, model, f, g):
    """<f, e^{-tau h} g> through per-axis Mehler cross matrices."""
    mats = _mehler_cross_matrix(tau, f.scale, g.scale, model, f.axis_degree(), g.axis_degree())
    total = 0.0j
    for k, ck in f.coeffs.items():
        for k2, dk in g.coeffs.items():
            o = 1.0
            for a, b in zip(k, k2):
                o *= mats[a, b]
            total += np.conj(ck) * dk * o
    return total


def _trap_eval(params: ThermalParams, f, g, t, continued=False):
    model = params.model
    if f.scale == model.scale and g.scale == model.scale:
        return _trap_eigen_sum(params.beta, params.mu, model, f, g, t, continued)
    if t == 0.0 and not continued:
        # heat series: (1/2)(sum_{n>=0} C_n + conj(sum_{n>=1} C_n)),
        # C_n = e^{n beta mu} <f, e^{-n beta h} g>
        plus = inner_product(f, g)
        minus = 0.0j
        scale = max(abs(plus), np.sqrt(f.norm_squared() * g.norm_squared()))
        n = 1
        while n <= HEAT_SERIES_MAX_TERMS:
            term = np.exp(n * params.beta * params.mu) * _trap_heat_propagated(
                n * params.beta, model, f, g)
            plus += term
            minus += term
            if n >= HEAT_SERIES_MIN_TERMS and abs(term) < HEAT_SERIES_TOL * max(scale, 1e-300):
                break
            n += 1
        return 0.5 * (plus + np.conj(minus))
    converted_f = expand_in_model_basis(model, f)
    converted_g = expand_in_model_basis(model, g)
    return _trap_eigen_sum(params.beta, params.mu, model, converted_f, converted_g,
                           t, continued)


# -- free evaluator ------------------------------------------------------------


def _free_eval(beta, mu, f, g, t, continued=False, rtol=FREE_RTOL):
    """Momentum-space evaluation of the free thermal form.

    The angular integral is exact (spherical polynomial of bounded
    degree); the radial factor carries the Bose weights.  At mu = 0 the
    1/(beta p^2) part of the lower Bose weight is split off and
    integrated on the same panels, leaving a bounded integrand.
    """
    if f.is_zero() or g.is_zero():
        return 0.0j
    if mu > 0:
        raise ValueError("free form requires mu <= 0")
    s = f.dim
    p_max = momentum_cutoff(f, g)

    def integrand(r):
        cross = angular_cross_average(f, g, r)
        eta = r * r - mu
        x = beta * eta
        phase = np.exp(1j * t * eta)
        if mu < 0:
            npl, nmi = _bose_plus(x), _bose_minus(x)
            if continued:
                npl, nmi = nmi, npl
            return 0.5 * r ** (s - 1) * (npl * cross * phase
                                         + nmi * np.conj(cross) / phase)
        reg = _bose_minus_regular(x)
        npl_reg = 1.0 + reg  # n_+ minus the same 1/x part
        if continued:
            npl_reg, reg = reg, npl_reg
        smooth = 0.5 * r ** (s - 1) * (npl_reg * cross * phase
                                       + reg * np.conj(cross) / phase)
        singular = (0.5 / beta) * r ** (s - 3) * (cross * phase
                                                  + np.conj(cross) / phase)
        return smooth + singular

    return complex(refine_radial(integrand, p_max, rtol))


# -- public forms ---------------------------------------------------------------


def thermal_two_point(params: ThermalParams, f: TestFunction, g: TestFunction,
                      t: float = 0.0) -> complex:
    """<f, e^{it(h - mu)} g> under the equilibrium form of `params`."""
    if f.dim != g.dim or f.dim != params.model.dim:
        raise ValueError("dimension mismatch between test functions and model")
    if isinstance(params.model, HarmonicTrap):
        return complex(_trap_eval(params, f, g, t))
    return _free_eval(params.beta, params.mu, f, g, t)


def thermal_form(params: ThermalParams) -> SesquiForm:
    """The equilibrium form as a reusable evaluator with its label."""
    if isinstance(params.model, HarmonicTrap):
        def ev(f, g, t=0.0):
            return complex(_trap_eval(params, f, g, t))

        def cont(f, g, t=0.0):
            return complex(_trap_eval(params, f, g, t, continued=True))
    else:
        def ev(f, g, t=0.0):
            return _free_eval(params.beta, params.mu, f, g, t)

        def cont(f, g, t=0.0):
            return _free_eval(params.beta, params.mu, f, g, t, continued=True)
    return SesquiForm(ev, Thermal(params.beta, params.mu, params.model), cont)


def vacuum_form(dim: int) -> SesquiForm:
    """Zero-temperature form (1/2)<f, g>; defined at coincident times."""

    def ev(f, g, t=0.0):
        if t != 0.0:
            raise ValueError("the bare vacuum form is defined at t = 0 only")
        return 0.5 * inner_product(f, g)

    return SesquiForm(ev, Vacuum(dim))


def limit_form(beta: float, model: HamiltonianModel, kind: LimitKind,
               f: TestFunction, g: TestFunction, t: float = 0.0):
    """Boundary-chemical-potential form; Annihilated outside its domain."""
    for h in (f, g):
        if not h.is_zero():
            if domain_classify(model, kind, h).status is DomainStatus.DIVERGENT:
                return ANNIHILATED
    return _limit_eval_regular(beta, model, kind, f, g, t)


def _limit_eval_regular(beta, model, kind, f, g, t, continued=False):
    if f.is_zero() or g.is_zero():
        return 0.0j
    if kind is LimitKind.TRAP_GROUND:
        cf = expand_in_model_basis(model, f)
        cg = expand_in_model_basis(model, g)
        return complex(_trap_eigen_sum(beta, None, model, cf, cg, t, continued,
                                       ground_shift=True))
    return _free_eval(beta, 0.0, f, g, t, continued=continued)


def limit_form_spec(beta: float, model: HamiltonianModel, kind: LimitKind) -> SesquiForm:
    """Limit form packaged for the word-expectation engine.

    The engine runs the regularity filter first, so the evaluator itself
    assumes regular inputs.
    """

    def ev(f, g, t=0.0):
        return _limit_eval_regular(beta, model, kind, f, g, t)

    def cont(f, g, t=0.0):
        return _limit_eval_regular(beta, model, kind, f, g, t, continued=True)

    return SesquiForm(ev, LimitLabel(beta, model, kind), cont)


# -- scans and checks ------------------------------------------------------------


def thermodynamic_limit_scan(beta: float, mu: float, f: TestFunction, g: TestFunction,
                             t: float, trap_lengths, tol: float = 1e-3) -> ConvergenceReport:
    """|trap(L) - free| along a list of trap lengths at fixed beta, mu < 0."""
    if mu >= 0:
        raise ValueError("the trap-removal scan requires mu < 0")
    free_value = _free_eval(beta, mu, f, g, t)
    deviations = []
    values = []
    for length in trap_lengths:
        params = ThermalParams(beta, mu, HarmonicTrap(float(length), f.dim))
        value = thermal_two_point(params, f, g, t)
        values.append(value)
        deviations.append(abs(value - free_value))
    return ConvergenceReport.from_deviations(
        list(trap_lengths), deviations, tol,
        extra={"free_value": free_value, "trap_values": values})


def kms_check(beta: float, mu: float, model: HamiltonianModel,
              f: TestFunction, g: TestFunction, t_grid,
              limit_kind: LimitKind | None = None) -> float:
    """Max deviation between the two boundary values of the equilibrium strip.

    Side A continues the form to t + i*beta; side B evaluates the
    swapped-argument form at -t.  Both sides are independent spectral or
    quadrature evaluations; their agreement is the equilibrium condition.
    """
    if limit_kind is None:
        form = thermal_form(ThermalParams(beta, mu, model))
    else:
        form = limit_form_spec(beta, model, limit_kind)
        for h in (f, g):
            if domain_classify(model, limit_kind, h).status is DomainStatus.DIVERGENT:
                raise ValueError("KMS check requires inputs inside the regular domain")
    worst = 0.0
    for t in t_grid:
        side_a = form.continued(f, g, float(t))
        side_b = form.evaluator(g, f, -float(t))
        worst = max(worst, abs(side_a - side_b))
    return worst


def clustering_check(beta: float, mu: float, model: HamiltonianModel,
                     f: TestFunction, g: TestFunction, t_list,
                     tol: float = CLUSTERING_TOL) -> ConvergenceReport:
    """Decay of time correlations in the untrapped state.

    Reports |two-point(t)| along t_list together with the factorization
    gap of a two-resolvent product against the product of its factors.
    Trapped models are periodic and reported as structurally not
    converged.
    """
    if isinstance(model, HarmonicTrap):
        return ConvergenceReport([], Verdict.NOT_CONVERGED, tol,
                                 note="periodic: trapped correlations oscillate and never cluster")
    if mu > 0:
        raise ValueError("free model requires mu <= 0")
    if mu == 0:
        form = limit_form_spec(beta, model, LimitKind.FREE_ZERO_MODE)
        for h in (f, g):
            if domain_classify(model, LimitKind.FREE_ZERO_MODE, h).status is DomainStatus.DIVERGENT:
                raise ValueError("clustering check requires regular inputs at mu = 0")
    else:
        form = thermal_form(ThermalParams(beta, mu, model))
    spec = QuasifreeSpec(form)
    lam = 1.0
    single_f = resolvent_word_expectation(spec, ResolventWord([(lam, f, 0.0)]))
    single_g = resolvent_word_expectation(spec, ResolventWord([(lam, g, 0.0)]))
    moduli = []
    gaps = []
    for t in t_list:
        moduli.append(abs(form.evaluator(f, g, float(t))))
        word = ResolventWord([(lam, f, 0.0), (lam, g, float(t))])
        gaps.append(abs(resolvent_word_expectation(spec, word) - single_f * single_g))
    converged = moduli[-1] < tol and gaps[-1] < tol and len(t_list) > 1
    return ConvergenceReport(
        list(zip(t_list, moduli)),
        Verdict.CONVERGED if converged else Verdict.NOT_CONVERGED,
        tol,
        extra={"factorization_gaps": list(zip(t_list, gaps)),
               "single_factors": (single_f, single_g)},
    )
