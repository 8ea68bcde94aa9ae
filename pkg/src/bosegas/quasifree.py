"""Gaussian-state evaluation on Weyl operators and resolvent products.

A state is specified by a sesquilinear form (its two-point data), an
optional coherent shift, and an averaging mode.  Expectations of products
of field resolvents reduce to Laplace-type integrals over the positive
orthant of a Gaussian times a phase (or Bessel) factor; these are computed
by tensorized Gauss-Laguerre quadrature with per-axis rescaling and node
doubling.

Shift normalization: a shift vector e denotes the coherent displacement
amplitude, i.e. the induced linear functional is l(f) = sqrt(2) Im<e, f>
and the complex pairing entering Bessel factors is sqrt(2) <e, f>.  With
this convention the particle-number increment of the displaced state is
exactly |<e, f>|^2 (the standard displacement-operator normalization); the
factor sqrt(2) is the price of quoting the increment without a 1/2.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .quadrature import QuadratureError, gauss_laguerre
from .single_particle import (
    DomainStatus,
    HamiltonianModel,
    LimitKind,
    TestFunction,
    domain_classify,
    inner_product,
)
from .special import j0

MAX_WORD_LENGTH = 4
START_NODES = 32
MAX_NODES_BY_LENGTH = {1: 256, 2: 256, 3: 256, 4: 128}
RTOL_BY_LENGTH = {1: 1e-8, 2: 1e-8, 3: 1e-6, 4: 1e-6}


# -- labels -------------------------------------------------------------------


@dataclass(frozen=True)
class Vacuum:
    dim: int


@dataclass(frozen=True)
class Thermal:
    beta: float
    mu: float
    model: HamiltonianModel


@dataclass(frozen=True)
class LimitLabel:
    """Form at the boundary value of the chemical potential."""

    beta: float
    model: HamiltonianModel
    kind: LimitKind


@dataclass
class SesquiForm:
    """Two-point data <f, e^{it(h - mu)} g>_omega of a Gaussian state.

    `evaluator(f, g, t)` must be Hermitian at t = 0, carry imaginary part
    (1/2) Im<f, g> there, and be gauge invariant.  `continued` optionally
    evaluates the analytic continuation t -> t + i*beta used by
    equilibrium checks.
    """

    evaluator: Callable[[TestFunction, TestFunction, float], complex]
    label: object
    continued: Optional[Callable[[TestFunction, TestFunction, float], complex]] = None

    def __call__(self, f: TestFunction, g: TestFunction, t: float = 0.0) -> complex:
        return self.evaluator(f, g, t)


@dataclass
class CoherentShift:
    """Coherent displacement by amplitude vector e (or an explicit pairing).

    `frequency` is the rotation rate of the pairing under the dynamics
    (eigenvalue of the shift mode minus the chemical potential); pairings
    of time-translated factors pick up e^{i t frequency}.  `pairing_fn`
    replaces the vector pairing for limit shifts; returning None marks a
    direction on which the shifted limit state is annihilated.
    """

    vector: Optional[TestFunction] = None
    frequency: float = 0.0
    pairing_fn: Optional[Callable[[TestFunction], Optional[complex]]] = None

    def __post_init__(self):
        if self.vector is None and self.pairing_fn is None:
            raise ValueError("shift needs a vector or an explicit pairing")

    def pairing(self, f: TestFunction) -> Optional[complex]:
        """sqrt(2) <e, f>: the complex coefficient whose Im is l(f)."""
        if self.pairing_fn is not None:
            return self.pairing_fn(f)
        return np.sqrt(2.0) * inner_product(self.vector, f)

    def functional(self, f: TestFunction) -> float:
        p = self.pairing(f)
        if p is None:
            raise ValueError("shift functional diverges on this direction")
        return float(np.imag(p))


class Averaging(Enum):
    NONE = "none"
    BESSEL = "bessel"


@dataclass
class QuasifreeSpec:
    """A Gaussian state: form, optional coherent shift, averaging mode."""

    form: SesquiForm
    shift: Optional[CoherentShift] = None
    averaging: Averaging = Averaging.NONE

    def __post_init__(self):
        if self.averaging is Averaging.BESSEL and self.shift is None:
            raise ValueError("Bessel averaging requires a coherent shift")


@dataclass
class ResolventWord:
    """Ordered factors (lambda, f, t) of a product of evolved resolvents."""

    factors: list

    def __post_init__(self):
        if not 1 <= len(self.factors) <= MAX_WORD_LENGTH:
            raise ValueError(f"word length must be 1..{MAX_WORD_LENGTH}")
        normalized = []
        for lam, f, t in self.factors:
            lam = complex(lam)
            if lam.real == 0.0:
                raise ValueError("every resolvent needs Re(lambda) != 0")
            normalized.append((lam, f, float(t)))
        self.factors = normalized

    def __len__(self):
        return len(self.factors)

    def gauge_rotated(self, u: float) -> "ResolventWord":
        from .single_particle import gauge_rotate
        return ResolventWord([(lam, gauge_rotate(f, u), t) for lam, f, t in self.factors])

    def time_shifted(self, tau: float) -> "ResolventWord":
        return ResolventWord([(lam, f, t + tau) for lam, f, t in self.factors])


class FilterAction(Enum):
    KEEP = "keep"
    ANNIHILATE = "annihilate"


# -- state evaluation ----------------------------------------------------------


def weyl_expectation(spec: QuasifreeSpec, f: TestFunction) -> complex:
    """omega(W(f)) = phase * exp(-(1/2) <f,f>_omega).

    The phase is e^{i l(f)} for a plain shift and J0(|pairing|) after
    Bessel (time) averaging; it is 1 without a shift.
    """
    gauss = np.exp(-0.5 * spec.form(f, f, 0.0)) if not f.is_zero() else 1.0
    if spec.shift is None:
        return complex(gauss)
    if spec.averaging is Averaging.BESSEL:
        p = spec.shift.pairing(f)
        if p is None:
            return 0.0j
        return complex(j0(abs(p)) * gauss)
    return complex(np.exp(1j * spec.shift.functional(f)) * gauss)


def two_point(spec: QuasifreeSpec, f: TestFunction, g: TestFunction) -> complex:
    """omega(phi(f) phi(g)) = <f,g>_omega + l(f) l(g)."""
    if spec.averaging is Averaging.BESSEL:
        raise ValueError(
            "two-point of the averaged state is not form + l l; use the "
            "number expectation, whose shift quadratic survives the average")
    value = spec.form(f, g, 0.0)
    if spec.shift is not None:
        value += spec.shift.functional(f) * spec.shift.functional(g)
    return complex(value)


def regularity_filter(spec: QuasifreeSpec, word: ResolventWord) -> FilterAction:
    """Annihilate words with a factor outside the limit form's domain.

    Under Bessel averaging a divergent shift pairing annihilates as well:
    the averaged state vanishes on products containing that direction in
    any phase.
    """
    label = spec.form.label
    if not isinstance(label, LimitLabel):
        raise ValueError("regularity filter applies to limit forms only")
    for _, f, _ in word.factors:
        if f.is_zero():
            continue
        verdict = domain_classify(label.model, label.kind, f)
        if verdict.status is DomainStatus.DIVERGENT:
            return FilterAction.ANNIHILATE
        if spec.averaging is Averaging.BESSEL and spec.shift.pairing(f) is None:
            return FilterAction.ANNIHILATE
    return FilterAction.KEEP


def resolvent_word_expectation(spec: QuasifreeSpec, word: ResolventWord,
                               rtol: float | None = None) -> complex:
    """Expectation of an ordered product of time-translated resolvents.

    Signs are normalized through R(-lam, f) = -R(lam, -f) so all real
    parts are positive, then the Laplace-transform integral over the
    positive orthant is evaluated by tensor Gauss-Laguerre quadrature
    (u_j rescaled by Re lambda_j), doubling nodes until two successive
    estimates agree.
    """
    n = len(word)
    if rtol is None:
        rtol = RTOL_BY_LENGTH[n]

    sign = 1.0
    factors = []
    for lam, f, t in word.factors:
        if lam.real < 0:
            sign = -sign
            lam, f = -lam, -f
        factors.append((lam, f, t))

    if isinstance(spec.form.label, LimitLabel):
        if regularity_filter(spec, ResolventWord(factors)) is FilterAction.ANNIHILATE:
            return 0.0j

    lams = np.array([lam for lam, _, _ in factors])
    nu = np.zeros((n, n), dtype=complex)
    for k in range(n):
        _, fk, tk = factors[k]
        nu[k, k] = spec.form(fk, fk, 0.0)
        for l in range(k + 1, n):
            _, fl, tl = factors[l]
            nu[k, l] = spec.form(fk, fl, tl - tk)

    pair = np.zeros(n, dtype=complex)
    if spec.shift is not None:
        for k, (_, fk, tk) in enumerate(factors):
            p = spec.shift.pairing(fk)
            if p is None:
                if spec.averaging is Averaging.BESSEL:
                    return 0.0j
                raise ValueError("shift functional diverges on a factor")
            pair[k] = p * np.exp(1j * tk * spec.shift.frequency)

    integral = _orthant_integral(lams, nu, pair, spec.averaging, rtol,
                                 MAX_NODES_BY_LENGTH[n])
    return complex(sign * (-1j) ** n * integral)


def _orthant_integral(lams, nu, pair, averaging, rtol, max_nodes):
    n = len(lams)
    estimates = []
    m = START_NODES
    while m <= max_nodes:
        estimates.append(_tensor_estimate(m, lams, nu, pair, averaging))
        if len(estimates) > 1 and abs(estimates[-1] - estimates[-2]) <= rtol * max(1.0, abs(estimates[-1])):
            return estimates[-1]
        m *= 2
    raise QuadratureError(
        f"word quadrature did not converge to rtol={rtol:g} by {max_nodes} "
        f"nodes/axis; last two estimates {estimates[-2]!r}, {estimates[-1]!r}",
        last_estimates=tuple(estimates[-2:]),
    )


def _tensor_estimate(m, lams, nu, pair, averaging):
    """One tensor Gauss-Laguerre pass at m nodes per axis.

    The quadratic form (cross plus half-diagonal) is exponentiated as a
    whole: its real part is non-negative (it is half the real scalar
    product of the combined displacement), so the Gaussian factor never
    overflows even though individual cross terms are unbounded.
    """
    n = len(lams)
    x, w = gauss_laguerre(m)
    axes_u = []
    axes_w = []
    with np.errstate(under="ignore"):
        for j in range(n):
            re = lams[j].real
            u = x / re
            wj = (w / re).astype(complex)
            wj *= np.exp(-1j * u * lams[j].imag)
            if averaging is Averaging.NONE and pair[j] != 0:
                wj *= np.exp(-1j * u * pair[j].imag)
            axes_u.append(u)
            axes_w.append(wj)

    if n == 1:
        u = axes_u[0]
        with np.errstate(under="ignore"):
            g = np.exp(-0.5 * nu[0, 0] * u * u)
            if averaging is Averaging.BESSEL and pair[0] != 0:
                g = g * j0(np.abs(u * pair[0]))
        return np.sum(axes_w[0] * g)

    # grid over the trailing two axes, python loop over leading axes
    def block(fixed):
        uk = axes_u[-2][:, None]
        ul = axes_u[-1][None, :]
        expo = (nu[n - 2, n - 1] * uk * ul
                + 0.5 * nu[n - 2, n - 2] * uk * uk
                + 0.5 * nu[n - 1, n - 1] * ul * ul)
        zsum = 0.0
        for a, ia in enumerate(fixed):
            ua = axes_u[a][ia]
            expo = expo + nu[a, n - 2] * ua * uk + nu[a, n - 1] * ua * ul \
                + 0.5 * nu[a, a] * ua * ua
            for b in range(a + 1, n - 2):
                expo = expo + nu[a, b] * ua * axes_u[b][fixed[b]]
            zsum = zsum + ua * pair[a]
        with np.errstate(under="ignore"):
            g = np.exp(-expo)
            if averaging is Averaging.BESSEL and np.any(pair != 0):
                g = g * j0(np.abs(zsum + uk * pair[n - 2] + ul * pair[n - 1]))
        weight = np.prod([axes_w[a][ia] for a, ia in enumerate(fixed)]) if fixed else 1.0
        return weight * np.sum(axes_w[-2][:, None] * axes_w[-1][None, :] * g)

    if n == 2:
        return block(())
    total = 0.0
    if n == 3:
        for i0 in range(m):
            total += block((i0,))
        return total
    for i0 in range(m):
        for i1 in range(m):
            total += block((i0, i1))
    return total
