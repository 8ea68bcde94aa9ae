"""Cached quadrature nodes and panel-based radial integration helpers."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_hermite(n: int):
    """Nodes/weights for weight exp(-x^2) on the real line."""
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Nodes/weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=16)
def gauss_laguerre(n: int):
    """Nodes/weights for weight exp(-x) on [0, inf).

    scipy's rule stays finite at large n (extreme-node weights underflow
    cleanly to zero, and those nodes contribute nothing for bounded
    integrands); numpy's breaks down beyond ~150 nodes.
    """
    from scipy.special import roots_laguerre
    with np.errstate(under="ignore"):
        x, w = roots_laguerre(n)
    return x, w


def legendre_panel(a: float, b: float, n: int):
    """Gauss-Legendre rule mapped to [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def panel_nodes(edges, nodes_per_panel: int):
    """Concatenated Gauss-Legendre rules over consecutive panels."""
    xs = []
    ws = []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = legendre_panel(float(a), float(b), nodes_per_panel)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def radial_edges(outer: float, n_panels: int, inner_splits: int = 4):
    """Uniform panel edges on [0, outer] with a geometric prefix at 0.

    The first uniform panel is subdivided by factors of two so steep
    Bose-type weights near the origin are resolved; the uniform body
    resolves oscillatory phases once n_panels is large enough.
    """
    width = outer / n_panels
    prefix = width * 0.5 ** np.arange(inner_splits, 0, -1)
    body = width * np.arange(1, n_panels + 1)
    return np.concatenate(([0.0], prefix, body))


class QuadratureError(RuntimeError):
    """Raised when an adaptive rule fails to reach its tolerance."""

    def __init__(self, message, last_estimates=None):
        super().__init__(message)
        self.last_estimates = last_estimates


def refine_radial(integrand, outer: float, rtol: float, *,
                  nodes_per_panel: int = 24, start_panels: int = 8, max_doublings: int = 8):
    """Integrate `integrand(r)` on (0, outer] with panel-doubling refinement.

    `integrand` must accept a vector of radii and return values of the same
    shape (complex allowed).  Uniform panels (with a geometric prefix at 0)
    double until two successive estimates agree to `rtol`.
    """
    n_panels = start_panels
    estimates = []
    for _ in range(max_doublings + 1):
        r, w = panel_nodes(radial_edges(outer, n_panels), nodes_per_panel)
        estimates.append(np.sum(w * integrand(r)))
        if len(estimates) > 1 and abs(estimates[-1] - estimates[-2]) <= rtol * max(1.0, abs(estimates[-1])):
            return estimates[-1]
        n_panels *= 2
    raise QuadratureError(
        f"radial rule did not converge to rtol={rtol:g}; last two estimates "
        f"{estimates[-2]!r}, {estimates[-1]!r}",
        last_estimates=tuple(estimates[-2:]),
    )
