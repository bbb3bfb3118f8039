"""Quadrature helpers: panel-doubled Gauss-Legendre and weighted
Gauss-Jacobi rules for integrals against |s|^(2k).

Gauss-Jacobi nodes absorb the algebraic factor of the weight function
exactly, so integrands stay smooth and convergence is spectral; the
node/weight computation is delegated to scipy.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import AccuracyError

_LEG_CACHE = {}
_JAC_CACHE = {}


def _leg(n):
    if n not in _LEG_CACHE:
        _LEG_CACHE[n] = leggauss(n)
    return _LEG_CACHE[n]


def panel_gauss(f, a, b, n_panels, nodes_per_panel=16):
    """Composite Gauss-Legendre over [a, b]; f must accept an array."""
    x0, w0 = _leg(nodes_per_panel)
    edges = np.linspace(a, b, n_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    wts = (half[:, None] * w0[None, :]).ravel()
    return float(np.sum(np.asarray(f(pts), dtype=float) * wts))


def adaptive_doubling(f, a, b, rel_tol=1e-9, abs_floor=0.0,
                      start_panels=8, max_doublings=16, nodes_per_panel=16):
    """Double the panel count until successive estimates agree.

    Raises :class:`AccuracyError` (carrying the best value) when the
    doubling budget runs out.
    """
    n = start_panels
    prev = panel_gauss(f, a, b, n, nodes_per_panel)
    for _ in range(max_doublings):
        n *= 2
        cur = panel_gauss(f, a, b, n, nodes_per_panel)
        if abs(cur - prev) <= rel_tol * max(abs(cur), abs_floor) + 1e-300:
            return cur
        prev = cur
    raise AccuracyError(
        f"quadrature did not converge after {max_doublings} doublings",
        partial=prev)


def jacobi_halfline(two_k: float, length: float, n_nodes: int):
    """Nodes/weights (s_i, w_i) with sum w_i g(s_i) ~ int_0^L g(s) s^(2k) ds."""
    key = (round(two_k, 14), n_nodes)
    if key not in _JAC_CACHE:
        # weight (1-x)^0 (1+x)^(2k) on [-1, 1]
        _JAC_CACHE[key] = roots_jacobi(n_nodes, 0.0, two_k)
    x, w = _JAC_CACHE[key]
    s = 0.5 * length * (x + 1.0)
    # ds = L/2 dx and s^(2k) = (L/2)^(2k) (1+x)^(2k)
    wts = w * (0.5 * length) ** (two_k + 1.0)
    return s, wts


def jacobi_symmetric_line(two_k: float, length: float, n_nodes: int):
    """Nodes/weights for int_{-L}^{L} g(s) |s|^(2k) ds."""
    s, w = jacobi_halfline(two_k, length, n_nodes)
    return np.concatenate([-s[::-1], s]), np.concatenate([w[::-1], w])


def tensor_grid(axes):
    """Cartesian product of per-axis (nodes, weights) into (pts, wts)."""
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    wts = wgrids[0].copy()
    for wg in wgrids[1:]:
        wts = wts * wg
    return pts, wts.ravel()
