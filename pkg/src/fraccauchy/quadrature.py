"""Composite Gauss-Legendre rules on panels of the real line."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_ORDER = 16


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(
    edges: np.ndarray, order: int = DEFAULT_ORDER
) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule with one Gauss-Legendre block per panel.

    ``edges`` is an increasing (or decreasing) array of panel endpoints; for a
    decreasing array the weights come out negative, so the rule integrates in
    the direction the edges are listed.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def split_panels(edges: np.ndarray, level: int) -> np.ndarray:
    """Split every panel into ``2**level`` equal pieces."""
    edges = np.asarray(edges, dtype=float)
    if level == 0:
        return edges
    k = 2**level
    frac = np.arange(k) / k
    inner = edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * frac
    return np.append(inner.ravel(), edges[-1])


def geometric_edges(a: float, b: float, ratio: float = 0.5, smallest: float = 1e-14) -> np.ndarray:
    """Panel edges on [a, b] refined geometrically toward ``a``.

    Panel widths shrink by ``ratio`` approaching ``a`` until they fall below
    ``smallest * (b - a)``; used for integrands with an endpoint
    singularity of fractional-power type.
    """
    length = b - a
    edges = [b]
    width = length * (1 - ratio)
    pos = b
    while pos - a > smallest * length:
        pos = pos - width if pos - width > a else a
        edges.append(pos)
        width *= ratio
    if edges[-1] != a:
        edges.append(a)
    return np.array(edges[::-1])


def pairwise_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Deterministic pairwise (tree) reduction along ``axis``."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            v = np.concatenate([v, np.zeros_like(v[:1])])
        v = v[0::2] + v[1::2]
    return v[0]
