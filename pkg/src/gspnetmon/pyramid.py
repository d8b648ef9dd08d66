"""Multiscale pyramid: per level, complementary low/high-pass filtering,
downsampling to the ceil-half vertex set, and Kron reduction of the Laplacian.

Detail (high-pass) signals live on the fine vertex set of the level they were
computed on, before downsampling, which keeps localization resolution maximal.
The coarsest level is not downsampled further but still gets a high-pass
detail so localization can seed from it; consumers fall back to the centered
approximation when the detail is degenerate.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GraphError
from .graphs import GraphSignal, LayerGraph, layer_from_adjacency
from .sgwt import SpectralKernel, WaveletFilterBank, chebyshev_fit
from ._accel import chebyshev_apply
from .spectral import (DENSE_EIGENSOLVER_CAP, EigenBasis, Laplacian,
                       eigendecompose, estimate_lambda_max, laplacian)


def pyramid_kernel_pair(lambda_max: float) -> tuple[SpectralKernel, SpectralKernel]:
    """Complementary pair: lp(x) = exp(-(2x/lambda_max)^4), hp = sqrt(1-lp^2).

    The squared responses sum to one pointwise, so low- plus high-pass output
    energy equals input energy exactly under an orthonormal eigenbasis.
    """
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")

    def lp(x):
        return np.exp(-((2.0 * np.asarray(x, dtype=np.float64) / lambda_max) ** 4))

    def hp(x):
        return np.sqrt(np.maximum(0.0, 1.0 - lp(x) ** 2))

    return (SpectralKernel(kind="pyramid-lowpass", params={"lambda_max": lambda_max}, func=lp),
            SpectralKernel(kind="pyramid-highpass", params={"lambda_max": lambda_max}, func=hp))


def pyramid_filter_bank(lambda_max: float) -> WaveletFilterBank:
    """The complementary pair packaged as a single-scale filter bank."""
    lp, hp = pyramid_kernel_pair(lambda_max)
    return WaveletFilterBank(scaling_kernel=lp, wavelet_kernel=hp,
                             scales=np.array([1.0]), lambda_max=float(lambda_max))


@dataclass(eq=False)
class PyramidLevel:
    """One resolution level: graph, Laplacian, approximation signal, and the
    high-pass detail filled in when the level is coarsened."""

    index: int
    graph: LayerGraph
    laplacian: Laplacian
    approx: GraphSignal
    detail: GraphSignal | None = None
    parent_map: np.ndarray | None = None  # local vertex -> vertex id one level up

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes


@dataclass(eq=False)
class Pyramid:
    levels: tuple[PyramidLevel, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(lv.n_nodes for lv in self.levels)

    @property
    def coarsest(self) -> PyramidLevel:
        return self.levels[-1]

    @property
    def total_vertices(self) -> int:
        return sum(self.sizes)


def pyramid_level_sizes(n: int, levels: int) -> tuple[int, ...]:
    """Vertex counts produced by ``levels`` rounds of ceil-halving from n.

    Raises:
        ValueError: when a round would start from fewer than 2 vertices.
    """
    if n < 1:
        raise ValueError("vertex count must be positive")
    if levels < 0:
        raise ValueError("level count must be nonnegative")
    sizes = [n]
    for _ in range(levels):
        if sizes[-1] < 2:
            raise ValueError(
                f"{levels} levels is too deep for {n} vertices; "
                "each coarsening needs at least 2 vertices")
        sizes.append(math.ceil(sizes[-1] / 2))
    return tuple(sizes)


def _top_eigenvector(l: Laplacian, cap: int) -> np.ndarray:
    if l.n_nodes <= cap:
        basis = eigendecompose(l, cap=cap)
        return basis.eigenvectors[:, -1]
    v0 = np.cos(0.7 * np.arange(l.n_nodes)) + 0.1
    _, vec = spla.eigsh(l.matrix, k=1, which="LA", v0=v0)
    vec = vec[:, 0]
    nz = np.flatnonzero(np.abs(vec) > 1e-12)
    if nz.size and vec[nz[0]] < 0:
        vec = -vec
    return vec


def select_vertices(basis_or_laplacian, cap: int = DENSE_EIGENSOLVER_CAP) -> np.ndarray:
    """Vertices kept by downsampling: the ceil(N/2) with the largest values in
    the top-eigenvalue eigenvector (sign-fixed), ties broken by lower id.

    Raises:
        GraphError: for disconnected graphs; decompose per component instead.
    """
    if isinstance(basis_or_laplacian, EigenBasis):
        basis = basis_or_laplacian
        n = basis.n_nodes
        if n < 2:
            raise GraphError("downsampling needs at least 2 vertices")
        if basis.eigenvalues[1] <= 1e-9:
            raise GraphError("graph is disconnected; decompose per connected component")
        vec = basis.eigenvectors[:, -1]
    else:
        l: Laplacian = basis_or_laplacian
        n = l.n_nodes
        if n < 2:
            raise GraphError("downsampling needs at least 2 vertices")
        if not l.source.is_connected():
            raise GraphError("graph is disconnected; decompose per connected component")
        vec = _top_eigenvector(l, cap)
    order = np.lexsort((np.arange(n), -vec))
    keep = math.ceil(n / 2)
    return np.sort(order[:keep])


def kron_reduce(l: Laplacian, kept) -> Laplacian:
    """Schur complement of the Laplacian over the removed vertex set.

    The result is a valid Laplacian (zero row sums, nonpositive off-diagonal,
    PSD) on the kept vertices; its source graph inherits labels and roles.
    """
    kept = np.unique(np.asarray(kept, dtype=np.int64))
    n = l.n_nodes
    if kept.size == 0 or kept.size >= n:
        raise GraphError("kept set must be a nonempty proper subset")
    if kept.min() < 0 or kept.max() >= n:
        raise GraphError("kept set references vertices outside the graph")
    if not l.source.is_connected():
        raise GraphError("Kron reduction requires a connected graph")
    dense = l.matrix.toarray()
    removed = np.setdiff1d(np.arange(n), kept)
    l_kk = dense[np.ix_(kept, kept)]
    l_kr = dense[np.ix_(kept, removed)]
    l_rr = dense[np.ix_(removed, removed)]
    reduced = l_kk - l_kr @ scipy.linalg.solve(l_rr, l_kr.T, assume_a="pos")
    reduced = 0.5 * (reduced + reduced.T)

    weights = -reduced
    np.fill_diagonal(weights, 0.0)
    scale = max(weights.max(initial=0.0), -weights.min(initial=0.0), 1e-300)
    if weights.min(initial=0.0) < -1e-6 * scale:
        raise RuntimeError("Kron reduction produced a positive off-diagonal entry")
    weights[weights < 1e-12 * scale] = 0.0

    g = l.source
    coarse = layer_from_adjacency(sp.csr_matrix(weights),
                                  labels=[g.labels[v] for v in kept],
                                  roles=[g.roles[v] for v in kept],
                                  layer_index=g.layer_index)
    matrix = (sp.diags(weights.sum(axis=1)) - sp.csr_matrix(weights)).tocsr()
    matrix.sort_indices()
    return Laplacian(matrix=matrix, source=coarse,
                     lambda_max_estimate=estimate_lambda_max(matrix))


_structure_cache: "weakref.WeakKeyDictionary[Laplacian, tuple]" = weakref.WeakKeyDictionary()


def _coarsen_structure(l: Laplacian, cap: int) -> tuple[np.ndarray, Laplacian]:
    """Kept set and reduced Laplacian for one level; cached per Laplacian."""
    hit = _structure_cache.get(l)
    if hit is not None:
        return hit
    kept = select_vertices(l, cap=cap)
    reduced = kron_reduce(l, kept)
    _structure_cache[l] = (kept, reduced)
    return kept, reduced


def _filter_pair(level: PyramidLevel, degree: int, cap: int) -> tuple[np.ndarray, np.ndarray]:
    lap = level.laplacian
    lmax = lap.lambda_max_estimate
    x = level.approx.values
    if lmax <= 0.0:
        # Edgeless level: the low-pass is the identity, nothing to reject.
        return x.copy(), np.zeros_like(x)
    lp, hp = pyramid_kernel_pair(lmax)
    if level.n_nodes <= cap:
        basis = eigendecompose(lap, cap=cap)
        spectrum = basis.eigenvectors.T @ x
        low = basis.eigenvectors @ (lp(basis.eigenvalues) * spectrum)
        high = basis.eigenvectors @ (hp(basis.eigenvalues) * spectrum)
        return low, high
    coeffs = np.vstack([chebyshev_fit(lp, degree, lmax).coefficients,
                        chebyshev_fit(hp, degree, lmax).coefficients])
    out, _ = chebyshev_apply(lap.matrix, x, coeffs, lmax / 2.0)
    return out[0], out[1]


def coarsen_once(level: PyramidLevel, degree: int = 4,
                 cap: int = DENSE_EIGENSOLVER_CAP) -> PyramidLevel:
    """Produce the next-coarser level and store the high-pass detail on the
    given level.

    The approximation is the low-pass output restricted to the kept vertices;
    the coarse Laplacian is the Kron reduction over the removed ones.
    """
    if level.n_nodes < 2:
        raise GraphError("cannot coarsen a level with fewer than 2 vertices")
    low, high = _filter_pair(level, degree, cap)
    level.detail = GraphSignal(layer_index=level.graph.layer_index, values=high,
                               interval_index=level.approx.interval_index)
    kept, reduced = _coarsen_structure(level.laplacian, cap)
    approx = GraphSignal(layer_index=level.graph.layer_index, values=low[kept],
                         interval_index=level.approx.interval_index)
    return PyramidLevel(index=level.index + 1, graph=reduced.source,
                        laplacian=reduced, approx=approx, parent_map=kept)


def build_pyramid(x: GraphSignal, g: LayerGraph, levels: int, degree: int = 4,
                  cap: int = DENSE_EIGENSOLVER_CAP) -> Pyramid:
    """Decompose a signal into ``levels`` rounds of coarsening.

    Level 0 holds the input graph and signal; level sizes follow exact
    ceil-halving.
    """
    if levels < 1:
        raise ValueError("at least one pyramid level is required")
    if len(x) != g.n_nodes:
        raise GraphError("signal length does not match the graph")
    pyramid_level_sizes(g.n_nodes, levels)  # validates depth
    current = PyramidLevel(index=0, graph=g, laplacian=laplacian(g), approx=x)
    out = [current]
    for _ in range(levels):
        current = coarsen_once(current, degree=degree, cap=cap)
        out.append(current)
    # High-pass the coarsest level too: localization seeds from its detail.
    _, high = _filter_pair(current, degree, cap)
    current.detail = GraphSignal(layer_index=current.graph.layer_index,
                                 values=high,
                                 interval_index=current.approx.interval_index)
    return Pyramid(levels=tuple(out))


def level_doc(level: PyramidLevel) -> dict:
    """JSON-ready view of one level."""
    return {
        "level": level.index,
        "vertex_ids": list(level.graph.labels),
        "parent_map": (None if level.parent_map is None
                       else {str(i): int(p) for i, p in enumerate(level.parent_map)}),
        "approx": [float(v) for v in level.approx.values],
        "detail": (None if level.detail is None
                   else [float(v) for v in level.detail.values]),
    }
