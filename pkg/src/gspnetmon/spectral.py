"""Graph Laplacian, eigenbasis, graph Fourier transform, and the
high-frequency anomaly statistic.

The combinatorial Laplacian L = D - A is the default operator. A normalized
variant is available behind a flag but the shipped pipeline does not use it.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DimensionError
from .graphs import GraphSignal, LayerGraph

# Largest graph handled by the dense eigensolver; larger graphs must go
# through the Chebyshev path.
DENSE_EIGENSOLVER_CAP = 4096

_POWER_ITERATIONS = 50
_POWER_SEED = 0x5D17


@dataclass(eq=False)
class Laplacian:
    """Combinatorial Laplacian of a layer, with a cheap upper bound on its
    spectral radius (power method estimate inflated by 1%)."""

    matrix: sp.csr_matrix
    source: LayerGraph
    lambda_max_estimate: float
    normalized: bool = False

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]


@dataclass(eq=False)
class EigenBasis:
    """Full ascending eigensystem of a Laplacian.

    Eigenvectors are columns, orthonormal, with the sign fixed so the first
    nonzero component of each column is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


@dataclass(eq=False)
class Spectrum:
    """Graph Fourier coefficients aligned to ascending eigenvalue order."""

    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)


def estimate_lambda_max(matrix: sp.csr_matrix) -> float:
    """Spectral radius estimate: ~50 power iterations, then +1% headroom."""
    n = matrix.shape[0]
    if n == 0 or matrix.nnz == 0:
        return 0.0
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(_POWER_ITERATIONS):
        w = matrix @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = norm
    return float(lam) * 1.01


_lap_cache: "weakref.WeakKeyDictionary[LayerGraph, Laplacian]" = weakref.WeakKeyDictionary()


def laplacian(g: LayerGraph, normalized: bool = False) -> Laplacian:
    """L = D - A (or I - D^-1/2 A D^-1/2 when ``normalized``).

    The combinatorial form is memoized per graph, so downstream caches keyed
    on the Laplacian (eigenbasis, coarsening structure) are shared by every
    signal processed on the same graph.
    """
    if not normalized:
        cached = _lap_cache.get(g)
        if cached is not None:
            return cached
    deg = g.degrees()
    if normalized:
        with np.errstate(divide="ignore"):
            inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
        d_half = sp.diags(inv_sqrt)
        ident = sp.diags(np.where(deg > 0, 1.0, 0.0))
        mat = (ident - d_half @ g.adjacency @ d_half).tocsr()
    else:
        mat = (sp.diags(deg) - g.adjacency).tocsr()
    mat.sort_indices()
    lap = Laplacian(matrix=mat, source=g,
                    lambda_max_estimate=estimate_lambda_max(mat),
                    normalized=normalized)
    if not normalized:
        _lap_cache[g] = lap
    return lap


def _fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip each column so its first component larger than ``tol`` is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


_basis_cache: "weakref.WeakKeyDictionary[Laplacian, EigenBasis]" = weakref.WeakKeyDictionary()


def eigendecompose(l: Laplacian, cap: int = DENSE_EIGENSOLVER_CAP) -> EigenBasis:
    """Dense full eigendecomposition with a deterministic sign convention.

    Raises:
        CapacityError: when the graph exceeds the dense cap; callers should
            use the Chebyshev transform path instead of a full basis.
    """
    cached = _basis_cache.get(l)
    if cached is not None:
        return cached
    n = l.n_nodes
    if n > cap:
        raise CapacityError(
            f"graph has {n} nodes, above the dense eigensolver cap {cap}; "
            "use the Chebyshev path")
    vals, vecs = np.linalg.eigh(l.matrix.toarray())
    basis = EigenBasis(eigenvalues=vals, eigenvectors=_fix_signs(vecs))
    _basis_cache[l] = basis
    return basis


def gft(x: GraphSignal, basis: EigenBasis) -> Spectrum:
    """Forward graph Fourier transform: coefficients of x in the eigenbasis."""
    if len(x) != basis.n_nodes:
        raise DimensionError(f"signal length {len(x)} != basis size {basis.n_nodes}")
    return Spectrum(coefficients=basis.eigenvectors.T @ x.values)


def igft(s: Spectrum, basis: EigenBasis, layer_index: int = 0,
         interval_index: int = 0) -> GraphSignal:
    """Inverse graph Fourier transform (exact inverse of :func:`gft`)."""
    if s.coefficients.shape[0] != basis.n_nodes:
        raise DimensionError("spectrum length does not match basis size")
    return GraphSignal(layer_index=layer_index,
                       values=basis.eigenvectors @ s.coefficients,
                       interval_index=interval_index)


def high_frequency_ratio(s: Spectrum, basis: EigenBasis,
                         cutoff_fraction: float = 0.5) -> float:
    """Fraction of non-DC spectral energy above ``cutoff_fraction * lambda_max``.

    The DC coefficient is excluded from the denominator so the overall traffic
    level cannot mask a shape anomaly. Returns 0 when there is no non-DC
    energy. Invariant under positive scaling of the signal.
    """
    if not 0.0 < cutoff_fraction < 1.0:
        raise ValueError("cutoff_fraction must lie strictly between 0 and 1")
    if s.coefficients.shape[0] != basis.n_nodes:
        raise DimensionError("spectrum length does not match basis size")
    energy = s.coefficients ** 2
    non_dc = energy[1:].sum()
    # Relative floor: a nominally constant signal keeps ~1e-12 of its
    # amplitude as numerical dust after filtering on float graphs; treat that
    # as zero rather than ranking noise.
    if non_dc <= 1e-24 * energy.sum():
        return 0.0
    cutoff = cutoff_fraction * basis.lambda_max
    high = energy[basis.eigenvalues > cutoff].sum()
    return float(high / non_dc)


def export_spectrum_csv(s: Spectrum, basis: EigenBasis, path) -> None:
    """Write ``j,lambda,coefficient`` rows with 17 significant digits."""
    lines = ["j,lambda,coefficient"]
    for j in range(basis.n_nodes):
        lines.append(f"{j},{basis.eigenvalues[j]:.17g},{s.coefficients[j]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
