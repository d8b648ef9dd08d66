"""Backend selection for the hot numeric kernel.

The Chebyshev three-term recurrence dominates runtime on large graphs: it is
the only O(M|E|) loop in the package. Two implementations are kept in
lockstep, a numba ``@njit`` kernel over raw CSR arrays and a numpy/scipy
fallback that uses the library sparse matvec. Set ``GSPNETMON_BACKEND`` to
``numba`` or ``numpy`` to force one; the default is numba when importable.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False


def _select_backend() -> str:
    env = os.environ.get("GSPNETMON_BACKEND", "").strip().lower()
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("GSPNETMON_BACKEND=numba but numba is not installed")
        return "numba"
    if env:
        raise RuntimeError(f"unknown GSPNETMON_BACKEND value {env!r}")
    return "numba" if _HAVE_NUMBA else "numpy"


BACKEND = _select_backend()


def active_backend() -> str:
    """Name of the backend used when no explicit backend is requested."""
    return BACKEND


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _cheby_csr_numba(indptr, indices, data, x, coeffs, half_width):  # pragma: no cover
        # Shifted operator S = (L - aI)/a maps [0, 2a] onto [-1, 1].
        # y_k = T_k(S) x is built by y_{k+1} = 2 S y_k - y_{k-1}; every band
        # accumulates from the same y_k vectors, so the matvec count is the
        # polynomial degree, independent of the number of bands.
        n_bands, m_plus_1 = coeffs.shape
        n = x.shape[0]
        out = np.zeros((n_bands, n))
        y0 = x.copy()
        if m_plus_1 == 1:
            for b in range(n_bands):
                c0 = 0.5 * coeffs[b, 0]
                for i in range(n):
                    out[b, i] = c0 * y0[i]
            return out
        y1 = np.empty(n)
        for i in range(n):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * x[indices[k]]
            y1[i] = acc / half_width - x[i]
        for b in range(n_bands):
            c0 = 0.5 * coeffs[b, 0]
            c1 = coeffs[b, 1]
            for i in range(n):
                out[b, i] = c0 * y0[i] + c1 * y1[i]
        y2 = np.empty(n)
        for k in range(2, m_plus_1):
            for i in range(n):
                acc = 0.0
                for t in range(indptr[i], indptr[i + 1]):
                    acc += data[t] * y1[indices[t]]
                y2[i] = 2.0 * (acc / half_width - y1[i]) - y0[i]
            for b in range(n_bands):
                cb = coeffs[b, k]
                for i in range(n):
                    out[b, i] += cb * y2[i]
            tmp = y0
            y0 = y1
            y1 = y2
            y2 = tmp
        return out


def _cheby_csr_numpy(matrix: sp.csr_matrix, x, coeffs, half_width):
    n_bands, m_plus_1 = coeffs.shape
    y0 = x.copy()
    if m_plus_1 == 1:
        return 0.5 * coeffs[:, :1] * y0[None, :]
    y1 = (matrix @ x) / half_width - x
    out = 0.5 * coeffs[:, 0:1] * y0[None, :] + coeffs[:, 1:2] * y1[None, :]
    for k in range(2, m_plus_1):
        y2 = 2.0 * ((matrix @ y1) / half_width - y1) - y0
        out += coeffs[:, k:k + 1] * y2[None, :]
        y0, y1 = y1, y2
    return out


def chebyshev_apply(matrix: sp.csr_matrix, x: np.ndarray, coeffs: np.ndarray,
                    half_width: float, backend: str | None = None):
    """Apply several Chebyshev polynomials of a sparse symmetric matrix to x.

    ``coeffs`` has one row per band, M+1 columns; row b encodes
    ``0.5*c[b,0] + sum_k c[b,k] T_k((A - aI)/a)`` with ``a = half_width``.

    Returns:
        (bands, matvec_count): array of shape (n_bands, n) and the number of
        sparse matrix-vector products performed (always the degree M).
    """
    which = backend or BACKEND
    x = np.ascontiguousarray(x, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    degree = coeffs.shape[1] - 1
    if which == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        out = _cheby_csr_numba(matrix.indptr, matrix.indices,
                               matrix.data, x, coeffs, float(half_width))
    elif which == "numpy":
        out = _cheby_csr_numpy(matrix, x, coeffs, float(half_width))
    else:
        raise ValueError(f"unknown backend {which!r}")
    return out, degree


def warmup(backend: str | None = None) -> None:
    """Trigger JIT compilation on a tiny problem so timings stay clean."""
    mat = sp.csr_matrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    chebyshev_apply(mat, np.ones(2), np.ones((2, 4)), 1.0, backend=backend)
