"""Spectral graph wavelet transform.

Band-pass kernels are applied to a graph signal across scales, either exactly
through the full eigenbasis or approximately through Chebyshev polynomials of
the sparse Laplacian. The Chebyshev path costs O(M|E| + MN(J+1)) for degree M,
J wavelet scales and one scaling band, and performs exactly M sparse
matrix-vector products per call.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ._accel import chebyshev_apply
from .errors import DimensionError
from .graphs import GraphSignal
from .spectral import EigenBasis, Laplacian

# Band kernel shape: quadratic ramp below the pass band, cubic spline across
# [1, 2], quadratic decay above. The spline joins both pieces with matching
# value and slope.
_SPLINE = (-5.0, 11.0, -6.0, 1.0)
# argmax of the spline piece on [1, 2]; the kernel peak value normalizes the
# low-pass kernel so both filters have comparable gain.
KERNEL_PEAK_ARG = 2.0 - 3.0 ** -0.5
KERNEL_PEAK = (_SPLINE[0] + _SPLINE[1] * KERNEL_PEAK_ARG
               + _SPLINE[2] * KERNEL_PEAK_ARG ** 2 + _SPLINE[3] * KERNEL_PEAK_ARG ** 3)

# Ratio between the largest eigenvalue and the design floor for the scaling
# kernel and the scale grid.
LOWPASS_FACTOR = 20.0


@dataclass(eq=False)
class SpectralKernel:
    """A nonnegative spectral response defined on [0, lambda_max]."""

    kind: str  # scaling-lowpass | wavelet-bandpass | pyramid-lowpass | pyramid-highpass
    params: dict
    func: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return self.func(np.asarray(x, dtype=np.float64))


def _band_shape(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    low = x < 1.0
    high = x > 2.0
    mid = ~(low | high)
    out = np.empty_like(x)
    out[low] = x[low] ** 2
    xm = x[mid]
    out[mid] = _SPLINE[0] + _SPLINE[1] * xm + _SPLINE[2] * xm ** 2 + _SPLINE[3] * xm ** 3
    with np.errstate(divide="ignore"):
        out[high] = 4.0 / x[high] ** 2
    return out


def wavelet_kernel() -> SpectralKernel:
    """Band-pass kernel g with g(0) = 0, evaluated at the scaled argument."""
    return SpectralKernel(kind="wavelet-bandpass", params={}, func=_band_shape)


def scaling_kernel(lambda_min_floor: float) -> SpectralKernel:
    """Low-pass kernel h(x) = gamma * exp(-(x / (0.6*floor))^4).

    ``gamma`` equals the band kernel's peak value so h(0) matches the maximum
    of g over all scales.
    """
    width = 0.6 * lambda_min_floor

    def h(x):
        return KERNEL_PEAK * np.exp(-((np.asarray(x, dtype=np.float64) / width) ** 4))

    return SpectralKernel(kind="scaling-lowpass", params={"width": width}, func=h)


@dataclass(eq=False)
class WaveletFilterBank:
    """Scaling kernel, wavelet kernel and a descending list of scales."""

    scaling_kernel: SpectralKernel
    wavelet_kernel: SpectralKernel
    scales: np.ndarray
    lambda_max: float

    @property
    def n_scales(self) -> int:
        return self.scales.shape[0]

    def kernel_at_scale(self, j: int) -> Callable[[np.ndarray], np.ndarray]:
        s = float(self.scales[j])
        return lambda x: self.wavelet_kernel(s * np.asarray(x, dtype=np.float64))


def design_filter_bank(lambda_max: float, n_scales: int) -> WaveletFilterBank:
    """Build the band filter bank for a spectrum [0, lambda_max].

    Scales are log-spaced, descending, between 2/floor and 2/lambda_max with
    floor = lambda_max / 20.

    Raises:
        ValueError: if lambda_max <= 0 or n_scales < 1.
    """
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    if n_scales < 1:
        raise ValueError("at least one wavelet scale is required")
    floor = lambda_max / LOWPASS_FACTOR
    scales = np.exp(np.linspace(np.log(2.0 / floor), np.log(2.0 / lambda_max),
                                n_scales))
    return WaveletFilterBank(scaling_kernel=scaling_kernel(floor),
                             wavelet_kernel=wavelet_kernel(),
                             scales=scales, lambda_max=float(lambda_max))


def frame_bounds(bank: WaveletFilterBank, grid) -> tuple[float, float]:
    """(A, B) = min/max over the grid of h(x)^2 + sum_j g(s_j x)^2.

    A > 0 means the bank leaves no spectral blind spot on the grid.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("frame bound evaluation needs a nonempty grid")
    total = bank.scaling_kernel(grid) ** 2
    for s in bank.scales:
        total = total + bank.wavelet_kernel(s * grid) ** 2
    return float(total.min()), float(total.max())


@dataclass(eq=False)
class ChebyshevApprox:
    """Shifted Chebyshev expansion of a kernel on [0, lambda_max]."""

    degree: int
    coefficients: np.ndarray  # c_0 .. c_M; evaluation uses c_0/2 + sum c_k T_k
    lambda_max: float
    max_error: float

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        a = self.lambda_max / 2.0
        t = (x - a) / a
        y_prev = np.ones_like(t)
        y = t.copy()
        out = 0.5 * self.coefficients[0] * y_prev
        if self.degree >= 1:
            out = out + self.coefficients[1] * y
        for k in range(2, self.degree + 1):
            y_next = 2.0 * t * y - y_prev
            out = out + self.coefficients[k] * y_next
            y_prev, y = y, y_next
        return out


def chebyshev_fit(kernel: Callable[[np.ndarray], np.ndarray], degree: int,
                  lambda_max: float, error_grid: int = 1000) -> ChebyshevApprox:
    """Fit a degree-M shifted Chebyshev expansion by cosine quadrature.

    ``max_error`` is the largest pointwise deviation sampled on a uniform
    grid over [0, lambda_max].
    """
    if degree < 1:
        raise ValueError("polynomial degree must be >= 1")
    a = lambda_max / 2.0
    n_quad = degree + 1
    theta = np.pi * (np.arange(1, n_quad + 1) - 0.5) / n_quad
    samples = kernel(a * np.cos(theta) + a)
    ks = np.arange(degree + 1)
    coeffs = (2.0 / n_quad) * (np.cos(np.outer(ks, theta)) @ samples)
    approx = ChebyshevApprox(degree=degree, coefficients=coeffs,
                             lambda_max=float(lambda_max), max_error=0.0)
    grid = np.linspace(0.0, lambda_max, error_grid)
    approx.max_error = float(np.max(np.abs(approx.evaluate(grid) - kernel(grid))))
    return approx


@dataclass(eq=False)
class WaveletCoefficients:
    """One scaling band plus J wavelet bands, each one value per vertex."""

    scaling_band: np.ndarray
    wavelet_bands: np.ndarray  # shape (J, N)
    matvec_count: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.scaling_band).all()
                and np.isfinite(self.wavelet_bands).all()):
            raise ValueError("wavelet coefficients contain non-finite values")

    @property
    def n_scales(self) -> int:
        return self.wavelet_bands.shape[0]

    def band(self, scale_index: int) -> np.ndarray:
        """Band by index: 0 is the scaling band, 1..J the wavelet scales."""
        if scale_index == 0:
            return self.scaling_band
        return self.wavelet_bands[scale_index - 1]

    def coefficient(self, scale_index: int, vertex: int) -> float:
        return float(self.band(scale_index)[vertex])


def sgwt_exact(x: GraphSignal, basis: EigenBasis,
               bank: WaveletFilterBank) -> WaveletCoefficients:
    """Exact transform through the full eigenbasis."""
    if len(x) != basis.n_nodes:
        raise DimensionError("signal length does not match eigenbasis size")
    spectrum = basis.eigenvectors.T @ x.values
    lam = basis.eigenvalues
    scaling = basis.eigenvectors @ (bank.scaling_kernel(lam) * spectrum)
    bands = np.empty((bank.n_scales, basis.n_nodes))
    for j, s in enumerate(bank.scales):
        bands[j] = basis.eigenvectors @ (bank.wavelet_kernel(s * lam) * spectrum)
    return WaveletCoefficients(scaling_band=scaling, wavelet_bands=bands)


def sgwt_chebyshev(x: GraphSignal, l: Laplacian, bank: WaveletFilterBank,
                   degree: int = 4, backend: str | None = None) -> WaveletCoefficients:
    """Fast transform using only sparse matvecs with the Laplacian.

    All J+1 bands share one recurrence pass, so the call performs exactly
    ``degree`` sparse matrix-vector products and never materializes a dense
    operator.
    """
    if len(x) != l.n_nodes:
        raise DimensionError("signal length does not match Laplacian size")
    if degree < 1:
        raise ValueError("polynomial degree must be >= 1")
    lmax = l.lambda_max_estimate
    if lmax <= 0.0:
        # Edgeless graph: L = 0, every kernel acts as multiplication by its
        # value at zero.
        scaling = bank.scaling_kernel(0.0) * x.values
        bands = np.zeros((bank.n_scales, l.n_nodes))
        return WaveletCoefficients(scaling_band=scaling, wavelet_bands=bands)
    coeffs = np.empty((bank.n_scales + 1, degree + 1))
    coeffs[0] = chebyshev_fit(bank.scaling_kernel, degree, lmax).coefficients
    for j in range(bank.n_scales):
        coeffs[j + 1] = chebyshev_fit(bank.kernel_at_scale(j), degree, lmax).coefficients
    out, matvecs = chebyshev_apply(l.matrix, x.values, coeffs, lmax / 2.0,
                                   backend=backend)
    return WaveletCoefficients(scaling_band=out[0], wavelet_bands=out[1:],
                               matvec_count=matvecs)


def export_coefficients_csv(w: WaveletCoefficients, path) -> None:
    """Dump bands as ``scale_index,vertex,value`` (scale 0 = scaling band)."""
    lines = ["scale_index,vertex,value"]
    for j in range(w.n_scales + 1):
        band = w.band(j)
        for v in range(band.shape[0]):
            lines.append(f"{j},{v},{band[v]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
