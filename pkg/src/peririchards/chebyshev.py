"""Chebyshev spectral core on Gauss-Lobatto grids.

Nodal fields and coefficient series are plain 1-D float64 arrays. A nodal
field on a grid of degree ``N`` has ``N + 1`` entries ordered like the nodes
(``z_0 = 1`` down to ``z_N = -1``); a series of degree ``M`` has ``M + 1``
coefficients multiplying ``T_0 .. T_M``.

Main functions
--------------
make_grid : build a :class:`SpectralGrid` for a physical interval
forward_transform, inverse_transform : discrete Chebyshev transform pair
series_product : coefficients of the product of two series
convolve : transform-space product evaluated back on a grid
projection_error : weighted L2 distance between a function and its interpolant
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft

MAX_DEGREE = 2 * 2048


@dataclass(frozen=True)
class SpectralGrid:
    """Gauss-Lobatto collocation grid with its affine map to a physical interval.

    Reference coordinates live on ``[-1, 1]``. The physical coordinate of a
    reference point ``z`` is ``map_scale * z + map_offset``. With the default
    orientation, reference ``+1`` (node 0) maps to ``phys_lo``.
    """

    n_modes: int
    phys_lo: float
    phys_hi: float
    surface_at_plus_one: bool = True
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n_modes
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise ValueError(f"n_modes must be an integer >= 2, got {n!r}")
        if n > MAX_DEGREE:
            raise ValueError(f"n_modes={n} exceeds the supported maximum {MAX_DEGREE}")
        if not (np.isfinite(self.phys_lo) and np.isfinite(self.phys_hi)):
            raise ValueError("physical endpoints must be finite")
        if not self.phys_lo < self.phys_hi:
            raise ValueError(
                f"degenerate interval: phys_lo={self.phys_lo} >= phys_hi={self.phys_hi}"
            )
        nodes = np.cos(np.arange(n + 1) * np.pi / n)
        weights = np.full(n + 1, np.pi / n)
        weights[[0, -1]] = np.pi / (2 * n)
        gammas = np.full(n + 1, np.pi / 2)
        gammas[[0, -1]] = np.pi
        for name, arr in (("nodes", nodes), ("weights", weights), ("gammas", gammas)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.n_modes + 1

    @property
    def map_scale(self) -> float:
        half = 0.5 * (self.phys_hi - self.phys_lo)
        return -half if self.surface_at_plus_one else half

    @property
    def map_offset(self) -> float:
        return 0.5 * (self.phys_hi + self.phys_lo)

    @property
    def jacobian(self) -> float:
        """Length of physical interval per unit reference length."""
        return abs(self.map_scale)

    def to_physical(self, z):
        return self.map_scale * np.asarray(z, dtype=float) + self.map_offset

    def to_reference(self, x):
        return (np.asarray(x, dtype=float) - self.map_offset) / self.map_scale

    @property
    def physical_nodes(self) -> np.ndarray:
        x = self.to_physical(self.nodes)
        # pin the endpoints so boundary nodes sit exactly on phys_lo / phys_hi
        x[self.index_lo] = self.phys_lo
        x[self.index_hi] = self.phys_hi
        return x

    @property
    def index_lo(self) -> int:
        """Node index sitting at ``phys_lo``."""
        return 0 if self.surface_at_plus_one else self.n_modes

    @property
    def index_hi(self) -> int:
        return self.n_modes if self.surface_at_plus_one else 0

    def refined(self, n_modes: int) -> "SpectralGrid":
        """Grid of another degree over the same physical interval and orientation."""
        return SpectralGrid(n_modes, self.phys_lo, self.phys_hi, self.surface_at_plus_one)


def make_grid(n_modes, phys_lo=-1.0, phys_hi=1.0, surface_at_plus_one=True):
    """Build the ``N + 1`` point Gauss-Lobatto grid ``z_h = cos(h pi / N)``.

    Parameters
    ----------
    n_modes : int
        Polynomial degree ``N`` (at least 2).
    phys_lo, phys_hi : float
        Physical interval mapped onto ``[-1, 1]``.
    surface_at_plus_one : bool
        If True, reference ``+1`` maps to ``phys_lo``; otherwise to ``phys_hi``.
    """
    return SpectralGrid(int(n_modes), float(phys_lo), float(phys_hi), bool(surface_at_plus_one))


def _as_nodal(u, grid: SpectralGrid) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.shape[0] != grid.size:
        raise ValueError(
            f"nodal field has shape {u.shape}, expected ({grid.size},) for N={grid.n_modes}"
        )
    if not np.all(np.isfinite(u)):
        raise ValueError("nodal field contains non-finite values")
    return u


def _as_series(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.shape[0] < 1:
        raise ValueError(f"coefficient series must be a non-empty 1-D array, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficient series contains non-finite values")
    return c


def degree(c) -> int:
    return len(c) - 1


def forward_transform(u, grid: SpectralGrid) -> np.ndarray:
    """Discrete Chebyshev transform of nodal values, via a type-I DCT.

    Returns ``c_k = (1/gamma_k) sum_h u(z_h) T_k(z_h) w_h`` for ``k = 0..N``.
    """
    u = _as_nodal(u, grid)
    n = grid.n_modes
    c = fft.dct(u, type=1) / n
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def forward_transform_direct(u, grid: SpectralGrid) -> np.ndarray:
    """O(N^2) evaluation of the same sum; kept as a reference for testing."""
    u = _as_nodal(u, grid)
    n = grid.n_modes
    k = np.arange(n + 1)
    tk = np.cos(np.outer(k, np.arange(n + 1)) * np.pi / n)  # T_k(z_h)
    return (tk @ (u * grid.weights)) / grid.gammas


def inverse_transform(c, grid: SpectralGrid) -> np.ndarray:
    """Evaluate ``sum_k c_k T_k`` at the nodes of ``grid``.

    Series of degree up to ``N`` are zero-padded and inverted with a type-I
    DCT. Longer series are evaluated exactly by Clenshaw recurrence.
    """
    c = _as_series(c)
    n = grid.n_modes
    if degree(c) > n:
        return np.polynomial.chebyshev.chebval(grid.nodes, c)
    a = np.zeros(n + 1)
    a[: len(c)] = c
    a[0] *= 2.0
    a[-1] *= 2.0
    return 0.5 * fft.dct(a, type=1)


def pad_to(c, deg: int) -> np.ndarray:
    """Zero-pad a series to degree ``deg``; the represented polynomial is unchanged."""
    c = _as_series(c)
    if deg < degree(c):
        raise ValueError(f"cannot pad a degree-{degree(c)} series down to degree {deg}")
    out = np.zeros(deg + 1)
    out[: len(c)] = c
    return out


def series_product(a, b) -> np.ndarray:
    """Chebyshev coefficients of the product of two degree-``N`` series.

    The result has degree ``2N`` and is exact (``T_i T_j = (T_{i+j} + T_{|i-j|}) / 2``).
    With ``H`` as ``a`` and ``K`` as ``b``::

        2 L_0 = 2 a_0 b_0 + sum_{l=1}^{N} a_l b_l
        2 L_j = sum_{l=0}^{j} a_{j-l} b_l + sum_{l=0}^{N-j} a_{j+l} b_l
                + sum_{l=j}^{N} a_{l-j} b_l,               j = 1..N
        2 L_j = sum_{l=j-N}^{N} a_{j-l} b_l,               j = N+1..2N
    """
    a = _as_series(a)
    b = _as_series(b)
    if len(a) != len(b):
        raise ValueError(f"degree mismatch: {degree(a)} vs {degree(b)}")
    n = degree(a)
    # conv[j] = sum_{l} a_{j-l} b_l; up[j] = sum_l a_{j+l} b_l; down[j] = sum_l a_{l-j} b_l
    conv = np.convolve(a, b)
    up = np.correlate(a, b, mode="full")[n:]
    down = np.correlate(b, a, mode="full")[n:]
    twice = np.empty(2 * n + 1)
    twice[0] = 2.0 * a[0] * b[0] + np.dot(a[1:], b[1:])
    twice[1 : n + 1] = conv[1 : n + 1] + up[1:] + down[1:]
    twice[n + 1 :] = conv[n + 1 :]
    return 0.5 * twice


def series_product_pointwise(a, b) -> np.ndarray:
    """Product by sampling both series on a ``2N + 1`` node grid and transforming back."""
    a = _as_series(a)
    b = _as_series(b)
    if len(a) != len(b):
        raise ValueError(f"degree mismatch: {degree(a)} vs {degree(b)}")
    n = degree(a)
    if n == 0:
        return a * b
    fine = make_grid(2 * n)
    return forward_transform(inverse_transform(a, fine) * inverse_transform(b, fine), fine)


def convolve(kernel_coeffs, field_coeffs, grid: SpectralGrid) -> np.ndarray:
    """Multiply two series coefficient-wise and evaluate the result on ``grid``."""
    k = _as_series(kernel_coeffs)
    f = _as_series(field_coeffs)
    if len(k) != grid.size or len(f) != grid.size:
        raise ValueError(
            f"series degrees ({degree(k)}, {degree(f)}) must both equal grid degree {grid.n_modes}"
        )
    return inverse_transform(k * f, grid)


def interpolate(u, grid: SpectralGrid, target: SpectralGrid) -> np.ndarray:
    """Values of the degree-``N`` interpolant of ``u`` at the nodes of ``target``."""
    return inverse_transform(forward_transform(u, grid), target)


def weighted_norm(u, grid: SpectralGrid) -> float:
    """Discrete Chebyshev-weighted L2 norm ``sqrt(sum_h w_h u_h^2)``."""
    u = _as_nodal(u, grid)
    return float(np.sqrt(np.dot(grid.weights, u * u)))


def projection_error(u: Callable, grid: SpectralGrid, norm: str = "L2w", oversample: int = 8) -> float:
    """Weighted L2 distance between ``u`` and its interpolant on ``grid``.

    The distance is measured with the Gauss-Lobatto quadrature of a grid
    ``oversample`` times finer (at least degree 256), since both functions
    agree at the interpolation nodes themselves.
    """
    if norm != "L2w":
        raise ValueError(f"unsupported norm {norm!r}")
    dense = make_grid(max(oversample * grid.n_modes, 256))
    coeffs = forward_transform(u(grid.nodes), grid)
    diff = u(dense.nodes) - inverse_transform(coeffs, dense)
    return weighted_norm(diff, dense)


def clenshaw_curtis_weights(grid: SpectralGrid) -> np.ndarray:
    """Weights for the plain integral ``int_{-1}^{1} u dz`` at the nodes of ``grid``."""
    n = grid.n_modes
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    interior = theta[1:-1]
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * interior) / (4 * k * k - 1)
        v -= np.cos(n * interior) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * interior) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / n
    return w
