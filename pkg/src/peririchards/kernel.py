"""Influence functions, the scaled kernel ``phi(z) / |z|`` and its integral beta.

Three families are supported, all even in ``z`` with horizon ``delta`` given
in reference coordinates:

* ``uniform``: ``2 / delta`` on ``|z| <= delta``
* ``linear``: ``1 - |z| / delta`` on ``|z| <= delta``
* ``distributed``: ``(|z| - 1 + delta) / delta`` on ``|z| >= 1 - delta``

The distributed formula is used as written for every ``|z| >= 1 - delta``,
including the range ``1 < |z| <= 2`` reached by differences of two points of
``[-1, 1]``.

Uniform and linear kernels divided by ``|z|`` are not integrable at the
origin. They are regularized by replacing ``|z|`` with ``max(|z|, z_floor)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .chebyshev import SpectralGrid

FAMILIES = ("uniform", "linear", "distributed")
BETA_TOLERANCE = 1e-8


class RegularizedKernelWarning(UserWarning):
    """The kernel integral only exists after regularization at the origin."""


def _check(family: str, delta: float):
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; expected one of {FAMILIES}")
    if not (np.isfinite(delta) and 0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")


def evaluate_phi(family: str, delta: float, z):
    """Influence function of ``family`` at reference offset ``z``."""
    _check(family, delta)
    a = np.abs(np.asarray(z, dtype=float))
    if family == "uniform":
        return np.where(a <= delta, 2.0 / delta, 0.0)
    if family == "linear":
        return np.where(a <= delta, 1.0 - a / delta, 0.0)
    return np.where(a >= 1.0 - delta, (a - 1.0 + delta) / delta, 0.0)


def needs_regularization(family: str) -> bool:
    return family != "distributed"


def evaluate_phibar(family: str, delta: float, z, z_floor: float | None = None):
    """Scaled kernel ``phi(z) / |z|``.

    The distributed kernel vanishes on ``|z| < 1 - delta`` and is set to 0 at
    the origin. The other families need ``z_floor > 0``.
    """
    phi = evaluate_phi(family, delta, z)
    a = np.abs(np.asarray(z, dtype=float))
    if needs_regularization(family):
        if z_floor is None or not z_floor > 0:
            raise ValueError(f"{family} kernel needs a positive z_floor for regularization")
        return phi / np.maximum(a, z_floor)
    safe = np.where(a > 0, a, 1.0)
    return np.where(a > 0, phi / safe, 0.0)


def beta_closed_form(family: str, delta: float, z_floor: float | None = None) -> float:
    """Integral of the scaled kernel over ``[-1, 1]`` in closed form.

    Distributed: ``2 (1 + ((1 - delta)/delta) ln(1 - delta))``. The regularized
    uniform and linear integrals follow from splitting at ``z_floor``.
    """
    _check(family, delta)
    if family == "distributed":
        return 2.0 * (1.0 + (1.0 - delta) / delta * np.log1p(-delta))
    if z_floor is None or not z_floor > 0:
        raise ValueError(f"{family} kernel needs a positive z_floor for regularization")
    f = min(z_floor, delta)
    if family == "uniform":
        return 4.0 / delta * (f / z_floor + np.log(delta / f))
    return 2.0 * (f / z_floor * (1.0 - f / (2.0 * delta)) + np.log(delta / f) - (delta - f) / delta)


def beta_quadrature(family: str, delta: float, z_floor: float | None = None) -> float:
    """Adaptive Gauss-Kronrod integral of the scaled kernel over ``[0, 1]``, doubled."""
    _check(family, delta)
    breaks = {delta, 1.0 - delta}
    if z_floor is not None and 0 < z_floor < 1:
        breaks.add(z_floor)
    pts = sorted(b for b in breaks if 0.0 < b < 1.0)
    edges = [0.0, *pts, 1.0]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(
            lambda x: float(evaluate_phibar(family, delta, x, z_floor)),
            lo,
            hi,
            epsabs=1e-14,
            epsrel=1e-13,
            limit=200,
        )
        total += val
    return 2.0 * total


def compute_beta(family: str, delta: float, z_floor: float | None = None) -> float:
    """Closed-form beta, cross-checked against quadrature.

    Raises ``ArithmeticError`` if the two disagree by more than ``BETA_TOLERANCE``.
    Regularized families emit a :class:`RegularizedKernelWarning`.
    """
    closed = beta_closed_form(family, delta, z_floor)
    quad = beta_quadrature(family, delta, z_floor)
    if abs(closed - quad) > BETA_TOLERANCE * max(1.0, abs(closed)):
        raise ArithmeticError(f"beta mismatch for {family}: closed form {closed!r}, quadrature {quad!r}")
    if needs_regularization(family):
        warnings.warn(
            f"{family} kernel integral diverges at 0; using the value regularized at z_floor={z_floor:g}",
            RegularizedKernelWarning,
            stacklevel=2,
        )
    return closed


def grid_floor(grid: SpectralGrid) -> float:
    """Smallest node magnitude of ``grid``, ignoring the centre node of even grids."""
    mags = np.abs(grid.nodes)
    if grid.n_modes % 2 == 0:
        mags = np.delete(mags, grid.n_modes // 2)
    return float(mags.min())


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family sampled on a grid, with its normalization."""

    family: str
    delta: float
    grid: SpectralGrid = field(repr=False)
    beta: float = field(init=False)
    beta_quad: float = field(init=False, repr=False)
    z_floor: float | None = field(init=False)
    nodal_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check(self.family, self.delta)
        z_floor = grid_floor(self.grid) if needs_regularization(self.family) else None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegularizedKernelWarning)
            beta = compute_beta(self.family, self.delta, z_floor)
        values = evaluate_phibar(self.family, self.delta, self.grid.nodes, z_floor)
        values.setflags(write=False)
        object.__setattr__(self, "z_floor", z_floor)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta_quad", beta_quadrature(self.family, self.delta, z_floor))
        object.__setattr__(self, "nodal_values", values)

    @property
    def regularized(self) -> bool:
        return self.z_floor is not None

    def phibar(self, z):
        return evaluate_phibar(self.family, self.delta, z, self.z_floor)


def make_kernel(family: str, delta: float, grid: SpectralGrid) -> KernelSpec:
    return KernelSpec(family, float(delta), grid)


def sample_kernel(spec: KernelSpec, grid: SpectralGrid) -> np.ndarray:
    """Scaled kernel at the nodes of ``grid``, using the regularization of ``spec``."""
    return evaluate_phibar(spec.family, spec.delta, grid.nodes, spec.z_floor)
