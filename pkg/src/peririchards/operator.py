"""Right-hand side of the semi-discrete nonlocal Richards equation.

Two independent evaluators are provided:

* :func:`rhs_spectral` assembles the collocation scheme through Chebyshev
  transforms, using the product formula for ``Lambda = K H`` and the
  transform-space convolution. All terms are formed on the ``2N + 1`` node
  grid and restricted back to the ``N + 1`` state nodes.
* :func:`rhs_quadrature_oracle` integrates the pairwise-flux operator
  directly, with no transform code involved.

Both multiply the interaction integral by a constant ``integral_scale``:
``1.0`` integrates in reference coordinates, ``grid.jacobian`` in physical
length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from . import chebyshev as cheb
from .kernel import KernelSpec, make_kernel
from .soil import SoilParams, conductivity, matric_head


class StepFailure(RuntimeError):
    """Non-finite or runaway values during right-hand-side evaluation or a time step."""

    def __init__(self, message, node=None, t=None, rhs_norm=None):
        super().__init__(message)
        self.node = node
        self.t = t
        self.rhs_norm = rhs_norm
        self.partial = None

    def __str__(self):
        parts = [super().__str__()]
        if self.node is not None:
            parts.append(f"node={self.node}")
        if self.t is not None:
            parts.append(f"t={self.t:g}s")
        if self.rhs_norm is not None:
            parts.append(f"rhs_norm={self.rhs_norm:.3e}")
        return ", ".join(parts)


def resolve_integral_scale(integral_scale, grid: cheb.SpectralGrid) -> float:
    if integral_scale == "reference":
        return 1.0
    if integral_scale == "physical":
        return grid.jacobian
    value = float(integral_scale)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"integral_scale must be 'reference', 'physical' or a non-negative number, got {integral_scale!r}")
    return value


@dataclass(frozen=True)
class RhsWorkspace:
    """Precomputed pieces of the spectral right-hand side for one state grid.

    ``grid`` carries the ``N + 1`` state nodes; ``fine`` is the ``2N + 1``
    node grid on which the kernel is sampled and the scheme is evaluated.
    """

    grid: cheb.SpectralGrid
    kernel: KernelSpec
    sink: np.ndarray = field(repr=False)
    integral_scale: float = 1.0
    gravity: bool = True
    kernel_coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kernel.grid.n_modes != 2 * self.grid.n_modes:
            raise ValueError("kernel must be sampled on the 2N grid of the state grid")
        sink = np.array(self.sink, dtype=float)
        if sink.shape != (self.grid.size,) or not np.all(np.isfinite(sink)):
            raise ValueError(f"sink must be a finite nodal field of length {self.grid.size}")
        sink.setflags(write=False)
        object.__setattr__(self, "sink", sink)
        coeffs = cheb.forward_transform(self.kernel.nodal_values, self.kernel.grid)
        coeffs.setflags(write=False)
        object.__setattr__(self, "kernel_coeffs", coeffs)

    @property
    def fine(self) -> cheb.SpectralGrid:
        return self.kernel.grid

    @property
    def beta(self) -> float:
        return self.kernel.beta

    def with_sink(self, sink) -> "RhsWorkspace":
        return RhsWorkspace(self.grid, self.kernel, sink, self.integral_scale, self.gravity)


def build_workspace(grid, family="distributed", delta=0.15, sink=0.0, integral_scale="reference", gravity=True):
    """Sample the kernel on the ``2N`` grid and fix the sink profile."""
    fine = grid.refined(2 * grid.n_modes)
    kernel = make_kernel(family, delta, fine)
    sink = np.broadcast_to(np.asarray(sink, dtype=float), (grid.size,))
    return RhsWorkspace(grid, kernel, sink, resolve_integral_scale(integral_scale, grid), bool(gravity))


def potential(theta, grid: cheb.SpectralGrid, soil: SoilParams, gravity=True):
    h = matric_head(theta, soil)
    return h + grid.physical_nodes if gravity else h


def _check_finite(values, what, t=None):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        finite = values[np.isfinite(values)]
        norm = float(np.abs(finite).max()) if finite.size else float("nan")
        raise StepFailure(f"non-finite {what}", node=int(bad[0]), t=t, rhs_norm=norm)


def interaction_spectral(theta, ws: RhsWorkspace, soil: SoilParams) -> np.ndarray:
    """Interaction term on the ``2N + 1`` fine nodes, before scaling and sink."""
    theta = np.asarray(theta, dtype=float)
    _check_finite(theta, "moisture content")
    grid, fine = ws.grid, ws.fine
    n2 = fine.n_modes
    k_nodal = conductivity(theta, soil)
    h_nodal = potential(theta, grid, soil, ws.gravity)
    _check_finite(k_nodal, "conductivity")
    _check_finite(h_nodal, "hydraulic potential")
    k_coef = cheb.forward_transform(k_nodal, grid)
    h_coef = cheb.forward_transform(h_nodal, grid)
    lam_coef = cheb.series_product(h_coef, k_coef)
    k_coef = cheb.pad_to(k_coef, n2)
    h_coef = cheb.pad_to(h_coef, n2)

    phi = ws.kernel_coeffs
    conv_lam = cheb.convolve(phi, lam_coef, fine)
    conv_h = cheb.convolve(phi, h_coef, fine)
    conv_k = cheb.convolve(phi, k_coef, fine)
    k_fine = cheb.inverse_transform(k_coef, fine)
    h_fine = cheb.inverse_transform(h_coef, fine)
    lam_fine = cheb.inverse_transform(lam_coef, fine)
    return 0.5 * (conv_lam + k_fine * conv_h - h_fine * conv_k - ws.beta * lam_fine)


def rhs_spectral(theta, ws: RhsWorkspace, soil: SoilParams) -> np.ndarray:
    """Spectral right-hand side at the ``N + 1`` state nodes.

    The state nodes are the even-indexed nodes of the ``2N`` grid, so the
    restriction is exact evaluation of the fine-grid polynomial.
    """
    inter = interaction_spectral(theta, ws, soil)[::2]
    rhs = ws.integral_scale * inter + ws.sink
    _check_finite(rhs, "right-hand side")
    return rhs


def _barycentric(nodes, values, x, chunk=4096):
    """Barycentric interpolation through Chebyshev-Lobatto nodes.

    ``values`` may be 2-D with one column per field.
    """
    n = len(nodes) - 1
    w = (-1.0) ** np.arange(n + 1)
    w[[0, -1]] *= 0.5
    out = np.empty((len(x),) + values.shape[1:])
    for start in range(0, len(x), chunk):
        xc = x[start : start + chunk]
        diff = xc[:, None] - nodes[None, :]
        hit = diff == 0.0
        diff[hit] = 1.0
        terms = w / diff
        block = (terms @ values) / terms.sum(axis=1).reshape((-1,) + (1,) * (values.ndim - 1))
        rows, cols = np.nonzero(hit)
        block[rows] = values[cols]
        out[start : start + chunk] = block
    return out


@lru_cache(maxsize=512)
def _gauss_legendre(m):
    x, w = roots_legendre(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _pieces(z, spec: KernelSpec):
    """Breakpoints in ``z'`` where the kernel at ``z' - z`` is not smooth."""
    d = spec.delta
    if spec.family == "distributed":
        offsets = (0.0, 1.0 - d, -(1.0 - d))
    else:
        offsets = (0.0, d, -d, spec.z_floor, -spec.z_floor)
    cuts = {-1.0, 1.0}
    cuts.update(z + o for o in offsets if -1.0 < z + o < 1.0)
    return np.array(sorted(cuts))


def rhs_quadrature_oracle(
    theta,
    grid: cheb.SpectralGrid,
    spec: KernelSpec,
    soil: SoilParams,
    sink,
    integral_scale=1.0,
    gravity=True,
    n_points=None,
    targets: cheb.SpectralGrid | None = None,
):
    """Direct quadrature of the pairwise-flux operator.

    For each evaluation point ``z`` it integrates
    ``phibar(z' - z) (K(z) + K(z'))/2 (H(z') - H(z))`` over ``z'`` in ``[-1, 1]``,
    with ``K`` and ``H`` interpolated barycentrically from their values at the
    nodes of ``grid``. The ``z'`` interval is split where the kernel has kinks
    or jumps, and each piece gets Gauss-Legendre points in proportion to its
    length; ``n_points`` (default ``10 (2N + 1)``) is the total per point.

    The evaluation points are the nodes of ``grid``, or of ``targets`` (a grid
    of any degree on the same reference interval) when given.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (grid.size,):
        raise ValueError(f"theta must have length {grid.size}")
    nodes = grid.nodes
    k_nodal = conductivity(theta, soil)
    h_nodal = potential(theta, grid, soil, gravity)
    fields = np.column_stack([k_nodal, h_nodal])
    scale = resolve_integral_scale(integral_scale, grid)
    if n_points is None:
        n_points = 10 * (2 * grid.n_modes + 1)
    out = grid if targets is None else targets
    sink = np.broadcast_to(np.asarray(sink, dtype=float), (out.size,))
    if targets is None:
        k_at, h_at = k_nodal, h_nodal
    else:
        k_at, h_at = _barycentric(nodes, fields, targets.nodes).T

    xs, ws, owner = [], [], []
    for i, z in enumerate(out.nodes):
        cuts = _pieces(z, spec)
        lengths = np.diff(cuts)
        for lo, hi, length in zip(cuts[:-1], cuts[1:], lengths):
            m = max(8, int(np.ceil(n_points * length / 2.0)))
            x, w = _gauss_legendre(m)
            xs.append(0.5 * (lo + hi) + 0.5 * length * x)
            ws.append(0.5 * length * w)
            owner.append(np.full(m, i))
    xs = np.concatenate(xs)
    ws = np.concatenate(ws)
    owner = np.concatenate(owner)

    k_aux, h_aux = _barycentric(nodes, fields, xs).T
    z_own = out.nodes[owner]
    integrand = spec.phibar(xs - z_own) * 0.5 * (k_at[owner] + k_aux) * (h_aux - h_at[owner])
    inter = np.bincount(owner, weights=ws * integrand, minlength=out.size)
    return scale * inter + sink


def mass_balance(rhs, grid: cheb.SpectralGrid, sink=0.0) -> float:
    """Integral over the reference interval of ``rhs - sink`` (Clenshaw-Curtis)."""
    rhs = np.asarray(rhs, dtype=float)
    sink = np.broadcast_to(np.asarray(sink, dtype=float), rhs.shape)
    return float(cheb.clenshaw_curtis_weights(grid) @ (rhs - sink))


def oracle_mass_balance(theta, grid: cheb.SpectralGrid, spec: KernelSpec, soil: SoilParams, oversample=4, **kwargs):
    """Relative global balance of the oracle interaction term.

    The outer integral over ``z`` runs on a grid ``oversample`` times finer
    than ``grid``, because the inner integral has kinks in ``z`` that limit
    Clenshaw-Curtis accuracy on the state nodes alone. Returns
    ``|int L| / max |L|``.
    """
    outer = grid.refined(oversample * grid.n_modes)
    inter = rhs_quadrature_oracle(theta, grid, spec, soil, 0.0, targets=outer, **kwargs)
    return abs(mass_balance(inter, outer)) / float(np.abs(inter).max())
