"""Verification harness: transform properties and operator convergence reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import chebyshev as cheb
from .config import SimConfig
from .kernel import beta_closed_form, beta_quadrature, BETA_TOLERANCE
from .operator import StepFailure, rhs_quadrature_oracle, rhs_spectral
from .stepper import init_state, run

TRANSFORM_TOL = 1e-12


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    title: str
    checks: list = field(default_factory=list)
    tables: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def format(self) -> str:
        lines = [self.title]
        for t in self.tables:
            lines += t
        lines += [c.line() for c in self.checks]
        lines.append("all checks passed" if self.passed else "verification FAILED")
        return "\n".join(lines)


def _degrees(max_degree):
    out, n = [], 4
    while n <= max_degree:
        out.append(n)
        n *= 2
    return out or [max_degree]


def projection_rates(u, degrees):
    errs = [cheb.projection_error(u, cheb.make_grid(n)) for n in degrees]
    return np.array(errs)


def verify_transforms(max_degree: int = 256, inject_fault: bool = False, seed: int = 0) -> Report:
    """Round trip, linearity, product formula and projection decay.

    ``inject_fault`` perturbs one forward-transform coefficient so that the
    harness can be shown to detect a broken transform.
    """
    if max_degree < 2:
        raise ValueError("max_degree must be at least 2")
    rng = np.random.default_rng(seed)
    report = Report(f"transform verification up to N = {max_degree}")
    degrees = _degrees(max_degree)

    def forward(u, g):
        c = cheb.forward_transform(u, g)
        if inject_fault:
            c[len(c) // 2] += 1e-3
        return c

    worst_rt = worst_lin = worst_direct = 0.0
    for n in degrees:
        g = cheb.make_grid(n)
        u, v = rng.standard_normal((2, n + 1))
        a, b = rng.standard_normal(2)
        worst_rt = max(worst_rt, np.abs(cheb.inverse_transform(forward(u, g), g) - u).max())
        lhs = forward(a * u + b * v, g)
        worst_lin = max(worst_lin, np.abs(lhs - (a * forward(u, g) + b * forward(v, g))).max())
        worst_direct = max(worst_direct, np.abs(forward(u, g) - cheb.forward_transform_direct(u, g)).max())
    report.add("round trip", worst_rt <= TRANSFORM_TOL, f"max error {worst_rt:.2e} over N in {degrees}")
    report.add("linearity", worst_lin <= TRANSFORM_TOL, f"max error {worst_lin:.2e}")
    report.add("fast vs direct transform", worst_direct <= TRANSFORM_TOL, f"max error {worst_direct:.2e}")

    worst_prod = 0.0
    for n in [d for d in (4, 8, 16, 32, 64) if d <= max_degree] or [max_degree]:
        for _ in range(20):
            p, q = rng.standard_normal((2, n + 1))
            worst_prod = max(worst_prod, np.abs(cheb.series_product(p, q) - cheb.series_product_pointwise(p, q)).max())
    report.add("product formula vs pointwise oracle", worst_prod <= TRANSFORM_TOL, f"max error {worst_prod:.2e}")
    t1 = cheb.series_product([0.0, 1.0], [0.0, 1.0])
    report.add("T1*T1 = (T0 + T2)/2", np.abs(t1 - [0.5, 0.0, 0.5]).max() <= 1e-15, f"{t1.tolist()}")

    # exactness on polynomials of the grid degree
    n = min(max_degree, 8)
    g = cheb.make_grid(n)
    coef = rng.standard_normal(n + 1)
    poly = np.polynomial.chebyshev.chebval(g.nodes, coef)
    err = np.abs(forward(poly, g) - coef).max()
    report.add(f"polynomial exactness (N = {n})", err <= TRANSFORM_TOL, f"max error {err:.2e}")

    decay = [d for d in (4, 8, 16, 32) if d <= max_degree]
    if len(decay) >= 2:
        errs = projection_rates(np.exp, decay)
        ok = all(e1 <= max(e0 / 10.0, 1e-13) for e0, e1 in zip(errs[:-1], errs[1:]))
        report.add("exp(z) projection decay", ok, "errors " + ", ".join(f"{e:.2e}" for e in errs))
        errs = projection_rates(np.abs, decay)
        slope = np.polyfit(np.log(decay), np.log(errs), 1)[0]
        report.add("|z| projection slope in [-2.5, -0.5]", -2.5 <= slope <= -0.5, f"slope {slope:.3f}")
    return report


def weighted_distance(theta_a, grid_a, theta_b, grid_b, common) -> float:
    """Weighted L2 distance of two nodal solutions, both interpolated onto ``common``."""
    ua = cheb.interpolate(theta_a, grid_a, common)
    ub = cheb.interpolate(theta_b, grid_b, common)
    return cheb.weighted_norm(ua - ub, common)


def rhs_discrepancy(config: SimConfig, n_modes: int):
    """Spectral and oracle right-hand sides at ``t = 0`` for ``config`` at degree ``n_modes``."""
    cfg = config.with_n_modes(n_modes)
    grid = cfg.make_grid()
    ws = cfg.make_workspace(grid)
    theta = init_state(cfg.initial_profile(grid), grid, cfg.boundary).theta
    spec = rhs_spectral(theta, ws, cfg.soil)
    orc = rhs_quadrature_oracle(theta, grid, ws.kernel, cfg.soil, ws.sink, ws.integral_scale, ws.gravity)
    return spec, orc


def verify_operator(config: SimConfig, n_list, oracle: bool = True) -> Report:
    """Discrepancy table, trajectory self-convergence and beta cross-check."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 2 or any(b <= a for a, b in zip(n_list[:-1], n_list[1:])):
        raise ValueError(f"n_list must be ascending with at least two entries, got {n_list}")
    report = Report(f"operator verification for {config.label}, N in {n_list}")

    if oracle:
        table = ["  N    max|spec - oracle|   relative"]
        for n in n_list:
            spec, orc = rhs_discrepancy(config, n)
            diff = float(np.abs(spec - orc).max())
            rel = diff / max(float(np.abs(orc).max()), 1e-300)
            table.append(f"{n:4d}    {diff:.3e}        {rel:.3e}")
        report.tables.append(table)

    finals = []
    for n in n_list:
        cfg = config.with_n_modes(n)
        try:
            traj = run(cfg)
        except StepFailure as exc:
            report.add(f"trajectory at N = {n}", False, str(exc))
            return report
        finals.append((traj.final.theta, cfg.make_grid()))
    common = finals[-1][1].refined(2 * n_list[-1])
    dists = [
        weighted_distance(a[0], a[1], b[0], b[1], common) for a, b in zip(finals[:-1], finals[1:])
    ]
    table = ["  N_i -> N_i+1   distance     order"]
    for i, d in enumerate(dists):
        order = ""
        if i > 0 and d > 0 and dists[i - 1] > 0:
            order = f"{math.log(dists[i - 1] / d) / math.log(n_list[i + 1] / n_list[i]):.3f}"
        table.append(f"  {n_list[i]:4d} -> {n_list[i + 1]:4d}   {d:.4e}   {order}")
    report.tables.append(table)
    report.distances = dists
    decreasing = all(b < a for a, b in zip(dists[:-1], dists[1:]))
    report.add("successive distances decrease", decreasing, ", ".join(f"{d:.3e}" for d in dists))

    ws = config.make_workspace()
    k = ws.kernel
    closed = beta_closed_form(k.family, k.delta, k.z_floor)
    quad = beta_quadrature(k.family, k.delta, k.z_floor)
    report.add(
        f"beta closed form vs quadrature ({k.family}, delta = {k.delta:g})",
        abs(closed - quad) <= BETA_TOLERANCE * max(1.0, abs(closed)),
        f"{closed:.12f} vs {quad:.12f}",
    )
    return report
