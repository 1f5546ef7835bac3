"""Van Genuchten-Mualem constitutive relations.

All functions take moisture content ``theta`` (scalar or array) and return
arrays of the same shape. Effective saturation is floored at
``SATURATION_FLOOR`` so that the matric head stays finite at residual content.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

SATURATION_FLOOR = 1e-10


@dataclass(frozen=True)
class SoilParams:
    """Parameters of one homogeneous van Genuchten-Mualem soil.

    Units: ``alpha`` in 1/cm, ``k_sat`` in cm/s, contents dimensionless.
    ``k_sat = 0`` is accepted and describes a soil with no conductivity.
    """

    theta_r: float
    theta_s: float
    alpha: float
    n_vg: float
    k_sat: float
    pore_connectivity: float = 0.5

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not 0.0 <= self.theta_r < self.theta_s <= 1.0:
            raise ValueError(
                f"need 0 <= theta_r < theta_s <= 1, got theta_r={self.theta_r}, theta_s={self.theta_s}"
            )
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.n_vg <= 1:
            raise ValueError(f"n_vg must exceed 1, got {self.n_vg}")
        if self.k_sat < 0:
            raise ValueError(f"k_sat must be non-negative, got {self.k_sat}")

    @property
    def m_vg(self) -> float:
        return 1.0 - 1.0 / self.n_vg


# preset example-4.1 soil, Glendale clay loam, Berino loamy fine sand
EXAMPLE_41_SOIL = SoilParams(theta_r=0.075, theta_s=0.287, alpha=0.036, n_vg=1.56, k_sat=0.94e-3)
GLENDALE_CLAY_LOAM = SoilParams(theta_r=0.1060, theta_s=0.4686, alpha=0.0104, n_vg=1.3954, k_sat=1.5162e-4)
BERINO_LOAMY_FINE_SAND = SoilParams(theta_r=0.0286, theta_s=0.3658, alpha=0.0280, n_vg=2.2390, k_sat=0.0063)

PAPER_SOILS = {
    "example-4.1": EXAMPLE_41_SOIL,
    "glendale-clay-loam": GLENDALE_CLAY_LOAM,
    "berino-loamy-fine-sand": BERINO_LOAMY_FINE_SAND,
}


def effective_saturation(theta, p: SoilParams):
    """``clip((theta - theta_r) / (theta_s - theta_r), floor, 1)``."""
    theta = np.asarray(theta, dtype=float)
    return np.clip((theta - p.theta_r) / (p.theta_s - p.theta_r), SATURATION_FLOOR, 1.0)


def count_clamped(theta, p: SoilParams) -> int:
    """Number of entries whose effective saturation had to be clipped."""
    raw = (np.asarray(theta, dtype=float) - p.theta_r) / (p.theta_s - p.theta_r)
    return int(np.count_nonzero((raw < SATURATION_FLOOR) | (raw > 1.0)))


def matric_head(theta, p: SoilParams):
    """Inverse retention curve ``h = -(1/alpha) (S_e^(-1/m) - 1)^(1/n)``, in cm."""
    se = effective_saturation(theta, p)
    m = p.m_vg
    return -np.power(np.power(se, -1.0 / m) - 1.0, 1.0 / p.n_vg) / p.alpha


def water_content(h, p: SoilParams):
    """Retention curve ``theta(h) = theta_r + (theta_s - theta_r)(1 + (alpha|h|)^n)^(-m)``."""
    h = np.asarray(h, dtype=float)
    se = np.power(1.0 + np.power(p.alpha * np.abs(h), p.n_vg), -p.m_vg)
    return p.theta_r + (p.theta_s - p.theta_r) * np.where(h >= 0, 1.0, se)


def conductivity(theta, p: SoilParams):
    """Mualem conductivity ``K_s S_e^l (1 - (1 - S_e^(1/m))^m)^2``, in cm/s."""
    se = effective_saturation(theta, p)
    m = p.m_vg
    # 1 - (1 - x)^m evaluated without cancellation for small x = S_e^(1/m)
    with np.errstate(divide="ignore"):
        inner = -np.expm1(m * np.log1p(-np.power(se, 1.0 / m)))
    return p.k_sat * np.power(se, p.pore_connectivity) * inner**2


def hydraulic_potential(theta, z_phys, p: SoilParams):
    """Total potential ``H = h_m(theta) + z`` in cm."""
    return matric_head(theta, p) + np.asarray(z_phys, dtype=float)
