"""Simulation configuration: dataclasses, the INI-style text format and presets.

The text format has one ``[section]`` per group of settings. Floats are
written with ``repr`` so that ``loads(dumps(cfg)) == cfg`` holds bit for bit.
Lines starting with ``#`` or ``;`` are comments. Unknown sections or keys are
rejected with their line number.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .chebyshev import SpectralGrid, make_grid
from .kernel import FAMILIES
from .operator import RhsWorkspace, build_workspace
from .soil import BERINO_LOAMY_FINE_SAND, EXAMPLE_41_SOIL, GLENDALE_CLAY_LOAM, SoilParams
from .stepper import CLAMP_TOLERANCE, BoundaryConditions, Ramp

IC_KINDS = ("affine", "cubic", "tabulated")
IC_COORDS = ("reference", "physical")
OUTPUT_FORMATS = ("csv", "svg", "summary")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source is not None or line is not None:
            where = f"{source or '<config>'}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class KernelConfig:
    family: str = "distributed"
    delta: float = 0.15

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"kernel.family must be one of {FAMILIES}, got {self.family!r}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"kernel.delta must lie in (0, 1), got {self.delta!r}")


@dataclass(frozen=True)
class DomainConfig:
    """Column of depth ``depth`` cm; ``surface_at_plus_one`` puts depth 0 at reference ``+1``."""

    depth: float
    surface_at_plus_one: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.depth) and self.depth > 0):
            raise ConfigError(f"domain.depth must be positive, got {self.depth!r}")


@dataclass(frozen=True)
class TimeConfig:
    duration: float
    dt: float
    snapshots: int = 11

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ConfigError(f"time.duration must be non-negative, got {self.duration!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"time.dt must be positive, got {self.dt!r}")
        if self.snapshots < 1:
            raise ConfigError(f"time.snapshots must be at least 1, got {self.snapshots!r}")
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ConfigError(f"time.duration={self.duration!r} is not a whole number of dt={self.dt!r}")


@dataclass(frozen=True)
class InitialCondition:
    """Initial moisture profile.

    ``affine``: ``top`` at depth 0 to ``bottom`` at depth Z.
    ``cubic``: ``c0 + c1 x + c2 x^2 + c3 x^3`` with ``x`` the reference
    coordinate (``coords = reference``) or the depth in cm (``physical``).
    ``tabulated``: piecewise linear through ``(depths, values)``.
    """

    kind: str
    top: float = 0.0
    bottom: float = 0.0
    coefficients: tuple = (0.0, 0.0, 0.0, 0.0)
    coords: str = "reference"
    depths: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ConfigError(f"initial.kind must be one of {IC_KINDS}, got {self.kind!r}")
        if self.coords not in IC_COORDS:
            raise ConfigError(f"initial.coords must be one of {IC_COORDS}, got {self.coords!r}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "depths", tuple(float(d) for d in self.depths))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.coefficients) != 4:
            raise ConfigError("initial.coefficients needs exactly four entries c0, c1, c2, c3")
        if self.kind == "tabulated":
            if len(self.depths) < 2 or len(self.depths) != len(self.values):
                raise ConfigError("initial.depths and initial.values need equal length >= 2")
            if np.any(np.diff(self.depths) <= 0):
                raise ConfigError("initial.depths must be strictly increasing")

    def profile(self, grid: SpectralGrid):
        """Callable of physical depth giving the initial content."""
        if self.kind == "affine":
            depth = grid.phys_hi - grid.phys_lo
            top, bottom = self.top, self.bottom
            return lambda z: top + (bottom - top) * (np.asarray(z, dtype=float) - grid.phys_lo) / depth
        if self.kind == "cubic":
            c = self.coefficients
            to_x = grid.to_reference if self.coords == "reference" else (lambda z: np.asarray(z, dtype=float))

            def cubic(z):
                x = to_x(z)
                if self.coords == "reference":
                    x = np.clip(x, -1.0, 1.0)
                return c[0] + x * (c[1] + x * (c[2] + x * c[3]))

            return cubic
        d, v = np.array(self.depths), np.array(self.values)
        return lambda z: np.interp(z, d, v)


@dataclass(frozen=True)
class OperatorConfig:
    integral_scale: str = "reference"
    gravity: bool = True

    def __post_init__(self):
        if self.integral_scale not in ("reference", "physical"):
            try:
                value = float(self.integral_scale)
            except ValueError:
                value = -1.0
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(
                    f"operator.integral_scale must be 'reference', 'physical' or a non-negative number, "
                    f"got {self.integral_scale!r}"
                )


@dataclass(frozen=True)
class StabilityConfig:
    clamp_tolerance: float = CLAMP_TOLERANCE
    max_clamps: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.clamp_tolerance) and self.clamp_tolerance >= 0):
            raise ConfigError(f"stability.clamp_tolerance must be non-negative, got {self.clamp_tolerance!r}")
        if self.max_clamps is not None and self.max_clamps < 0:
            raise ConfigError(f"stability.max_clamps must be non-negative, got {self.max_clamps!r}")


@dataclass(frozen=True)
class OutputConfig:
    formats: tuple = OUTPUT_FORMATS

    def __post_init__(self):
        formats = tuple(self.formats)
        for f in formats:
            if f not in OUTPUT_FORMATS:
                raise ConfigError(f"output.formats entries must be among {OUTPUT_FORMATS}, got {f!r}")
        object.__setattr__(self, "formats", formats)


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one run."""

    label: str
    soil: SoilParams
    domain: DomainConfig
    time: TimeConfig
    n_modes: int
    initial: InitialCondition
    boundary: BoundaryConditions
    kernel: KernelConfig = field(default_factory=KernelConfig)
    sink: float = 0.0
    operator: OperatorConfig = field(default_factory=OperatorConfig)
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        if not isinstance(self.n_modes, (int, np.integer)) or self.n_modes < 2:
            raise ConfigError(f"grid.n_modes must be an integer >= 2, got {self.n_modes!r}")
        if not math.isfinite(self.sink):
            raise ConfigError(f"sink.value must be finite, got {self.sink!r}")
        for name, ramp in (("top", self.boundary.top), ("bottom", self.boundary.bottom)):
            if ramp.duration != self.time.duration:
                raise ConfigError(f"boundary.{name} ramp duration {ramp.duration!r} differs from time.duration")
        if not self.label.strip(".") or any(c in self.label for c in "/\\\n"):
            raise ConfigError(f"run.label must be a non-empty name without path separators, got {self.label!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.time.duration / self.time.dt))

    def make_grid(self) -> SpectralGrid:
        return make_grid(self.n_modes, 0.0, self.domain.depth, self.domain.surface_at_plus_one)

    def make_workspace(self, grid: SpectralGrid | None = None) -> RhsWorkspace:
        grid = self.make_grid() if grid is None else grid
        scale = self.operator.integral_scale
        if scale not in ("reference", "physical"):
            scale = float(scale)
        return build_workspace(grid, self.kernel.family, self.kernel.delta, self.sink, scale, self.operator.gravity)

    def initial_profile(self, grid: SpectralGrid | None = None):
        return self.initial.profile(self.make_grid() if grid is None else grid)

    def with_kernel(self, family=None, delta=None) -> "SimConfig":
        k = KernelConfig(family or self.kernel.family, self.kernel.delta if delta is None else float(delta))
        return replace(self, kernel=k)

    def with_n_modes(self, n_modes: int) -> "SimConfig":
        return replace(self, n_modes=int(n_modes))

    def digest(self) -> str:
        """SHA-256 of the serialized configuration."""
        return hashlib.sha256(dumps(self).encode("utf-8")).hexdigest()


# --- text format -----------------------------------------------------------

_SCHEMA = {
    "run": {"label"},
    "soil": {"theta_r", "theta_s", "alpha", "n_vg", "k_sat", "pore_connectivity"},
    "kernel": {"family", "delta"},
    "domain": {"depth", "surface_at_plus_one"},
    "grid": {"n_modes", "dx"},
    "time": {"duration", "dt", "snapshots"},
    "initial": {"kind", "top", "bottom", "c0", "c1", "c2", "c3", "coords", "depths", "values"},
    "boundary": {"top_start", "top_end", "bottom_start", "bottom_end"},
    "sink": {"value"},
    "operator": {"integral_scale", "gravity"},
    "stability": {"clamp_tolerance", "max_clamps"},
    "output": {"formats"},
}
_REQUIRED_SECTIONS = ("soil", "domain", "grid", "time", "initial", "boundary")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def dumps(cfg: SimConfig) -> str:
    """Serialize ``cfg``; the output is canonical (fixed order, every key present)."""
    s, ic, bc = cfg.soil, cfg.initial, cfg.boundary
    sections = [
        ("run", [("label", cfg.label)]),
        ("soil", [(f.name, float(getattr(s, f.name))) for f in fields(s)]),
        ("kernel", [("family", cfg.kernel.family), ("delta", float(cfg.kernel.delta))]),
        ("domain", [("depth", float(cfg.domain.depth)), ("surface_at_plus_one", cfg.domain.surface_at_plus_one)]),
        ("grid", [("n_modes", int(cfg.n_modes))]),
        (
            "time",
            [("duration", float(cfg.time.duration)), ("dt", float(cfg.time.dt)), ("snapshots", int(cfg.time.snapshots))],
        ),
    ]
    init = [("kind", ic.kind)]
    if ic.kind == "affine":
        init += [("top", float(ic.top)), ("bottom", float(ic.bottom))]
    elif ic.kind == "cubic":
        init += [(f"c{i}", c) for i, c in enumerate(ic.coefficients)] + [("coords", ic.coords)]
    else:
        init += [("depths", ic.depths), ("values", ic.values)]
    sections += [
        ("initial", init),
        (
            "boundary",
            [
                ("top_start", float(bc.top.start)),
                ("top_end", float(bc.top.end)),
                ("bottom_start", float(bc.bottom.start)),
                ("bottom_end", float(bc.bottom.end)),
            ],
        ),
        ("sink", [("value", float(cfg.sink))]),
        ("operator", [("integral_scale", cfg.operator.integral_scale), ("gravity", cfg.operator.gravity)]),
        (
            "stability",
            [("clamp_tolerance", float(cfg.stability.clamp_tolerance)), ("max_clamps", cfg.stability.max_clamps)],
        ),
        ("output", [("formats", cfg.output.formats)]),
    ]
    lines = []
    for name, items in sections:
        lines.append(f"[{name}]")
        lines += [f"{k} = {_fmt(v)}" for k, v in items]
        lines.append("")
    return "\n".join(lines)


def _line_of(text: str, section: str, key: str | None = None):
    """1-based line of ``[section]`` or of ``key`` inside it."""
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return i
        elif current == section and key is not None and "=" in line:
            if line.split("=", 1)[0].strip().lower() == key:
                return i
    return None


class _Reader:
    def __init__(self, parser, text, source):
        self.p, self.text, self.source = parser, text, source

    def err(self, msg, section, key=None):
        return ConfigError(msg, line=_line_of(self.text, section, key), source=self.source)

    def has(self, section, key):
        return self.p.has_option(section, key)

    def raw(self, section, key, default=None, required=False):
        if self.p.has_option(section, key):
            return self.p.get(section, key).strip()
        if required:
            line = _line_of(self.text, section)
            raise ConfigError(f"missing required key {section}.{key}", line=line, source=self.source)
        return default

    def float(self, section, key, default=None, required=False):
        v = self.raw(section, key, None, required)
        if v is None:
            return default
        try:
            out = float(v)
        except ValueError:
            raise self.err(f"{section}.{key} must be a number, got {v!r}", section, key) from None
        if not math.isfinite(out):
            raise self.err(f"{section}.{key} must be finite, got {v!r}", section, key)
        return out

    def int(self, section, key, default=None, required=False):
        v = self.raw(section, key, None, required)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise self.err(f"{section}.{key} must be an integer, got {v!r}", section, key) from None

    def bool(self, section, key, default):
        v = self.raw(section, key)
        if v is None:
            return default
        low = v.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise self.err(f"{section}.{key} must be true or false, got {v!r}", section, key)

    def floats(self, section, key):
        v = self.raw(section, key, "")
        try:
            return tuple(float(x) for x in v.split(",") if x.strip())
        except ValueError:
            raise self.err(f"{section}.{key} must be a comma-separated list of numbers", section, key) from None


def loads(text: str, source: str | None = None) -> SimConfig:
    """Parse and validate configuration text. Raises :class:`ConfigError`."""
    parser = configparser.ConfigParser(interpolation=None, strict=True, default_section="__none__")
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", line=exc.lineno, source=source) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], line=exc.lineno, source=source) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse line {line!r}", line=lineno, source=source) from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", line=_line_of(text, section), source=source)
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown key {key!r} in [{section}]", line=_line_of(text, section, key), source=source
                )
    for section in _REQUIRED_SECTIONS:
        if not parser.has_section(section):
            raise ConfigError(f"missing required section [{section}]", source=source)

    r = _Reader(parser, text, source)
    try:
        return _build(r)
    except ConfigError as exc:
        if exc.line is None and exc.source is None and source is not None:
            raise ConfigError(str(exc), source=source) from None
        raise
    except ValueError as exc:
        # invariant violations raised by the domain types
        raise ConfigError(str(exc), source=source) from None


def _build(r: _Reader) -> SimConfig:
    soil = SoilParams(
        theta_r=r.float("soil", "theta_r", required=True),
        theta_s=r.float("soil", "theta_s", required=True),
        alpha=r.float("soil", "alpha", required=True),
        n_vg=r.float("soil", "n_vg", required=True),
        k_sat=r.float("soil", "k_sat", required=True),
        pore_connectivity=r.float("soil", "pore_connectivity", 0.5),
    )
    kernel = KernelConfig(r.raw("kernel", "family", "distributed"), r.float("kernel", "delta", 0.15))
    domain = DomainConfig(r.float("domain", "depth", required=True), r.bool("domain", "surface_at_plus_one", True))
    time = TimeConfig(
        r.float("time", "duration", required=True),
        r.float("time", "dt", required=True),
        r.int("time", "snapshots", 11),
    )

    if r.has("grid", "n_modes") and r.has("grid", "dx"):
        raise r.err("give either grid.n_modes or grid.dx, not both", "grid", "dx")
    if r.has("grid", "dx"):
        dx = r.float("grid", "dx")
        if not dx > 0:
            raise r.err(f"grid.dx must be positive, got {dx!r}", "grid", "dx")
        n_modes = int(round(domain.depth / dx))
    else:
        n_modes = r.int("grid", "n_modes", required=True)

    kind = r.raw("initial", "kind", required=True)
    if kind == "affine":
        initial = InitialCondition(
            "affine", top=r.float("initial", "top", required=True), bottom=r.float("initial", "bottom", required=True)
        )
    elif kind == "cubic":
        coeffs = tuple(r.float("initial", f"c{i}", 0.0) for i in range(4))
        initial = InitialCondition("cubic", coefficients=coeffs, coords=r.raw("initial", "coords", "reference"))
    elif kind == "tabulated":
        initial = InitialCondition(
            "tabulated", depths=r.floats("initial", "depths"), values=r.floats("initial", "values")
        )
    else:
        raise r.err(f"initial.kind must be one of {IC_KINDS}, got {kind!r}", "initial", "kind")

    T = time.duration
    top_start = r.float("boundary", "top_start", required=True)
    bottom_start = r.float("boundary", "bottom_start", required=True)
    try:
        boundary = BoundaryConditions(
            Ramp(top_start, r.float("boundary", "top_end", top_start), T),
            Ramp(bottom_start, r.float("boundary", "bottom_end", bottom_start), T),
        )
    except ValueError as exc:
        raise ConfigError(f"boundary: {exc}") from None

    max_clamps = r.raw("stability", "max_clamps", "none")
    if max_clamps.lower() == "none":
        max_clamps = None
    else:
        max_clamps = r.int("stability", "max_clamps")
    formats = r.raw("output", "formats", ", ".join(OUTPUT_FORMATS))

    return SimConfig(
        label=r.raw("run", "label", "run"),
        soil=soil,
        domain=domain,
        time=time,
        n_modes=n_modes,
        initial=initial,
        boundary=boundary,
        kernel=kernel,
        sink=r.float("sink", "value", 0.0),
        operator=OperatorConfig(r.raw("operator", "integral_scale", "reference"), r.bool("operator", "gravity", True)),
        stability=StabilityConfig(r.float("stability", "clamp_tolerance", CLAMP_TOLERANCE), max_clamps),
        output=OutputConfig(tuple(f.strip() for f in formats.split(",") if f.strip())),
    )


# --- presets ---------------------------------------------------------------


def _preset_41() -> SimConfig:
    T = 60.0
    return SimConfig(
        label="example-4.1",
        soil=EXAMPLE_41_SOIL,
        domain=DomainConfig(30.0),
        time=TimeConfig(T, 0.06),
        n_modes=100,
        # 0.2234 - (1 - z/Z) 0.0848/2 is affine in depth
        initial=InitialCondition("affine", top=0.2234 - 0.0848 / 2, bottom=0.2234),
        boundary=BoundaryConditions(Ramp(0.2234, 0.181, T), Ramp(0.1368, 0.1174, T)),
        sink=-700.0,
    )


def _preset_42() -> SimConfig:
    T = 2400.0
    return SimConfig(
        label="example-4.2",
        soil=GLENDALE_CLAY_LOAM,
        domain=DomainConfig(70.0),
        time=TimeConfig(T, 2.4),
        n_modes=233,
        initial=InitialCondition("cubic", coefficients=(0.25, 0.0, 0.0, -0.05)),
        boundary=BoundaryConditions(Ramp.constant(0.2, T), Ramp.constant(0.3, T)),
        sink=0.0,
    )


def _preset_43() -> SimConfig:
    T = 600.0
    return SimConfig(
        label="example-4.3",
        soil=BERINO_LOAMY_FINE_SAND,
        domain=DomainConfig(70.0),
        time=TimeConfig(T, 0.06),
        n_modes=233,
        initial=InitialCondition("cubic", coefficients=(0.25, 0.0, 0.0, 0.05)),
        boundary=BoundaryConditions(Ramp(0.3, 0.29, T), Ramp.constant(0.2, T)),
        sink=-100.0,
    )


PRESETS = {
    "example-4.1": _preset_41,
    "example-4.2": _preset_42,
    "example-4.3": _preset_43,
}


def preset(name: str) -> SimConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def load_config(path_or_preset) -> SimConfig:
    """Load a preset by name or a configuration file by path."""
    name = os.fspath(path_or_preset)
    if name in PRESETS:
        return preset(name)
    with open(name, encoding="utf-8") as fh:
        text = fh.read()
    return loads(text, source=name)


def save_config(cfg: SimConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))
