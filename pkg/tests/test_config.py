from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from peririchards.config import (
    PRESETS,
    ConfigError,
    InitialCondition,
    KernelConfig,
    StabilityConfig,
    dumps,
    load_config,
    loads,
    preset,
    save_config,
)
from peririchards.soil import SoilParams
from peririchards.stepper import BoundaryConditions, Ramp

# sha256 of the canonical text of each preset; a change here means preset parameters moved
FROZEN_PRESET_HASHES = {
    "example-4.1": "3c844d5f6f66502143c54304e32e7e037aa7b51e9e7798d1054a8f944fda376d",
    "example-4.2": "5bb666a5009dba08ad083f83d41353864aa5fbec11e1a7dc8357886edf7d866c",
    "example-4.3": "9917a0cfd770a63caa5bec7bca3d83af7ab8c4dc8de8d8e35e93b51c512d118c",
}

MINIMAL = """\
[soil]
theta_r = 0.075
theta_s = 0.287
alpha = 0.036
n_vg = 1.56
k_sat = 0.00094

[domain]
depth = 30

[grid]
n_modes = 40

[time]
duration = 6
dt = 0.06

[initial]
kind = affine
top = 0.181
bottom = 0.2234

[boundary]
top_start = 0.2234
bottom_start = 0.1368
"""


@pytest.mark.parametrize("name", list(PRESETS))
def test_preset_hashes_frozen(name):
    assert preset(name).digest() == FROZEN_PRESET_HASHES[name]


def test_example_41_preset_values():
    c = load_config("example-4.1")
    s = c.soil
    assert (s.theta_r, s.theta_s, s.alpha, s.n_vg, s.k_sat) == (0.075, 0.287, 0.036, 1.56, 0.94e-3)
    assert c.sink == -700.0 and c.kernel == KernelConfig("distributed", 0.15)
    assert (c.domain.depth, c.time.duration, c.time.dt, c.n_modes) == (30.0, 60.0, 0.06, 100)
    assert c.n_steps == 1000
    assert (c.boundary.top.start, c.boundary.top.end) == (0.2234, 0.181)
    assert (c.boundary.bottom.start, c.boundary.bottom.end) == (0.1368, 0.1174)


def test_example_42_preset_values():
    c = load_config("example-4.2")
    assert c.soil.theta_s == 0.4686 and c.soil.k_sat == 1.5162e-4
    assert c.sink == 0.0
    assert (c.boundary.top(0), c.boundary.top(2400), c.boundary.bottom(1234.5)) == (0.2, 0.2, 0.3)
    assert c.initial.kind == "cubic" and c.initial.coefficients == (0.25, 0.0, 0.0, -0.05)
    assert (c.domain.depth, c.time.duration, c.time.dt, c.n_modes, c.n_steps) == (70.0, 2400.0, 2.4, 233, 1000)


def test_example_43_preset_values():
    c = load_config("example-4.3")
    assert c.soil.n_vg == 2.2390 and c.sink == -100.0
    assert (c.boundary.top.start, c.boundary.top.end, c.boundary.bottom.start) == (0.3, 0.29, 0.2)
    assert c.n_steps == 10000 and c.n_modes == 233


@pytest.mark.parametrize("name", list(PRESETS))
def test_round_trip_presets(name):
    c = preset(name)
    assert loads(dumps(c)) == c
    assert dumps(loads(dumps(c))) == dumps(c)


def test_minimal_file_defaults(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(MINIMAL)
    c = load_config(path)
    assert c.kernel.family == "distributed" and c.time.snapshots == 11
    assert c.boundary.top.end == 0.2234 and c.sink == 0.0
    assert c.stability.max_clamps is None and c.operator.integral_scale == "reference"
    save_config(c, tmp_path / "d.ini")
    assert load_config(tmp_path / "d.ini") == c


def test_dx_sugar():
    text = MINIMAL.replace("n_modes = 40", "dx = 0.3")
    assert loads(text).n_modes == 100
    with pytest.raises(ConfigError, match="either"):
        loads(MINIMAL.replace("n_modes = 40", "n_modes = 40\ndx = 0.3"))


def test_unknown_key_reports_line():
    text = MINIMAL.replace("depth = 30", "depth = 30\ncolour = blue")
    with pytest.raises(ConfigError) as info:
        loads(text, source="x.ini")
    assert info.value.line == 10
    assert "colour" in str(info.value) and "x.ini:10" in str(info.value)


def test_unknown_section_reports_line():
    with pytest.raises(ConfigError) as info:
        loads(MINIMAL + "\n[extras]\nfoo = 1\n")
    assert "extras" in str(info.value) and info.value.line == 27


def test_parse_error_has_line():
    with pytest.raises(ConfigError) as info:
        loads(MINIMAL.replace("depth = 30", "depth 30"))
    assert info.value.line == 9
    with pytest.raises(ConfigError) as info:
        loads("theta = 1\n" + MINIMAL)
    assert info.value.line == 1


def test_duplicate_key_has_line():
    with pytest.raises(ConfigError) as info:
        loads(MINIMAL.replace("depth = 30", "depth = 30\ndepth = 31"))
    assert info.value.line == 10


def test_validation_names_invariant():
    with pytest.raises(ConfigError, match="theta_r < theta_s"):
        loads(MINIMAL.replace("theta_s = 0.287", "theta_s = 0.05"))
    with pytest.raises(ConfigError, match="time.dt"):
        loads(MINIMAL.replace("dt = 0.06", "dt = -1"))
    with pytest.raises(ConfigError, match="whole number"):
        loads(MINIMAL.replace("dt = 0.06", "dt = 0.07"))
    with pytest.raises(ConfigError, match=r"\[0, 1\]"):
        loads(MINIMAL.replace("top_start = 0.2234", "top_start = 1.5"))
    with pytest.raises(ConfigError, match="kernel.family"):
        loads(MINIMAL + "\n[kernel]\nfamily = gaussian\n")
    with pytest.raises(ConfigError, match="must be a number"):
        loads(MINIMAL.replace("alpha = 0.036", "alpha = abc"))
    with pytest.raises(ConfigError, match="missing required key soil.k_sat"):
        loads(MINIMAL.replace("k_sat = 0.00094\n", ""))
    with pytest.raises(ConfigError, match="missing required section"):
        loads(MINIMAL.replace("[grid]\nn_modes = 40\n", ""))


def test_malformed_file_gives_no_config(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[soil\nbroken")
    result = None
    with pytest.raises(ConfigError):
        result = load_config(path)
    assert result is None


@pytest.mark.parametrize("label", ["", "..", "a/b"])
def test_label_must_be_a_plain_name(label):
    with pytest.raises(ConfigError, match="run.label"):
        replace(preset("example-4.1"), label=label)


def test_missing_file():
    with pytest.raises(OSError):
        load_config("/nonexistent/file.ini")


unit = st.floats(0.0, 1.0, allow_nan=False)
pos = st.floats(1e-6, 1e6, allow_nan=False)


@st.composite
def configs(draw):
    tr = draw(st.floats(0.0, 0.5))
    ts = draw(st.floats(tr + 1e-3, 1.0))
    soil = SoilParams(tr, ts, draw(pos), draw(st.floats(1.01, 10)), draw(st.floats(0, 1)), draw(st.floats(-2, 2)))
    n = draw(st.integers(1, 5000))
    dt = draw(pos)
    T = n * dt
    kind = draw(st.sampled_from(["affine", "cubic", "tabulated"]))
    if kind == "affine":
        ic = InitialCondition("affine", top=draw(unit), bottom=draw(unit))
    elif kind == "cubic":
        ic = InitialCondition(
            "cubic", coefficients=tuple(draw(st.floats(-1, 1)) for _ in range(4)), coords=draw(st.sampled_from(["reference", "physical"]))
        )
    else:
        ic = InitialCondition("tabulated", depths=(0.0, 1.5, 3.0), values=(draw(unit), draw(unit), draw(unit)))
    base = preset("example-4.1")
    return replace(
        base,
        label=draw(st.from_regex(r"[a-z0-9][a-z0-9._-]{0,19}", fullmatch=True)),
        soil=soil,
        time=replace(base.time, duration=T, dt=dt, snapshots=draw(st.integers(1, 50))),
        n_modes=draw(st.integers(2, 4096)),
        initial=ic,
        boundary=BoundaryConditions(Ramp(draw(unit), draw(unit), T), Ramp(draw(unit), draw(unit), T)),
        kernel=KernelConfig(draw(st.sampled_from(["uniform", "linear", "distributed"])), draw(st.floats(0.001, 0.999))),
        sink=draw(st.floats(-1e4, 1e4)),
        stability=StabilityConfig(draw(st.floats(0, 1e-3)), draw(st.none() | st.integers(0, 10**9))),
    )


@given(configs())
def test_round_trip_property(cfg):
    text = dumps(cfg)
    again = loads(text)
    assert again == cfg
    assert dumps(again) == text
