import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinboltz.config import ConfigError, ScenarioConfig, emit_config, load_config, parse_config, preset
from spinboltz.io import atomic_write, read_csv, read_field, svg_line_plot, write_csv, write_field

pos = st.floats(1e-8, 1e8, allow_nan=False, allow_infinity=False)


# --- config ----------------------------------------------------------------------

def test_preset_defaults():
    cfg = preset("rb87")
    assert cfg.physics.q_hz == 20.1
    assert cfg.thermal.temperatures == (9e-6, 10e-6, 11e-6)
    cfg.validate(require_periods=True)


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        preset("na23")


def test_emit_parse_round_trip():
    cfg = preset("rb87")
    assert parse_config(emit_config(cfg)) == cfg


@given(q=pos, mass=pos, eps=st.floats(0, 1), temps=st.lists(pos, min_size=1, max_size=4),
       relax=st.booleans(), kernel=st.sampled_from(["self_consistent", "frozen", "isotropic"]))
def test_round_trip_hypothesis(q, mass, eps, temps, relax, kernel):
    cfg = preset("rb87").override(**{"physics.q_hz": q, "physics.mass": mass, "dynamics.epsilon": eps,
                                     "thermal.temperatures": temps, "dynamics.relaxation": relax,
                                     "dynamics.kernel": kernel})
    assert parse_config(emit_config(cfg)) == cfg


def test_parse_overrides_and_comments():
    cfg = parse_config("# comment\nphysics.q_hz = 10  # inline\nthermal.temperatures = 1e-6, 2e-6\n"
                       "dynamics.relaxation = off\n")
    assert cfg.physics.q_hz == 10.0
    assert cfg.thermal.temperatures == (1e-6, 2e-6)
    assert cfg.dynamics.relaxation is False
    assert cfg.dynamics.dt == ScenarioConfig().dynamics.dt


def test_all_problems_listed():
    text = "physics.mass = -1\nphysics.nonsense = 3\ndynamics.epsilon = 2\ndynamics.dt = abc\nbadline\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert any("line 5" in p for p in info.value.problems)
    with pytest.raises(ConfigError) as info:
        parse_config(text.replace("badline\n", ""))
    joined = "\n".join(info.value.problems)
    for key in ("physics.mass", "physics.nonsense", "dynamics.epsilon", "dynamics.dt"):
        assert key in joined


def test_eigen_needs_linear_kernel():
    with pytest.raises(ConfigError, match="linear kernel"):
        preset("rb87").override(**{"dynamics.integrator": "eigen"})


def test_period_requirement():
    cfg = preset("rb87").override(**{"dynamics.t_max": 0.1})
    cfg.validate()
    with pytest.raises(ConfigError, match="oscillation periods"):
        cfg.validate(require_periods=True)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")


def test_optional_none_values():
    cfg = parse_config("thermal.chemical_potential = -1e-30\n")
    assert cfg.thermal.chemical_potential == -1e-30
    assert parse_config("thermal.chemical_potential = none\n", cfg).thermal.chemical_potential is None


# --- io ----------------------------------------------------------------------------

def test_csv_round_trip_and_determinism(tmp_path):
    rows = [[0.1, 1 / 3, 2e-300], [np.float64(7), -0.0, 1e300]]
    a = write_csv(tmp_path / "a.csv", ["x_s", "y", "z"], rows).read_bytes()
    b = write_csv(tmp_path / "b.csv", ["x_s", "y", "z"], rows).read_bytes()
    assert a == b and b"\r" not in a
    header, data = read_csv(tmp_path / "a.csv")
    assert header == ["x_s", "y", "z"]
    assert np.array_equal(data, np.array(rows, dtype=float))


def test_atomic_write_creates_parents(tmp_path):
    path = atomic_write(tmp_path / "deep" / "er" / "f.txt", "hello")
    assert path.read_text() == "hello"
    assert list(path.parent.iterdir()) == [path]


def test_field_round_trip(tmp_path, rng):
    vals = rng.normal(size=(4, 5, 6))
    write_field(tmp_path / "phi", vals, (0.1, 0.2, 0.3), "J", (1.0, 0.0, -1.0))
    back, meta = read_field(tmp_path / "phi")
    assert np.array_equal(back, vals)
    assert meta["spacing"] == [0.1, 0.2, 0.3] and meta["origin"] == [1.0, 0.0, -1.0]
    assert meta["units"] == "J"
    assert (tmp_path / "phi.bin").stat().st_size == vals.size * 8


def test_svg_is_wellformed():
    import xml.etree.ElementTree as ET

    x = np.linspace(0, 1, 50)
    svg = svg_line_plot([("a", x, np.sin(x)), ("flat", x, np.zeros(50))], "x", "y", "t & <title>")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
