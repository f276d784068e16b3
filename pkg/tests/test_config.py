import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jpa_selfenergy.config import (
    GridSpec,
    apply_override,
    config_from_dict,
    load_document,
    normalize,
    parse_assignment,
    parse_config,
    parse_grid,
    serialize,
)
from jpa_selfenergy.errors import ConfigError

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))

MINIMAL = '{"circuit": {"variant": "capacitive", "zs_over_z0": 1.0, "cc_over_cs": 0.5}}'


class TestParse:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.form == "ratio"
        assert cfg.mode == "exact"
        assert cfg.delta_p == 0.0 and cfg.gamma_i == 0.0 and cfg.theta_p == 0.0
        assert cfg.r is None and cfg.epsilon_p is None
        assert cfg.grid is None and cfg.command is None
        assert cfg.circuit().omega_s == pytest.approx(1.0)

    def test_si_form(self):
        doc = {
            "circuit": {"variant": "series_lc", "z0": 50.0, "v": 1.2e8, "cs": 1e-12, "ls": 1e-9, "cc": 1e-11, "lc": 4e-10}
        }
        cfg = config_from_dict(doc)
        assert cfg.form == "si"
        assert cfg.circuit().z0 == 50.0

    def test_si_form_missing_line(self):
        doc = {"circuit": {"variant": "capacitive", "cs": 1e-12, "ls": 1e-9, "cc": 1e-13}}
        with pytest.raises(ConfigError, match="circuit.z0"):
            config_from_dict(doc)

    def test_mixed_form_rejected(self):
        doc = {"circuit": {"variant": "capacitive", "zs_over_z0": 1.0, "cc": 1e-12}}
        with pytest.raises(ConfigError, match="one form"):
            config_from_dict(doc)

    def test_unknown_key_reports_line(self):
        text = '{\n  "circuit": {"variant": "capacitive", "zs_over_z0": 1, "cc_over_cs": 1},\n  "pmup": {}\n}'
        with pytest.raises(ConfigError, match=r"'pmup' \(line 3\)"):
            parse_config(text)

    def test_syntax_error_reports_position(self):
        with pytest.raises(ConfigError, match="line 2, column"):
            parse_config('{"mode": "exact",\n  "circuit": {,}}')

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            load_document('{"mode": "exact", "mode": "markov"}')

    @pytest.mark.parametrize(
        "pump, message",
        [
            ({"r": 0.0}, "positive"),
            ({"r": 0.5, "epsilon_p": 0.1}, "not both"),
            ({"epsilon_p": -0.1}, "magnitude"),
            ({"gamma_i": -0.01}, "gamma_i"),
            ({"delta_p": 0.1, "delta_ps": 0.1}, "not both"),
        ],
    )
    def test_pump_validation(self, pump, message):
        doc = json.loads(MINIMAL)
        doc["pump"] = pump
        with pytest.raises(ConfigError, match=message):
            config_from_dict(doc)

    def test_bad_element_value_is_config_error(self):
        cfg = parse_config('{"circuit": {"variant": "capacitive", "zs_over_z0": 1.0, "cc_over_cs": -1}}')
        with pytest.raises(ConfigError):
            cfg.circuit()


class TestRoundTrip:
    """serialize(parse(x)) reproduces the normalised document."""

    @pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
    def test_shipped_configs(self, path):
        text = path.read_text()
        assert serialize(parse_config(text)) == normalize(text)
        assert normalize(normalize(text)) == normalize(text)

    @settings(max_examples=50, deadline=None)
    @given(
        zs=st.floats(0.1, 10.0),
        delta=st.floats(-0.5, 0.5),
        r=st.floats(0.01, 0.999),
        n=st.integers(2, 5000),
    )
    def test_random_documents(self, zs, delta, r, n):
        doc = {
            "command": "gain",
            "circuit": {"variant": "capacitive", "zs_over_z0": zs, "cc_over_cs": 1.0},
            "pump": {"delta_p": delta, "r": r},
            "grid": {"start": -0.5, "stop": 0.5, "n": n},
        }
        cfg = config_from_dict(doc)
        assert parse_config(serialize(cfg)) == cfg


class TestOverrides:
    """Command-line assignments and grid strings."""

    def test_parse_grid(self):
        assert parse_grid("-0.3:0.3:61") == GridSpec(-0.3, 0.3, 61)

    @pytest.mark.parametrize("spec", ["0:1", "a:b:3", "1:0:5", "0:1:1"])
    def test_bad_grid(self, spec):
        with pytest.raises(ConfigError):
            parse_grid(spec)

    def test_assignment_decodes_json(self):
        assert parse_assignment("pump.r=0.9") == (["pump", "r"], 0.9)
        assert parse_assignment("circuit.variant=ladder") == (["circuit", "variant"], "ladder")

    def test_apply_override_creates_sections(self):
        doc = json.loads(MINIMAL)
        apply_override(doc, ["pump", "r"], 0.5)
        assert config_from_dict(doc).r == 0.5

    def test_override_through_scalar(self):
        with pytest.raises(ConfigError):
            apply_override({"mode": "exact"}, ["mode", "x"], 1)
