import cmath
import math

import numpy as np
import pytest

from cmrecover.config import ConfigError, config_from_dict, example_config, load_config, parse_amplitude


@pytest.mark.parametrize(
    "text, expected",
    [
        ("(0.5, -0.25)", 0.5 - 0.25j),
        ("1∠pi/3", cmath.rect(1, math.pi / 3)),
        ("sqrt(0.99)@pi/3", cmath.rect(math.sqrt(0.99), math.pi / 3)),
        ("0.1", 0.1),
        (0.25, 0.25),
        ([0, 1], 1j),
        ("1/sqrt(2)", 1 / math.sqrt(2)),
    ],
)
def test_parse_amplitude(text, expected):
    assert parse_amplitude(text) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("text", ["abc", "(1, )", "__import__('os')", "1∠"])
def test_parse_amplitude_rejects_garbage(text):
    with pytest.raises(ConfigError):
        parse_amplitude(text)


def test_examples():
    one, two = example_config(1), example_config(2)
    np.testing.assert_allclose(one.state.amplitudes, [2**-0.5, cmath.rect(2**-0.5, math.pi / 3)])
    assert two.target[1, 1].real == pytest.approx(0.99)
    assert one.gamma_t == two.gamma_t == 0.3
    with pytest.raises(ConfigError):
        example_config(3)


def test_yaml_roundtrip(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        """
initial_state:
  - [0, "0.1"]
  - [1, "sqrt(0.99)∠pi/3"]
gamma_t: 0.4
r: 1
k_max: 3
dim: 4
gamma_ts: [0.3, 1.0]
optimizer:
  restarts: 4
  coarse_grid: [4, 4, 4, 4, 8]
  rng_seed: 11
qgrid: {extent: 2, step: 0.1}
output_dir: results
"""
    )
    cfg = load_config(path)
    assert cfg.state.dim == 4
    assert cfg.gamma_t == 0.4
    assert cfg.optimizer_config.cost_cfg.r == 1
    assert cfg.optimizer.coarse_grid == (4, 4, 4, 4, 8)
    assert cfg.optimizer.rng_seed == 11
    assert cfg.qgrid.extent == 2
    assert cfg.gamma_ts == (0.3, 1.0)
    assert str(cfg.output_dir) == "results"


@pytest.mark.parametrize(
    "raw, match",
    [
        ({"initial_state": [[0, 1], [1, 1]]}, "normalized"),
        ({"initial_state": [[0, 1], [0, 0]]}, "unique"),
        ({"initial_state": [[0, 0.6], [3, 0.8]], "dim": 2}, "outside"),
        ({"initial_state": [[0, 1]], "gamma_t": -1}, "gamma_t"),
        ({"initial_state": [[0, 1]], "k_max": 0}, "k_max"),
        ({"initial_state": [[0, 1]], "colour": "red"}, "unknown"),
        ({"initial_state": [[0, 1]], "optimizer": {"restarts": 0}}, "restarts"),
        ({"gamma_t": 0.3}, "required"),
        ({"initial_state": [[0, 1]], "qgrid": {"step": 0}}, "qgrid"),
    ],
)
def test_invalid_configs(raw, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(raw)


def test_normalization_tolerance():
    config_from_dict({"initial_state": [[0, 1 + 2e-10]]})
    with pytest.raises(ConfigError):
        config_from_dict({"initial_state": [[0, 1 + 1e-8]]})


def test_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("initial_state: [[0, 1]\n")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
