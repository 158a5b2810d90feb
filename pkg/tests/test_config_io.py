"""Config parsing with line-reporting errors, snapshot files, and NDJSON."""

import json

import numpy as np
import pytest

from conftest import small_state
from ctns import make_grid
from ctns.config import RunConfig, load_config, parse_config
from ctns.errors import ConfigurationError
from ctns.snapshots import (
    json_line,
    read_ndjson,
    read_snapshot,
    snapshot_path,
    snapshot_size,
    write_json,
    write_ndjson,
    write_snapshot,
)


# -- parsing ------------------------------------------------------------------------


def test_defaults_are_complete():
    cfg = RunConfig.defaults()
    assert cfg.get("grid", "nx") == 64
    assert cfg.get("time", "dt") == pytest.approx(1e-3)
    assert cfg.get("coefficients", "k") == "linear"
    assert cfg.experiment("ensemble") is None  # not opened by default


def test_parse_overrides_and_experiment_sections():
    text = """
# a comment line
[grid]
nx = 32
ny = 32

[noise]
enabled = false

[sweep]
modes = 4, 8, 16
"""
    cfg = parse_config(text, source="inline")
    assert cfg.get("grid", "nx") == 32
    assert cfg.get("noise", "enabled") is False
    assert cfg.experiment_params("sweep")["modes"] == (4, 8, 16)
    assert cfg.noise_model(make_grid(32, 32)) is None


def test_error_messages_carry_source_and_line():
    cases = [
        ("[nowhere]\n", "inline:1: unknown section"),
        ("[grid]\nwheels = 4\n", "inline:2: unknown key 'wheels'"),
        ("[grid]\nnx = 32\nnx = 64\n", "inline:3: duplicate key 'nx' in [grid] (first set at line 2)"),
        ("[grid]\nnx = soon\n", "inline:2: key 'nx'"),
        ("nx = 32\n", "inline:1: key outside any section"),
        ("[grid\n", "inline:1: malformed section header"),
        ("[grid]\njust words\n", "inline:2: expected 'key = value'"),
        ("[grid]\nnx = 32\n[grid]\n", "inline:3: section [grid] already opened at line 1"),
    ]
    for text, fragment in cases:
        with pytest.raises(ConfigurationError) as err:
            parse_config(text, source="inline")
        assert fragment in str(err.value), (text, str(err.value))


def test_serialize_roundtrip_is_idempotent():
    text = "[grid]\nnx = 16\nny = 16\n[time]\ndt = 0.002\nt_final = 0.01\n"
    cfg = parse_config(text, source="inline")
    dumped = cfg.serialize()
    again = parse_config(dumped, source="re")
    assert again.serialize() == dumped
    assert again.get("grid", "nx") == 16
    assert again.get("time", "dt") == pytest.approx(2e-3)


def test_with_value_and_unknown_key():
    cfg = RunConfig.defaults()
    c2 = cfg.with_value("grid", "nx", 128)
    assert c2.get("grid", "nx") == 128
    assert cfg.get("grid", "nx") == 64  # original untouched
    with pytest.raises(ConfigurationError):
        cfg.with_value("grid", "carburetor", 1)
    with pytest.raises(ConfigurationError):
        cfg.experiment_params("not_an_experiment")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigurationError) as err:
        load_config(tmp_path / "absent.ini")
    assert "absent.ini" in str(err.value)


def test_config_builds_runnable_objects():
    text = """
[grid]
nx = 16
ny = 16

[noise]
modes = 4
seed = 9

[time]
dt = 0.001
t_final = 0.002
"""
    cfg = parse_config(text, source="inline")
    grid = cfg.grid()
    assert (grid.nx, grid.ny) == (16, 16)
    scfg = cfg.stepper_config(grid)
    assert scfg.steps == 2
    assert scfg.noise.m == 4 and scfg.noise.seed == 9
    state = cfg.initial_state(grid)
    assert state.n.values.shape == grid.shape


# -- snapshots -----------------------------------------------------------------------


def test_snapshot_roundtrip_is_bitwise(tmp_path, grid):
    state = small_state(grid, seed=3)
    path = snapshot_path(tmp_path, 7)
    assert path.name == "state_000007.ctns"
    nbytes = write_snapshot(path, state)
    assert nbytes == snapshot_size(grid.nx, grid.ny)
    assert path.stat().st_size == nbytes
    back = read_snapshot(path)
    assert back.t == state.t
    assert np.array_equal(back.n.values, state.n.values)
    assert np.array_equal(back.c.values, state.c.values)
    assert np.array_equal(back.u.x, state.u.x)
    assert np.array_equal(back.u.y, state.u.y)
    assert (back.grid.nx, back.grid.ny, back.grid.lx, back.grid.ly) == \
        (grid.nx, grid.ny, grid.lx, grid.ly)


def test_snapshot_carries_accumulators(tmp_path, grid, coeffs):
    from ctns import StepperConfig, default_initial, run
    cfg = StepperConfig(dt=1e-3, t_final=5e-3, coeffs=coeffs)
    traj = run(cfg, default_initial(grid))
    path = tmp_path / "final.ctns"
    write_snapshot(path, traj.final)
    back = read_snapshot(path)
    assert back.accum is not None
    assert back.accum.fisher == traj.final.accum.fisher
    assert back.accum.enstrophy == traj.final.accum.enstrophy


def test_snapshot_size_constant():
    assert snapshot_size(64, 64) == 131160


def test_snapshot_rejects_corruption(tmp_path, grid):
    state = small_state(grid)
    path = tmp_path / "s.ctns"
    write_snapshot(path, state)
    blob = path.read_bytes()
    (tmp_path / "trunc.ctns").write_bytes(blob[:100])
    with pytest.raises(ConfigurationError):
        read_snapshot(tmp_path / "trunc.ctns")
    (tmp_path / "magic.ctns").write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ConfigurationError):
        read_snapshot(tmp_path / "magic.ctns")
    (tmp_path / "short.ctns").write_bytes(blob[:-8])
    with pytest.raises(ConfigurationError):
        read_snapshot(tmp_path / "short.ctns")


# -- NDJSON and JSON ------------------------------------------------------------------


def test_json_line_is_canonical():
    rec = {"b": 1.0, "a": np.float64(0.5), "c": np.int64(3)}
    line = json_line(rec)
    assert line == '{"a":0.5,"b":1.0,"c":3}'
    assert json.loads(line) == {"a": 0.5, "b": 1.0, "c": 3}


def test_ndjson_roundtrip_and_determinism(tmp_path):
    records = [{"t": 0.001 * i, "value": np.sqrt(i)} for i in range(5)]
    p1 = tmp_path / "a.ndjson"
    p2 = tmp_path / "b.ndjson"
    write_ndjson(p1, records)
    write_ndjson(p2, records)
    assert p1.read_bytes() == p2.read_bytes()
    back = read_ndjson(p1)
    assert len(back) == 5
    assert back[3]["value"] == pytest.approx(np.sqrt(3), rel=1e-15)


def test_write_json_sorted(tmp_path):
    path = tmp_path / "report.json"
    write_json(path, {"z": 1, "a": {"nested": np.float32(2.0)}})
    text = path.read_text()
    assert text.index('"a"') < text.index('"z"')
    assert json.loads(text)["a"]["nested"] == 2.0
