"""Run configuration: a small INI dialect with a fixed schema.

Files contain ``[section]`` headers and ``key = value`` lines; blank lines and
lines starting with ``#`` or ``;`` are ignored (no inline comments).  Every
key belongs to a known section and is typed by the schema below; unknown
sections or keys, duplicate keys, and malformed values are reported with the
file name and line number.  Core sections always materialize with defaults;
experiment sections ([ensemble], [sweep], [twin], [refine]) appear only when
present in the file.

``RunConfig.serialize`` emits the canonical form (fixed section and key
order, all defaults filled in); parsing that text reproduces the same
configuration, so serialize and parse are mutually idempotent.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .coefficients import CoefficientSet, chi_preset, k_preset, phi_preset
from .errors import ConfigurationError
from .fields import Grid, State, make_grid
from .noise import NoiseModel, make_noise_model
from .stepper import StepperConfig, default_initial

OUTPUT_ROOT_ENV = "CTNS_OUTPUT_ROOT"

# (key, type, default); types: int, float, bool, str, ints, floats
_CORE_SCHEMA = {
    "grid": (
        ("nx", "int", 64),
        ("ny", "int", 64),
        ("lx", "float", 1.0),
        ("ly", "float", 1.0),
        ("bc", "str", "torus"),
    ),
    "coefficients": (
        ("delta", "float", 1.0),
        ("mu", "float", 1.0),
        ("nu", "float", 1.0),
        ("chi", "str", "one"),
        ("k", "str", "linear"),
        ("k_rate", "float", 1.0),
        ("phi", "str", "gravity"),
        ("phi_strength", "float", 0.1),
        ("c_max", "float", 1.0),
    ),
    "noise": (
        ("enabled", "bool", True),
        ("modes", "int", 8),
        ("q0", "float", 1.0),
        ("decay_power", "float", 1.5),
        ("a_scale", "float", 1.0),
        ("b_scale", "float", 0.0),
        ("seed", "int", 0),
    ),
    "time": (
        ("dt", "float", 1e-3),
        ("t_final", "float", 1.0),
        ("cfl_safety", "float", 0.5),
        ("clip_negative", "bool", False),
        ("track_dissipation", "bool", True),
        ("strict_monitors", "bool", False),
    ),
    "initial": (
        ("preset", "str", "uniform_bump"),
        ("seed", "int", 0),
        ("bump_amplitude", "float", 0.5),
        ("c_base", "float", 0.5),
        ("c_amplitude", "float", 0.4),
        ("u_amplitude", "float", 0.5),
    ),
    "output": (
        ("directory", "str", "runs/latest"),
        ("record_stride", "int", 1),
        ("snapshot_stride", "int", 0),
    ),
}

_EXPERIMENT_SCHEMA = {
    "ensemble": (
        ("members", "int", 16),
        ("master_seed", "int", 2024),
    ),
    "sweep": (
        ("modes", "ints", (4, 8, 16, 32)),
    ),
    "twin": (
        ("delta0", "float", 1e-6),
        ("perturb", "str", "velocity"),
        ("snapshot_stride", "int", 10),
    ),
    "refine": (
        ("kind", "str", "dt"),
        ("dts", "floats", (4e-3, 2e-3, 1e-3, 5e-4)),
        ("sizes", "ints", (16, 32, 64)),
        ("paths", "int", 4),
        ("master_seed", "int", 7),
    ),
}

_SECTION_ORDER = tuple(_CORE_SCHEMA) + tuple(_EXPERIMENT_SCHEMA)

_TRUE_WORDS = {"true", "yes", "on", "1"}
_FALSE_WORDS = {"false", "no", "off", "0"}


def _parse_value(raw: str, typ: str, where: str):
    raw = raw.strip()
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "bool":
            low = raw.lower()
            if low in _TRUE_WORDS:
                return True
            if low in _FALSE_WORDS:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if typ == "str":
            if not raw:
                raise ValueError("empty value")
            return raw
        if typ in ("ints", "floats"):
            parts = [p.strip() for p in raw.split(",")]
            if any(not p for p in parts):
                raise ValueError("empty list entry")
            cast = int if typ == "ints" else float
            return tuple(cast(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None
    raise ConfigurationError(f"{where}: unknown schema type {typ!r}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    """Parsed configuration: section -> key -> typed value."""

    data: dict
    source: str = field(default="<defaults>", compare=False)

    # -- construction --

    @staticmethod
    def defaults() -> "RunConfig":
        data = {sec: {k: d for k, _, d in keys} for sec, keys in _CORE_SCHEMA.items()}
        return RunConfig(data)

    def get(self, section: str, key: str):
        return self.data[section][key]

    def experiment(self, name: str) -> dict | None:
        """Experiment parameters if the section was present in the file."""
        return self.data.get(name)

    def experiment_params(self, name: str) -> dict:
        """Experiment parameters, falling back to schema defaults."""
        if name not in _EXPERIMENT_SCHEMA:
            raise ConfigurationError(f"unknown experiment section [{name}]")
        if name in self.data:
            return dict(self.data[name])
        return {k: d for k, _, d in _EXPERIMENT_SCHEMA[name]}

    def with_value(self, section: str, key: str, value) -> "RunConfig":
        schema = dict(_CORE_SCHEMA)
        schema.update(_EXPERIMENT_SCHEMA)
        valid = {k for k, _, _ in schema.get(section, ())}
        if key not in valid:
            raise ConfigurationError(f"unknown key {section}.{key}")
        data = {s: dict(kv) for s, kv in self.data.items()}
        if section not in data:
            data[section] = {k: d for k, _, d in _EXPERIMENT_SCHEMA[section]}
        data[section][key] = value
        return RunConfig(data, self.source)

    # -- serialization --

    def serialize(self) -> str:
        lines = []
        for sec in _SECTION_ORDER:
            if sec not in self.data:
                continue
            schema = _CORE_SCHEMA.get(sec) or _EXPERIMENT_SCHEMA[sec]
            lines.append(f"[{sec}]")
            for key, _, _ in schema:
                lines.append(f"{key} = {_format_value(self.data[sec][key])}")
            lines.append("")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {sec: {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in kv.items()}
                for sec, kv in self.data.items()}

    # -- builders --

    def grid(self) -> Grid:
        g = self.data["grid"]
        return make_grid(g["nx"], g["ny"], g["lx"], g["ly"], g["bc"])

    def coefficients(self) -> CoefficientSet:
        co = self.data["coefficients"]
        return CoefficientSet(
            delta=co["delta"], mu=co["mu"], nu=co["nu"],
            chi=chi_preset(co["chi"]),
            k=k_preset(co["k"], co["k_rate"]),
            phi=phi_preset(co["phi"], co["phi_strength"]),
            c_max=co["c_max"])

    def noise_model(self, grid: Grid, modes: int | None = None) -> NoiseModel | None:
        nz = self.data["noise"]
        if not nz["enabled"]:
            return None
        return make_noise_model(
            grid, modes if modes is not None else nz["modes"],
            q0=nz["q0"], decay_power=nz["decay_power"],
            a_scale=nz["a_scale"], b_scale=nz["b_scale"], seed=nz["seed"])

    def stepper_config(self, grid: Grid | None = None,
                       modes: int | None = None) -> StepperConfig:
        if grid is None:
            grid = self.grid()
        tm = self.data["time"]
        out = self.data["output"]
        return StepperConfig(
            dt=tm["dt"], t_final=tm["t_final"],
            coeffs=self.coefficients(),
            noise=self.noise_model(grid, modes),
            cfl_safety=tm["cfl_safety"],
            clip_negative=tm["clip_negative"],
            track_dissipation=tm["track_dissipation"],
            strict_monitors=tm["strict_monitors"],
            record_stride=out["record_stride"],
            snapshot_stride=out["snapshot_stride"])

    def initial_state(self, grid: Grid | None = None) -> State:
        if grid is None:
            grid = self.grid()
        ini = self.data["initial"]
        return default_initial(
            grid, preset=ini["preset"], seed=ini["seed"],
            bump_amplitude=ini["bump_amplitude"], c_base=ini["c_base"],
            c_amplitude=ini["c_amplitude"], u_amplitude=ini["u_amplitude"])

    def output_dir(self) -> Path:
        raw = Path(self.data["output"]["directory"])
        if raw.is_absolute():
            return raw
        root = os.environ.get(OUTPUT_ROOT_ENV)
        return (Path(root) if root else Path.cwd()) / raw


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse INI text against the schema; errors carry source:line."""
    schema = dict(_CORE_SCHEMA)
    schema.update(_EXPERIMENT_SCHEMA)
    cfg = RunConfig.defaults()
    data = cfg.data
    data_lines = {}  # (section, key) -> first line number
    section_lines = {}
    section = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigurationError(
                    f"{source}:{lineno}: malformed section header {stripped!r}")
            name = stripped[1:-1].strip()
            if name not in schema:
                raise ConfigurationError(
                    f"{source}:{lineno}: unknown section [{name}]; "
                    f"expected one of {', '.join(_SECTION_ORDER)}")
            if name in section_lines:
                raise ConfigurationError(
                    f"{source}:{lineno}: section [{name}] already opened at line "
                    f"{section_lines[name]}")
            section_lines[name] = lineno
            section = name
            if section not in data:
                data[section] = {k: d for k, _, d in _EXPERIMENT_SCHEMA[section]}
            continue
        if "=" not in stripped:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        if section is None:
            raise ConfigurationError(
                f"{source}:{lineno}: key outside any section")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        types = {k: t for k, t, _ in schema[section]}
        if key not in types:
            raise ConfigurationError(
                f"{source}:{lineno}: unknown key {key!r} in [{section}]; "
                f"valid keys: {', '.join(types)}")
        if (section, key) in data_lines:
            raise ConfigurationError(
                f"{source}:{lineno}: duplicate key {key!r} in [{section}] "
                f"(first set at line {data_lines[(section, key)]})")
        data_lines[(section, key)] = lineno
        data[section][key] = _parse_value(
            raw, types[key], f"{source}:{lineno}: key {key!r}")

    cfg.source = source
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, source=str(p))
