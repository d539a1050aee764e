"""Run configuration: a nested YAML file, overridable from the command line.

Schema (every key optional)::

    kernel:
      alpha: 1.0
    scenario:
      name: two-peakon
      params: {}          # scenario-specific, see ``peakon-lab list-scenarios -v``
    integrator:
      scheme: rk45        # rk45 | rk4
      rtol: 1.0e-10
      atol: 1.0e-10
      T: null             # null -> scenario default
      dt: null            # fixed step, rk4 only
      snapshots: 101      # evenly spaced output rows; 0 -> every integrator node
    diagnostics:
      N_list: null        # null -> scenario default
      R: 5.0
      times: [0.0, 1.0]
      lipschitz_pairs: 100
      holder_pairs: 50
      battery_count: 5
      young_samples: 20
    output:
      dir: null           # null -> $PEAKON_LAB_OUT, else ./peakon-out
      formats: [csv, json]
    seed: 0
    tolerance: 1.0e-6     # slack allowed on analytic-inequality margins
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

import yaml

from .dynamics import SCHEMES

DEFAULT_OUT = "peakon-out"
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Bad configuration; the message names the offending field and, for files, the line."""


@dataclass
class RunConfig:
    alpha: float = 1.0
    scenario: str = "single-peakon"
    params: dict = field(default_factory=dict)
    scheme: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-10
    T: float | None = None
    dt: float | None = None
    snapshots: int = 101
    N_list: list | None = None
    R: float = 5.0
    times: list = field(default_factory=lambda: [0.0, 1.0])
    lipschitz_pairs: int = 100
    holder_pairs: int = 50
    battery_count: int = 5
    young_samples: int = 20
    out: str | None = None
    formats: list = field(default_factory=lambda: list(FORMATS))
    seed: int = 0
    tolerance: float = 1e-6

    def validate(self) -> "RunConfig":
        if not self.alpha > 0:
            raise ConfigError(f"kernel.alpha must be > 0, got {self.alpha}")
        if self.T is not None and not self.T > 0:
            raise ConfigError(f"integrator.T must be > 0, got {self.T}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"integrator.scheme must be one of {list(SCHEMES)}, got {self.scheme!r}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigError("integrator.rtol and integrator.atol must be > 0")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"integrator.dt must be > 0, got {self.dt}")
        if self.snapshots < 0 or self.snapshots == 1:
            raise ConfigError("integrator.snapshots must be 0 or >= 2")
        if self.N_list is not None:
            if not self.N_list or any(int(n) != n or n < 1 for n in self.N_list):
                raise ConfigError("diagnostics.N_list must be a nonempty list of positive integers")
            if any(b <= a for a, b in zip(self.N_list, self.N_list[1:])):
                raise ConfigError(f"diagnostics.N_list must be strictly increasing, got {self.N_list}")
        if not self.R > 0:
            raise ConfigError(f"diagnostics.R must be > 0, got {self.R}")
        for name in ("lipschitz_pairs", "holder_pairs", "battery_count", "young_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"diagnostics.{name} must be >= 1")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"output.formats: unknown format(s) {bad}; expected a subset of {list(FORMATS)}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be >= 0")
        return self

    def out_dir(self) -> str:
        return self.out or os.environ.get("PEAKON_LAB_OUT") or DEFAULT_OUT

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")  # output location does not affect results
        return d


# file key path -> (RunConfig attribute, expected type)
_SCHEMA = {
    ("kernel", "alpha"): ("alpha", float),
    ("scenario", "name"): ("scenario", str),
    ("scenario", "params"): ("params", dict),
    ("integrator", "scheme"): ("scheme", str),
    ("integrator", "rtol"): ("rtol", float),
    ("integrator", "atol"): ("atol", float),
    ("integrator", "T"): ("T", float),
    ("integrator", "dt"): ("dt", float),
    ("integrator", "snapshots"): ("snapshots", int),
    ("diagnostics", "N_list"): ("N_list", list),
    ("diagnostics", "R"): ("R", float),
    ("diagnostics", "times"): ("times", list),
    ("diagnostics", "lipschitz_pairs"): ("lipschitz_pairs", int),
    ("diagnostics", "holder_pairs"): ("holder_pairs", int),
    ("diagnostics", "battery_count"): ("battery_count", int),
    ("diagnostics", "young_samples"): ("young_samples", int),
    ("output", "dir"): ("out", str),
    ("output", "formats"): ("formats", list),
    ("seed",): ("seed", int),
    ("tolerance",): ("tolerance", float),
}
_SECTIONS = {k[0] for k in _SCHEMA if len(k) == 2}


def _marks(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (k.value,)
            out[p] = k.start_mark
            _marks(v, p, out)
    return out


def _where(marks, path) -> str:
    m = marks.get(tuple(path))
    return f" (line {m.line + 1}, column {m.column + 1})" if m is not None else ""


def _coerce(value, typ, dotted, where):
    if value is None:
        return None
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"{dotted}: expected a number, got {value!r}{where}")
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{dotted}: expected a number, got {value!r}{where}") from None
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{dotted}: expected an integer, got {value!r}{where}")
        return value
    if not isinstance(value, typ):
        raise ConfigError(f"{dotted}: expected {typ.__name__}, got {value!r}{where}")
    return value


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
        marks = _marks(yaml.compose(text)) if data else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{source}: YAML syntax error{loc}: {problem}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping, got {type(data).__name__}")

    cfg = RunConfig()
    for key, val in data.items():
        if key in _SECTIONS:
            if not isinstance(val, dict):
                raise ConfigError(f"{source}: section {key!r} must be a mapping{_where(marks, [key])}")
            for sub, v in val.items():
                path = (key, sub)
                if path not in _SCHEMA:
                    raise ConfigError(f"{source}: unknown field {key}.{sub}{_where(marks, path)}")
                attr, typ = _SCHEMA[path]
                setattr(cfg, attr, _coerce(v, typ, f"{source}: {key}.{sub}", _where(marks, path)))
        elif (key,) in _SCHEMA:
            attr, typ = _SCHEMA[(key,)]
            setattr(cfg, attr, _coerce(val, typ, f"{source}: {key}", _where(marks, [key])))
        else:
            raise ConfigError(f"{source}: unknown field {key}{_where(marks, [key])}")
    if cfg.params is None:
        cfg.params = {}
    for name in ("N_list", "times"):
        v = getattr(cfg, name)
        if v is not None and not all(isinstance(e, (int, float)) and not isinstance(e, bool) for e in v):
            raise ConfigError(f"{source}: diagnostics.{name} must be a list of numbers")
    if cfg.formats is None:
        cfg.formats = list(FORMATS)
    defaults = RunConfig()
    for name in ("alpha", "scheme", "rtol", "atol", "snapshots", "R", "times", "seed", "tolerance",
                 "lipschitz_pairs", "holder_pairs", "battery_count", "young_samples", "scenario"):
        if getattr(cfg, name) is None:
            setattr(cfg, name, getattr(defaults, name))
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, source=path)
