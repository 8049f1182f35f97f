"""Run configuration: defaults < INI file < environment < command line.

File grammar (INI, ``#`` or ``;`` comments)::

    [model]    omega1, omega2, omega3, phi, gamma1, gamma2, prefactor
    [scan]     deltas (comma list), grid, contour_grid,
               delta_min, delta_max, delta_points
    [output]   dir, format (csv | json)
    [verify]   samples, seed
    [run]      preset (fig3 | fig4 | fig5 | fig6, empty for none)

Every key can be overridden by ``ATOMLOC_<SECTION>_<KEY>``, e.g.
``ATOMLOC_MODEL_OMEGA1=25``.
"""
from __future__ import annotations

import configparser
import io
import math
import os
from dataclasses import asdict, dataclass, fields, replace

from .errors import InvalidConfig, InvalidParameters
from .model import ModelParams
from .presets import PRESETS
from .scan import MIN_POINTS

ENV_PREFIX = "ATOMLOC_"
FORMATS = ("csv", "json")
MIN_SAMPLES = 100

# field name -> (section, key, parser)
_LAYOUT = {
    "omega1": ("model", "omega1", float),
    "omega2": ("model", "omega2", float),
    "omega3": ("model", "omega3", float),
    "phi": ("model", "phi", float),
    "gamma1": ("model", "gamma1", float),
    "gamma2": ("model", "gamma2", float),
    "prefactor": ("model", "prefactor", float),
    "deltas": ("scan", "deltas", None),
    "grid": ("scan", "grid", int),
    "contour_grid": ("scan", "contour_grid", int),
    "delta_min": ("scan", "delta_min", float),
    "delta_max": ("scan", "delta_max", float),
    "delta_points": ("scan", "delta_points", int),
    "out": ("output", "dir", str),
    "format": ("output", "format", str),
    "samples": ("verify", "samples", int),
    "seed": ("verify", "seed", int),
    "preset": ("run", "preset", None),
}


def _deltas(text: str) -> tuple:
    text = text.strip()
    return tuple(float(x) for x in text.split(",") if x.strip()) if text else ()


def _preset(text: str):
    text = text.strip()
    return text or None


@dataclass(frozen=True)
class RunConfig:
    omega1: float = 30.0
    omega2: float = 20.0
    omega3: float = 20.0
    phi: float = 0.0
    gamma1: float = 1.0
    gamma2: float = 0.0
    prefactor: float = 1.0
    deltas: tuple = ()
    grid: int = 4001
    contour_grid: int = 401
    delta_min: float = -30.0
    delta_max: float = 30.0
    delta_points: int = 241
    out: str = "out"
    format: str = "csv"
    samples: int = 1000
    seed: int = 42
    preset: str | None = None

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.omega1, self.omega2, self.omega3, self.phi,
                           self.gamma1, self.gamma2, self.prefactor)

    def validate(self) -> "RunConfig":
        try:
            self.params
        except InvalidParameters as exc:
            raise InvalidConfig(str(exc)) from None
        if self.grid < MIN_POINTS or self.contour_grid < MIN_POINTS:
            raise InvalidConfig(f"grid sizes must be >= {MIN_POINTS}")
        if self.delta_points < 2 or not self.delta_min < self.delta_max:
            raise InvalidConfig("need delta_min < delta_max and delta_points >= 2")
        if not all(math.isfinite(d) for d in self.deltas):
            raise InvalidConfig("detunings must be finite")
        if self.format not in FORMATS:
            raise InvalidConfig(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.samples < MIN_SAMPLES:
            raise InvalidConfig(f"samples must be >= {MIN_SAMPLES}, got {self.samples}")
        if self.preset is not None and self.preset not in PRESETS:
            raise InvalidConfig(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        return self

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for name, (sec, key, _) in _LAYOUT.items():
            val = getattr(self, name)
            if name == "deltas":
                text = ", ".join(repr(float(d)) for d in val)
            elif val is None:
                text = ""
            elif isinstance(val, float):
                text = repr(val)
            else:
                text = str(val)
            if not cp.has_section(sec):
                cp.add_section(sec)
            cp.set(sec, key, text)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def dump(self) -> dict:
        d = asdict(self)
        d["deltas"] = list(self.deltas)
        return d


def _parse(name: str, text: str):
    parser = _LAYOUT[name][2]
    if name == "deltas":
        return _deltas(text)
    if name == "preset":
        return _preset(text)
    return parser(text.strip())


def _apply(cfg: RunConfig, raw: dict, origin: str) -> RunConfig:
    changes = {}
    for name, text in raw.items():
        try:
            changes[name] = _parse(name, text)
        except ValueError:
            raise InvalidConfig(f"{origin}: cannot parse {name} = {text!r}") from None
    return replace(cfg, **changes)


def read_ini(text: str, origin: str = "<config>") -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise InvalidConfig(f"{origin}: {exc}") from None
    lookup = {(sec, key): name for name, (sec, key, _) in _LAYOUT.items()}
    raw = {}
    for sec in cp.sections():
        for key, val in cp.items(sec):
            name = lookup.get((sec, key))
            if name is None:
                raise InvalidConfig(f"{origin}: unknown key [{sec}] {key}")
            raw[name] = val
    return raw


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    raw = {}
    for name, (sec, key, _) in _LAYOUT.items():
        var = f"{ENV_PREFIX}{sec}_{key}".upper()
        if var in environ:
            raw[name] = environ[var]
    return raw


def load_config(path=None, cli: dict | None = None, environ=None) -> RunConfig:
    """Merge defaults, an optional INI file, environment and parsed CLI values.

    ``cli`` holds already-typed values; ``None`` entries are ignored.
    """
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InvalidConfig(f"cannot read config file {path}: {exc.strerror}") from None
        cfg = _apply(cfg, read_ini(text, str(path)), str(path))
    cfg = _apply(cfg, env_overrides(environ), "environment")
    if cli:
        known = {f.name for f in fields(RunConfig)}
        cfg = replace(cfg, **{k: v for k, v in cli.items() if v is not None and k in known})
    return cfg.validate()
