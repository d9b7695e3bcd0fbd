"""Run configuration: parsing, validation and canonical serialization.

The grammar is INI (stdlib ``configparser``) with flat sections::

    [material]    effective_mass_ratio, relative_permittivity
    [geometry]    a, R, hbar_omega0                      (nm, nm, meV)
    [detuning]    eps_L, eps_R                           (meV)
    [model]       mode = hubbard-nn | full; capacitive = coupled | hartree
    [sweep]       axis, min, max, steps                  (required)
    [sweep2]      axis, min, max, steps                  (second axis, crosstalk only)
    [output]      csv, levels
    [tolerance]   dominance_threshold

Every section except ``[sweep]`` is optional and missing keys take defaults
(GaAs, hbar_omega0 = 5 meV, a = 22 nm, R = 58 nm). Unknown sections or keys,
missing required keys and invariant violations raise ConfigError carrying the
offending line number.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace

import numpy as np

from ..couplings import CAPACITIVE_METHODS
from ..device import Device, DeviceError, DeviceGeometry, Detunings, MaterialParams, set_detunings
from ..integrals import MODES
from ..manybody import DOMINANCE_THRESHOLD

AXES = ("eps_L", "eps_R", "hbar_omega0", "a", "R")

SCHEMA = {
    "material": ("effective_mass_ratio", "relative_permittivity"),
    "geometry": ("a", "R", "hbar_omega0"),
    "detuning": ("eps_L", "eps_R"),
    "model": ("mode", "capacitive"),
    "sweep": ("axis", "min", "max", "steps"),
    "sweep2": ("axis", "min", "max", "steps"),
    "output": ("csv", "levels"),
    "tolerance": ("dominance_threshold",),
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class SweepAxis:
    axis: str
    min: float
    max: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class RunConfig:
    material: MaterialParams = field(default_factory=MaterialParams)
    a: float = 22.0
    R: float = 58.0
    hbar_omega0: float = 5.0
    eps_L: float = 0.0
    eps_R: float = 0.0
    mode: str = "hubbard-nn"
    capacitive: str = "coupled"
    sweeps: tuple[SweepAxis, ...] = ()
    csv: str | None = None
    levels: int = 6
    dominance_threshold: float = DOMINANCE_THRESHOLD

    def device(self, **overrides: float) -> Device:
        """Device at the base point with some of ``AXES`` overridden."""
        p = {"a": self.a, "R": self.R, "hbar_omega0": self.hbar_omega0,
             "eps_L": self.eps_L, "eps_R": self.eps_R}
        p.update(overrides)
        g = DeviceGeometry(a=p["a"], R=p["R"], hbar_omega0=p["hbar_omega0"])
        return Device(set_detunings(g, Detunings(p["eps_L"], p["eps_R"])), self.material)

    def with_mode(self, mode: str) -> RunConfig:
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
        return replace(self, mode=mode)


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """(section, key) -> 1-based line; key None marks the section header."""
    out: dict[tuple[str, str | None], int] = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), n)
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
        if section is not None:
            out.setdefault((section, key), n)
    return out


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__no_defaults__")
    cp.optionxform = str  # keys are case sensitive (eps_L, R)
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any section", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno) from exc

    lines = _line_index(text)

    def where(section, key=None):
        return lines.get((section, key), lines.get((section, None)))

    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", where(section))
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", where(section, key))

    def get(section, key, conv, default):
        if not cp.has_option(section, key):
            return default
        raw = cp[section][key].strip()
        try:
            val = conv(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}", where(section, key)) from None
        if isinstance(val, float) and not np.isfinite(val):
            raise ConfigError(f"[{section}] {key} must be finite", where(section, key))
        return val

    def require(cond, msg, section, key):
        if not cond:
            raise ConfigError(msg, where(section, key))

    d = RunConfig()
    mass = get("material", "effective_mass_ratio", float, d.material.effective_mass_ratio)
    require(mass > 0, "invariant effective_mass_ratio > 0 violated", "material", "effective_mass_ratio")
    perm = get("material", "relative_permittivity", float, d.material.relative_permittivity)
    require(perm > 0, "invariant relative_permittivity > 0 violated", "material", "relative_permittivity")

    a = get("geometry", "a", float, d.a)
    require(a > 0, f"invariant a > 0 violated (a={a})", "geometry", "a")
    R = get("geometry", "R", float, d.R)
    require(R > a, f"invariant R > a violated (R={R}, a={a})", "geometry", "R")
    hw = get("geometry", "hbar_omega0", float, d.hbar_omega0)
    require(hw > 0, f"invariant hbar_omega0 > 0 violated (hbar_omega0={hw})", "geometry", "hbar_omega0")

    eps_L = get("detuning", "eps_L", float, d.eps_L)
    eps_R = get("detuning", "eps_R", float, d.eps_R)

    mode = get("model", "mode", str, d.mode)
    require(mode in MODES, f"mode must be one of {MODES}, got {mode!r}", "model", "mode")
    cap = get("model", "capacitive", str, d.capacitive)
    require(cap in CAPACITIVE_METHODS, f"capacitive must be one of {CAPACITIVE_METHODS}, got {cap!r}",
            "model", "capacitive")

    if not cp.has_section("sweep"):
        raise ConfigError("missing required section [sweep]")
    sweeps = []
    for section in ("sweep", "sweep2"):
        if not cp.has_section(section):
            continue
        for key in SCHEMA[section]:
            require(cp.has_option(section, key), f"missing required key {key!r} in [{section}]", section, None)
        axis = get(section, "axis", str, None)
        require(axis in AXES, f"axis must be one of {AXES}, got {axis!r}", section, "axis")
        lo = get(section, "min", float, None)
        hi = get(section, "max", float, None)
        steps = get(section, "steps", int, None)
        require(steps >= 2, f"invariant steps >= 2 violated (steps={steps})", section, "steps")
        require(lo != hi, "sweep range is empty (min == max)", section, "max")
        sweeps.append(SweepAxis(axis, lo, hi, steps))
    if len(sweeps) == 2:
        require(sweeps[0].axis != sweeps[1].axis, "[sweep2] repeats the [sweep] axis", "sweep2", "axis")

    csv = get("output", "csv", str, d.csv)
    levels = get("output", "levels", int, d.levels)
    require(1 <= levels <= 36, f"invariant 1 <= levels <= 36 violated (levels={levels})", "output", "levels")
    thr = get("tolerance", "dominance_threshold", float, d.dominance_threshold)
    require(0 < thr <= 1, f"invariant 0 < dominance_threshold <= 1 violated ({thr})",
            "tolerance", "dominance_threshold")

    cfg = RunConfig(MaterialParams(mass, perm), a, R, hw, eps_L, eps_R, mode, cap, tuple(sweeps),
                    csv, levels, thr)
    # sweep end points must describe valid devices too
    for section, sw in zip(("sweep", "sweep2"), sweeps):
        for key, val in (("min", sw.min), ("max", sw.max)):
            try:
                cfg.device(**{sw.axis: val})
            except DeviceError as exc:
                raise ConfigError(f"[{section}] {key}={val}: {exc}", where(section, key)) from None
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    out = [
        "[material]",
        f"effective_mass_ratio = {cfg.material.effective_mass_ratio!r}",
        f"relative_permittivity = {cfg.material.relative_permittivity!r}",
        "",
        "[geometry]",
        f"a = {cfg.a!r}",
        f"R = {cfg.R!r}",
        f"hbar_omega0 = {cfg.hbar_omega0!r}",
        "",
        "[detuning]",
        f"eps_L = {cfg.eps_L!r}",
        f"eps_R = {cfg.eps_R!r}",
        "",
        "[model]",
        f"mode = {cfg.mode}",
        f"capacitive = {cfg.capacitive}",
        "",
    ]
    for name, sw in zip(("sweep", "sweep2"), cfg.sweeps):
        out += [f"[{name}]", f"axis = {sw.axis}", f"min = {sw.min!r}", f"max = {sw.max!r}",
                f"steps = {sw.steps}", ""]
    out += ["[output]"]
    if cfg.csv is not None:
        out.append(f"csv = {cfg.csv}")
    out += [f"levels = {cfg.levels}", "", "[tolerance]",
            f"dominance_threshold = {cfg.dominance_threshold!r}", ""]
    return "\n".join(out)


def config_dict(cfg: RunConfig) -> dict:
    """Plain-data view for the JSON sidecar."""
    return {
        "material": {"effective_mass_ratio": cfg.material.effective_mass_ratio,
                     "relative_permittivity": cfg.material.relative_permittivity},
        "geometry": {"a": cfg.a, "R": cfg.R, "hbar_omega0": cfg.hbar_omega0},
        "detuning": {"eps_L": cfg.eps_L, "eps_R": cfg.eps_R},
        "model": {"mode": cfg.mode, "capacitive": cfg.capacitive},
        "sweeps": [vars(sw).copy() for sw in cfg.sweeps],
        "output": {"csv": cfg.csv, "levels": cfg.levels},
        "tolerance": {"dominance_threshold": cfg.dominance_threshold},
    }
