"""
Sweep configuration files.

A config is an INI file with these sections (keys not listed are errors):

``[sweep]``
    ``mode``
        quantum-detuning, quantum-amplitude, quantum-kerr, quantum-sigma,
        classical-detuning, perturbative-detuning, network3, network4 or
        minimal-3level.
    ``axes``
        Comma-separated swept parameters, outermost first. Each axis ``x``
        takes either ``x_values = a, b, ...`` or ``x_start``, ``x_stop``,
        ``x_points``.
    ``seed``, ``tail_tolerance``, ``residual_tolerance``, ``name``
``[oscillator]``
    Defaults shared by every site: ``omega``, ``kerr``, ``gamma``
    (or ``gamma_plus`` and ``gamma_minus``), ``n_plus``, ``n_minus``
    (default ``n_plus + 1``), ``sigma`` (or ``sigma_plus`` and
    ``sigma_minus``), ``dim``. ``kerr_times_sigma`` replaces ``kerr`` by
    ``kerr_times_sigma / sigma`` so the product stays fixed in sigma sweeps.
``[oscillator.<site>]``
    Per-site overrides of the same keys; ``<site>`` is 1-based or a label.
``[coupling]``
    ``v`` for two sites and the four-site ring, ``v1`` and ``v2`` for the
    three-site network. A link of strength ``v`` enters the coupling matrix
    as ``C_jk = -v``. Alternatively ``matrix`` gives C itself, rows
    separated by ``;`` (real, symmetric, zero diagonal); it excludes the
    link keys and sweeping ``v``, ``v1`` or ``v2``.
``[classical]``
    ``gamma_T``, ``n_T``, ``dt``, ``t_burn``, ``t_sample``, ``n_traj``,
    ``sample_interval``, ``n_bins``, ``scheme``.

Swept parameters: ``delta`` (``omega_1 - omega_2``, or the detuning of the
second species in networks), ``v``, ``v1``, ``v2``, ``kerr``, ``sigma``,
``n_plus`` (every site), ``n2_plus`` and ``dn`` (``n2_plus - n1_plus``).
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ConfigError",
    "MODES",
    "AXES",
    "Axis",
    "SweepConfig",
    "load_config",
    "parse_config",
]

MODES = (
    "quantum-detuning",
    "quantum-amplitude",
    "quantum-kerr",
    "quantum-sigma",
    "classical-detuning",
    "perturbative-detuning",
    "network3",
    "network4",
    "minimal-3level",
)

# axis name -> CSV column
AXES = {
    "delta": "delta_over_gamma",
    "v": "v_over_gamma",
    "v1": "v1_over_gamma",
    "v2": "v2_over_gamma",
    "kerr": "kerr_over_gamma",
    "sigma": "sigma",
    "n_plus": "n_plus",
    "n2_plus": "n2_plus",
    "dn": "delta_n",
}

_REQUIRED_AXIS = {
    "quantum-detuning": {"delta"},
    "quantum-amplitude": {"n2_plus", "dn"},
    "quantum-kerr": {"kerr"},
    "quantum-sigma": {"sigma"},
    "classical-detuning": {"delta"},
    "perturbative-detuning": {"delta"},
    "minimal-3level": {"delta"},
}

_MODE_AXES = {
    "network3": {"delta", "v1", "v2", "kerr", "sigma", "n_plus"},
    "network4": {"delta", "v", "kerr", "sigma", "n_plus"},
}
_TWO_SITE_AXES = {"delta", "v", "kerr", "sigma", "n_plus", "n2_plus", "dn"}

_SWEEP_KEYS = {"mode", "axes", "seed", "tail_tolerance", "residual_tolerance", "name"}
_OSC_KEYS = {"omega", "kerr", "gamma", "gamma_plus", "gamma_minus", "n_plus", "n_minus",
             "sigma", "sigma_plus", "sigma_minus", "dim", "kerr_times_sigma"}
_COUPLING_KEYS = {"v", "v1", "v2", "matrix"}
_CLASSICAL_KEYS = {"gamma_t", "n_t", "dt", "t_burn", "t_sample", "n_traj",
                   "sample_interval", "n_bins", "scheme"}

_N_SITES = {"network3": 3, "network4": 4}
_DEFAULT_TAIL = 1e-2


class ConfigError(ValueError):
    """Malformed or inconsistent sweep configuration."""


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]

    @property
    def column(self) -> str:
        return AXES[self.name]


@dataclass(frozen=True)
class SweepConfig:
    mode: str
    axes: tuple[Axis, ...]
    oscillator: dict
    sites: dict = field(default_factory=dict)
    coupling: dict = field(default_factory=dict)
    classical: dict = field(default_factory=dict)
    seed: int = 0
    tail_tolerance: float = _DEFAULT_TAIL
    residual_tolerance: float = 1e-10
    name: str = "sweep"

    @property
    def n_sites(self) -> int:
        return _N_SITES.get(self.mode, 2)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a.values) for a in self.axes)

    def points(self):
        """Sweep coordinates as dicts, last axis varying fastest."""
        grids = np.meshgrid(*[np.array(a.values) for a in self.axes], indexing="ij")
        flat = [g.ravel() for g in grids]
        return [{a.name: float(f[i]) for a, f in zip(self.axes, flat)} for i in range(flat[0].size)]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "axes": {a.name: list(a.values) for a in self.axes},
            "oscillator": dict(self.oscillator),
            "sites": {k: dict(v) for k, v in self.sites.items()},
            "coupling": dict(self.coupling),
            "classical": dict(self.classical),
            "seed": self.seed,
            "tail_tolerance": self.tail_tolerance,
            "residual_tolerance": self.residual_tolerance,
            "name": self.name,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form; changes iff any field changes."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "SweepConfig":
        d = self.__dict__.copy()
        d["seed"] = int(seed)
        return SweepConfig(**d)


def _number(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _numbers(section, key, raw) -> tuple[float, ...]:
    items = [s for s in raw.replace("\n", ",").split(",") if s.strip()]
    if not items:
        raise ConfigError(f"[{section}] {key}: empty value list")
    return tuple(_number(section, key, s.strip()) for s in items)


def _check_keys(section: str, got, allowed) -> None:
    unknown = sorted(set(got) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}] unknown key(s): {', '.join(unknown)}")


def _read_axes(section: configparser.SectionProxy, mode: str) -> tuple[tuple[Axis, ...], set]:
    names = [s.strip() for s in section.get("axes", "").split(",") if s.strip()]
    if not names:
        raise ConfigError("[sweep] axes: at least one swept parameter is required")
    allowed = _MODE_AXES.get(mode, _TWO_SITE_AXES)
    used = set()
    axes = []
    for name in names:
        if name not in allowed:
            raise ConfigError(f"[sweep] axes: {name!r} cannot be swept in mode {mode}")
        if name in {a.name for a in axes}:
            raise ConfigError(f"[sweep] axes: {name!r} listed twice")
        if f"{name}_values" in section:
            values = _numbers("sweep", f"{name}_values", section[f"{name}_values"])
            used.add(f"{name}_values")
        else:
            keys = [f"{name}_start", f"{name}_stop", f"{name}_points"]
            missing = [k for k in keys if k not in section]
            if missing:
                raise ConfigError(f"[sweep] axis {name!r} needs {name}_values or {', '.join(missing)}")
            start, stop = (_number("sweep", k, section[k]) for k in keys[:2])
            n = _number("sweep", keys[2], section[keys[2]])
            if n < 1 or n != int(n):
                raise ConfigError(f"[sweep] {keys[2]}: expected a positive integer, got {section[keys[2]]}")
            values = tuple(float(x) for x in np.linspace(start, stop, int(n)))
            used.update(keys)
        axes.append(Axis(name, values))
    need = _REQUIRED_AXIS.get(mode)
    if need and not need & set(names):
        raise ConfigError(f"mode {mode} must sweep one of: {', '.join(sorted(need))}")
    if "n2_plus" in names and "dn" in names:
        raise ConfigError("[sweep] axes: n2_plus and dn are mutually exclusive")
    return tuple(axes), used


def _matrix(raw: str, n_sites: int) -> list[list[float]]:
    rows = [_numbers("coupling", "matrix", r) for r in raw.replace("\n", " ").split(";") if r.strip()]
    if {len(r) for r in rows} != {n_sites} or len(rows) != n_sites:
        raise ConfigError(f"[coupling] matrix: expected {n_sites} rows of {n_sites} entries")
    C = np.array(rows)
    if not np.array_equal(C, C.T) or np.any(np.diag(C) != 0):
        raise ConfigError("[coupling] matrix must be symmetric with zero diagonal")
    return C.tolist()


def _site_key(name: str, n_sites: int) -> int:
    labels = [chr(ord("A") + j) for j in range(n_sites)]
    if name.isdigit() and 1 <= int(name) <= n_sites:
        return int(name) - 1
    if name.upper() in labels:
        return labels.index(name.upper())
    raise ConfigError(f"[oscillator.{name}] site must be 1..{n_sites} or a label {labels}")


def parse_config(text: str, source: str = "<string>") -> SweepConfig:
    """Parse INI text into a validated :class:`SweepConfig`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if "sweep" not in cp:
        raise ConfigError(f"{source}: missing [sweep] section")
    sw = cp["sweep"]
    mode = sw.get("mode", "").strip()
    if mode not in MODES:
        raise ConfigError(f"[sweep] mode: expected one of {', '.join(MODES)}, got {mode!r}")
    axes, axis_keys = _read_axes(sw, mode)
    _check_keys("sweep", sw.keys(), _SWEEP_KEYS | axis_keys)

    n_sites = _N_SITES.get(mode, 2)
    oscillator, sites, coupling, classical = {}, {}, {}, {}
    for name in cp.sections():
        sec = cp[name]
        if name == "sweep":
            continue
        if name == "oscillator" or name.startswith("oscillator."):
            _check_keys(name, sec.keys(), _OSC_KEYS)
            vals = {k: _number(name, k, v) for k, v in sec.items()}
            if name == "oscillator":
                oscillator = vals
            else:
                sites[_site_key(name.split(".", 1)[1], n_sites)] = vals
        elif name == "coupling":
            _check_keys(name, sec.keys(), _COUPLING_KEYS)
            coupling = {k: (_matrix(v, n_sites) if k == "matrix" else _number(name, k, v))
                        for k, v in sec.items()}
        elif name == "classical":
            _check_keys(name, sec.keys(), _CLASSICAL_KEYS)
            classical = {k: (v.strip() if k == "scheme" else _number(name, k, v)) for k, v in sec.items()}
        else:
            raise ConfigError(f"{source}: unknown section [{name}]")
    if classical and mode != "classical-detuning":
        raise ConfigError("[classical] is only valid in mode classical-detuning")
    for key in ("dim", "n_traj", "n_bins"):
        for vals in [oscillator, classical, *sites.values()]:
            if key in vals and (vals[key] != int(vals[key]) or vals[key] < 1):
                raise ConfigError(f"{key}: expected a positive integer, got {vals[key]}")

    link_keys = {"v1", "v2"} if mode == "network3" else {"v"}
    swept = {a.name for a in axes}
    if "matrix" in coupling:
        clash = (set(coupling) - {"matrix"}) | (swept & {"v", "v1", "v2"})
        if clash:
            raise ConfigError(f"[coupling] matrix excludes link strengths, got {', '.join(sorted(clash))}")
        link_keys = set()
        coupling = {"matrix": coupling["matrix"]}
    bad = set(coupling) - link_keys - {"matrix"}
    if bad:
        raise ConfigError(f"[coupling] {', '.join(sorted(bad))} not used in mode {mode}")
    missing = link_keys - set(coupling) - swept
    if missing:
        raise ConfigError(f"[coupling] missing {', '.join(sorted(missing))}")

    seed = sw.get("seed", "0")
    if not seed.strip().lstrip("-").isdigit():
        raise ConfigError(f"[sweep] seed: expected an integer, got {seed!r}")
    return SweepConfig(
        mode=mode,
        axes=axes,
        oscillator=oscillator,
        sites=sites,
        coupling=coupling,
        classical=classical,
        seed=int(seed),
        tail_tolerance=_number("sweep", "tail_tolerance", sw.get("tail_tolerance", str(_DEFAULT_TAIL))),
        residual_tolerance=_number("sweep", "residual_tolerance", sw.get("residual_tolerance", "1e-10")),
        name=sw.get("name", Path(source).stem if source != "<string>" else "sweep").strip(),
    )


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))
