"""Flat INI-style configuration: defaults, file parsing, overrides.

Every simulation field lives in one of the sections below and is reachable
from the command line as ``--set section.key=value`` or, when the key name
is unique across sections, as the bare ``--set key=value``.  Vectors are
written as ``[a, b, ...]``.  The gain matrices gamma1/gamma2 accept a
scalar (multiple of identity) or a vector (diagonal).
"""

from __future__ import annotations

import configparser
import io

import numpy as np

from .control import BarrierBounds, Gains
from .diagnostics import DiagnosticsConfig
from .errors import ConfigError
from .robot import RobotParams
from .sim import SimConfig
from .trajectory import CircleTrajectory, TabulatedTrajectory

# section -> key -> default (as python value)
DEFAULTS: dict[str, dict[str, object]] = {
    "robot": {
        "m1": 0.558, "m2": 0.291, "l1": 0.85, "l2": 1.3,
        "g": 9.81, "fv1": 0.1, "fv2": 0.1,
    },
    "gains": {
        "k_r": 0.1, "k_phi": 1.0, "k_1": 0.8, "k_icl": 100.0,
        "gamma1": [1.0, 1.0], "gamma2": [0.5] * 7,
        "alpha_s4": 0.002, "n_windows": 25, "delta_t": 0.2, "delay": 0.45,
    },
    "bounds": {
        "k_h": [0.75, 0.45], "k_m": [0.4, 1.4],
    },
    "trajectory": {
        "source": "circle", "center": [0.55, 0.25], "radius": [0.2, 0.2],
        "omega": 0.5, "file": "",
    },
    "sim": {
        "duration": 50.0, "dt": 0.01, "plant_substeps": 4,
        "zeta_j0": [0.5, 0.25],
        # dynamics treated as fully unknown at start (see README notes on
        # the reference configuration)
        "zeta_y0": [0.0] * 7,
        "p0": [0.78, 0.23], "elbow": "up", "seed": 0,
        "jdot_uses_estimate_rate": True, "lambda_threshold": 1e-4,
    },
    "diagnostics": {
        "k_lk": [1.0, 1.0, 1.0], "omega_lk": [0.5, 0.5, 0.5],
    },
}

# accepted spellings for common symbols
ALIASES = {
    "t": ("gains", "delay"),
    "k": ("gains", "k_icl"),
    "n": ("gains", "n_windows"),
}


def _parse_value(text: str, default: object, field: str):
    """Parse one INI value against the type of its default."""
    text = text.strip()
    try:
        if isinstance(default, bool):
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, list):
            inner = text.strip()
            if inner.startswith("[") and inner.endswith("]"):
                inner = inner[1:-1]
            parts = [s for s in (x.strip() for x in inner.split(",")) if s]
            return [float(x) for x in parts]
        return text
    except ValueError as exc:
        raise ConfigError(f"{field}: cannot parse {text!r} ({exc})") from None


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, np.ndarray)):
        return "[" + ", ".join(repr(float(x)) for x in value) + "]"
    return str(value)


def _resolve_key(key: str) -> tuple[str, str]:
    key = key.strip()
    if "." in key:
        section, name = key.split(".", 1)
        if section not in DEFAULTS or name not in DEFAULTS[section]:
            raise ConfigError(f"unknown configuration key {key!r}")
        return section, name
    low = key.lower()
    if low in ALIASES:
        return ALIASES[low]
    hits = [(s, k) for s, keys in DEFAULTS.items() for k in keys if k == low]
    if not hits:
        raise ConfigError(f"unknown configuration key {key!r}")
    if len(hits) > 1:
        opts = ", ".join(f"{s}.{k}" for s, k in hits)
        raise ConfigError(f"ambiguous key {key!r}; use one of {opts}")
    return hits[0]


def _read_file(path: str) -> dict[tuple[str, str], str]:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from None
    out: dict[tuple[str, str], str] = {}
    for section in cp.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in cp.items(section):
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown configuration key {section}.{key!r}")
            out[(section, key)] = value
    return out


def _gamma_matrix(values: list[float], n: int, field: str) -> np.ndarray:
    if len(values) == 1:
        return values[0] * np.eye(n)
    if len(values) == n:
        return np.diag(values)
    if len(values) == n * n:
        return np.array(values).reshape(n, n)
    raise ConfigError(f"{field}: expected 1, {n}, or {n * n} entries, got {len(values)}")


def _vector(values, n: int, field: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ConfigError(f"{field}: expected {n} entries, got {arr.shape}")
    return arr


def parse_config(path: str | None = None,
                 overrides: list[str] | None = None) -> SimConfig:
    """Build a SimConfig from an optional INI file plus key=value overrides.

    Unset fields take the reference-experiment defaults; an empty (or
    absent) file yields the full default run.
    """
    values: dict[str, dict[str, object]] = {
        s: dict(keys) for s, keys in DEFAULTS.items()}
    if path is not None:
        for (section, key), text in _read_file(path).items():
            values[section][key] = _parse_value(
                text, DEFAULTS[section][key], f"{section}.{key}")
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        section, name = _resolve_key(key)
        values[section][name] = _parse_value(
            text, DEFAULTS[section][name], f"{section}.{name}")
    return _build(values)


def _build(values: dict[str, dict[str, object]]) -> SimConfig:
    r = values["robot"]
    g = values["gains"]
    b = values["bounds"]
    tr = values["trajectory"]
    s = values["sim"]
    try:
        robot = RobotParams(m1=r["m1"], m2=r["m2"], l1=r["l1"], l2=r["l2"],
                            g=r["g"], fv1=r["fv1"], fv2=r["fv2"])
    except ValueError as exc:
        raise ConfigError(f"robot: {exc}") from None
    try:
        gains = Gains(k_r=g["k_r"], k_phi=g["k_phi"], k_1=g["k_1"], k_icl=g["k_icl"],
                      gamma1=_gamma_matrix(g["gamma1"], 2, "gains.gamma1"),
                      gamma2=_gamma_matrix(g["gamma2"], 7, "gains.gamma2"),
                      alpha_s4=g["alpha_s4"], n_windows=g["n_windows"],
                      delta_t=g["delta_t"], delay=g["delay"])
    except ValueError as exc:
        raise ConfigError(f"gains: {exc}") from None
    k_m = _vector(b["k_m"], 2, "bounds.k_m")
    if np.any(k_m <= 0.0):
        raise ConfigError(f"bounds.k_m: entries must be positive, got {k_m.tolist()}")
    try:
        bounds = BarrierBounds.from_margins(_vector(b["k_h"], 2, "bounds.k_h"), k_m)
    except ValueError as exc:
        raise ConfigError(f"bounds: {exc}") from None
    if tr["source"] == "circle":
        trajectory = CircleTrajectory(center=_vector(tr["center"], 2, "trajectory.center"),
                                      radius=_vector(tr["radius"], 2, "trajectory.radius"),
                                      omega=tr["omega"])
    elif tr["source"] == "file":
        if not tr["file"]:
            raise ConfigError("trajectory.file: required when trajectory.source = file")
        trajectory = TabulatedTrajectory.from_file(tr["file"])
    else:
        raise ConfigError(f"trajectory.source: expected 'circle' or 'file', got {tr['source']!r}")
    if s["elbow"] not in ("up", "down"):
        raise ConfigError(f"sim.elbow: expected 'up' or 'down', got {s['elbow']!r}")
    try:
        return SimConfig(robot=robot, gains=gains, bounds=bounds, trajectory=trajectory,
                         duration=s["duration"], dt=s["dt"],
                         plant_substeps=s["plant_substeps"],
                         zeta_j0=_vector(s["zeta_j0"], 2, "sim.zeta_j0"),
                         zeta_y0=_vector(s["zeta_y0"], 7, "sim.zeta_y0"),
                         p0=_vector(s["p0"], 2, "sim.p0"), elbow=s["elbow"],
                         seed=s["seed"],
                         jdot_uses_estimate_rate=s["jdot_uses_estimate_rate"],
                         lambda_threshold=s["lambda_threshold"])
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from None


def parse_diagnostics_config(path: str | None = None,
                             overrides: list[str] | None = None) -> DiagnosticsConfig:
    """DiagnosticsConfig from the [diagnostics] section of the same file."""
    values = dict(DEFAULTS["diagnostics"])
    if path is not None:
        for (section, key), text in _read_file(path).items():
            if section == "diagnostics":
                values[key] = _parse_value(text, DEFAULTS[section][key],
                                           f"{section}.{key}")
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        section, name = _resolve_key(key)
        if section == "diagnostics":
            values[name] = _parse_value(text, DEFAULTS[section][name],
                                        f"{section}.{name}")
    lam = DEFAULTS["sim"]["lambda_threshold"]
    try:
        return DiagnosticsConfig(k_lk=np.asarray(values["k_lk"], dtype=float),
                                 omega=np.asarray(values["omega_lk"], dtype=float),
                                 lambda_threshold=lam)
    except ValueError as exc:
        raise ConfigError(f"diagnostics: {exc}") from None


def _gamma_values(g: np.ndarray) -> np.ndarray:
    """Diagonal when the matrix is diagonal, else the flattened matrix."""
    if np.count_nonzero(g - np.diag(np.diag(g))) == 0:
        return np.diag(g)
    return g.reshape(-1)


def to_ini_text(cfg: SimConfig) -> str:
    """Serialize a SimConfig back to INI text; parse(to_ini_text(parse(x)))
    reproduces the same configuration (floats are written round-trip
    exactly)."""
    sections: dict[str, dict[str, object]] = {
        "robot": {
            "m1": cfg.robot.m1, "m2": cfg.robot.m2, "l1": cfg.robot.l1,
            "l2": cfg.robot.l2, "g": cfg.robot.g, "fv1": cfg.robot.fv1,
            "fv2": cfg.robot.fv2,
        },
        "gains": {
            "k_r": cfg.gains.k_r, "k_phi": cfg.gains.k_phi, "k_1": cfg.gains.k_1,
            "k_icl": cfg.gains.k_icl,
            "gamma1": _gamma_values(cfg.gains.gamma1),
            "gamma2": _gamma_values(cfg.gains.gamma2),
            "alpha_s4": cfg.gains.alpha_s4, "n_windows": cfg.gains.n_windows,
            "delta_t": cfg.gains.delta_t, "delay": cfg.gains.delay,
        },
        "bounds": {
            "k_h": cfg.bounds.k_h, "k_m": cfg.bounds.k_m,
        },
        "sim": {
            "duration": cfg.duration, "dt": cfg.dt,
            "plant_substeps": cfg.plant_substeps, "zeta_j0": cfg.zeta_j0,
            "zeta_y0": cfg.zeta_y0, "p0": cfg.p0, "elbow": cfg.elbow,
            "seed": cfg.seed,
            "jdot_uses_estimate_rate": cfg.jdot_uses_estimate_rate,
            "lambda_threshold": cfg.lambda_threshold,
        },
    }
    if isinstance(cfg.trajectory, CircleTrajectory):
        sections["trajectory"] = {
            "source": "circle", "center": cfg.trajectory.center,
            "radius": cfg.trajectory.radius, "omega": cfg.trajectory.omega,
        }
    out = io.StringIO()
    for section, keys in sections.items():
        out.write(f"[{section}]\n")
        for key, value in keys.items():
            out.write(f"{key} = {_format_value(value)}\n")
        out.write("\n")
    return out.getvalue()
