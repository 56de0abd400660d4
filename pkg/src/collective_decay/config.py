"""Run configuration: strict JSON ingestion and the shipped scenario presets."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dfs import CouplingProfile, SectorState
from .errors import ConfigError
from .evolution import InitialFamily, initial_coefficients
from .propagator import PropagatorParams

TIME_UNITS = ("inv_r", "inv_gamma", "absolute")
MAX_QUBITS = 12

_TOP_KEYS = {"bath", "couplings", "initial", "time", "sweep", "nqubit", "oracle", "output"}
_SECTIONS = {
    "time": {"t_max", "steps", "units"},
    "sweep": {"resolution", "diagonal", "reference_value"},
    "nqubit": {"eta_plus", "eta_minus"},
    "oracle": {"method", "dt", "modes", "half_width"},
    "output": {"path", "format"},
}

_DEFAULTS = {
    "time": {"t_max": 200.0, "steps": 2001, "units": "inv_r"},
    "sweep": {"resolution": 101, "diagonal": False, "reference_value": None},
    "nqubit": {"eta_plus": 0.8, "eta_minus": 0.6},
    "oracle": {"method": "ode", "dt": None, "modes": 4001, "half_width": 40.0},
    "output": {"path": None, "format": "csv"},
}


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _number(value, name, *, lo=None, hi=None):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), f"{name} must be a number")
    value = float(value)
    _require(math.isfinite(value), f"{name} must be finite")
    _require(lo is None or value >= lo, f"{name} must be >= {lo}")
    _require(hi is None or value <= hi, f"{name} must be <= {hi}")
    return value


def _keys(section: dict, allowed: set, name: str):
    _require(isinstance(section, dict), f"{name} must be an object")
    unknown = set(section) - allowed
    _require(not unknown, f"unknown key(s) in {name}: {sorted(unknown)}")


@dataclass(frozen=True, eq=False)
class RunConfig:
    params: PropagatorParams
    profile: CouplingProfile
    initial: SectorState
    t_max: float
    steps: int
    units: str
    sweep: dict = field(default_factory=dict)
    nqubit: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    family: InitialFamily | None = None
    lam: float | None = None
    raw: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def time_scale(self) -> float:
        """Absolute duration of one unit of the configured time axis."""
        if self.units == "inv_r":
            return 1.0 / self.params.r
        if self.units == "inv_gamma":
            return 1.0 / self.params.gamma
        return 1.0

    def time_grid(self) -> np.ndarray:
        """Grid in configured units."""
        return np.linspace(0.0, self.t_max, self.steps)

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_couplings(spec) -> tuple[CouplingProfile, bool]:
    """Returns the profile and whether it was given as normalized weights."""
    _keys(spec, {"alphas", "r"}, "couplings")
    _require(len(spec) == 1, "couplings needs exactly one of 'alphas' or 'r'")
    (kind, values), = spec.items()
    _require(isinstance(values, list) and len(values) >= 2, f"couplings.{kind} must be a list of >= 2 entries")
    _require(len(values) <= MAX_QUBITS, f"at most {MAX_QUBITS} qubits are supported")
    if kind == "alphas":
        alphas = [_number(v, "couplings.alphas[]", lo=0.0) for v in values]
        try:
            return CouplingProfile(alphas), False
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    # weights; one null entry is filled so the weights have unit norm
    holes = [i for i, v in enumerate(values) if v is None]
    _require(len(holes) <= 1, "at most one null entry in couplings.r")
    known = [0.0 if v is None else _number(v, "couplings.r[]", lo=0.0) for v in values]
    if holes:
        rest = 1.0 - sum(v * v for v in known)
        _require(rest >= -1e-12, "couplings.r entries exceed unit norm")
        known[holes[0]] = math.sqrt(max(0.0, rest))
    try:
        return CouplingProfile(known), True
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_bath(spec, profile: CouplingProfile, normalized: bool):
    _keys(spec, {"gamma", "lambda", "R"}, "bath")
    if "R" in spec:
        _require(set(spec) == {"R"}, "bath takes either {'R'} or {'gamma', 'lambda'}")
        R = _number(spec["R"], "bath.R", lo=0.0)
        _require(R > 0, "bath.R must be positive")
        params = PropagatorParams.from_ratio(R)
        return params, R**2 / profile.alpha_total**2
    _require(set(spec) == {"gamma", "lambda"}, "bath takes either {'R'} or {'gamma', 'lambda'}")
    gamma = _number(spec["gamma"], "bath.gamma", lo=0.0)
    lam = _number(spec["lambda"], "bath.lambda", lo=0.0)
    alpha_total = 1.0 if normalized else profile.alpha_total
    try:
        params = PropagatorParams(gamma, math.sqrt(lam) * alpha_total)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return params, lam


def _parse_initial(spec, n: int):
    _require(isinstance(spec, dict), "initial must be an object")
    if "amplitudes" in spec:
        _keys(spec, {"amplitudes", "g0"}, "initial")
        amps = spec["amplitudes"]
        _require(isinstance(amps, list) and len(amps) == n, f"initial.amplitudes needs {n} entries")
        values = []
        for v in amps:
            if isinstance(v, list):
                _require(len(v) == 2, "complex amplitudes are [re, im] pairs")
                values.append(complex(_number(v[0], "re"), _number(v[1], "im")))
            else:
                values.append(complex(_number(v, "amplitude")))
        g0 = _number(spec.get("g0", 0.0), "initial.g0", lo=0.0)
        state = SectorState(values, g0)
        _require(state.is_normalized(1e-8), "initial amplitudes are not normalized")
        return state, None
    _keys(spec, {"p", "theta", "phi"}, "initial")
    _require("p" in spec, "initial needs 'p' or 'amplitudes'")
    _require(n == 3, "the p/theta/phi family is a three-qubit family")
    family = InitialFamily(
        _number(spec["p"], "initial.p", lo=0.0, hi=1.0),
        _number(spec.get("theta", 0.0), "initial.theta"),
        _number(spec.get("phi", 0.0), "initial.phi"),
    )
    return initial_coefficients(family), family


def _section(raw: dict, name: str) -> dict:
    section = raw.get(name, {})
    _keys(section, _SECTIONS[name], name)
    merged = dict(_DEFAULTS[name])
    merged.update(section)
    return merged


def parse_config(raw: dict[str, Any]) -> RunConfig:
    """Validate a configuration document; unknown keys raise :class:`ConfigError`."""
    _keys(raw, _TOP_KEYS, "config")
    for key in ("bath", "couplings"):
        _require(key in raw, f"missing required section '{key}'")
    profile, normalized = _parse_couplings(raw["couplings"])
    params, lam = _parse_bath(raw["bath"], profile, normalized)
    if "initial" in raw:
        initial, family = _parse_initial(raw["initial"], profile.n)
    else:
        initial, family = SectorState(profile.weights), None

    time = _section(raw, "time")
    t_max = _number(time["t_max"], "time.t_max", lo=0.0)
    _require(isinstance(time["steps"], int) and time["steps"] >= 2, "time.steps must be an integer >= 2")
    _require(time["units"] in TIME_UNITS, f"time.units must be one of {TIME_UNITS}")
    _require(time["units"] != "inv_r" or params.r > 0, "time.units 'inv_r' needs r > 0")
    _require(time["units"] != "inv_gamma" or params.gamma > 0, "time.units 'inv_gamma' needs gamma > 0")

    sweep = _section(raw, "sweep")
    _require(isinstance(sweep["resolution"], int) and sweep["resolution"] >= 2, "sweep.resolution must be an integer >= 2")
    _require(isinstance(sweep["diagonal"], bool), "sweep.diagonal must be a boolean")
    if sweep["reference_value"] is not None:
        _number(sweep["reference_value"], "sweep.reference_value")

    nq = _section(raw, "nqubit")
    for key in ("eta_plus", "eta_minus"):
        _number(nq[key], f"nqubit.{key}")
    _require(abs(nq["eta_plus"] ** 2 + nq["eta_minus"] ** 2 - 1.0) <= 1e-8, "nqubit etas must satisfy eta_plus^2 + eta_minus^2 = 1")

    oracle = _section(raw, "oracle")
    _require(oracle["method"] in ("ode", "bath"), "oracle.method must be 'ode' or 'bath'")
    if oracle["dt"] is not None:
        _number(oracle["dt"], "oracle.dt", lo=0.0)
        _require(oracle["dt"] > 0, "oracle.dt must be positive")
    _require(isinstance(oracle["modes"], int) and oracle["modes"] >= 2, "oracle.modes must be an integer >= 2")
    _number(oracle["half_width"], "oracle.half_width", lo=0.0)

    output = _section(raw, "output")
    _require(output["format"] in ("csv", "json"), "output.format must be 'csv' or 'json'")

    return RunConfig(
        params=params,
        profile=profile,
        initial=initial,
        t_max=t_max,
        steps=time["steps"],
        units=time["units"],
        sweep=sweep,
        nqubit=nq,
        oracle=oracle,
        output=output,
        family=family,
        lam=lam,
        raw=copy.deepcopy(raw),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw)


_FIG1_COUPLINGS = {
    # solid curves: the best asymptotic profile differs between the two initial states
    ("solid", 1.0): [0.53, 0.6, None],
    ("solid", 0.0): [0.11, 0.11, None],
    ("dashed", 1.0): [1.0, 1.0, 1.0],
    ("dashed", 0.0): [1.0, 1.0, 1.0],
    ("dashdot", 1.0): [1.0, 0.0, 0.0],
    ("dashdot", 0.0): [1.0, 0.0, 0.0],
}
_FIG1_PANELS = {"a": (0.1, 1.0), "b": (0.1, 0.0), "c": (10.0, 1.0), "d": (10.0, 0.0)}


def _fig1_preset(panel: str, line: str) -> dict:
    R, p = _FIG1_PANELS[panel]
    weights = _FIG1_COUPLINGS[(line, p)]
    couplings = {"r": weights} if None in weights else {"alphas": weights}
    return {
        "bath": {"R": R},
        "couplings": couplings,
        "initial": {"p": p, "theta": 0.0, "phi": 0.0},
        "time": {"t_max": 200.0, "steps": 2001, "units": "inv_r"},
    }


PRESETS: dict[str, dict] = {
    f"fig1{panel}_{line}": _fig1_preset(panel, line)
    for panel in _FIG1_PANELS
    for line in ("solid", "dashed", "dashdot")
}
PRESETS.update(
    {
        "sweep_p1": {
            "bath": {"R": 0.1},
            "couplings": {"r": [0.53, 0.6, None]},
            "initial": {"p": 1.0},
            "sweep": {"resolution": 101},
        },
        "sweep_p0_diagonal": {
            "bath": {"R": 0.1},
            "couplings": {"r": [0.11, 0.11, None]},
            "initial": {"p": 0.0},
            "sweep": {"resolution": 1001, "diagonal": True, "reference_value": 0.19},
        },
        "nqubit5": {
            "bath": {"R": 0.1},
            "couplings": {"alphas": [1.0, 2.0, 2.0, 2.0, 2.0]},
            "nqubit": {"eta_plus": 0.8, "eta_minus": 0.6},
        },
        "oracle_bad_cavity": {
            "bath": {"gamma": 1.0, "lambda": 0.01},
            "couplings": {"alphas": [1.0, 0.0, 0.0]},
            "initial": {"amplitudes": [1.0, 0.0, 0.0]},
            "time": {"t_max": 20.0, "steps": 201, "units": "absolute"},
            "oracle": {"method": "bath", "dt": 0.01, "modes": 4001, "half_width": 40.0},
        },
    }
)


def preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset '{name}'; choose from {sorted(PRESETS)}") from None
