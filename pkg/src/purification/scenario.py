"""Scenario files: JSON descriptions of a run and/or a sweep.

Example::

    {
      "version": 1,
      "model": "two_qubit",
      "params": {"omega_a": 1, "omega_b": 1, "g": 1, "h": 0,
                 "tau": "pi/2", "theta": 0, "phi": 0},
      "run": {"n_max": 20, "record_states": false, "target": "auto",
              "initial_state": "maximally_mixed"},
      "sweep": {"axes": [{"param": "tau", "min": 0.1, "max": 6.0, "n_points": 60}],
                "weight": 1.0, "refine": 1, "objective": "combined"},
      "output": {"path": "out.csv", "format": "csv"}
    }

Numbers may be given as strings in pi notation (``"pi/2"``, ``"-3pi/4"``,
``"2*pi"``). Complex amplitudes are numbers or ``[re, im]`` pairs.
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParams, ScenarioError
from .models import MODEL_TYPES, ModelConfig, successive_target, target_dim
from .optimizer import Axis, SweepGrid
from .quantum import DOWN, UP, DensityMatrix, bell_basis

SCENARIO_VERSION = 1
OBJECTIVES = ("combined", "loss_unimodularity", "gap_ratio")
NAMED_TARGETS = ("auto", "psi_plus", "psi_minus", "phi_plus", "phi_minus", "up", "down", "successive_psi")

_PI_RE = re.compile(
    r"^\s*(?P<sign>[-+])?\s*(?P<coef>\d+(\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(/\s*(?P<den>\d+(\.\d*)?))?\s*$"
)


def parse_number(value, name: str = "value") -> float:
    if isinstance(value, bool):
        raise ScenarioError(f"{name}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            coef = float(m["coef"]) if m["coef"] else 1.0
            den = float(m["den"]) if m["den"] else 1.0
            if den == 0:
                raise ScenarioError(f"{name}: division by zero in {value!r}")
            out = (-1 if m["sign"] == "-" else 1) * coef * math.pi / den
        else:
            try:
                out = float(value)
            except ValueError:
                raise ScenarioError(f"{name}: cannot parse {value!r} as a number") from None
    else:
        raise ScenarioError(f"{name}: expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ScenarioError(f"{name}: must be finite")
    return out


def parse_complex(value, name: str = "value") -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ScenarioError(f"{name}: complex numbers are [re, im] pairs")
        return complex(parse_number(value[0], name), parse_number(value[1], name))
    return complex(parse_number(value, name))


def _complex_json(z: complex):
    return [z.real, z.imag]


def _check_keys(block: dict, allowed, where: str):
    if not isinstance(block, dict):
        raise ScenarioError(f"{where}: expected an object")
    extra = set(block) - set(allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown key(s) {sorted(extra)}")


@dataclass(frozen=True)
class RunSpec:
    n_max: int = 50
    record_states: bool = False
    target: str | tuple[complex, ...] = "auto"
    initial_state: str | tuple[complex, ...] = "maximally_mixed"


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    weight: float = 1.0
    refine: int = 1
    objective: str = "combined"


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioFile:
    model: str
    params: dict
    run: RunSpec = field(default_factory=RunSpec)
    sweep: SweepSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)
    version: int = SCENARIO_VERSION

    # -- construction ------------------------------------------------------

    def model_params(self):
        cls = MODEL_TYPES[self.model]
        try:
            return cls(**self.params)
        except TypeError as exc:
            raise ScenarioError(f"params: {exc}") from None
        except InvalidParams as exc:
            raise ScenarioError(f"params: {exc}") from None

    def initial_state(self, rng: np.random.Generator | None = None) -> DensityMatrix | None:
        dim = target_dim(self.model_params())
        spec = self.run.initial_state
        if spec == "maximally_mixed":
            return DensityMatrix.maximally_mixed(dim)
        if spec == "random":
            return DensityMatrix.random(dim, rng or np.random.default_rng(0))
        amps = np.array(spec, dtype=complex)
        if amps.size != dim:
            raise ScenarioError(f"run.initial_state: expected {dim} amplitudes")
        try:
            return DensityMatrix.pure(amps)
        except InvalidParams as exc:
            raise ScenarioError(f"run.initial_state: {exc}") from None

    def model_config(self, rng: np.random.Generator | None = None) -> ModelConfig:
        return ModelConfig(self.model_params(), self.initial_state(rng))

    def target_vector(self) -> np.ndarray | None:
        """Explicit fidelity target, or None for the predicted pure limit."""
        t = self.run.target
        dim = target_dim(self.model_params())
        if isinstance(t, tuple):
            vec = np.array(t, dtype=complex)
        elif t == "auto":
            return None
        elif t in ("up", "down"):
            vec = UP if t == "up" else DOWN
        elif t == "successive_psi":
            if self.model != "successive":
                raise ScenarioError("target 'successive_psi' needs the successive model")
            p = self.params
            vec = successive_target(p["omega"], p["t_a"], p["tau_a"])
        else:
            vec = bell_basis()[t]
        if vec.size != dim:
            raise ScenarioError(f"run.target: dimension {vec.size} does not match the model ({dim})")
        if np.linalg.norm(vec) == 0:
            raise ScenarioError("run.target: zero vector")
        return vec / np.linalg.norm(vec)

    def sweep_grid(self, rng: np.random.Generator | None = None) -> SweepGrid:
        if self.sweep is None:
            raise ScenarioError("scenario has no sweep block")
        try:
            return SweepGrid(self.sweep.axes, self.model_config(rng), self.sweep.weight)
        except InvalidParams as exc:
            raise ScenarioError(f"sweep: {exc}") from None

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        params = {
            k: (_complex_json(v) if isinstance(v, complex) else v) for k, v in self.params.items()
        }
        run = {
            "n_max": self.run.n_max,
            "record_states": self.run.record_states,
            "target": self.run.target if isinstance(self.run.target, str) else [_complex_json(z) for z in self.run.target],
            "initial_state": self.run.initial_state
            if isinstance(self.run.initial_state, str)
            else {"pure": [_complex_json(z) for z in self.run.initial_state]},
        }
        out = {"version": self.version, "model": self.model, "params": params, "run": run}
        if self.sweep is not None:
            out["sweep"] = {
                "axes": [dataclasses.asdict(a) for a in self.sweep.axes],
                "weight": self.sweep.weight,
                "refine": self.sweep.refine,
                "objective": self.sweep.objective,
            }
        output = {"format": self.output.format}
        if self.output.path is not None:
            output["path"] = self.output.path
        out["output"] = output
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _parse_params(model: str, raw: dict) -> dict:
    cls = MODEL_TYPES[model]
    allowed = [f.name for f in dataclasses.fields(cls)]
    _check_keys(raw, allowed, "params")
    out = {}
    for k, v in raw.items():
        if model == "mediator" and k in ("alpha", "beta"):
            out[k] = parse_complex(v, f"params.{k}")
        elif k == "coupling":
            if not isinstance(v, str):
                raise ScenarioError("params.coupling must be a string")
            out[k] = v
        else:
            out[k] = parse_number(v, f"params.{k}")
    return out


def _parse_amplitudes(raw, where: str) -> tuple[complex, ...]:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(f"{where}: expected a non-empty list of amplitudes")
    return tuple(parse_complex(x, where) for x in raw)


def _parse_run(raw: dict) -> RunSpec:
    _check_keys(raw, ("n_max", "record_states", "target", "initial_state"), "run")
    n_max = raw.get("n_max", RunSpec.n_max)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
        raise ScenarioError("run.n_max must be a positive integer")
    record = raw.get("record_states", False)
    if not isinstance(record, bool):
        raise ScenarioError("run.record_states must be a boolean")
    target = raw.get("target", "auto")
    if isinstance(target, str):
        if target not in NAMED_TARGETS:
            raise ScenarioError(f"run.target: unknown target {target!r}; choose from {NAMED_TARGETS}")
    else:
        target = _parse_amplitudes(target, "run.target")
    init = raw.get("initial_state", "maximally_mixed")
    if isinstance(init, str):
        if init not in ("maximally_mixed", "random"):
            raise ScenarioError("run.initial_state must be 'maximally_mixed', 'random' or {'pure': [...]}")
    else:
        _check_keys(init, ("pure",), "run.initial_state")
        init = _parse_amplitudes(init.get("pure"), "run.initial_state.pure")
    return RunSpec(n_max, record, target, init)


def _parse_sweep(raw: dict) -> SweepSpec:
    _check_keys(raw, ("axes", "weight", "refine", "objective"), "sweep")
    axes_raw = raw.get("axes")
    if not isinstance(axes_raw, list) or not axes_raw:
        raise ScenarioError("sweep.axes must be a non-empty list")
    axes = []
    for i, a in enumerate(axes_raw):
        where = f"sweep.axes[{i}]"
        _check_keys(a, ("param", "min", "max", "n_points", "scale"), where)
        missing = {"param", "min", "max", "n_points"} - set(a)
        if missing:
            raise ScenarioError(f"{where}: missing {sorted(missing)}")
        n_points = a["n_points"]
        if isinstance(n_points, bool) or not isinstance(n_points, int):
            raise ScenarioError(f"{where}.n_points must be an integer")
        try:
            axes.append(
                Axis(
                    str(a["param"]),
                    parse_number(a["min"], f"{where}.min"),
                    parse_number(a["max"], f"{where}.max"),
                    n_points,
                    a.get("scale", "linear"),
                )
            )
        except InvalidParams as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    if len(axes) > 3:
        raise ScenarioError("sweep: at most three axes")
    weight = parse_number(raw.get("weight", 1.0), "sweep.weight")
    if weight < 0:
        raise ScenarioError("sweep.weight must be non-negative")
    refine = raw.get("refine", 1)
    if isinstance(refine, bool):
        refine = int(refine)
    if not isinstance(refine, int) or refine < 0:
        raise ScenarioError("sweep.refine must be a non-negative integer")
    objective = raw.get("objective", "combined")
    if objective not in OBJECTIVES:
        raise ScenarioError(f"sweep.objective must be one of {OBJECTIVES}")
    return SweepSpec(tuple(axes), weight, refine, objective)


def parse_scenario(data: dict) -> ScenarioFile:
    _check_keys(data, ("version", "model", "params", "run", "sweep", "output"), "scenario")
    if data.get("version") != SCENARIO_VERSION:
        raise ScenarioError(f"scenario version must be {SCENARIO_VERSION}")
    model = data.get("model")
    if model not in MODEL_TYPES:
        raise ScenarioError(f"model must be one of {sorted(MODEL_TYPES)}")
    if "params" not in data:
        raise ScenarioError("scenario needs a params block")
    params = _parse_params(model, data["params"])
    run = _parse_run(data.get("run", {}))
    sweep = _parse_sweep(data["sweep"]) if "sweep" in data else None
    out_raw = data.get("output", {})
    _check_keys(out_raw, ("path", "format"), "output")
    fmt = out_raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ScenarioError("output.format must be 'csv' or 'json'")
    path = out_raw.get("path")
    if path is not None and not isinstance(path, str):
        raise ScenarioError("output.path must be a string")
    scenario = ScenarioFile(model, params, run, sweep, OutputSpec(path, fmt))
    scenario.model_params()  # validate through the model constructor
    return scenario


def load_scenario(path) -> ScenarioFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    return parse_scenario(data)
