"""Scenario files: what to integrate, from where, and what to compute.

Scenarios are YAML documents (nested keys, ``#`` comments).  A minimal one::

    model:
      preset: ks-b
    initial:
      x0: [0.01, 1.0, 0.01, 1.0e-18]
    integrator:
      t_max: 2000
    analysis:
      itinerary: true

See README.md for the full schema.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .models import (
    NetworkModel,
    Representation,
    make_generic_model,
    preset_model,
    resolve_preset_id,
)


class ScenarioError(ValueError):
    """Raised with the dotted name of the offending field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# Initial conditions for the built-in presets.  None of them comes from the
# literature; each was picked to show its regime's signature quickly.
PRESET_INITIAL: dict[str, tuple[float, ...]] = {
    "gh": (0.7, 0.1, 0.05),
    "gh-resonant": (0.95, 0.05, 1e-3),
    "ks-a": (0.01, 1.0, 0.01, 1e-3),
    "ks-b": (0.01, 1.0, 0.01, 1e-18),
    "ks-c": (0.01, 1.0, 1e-6, 0.01),
    "ks-d": (0.01, 1.0, 0.01, 1e-10),
    "rpssl-a": (0.735, 0.095, 0.119, 0.047, 0.085),
    "rpssl-b": (0.5, 0.4, 0.3, 0.2, 0.1),
    "rpssl-c": (0.6, 0.3, 0.1, 0.05, 0.02),
    "rpssl-d": (0.6, 0.3, 0.1, 0.05, 0.02),
}

PRESET_T_MAX = {"gh": 500.0, "gh-resonant": 500.0, "ks": 2000.0, "rpssl": 5000.0}


def preset_t_max(preset_id: str) -> float:
    key = resolve_preset_id(preset_id)
    return PRESET_T_MAX.get(key, PRESET_T_MAX[key.split("-")[0]])


@dataclass
class ModelSpec:
    preset: str | None = None
    matrix: list[list[float]] | None = None
    representation: str = Representation.EQUIVARIANT_CUBIC.value
    orthant: bool = True

    def build(self) -> NetworkModel:
        if self.preset is not None:
            return preset_model(self.preset, self.orthant)
        return make_generic_model(np.array(self.matrix, dtype=float),
                                  Representation(self.representation), self.orthant, "inline")


@dataclass
class SampleSpec:
    target: str = "network"
    delta: float = 1e-3
    count: int = 1


@dataclass
class InitialSpec:
    x0: list[float] | None = None
    sample: SampleSpec | None = None


@dataclass
class IntegratorSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_max: float | None = None
    log_mode: bool = True
    max_step: float = 2.0
    eta: float = 0.2


@dataclass
class AnalysisSpec:
    itinerary: bool = True
    ratios: bool = False
    pentacle: bool = False
    indices: bool = False
    plots: bool = False
    min_duration: float = 0.5


@dataclass
class VisibilitySpec:
    targets: list[str] = field(default_factory=lambda: ["network"])
    delta_ladder: list[float] = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    epsilon: float = 0.05
    samples_per_delta: int = 200
    t_max: float = 5000.0
    transient_T: float = 500.0
    recurrence_count: int = 2
    exclusions: str = "invariant-subspaces"


@dataclass
class Scenario:
    model: ModelSpec
    initial: InitialSpec = field(default_factory=InitialSpec)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    analysis: AnalysisSpec | None = None
    visibility: VisibilitySpec | None = None
    seed: int = 0
    output: str = "out"
    name: str = ""

    def __post_init__(self):
        validate(self)

    def to_dict(self) -> dict:
        return _prune(asdict(self))

    def digest(self) -> str:
        """Hash of everything that affects results; the output location is left out."""
        d = self.to_dict()
        d.pop("output", None)
        text = yaml.safe_dump(d, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def initial_state(self, m: NetworkModel) -> np.ndarray:
        if self.initial.x0 is not None:
            return np.asarray(self.initial.x0, dtype=float)
        if self.model.preset is not None:
            return np.asarray(PRESET_INITIAL[resolve_preset_id(self.model.preset)], dtype=float)
        raise ScenarioError("initial.x0", "required for inline models")

    def t_max(self) -> float:
        if self.integrator.t_max is not None:
            return self.integrator.t_max
        return preset_t_max(self.model.preset) if self.model.preset else 500.0


def _prune(d):
    if isinstance(d, dict):
        return {k: _prune(v) for k, v in d.items() if v is not None}
    if isinstance(d, list):
        return [_prune(v) for v in d]
    return d


def validate(sc: Scenario) -> None:
    ms = sc.model
    if (ms.preset is None) == (ms.matrix is None):
        raise ScenarioError("model", "give exactly one of 'preset' or 'matrix'")
    if ms.preset is not None:
        try:
            resolve_preset_id(ms.preset)
        except KeyError as exc:
            raise ScenarioError("model.preset", str(exc.args[0])) from None
    else:
        try:
            Representation(ms.representation)
        except ValueError:
            raise ScenarioError("model.representation",
                                f"unknown representation {ms.representation!r}") from None
    if sc.analysis is None and sc.visibility is None:
        raise ScenarioError("analysis", "at least one of 'analysis' or 'visibility' is required")
    if sc.initial.x0 is not None and sc.initial.sample is not None:
        raise ScenarioError("initial", "give 'x0' or 'sample', not both")
    if not 0 <= sc.seed < 2**64:
        raise ScenarioError("seed", "must be an unsigned 64-bit integer")


def _build(cls, data, where: str):
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ScenarioError(where, "expected a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ScenarioError(f"{where}.{sorted(unknown)[0]}", "unknown field")
    kwargs = {}
    for key, value in data.items():
        sub = _NESTED.get((cls, key))
        kwargs[key] = _build(sub, value, f"{where}.{key}") if sub else value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ScenarioError(where, str(exc)) from None


_NESTED = {
    (InitialSpec, "sample"): SampleSpec,
    (Scenario, "model"): ModelSpec,
    (Scenario, "initial"): InitialSpec,
    (Scenario, "integrator"): IntegratorSpec,
    (Scenario, "analysis"): AnalysisSpec,
    (Scenario, "visibility"): VisibilitySpec,
}


def scenario_from_dict(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario", "top level must be a mapping")
    if "model" not in data:
        raise ScenarioError("model", "missing required field")
    data = dict(data)
    data.setdefault("initial", {})
    data.setdefault("integrator", {})
    return _build(Scenario, data, "scenario")


def parse_scenario(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("scenario", f"not valid YAML: {exc}") from None
    return scenario_from_dict(data)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def dump_scenario(sc: Scenario) -> str:
    return yaml.safe_dump(sc.to_dict(), sort_keys=False, default_flow_style=None)


def preset_scenario(preset_id: str, **overrides) -> Scenario:
    key = resolve_preset_id(preset_id)
    sc = Scenario(
        model=ModelSpec(preset=key),
        initial=InitialSpec(x0=list(PRESET_INITIAL[key])),
        integrator=IntegratorSpec(t_max=preset_t_max(key)),
        analysis=AnalysisSpec(itinerary=True, ratios=True, pentacle=key.startswith("rpssl"),
                              indices=True),
        name=key,
    )
    for k, v in overrides.items():
        setattr(sc, k, v)
    validate(sc)
    return sc
