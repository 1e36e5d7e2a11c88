"""Run configuration: schema, validation, defaults and round-tripping.

The configuration is a single JSON document.  Every key is optional (the
defaults reproduce the experiment's setting: 60 G, 1.1 % abundance,
T2n* = 56 us, PDD2, calibrated preparation), but unknown keys anywhere are
hard errors so typos cannot silently change a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dynamics, model
from .cce import ANCILLA_DECAY_PROFILES, DEFAULT_MAX_ORDER, DEFAULT_PAIR_CUTOFF
from .model import N14Params, SystemParams

DEFAULT_SEED = 20260810


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class BathSettings:
    seed: int = DEFAULT_SEED
    abundance: float = model.C13_ABUNDANCE
    r_min: float = model.DEFAULT_R_MIN
    r_max: float = model.DEFAULT_R_MAX
    max_order: int = DEFAULT_MAX_ORDER
    pair_cutoff: float = DEFAULT_PAIR_CUTOFF
    method: str = "cce"  # "cce" | "exact" (exact needs <= 8 spins)


@dataclass(frozen=True)
class SequenceSettings:
    kind: str = "pdd"  # "fid" | "hahn" | "pdd"
    n_pulses: int = 2
    duration: float = 60e-6
    n_samples: int = 241


@dataclass(frozen=True)
class TomographySettings:
    enabled: bool = False
    shots: int = 1_000_000
    contrast: float = 0.3
    n_resamples: int = 200


@dataclass(frozen=True)
class AnalysisSettings:
    t0: float = 0.0
    tmax: float | None = None  # None = sequence duration
    ancilla_decay: str = "gaussian"


@dataclass(frozen=True)
class OutputSettings:
    path: str = "out"
    format: str = "csv"  # trajectory format; reports are always JSON


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    n14_enabled: bool
    bath: BathSettings
    sequence: SequenceSettings
    preparation: dynamics.PreparationSpec
    tomography: TomographySettings
    analysis: AnalysisSettings
    output: OutputSettings


_SCHEMA = {
    "system": {
        "zero_field_splitting": float,
        "gamma_e": float,
        "gamma_c": float,
        "b_field": float,
        "ancilla_hyperfine": "matrix3",
        "t2n_star": float,
        "n14": {"enabled": bool, "a_parallel": float, "a_perp": float},
    },
    "bath": {
        "seed": int,
        "abundance": float,
        "r_min": float,
        "r_max": float,
        "max_order": int,
        "pair_cutoff": float,
        "method": ("cce", "exact"),
    },
    "sequence": {
        "kind": ("fid", "hahn", "pdd"),
        "n_pulses": int,
        "duration": float,
        "n_samples": int,
    },
    "preparation": {"polarization": float, "pulse_angle_error": float},
    "tomography": {
        "enabled": bool,
        "shots": int,
        "contrast": float,
        "n_resamples": int,
    },
    "analysis": {
        "t0": float,
        "tmax": "float_or_null",
        "ancilla_decay": ANCILLA_DECAY_PROFILES,
    },
    "output": {"path": str, "format": ("csv", "json")},
}


def _check_value(path: str, value, kind):
    if isinstance(kind, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        for key in value:
            if key not in kind:
                raise ConfigError(f"unknown key: {path}.{key}" if path else f"unknown key: {key}")
        for key, sub in kind.items():
            if key in value:
                _check_value(f"{path}.{key}" if path else key, value[key], sub)
        return
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected a number")
    elif kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer")
    elif kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false")
    elif kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
    elif kind == "matrix3":
        try:
            arr = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: expected a 3x3 numeric matrix") from None
        if arr.shape != (3, 3):
            raise ConfigError(f"{path}: expected a 3x3 numeric matrix")
    elif kind == "float_or_null":
        if value is not None and (not isinstance(value, (int, float)) or isinstance(value, bool)):
            raise ConfigError(f"{path}: expected a number or null")
    elif isinstance(kind, tuple):
        if value not in kind:
            raise ConfigError(f"{path}: expected one of {kind}, got {value!r}")
    else:  # pragma: no cover
        raise AssertionError(f"bad schema entry for {path}")


def validate_raw(raw: dict) -> None:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected an object")
    _check_value("", raw, _SCHEMA)


def build_config(raw: dict) -> RunConfig:
    """Validate a raw dict and produce a RunConfig with defaults filled in."""
    validate_raw(raw)
    sys_raw = dict(raw.get("system", {}))
    n14_raw = dict(sys_raw.pop("n14", {}))
    n14_enabled = bool(n14_raw.get("enabled", False))
    n14 = N14Params(
        a_parallel=float(n14_raw.get("a_parallel", model.N14_A_PARALLEL_DEFAULT)),
        a_perp=float(n14_raw.get("a_perp", 0.0)),
    )
    try:
        system = SystemParams(
            zero_field_splitting=float(
                sys_raw.get("zero_field_splitting", model.ZERO_FIELD_SPLITTING)
            ),
            gamma_e=float(sys_raw.get("gamma_e", model.GAMMA_E)),
            gamma_c=float(sys_raw.get("gamma_c", model.GAMMA_C)),
            b_field=float(sys_raw.get("b_field", model.B_FIELD)),
            ancilla_hyperfine=np.asarray(
                sys_raw.get("ancilla_hyperfine", model.ANCILLA_HYPERFINE_DEFAULT), dtype=float
            ),
            t2n_star=float(sys_raw.get("t2n_star", model.T2N_STAR)),
            n14=n14,
        )
        bath = BathSettings(**raw.get("bath", {}))
        sequence = SequenceSettings(**raw.get("sequence", {}))
        preparation = dynamics.PreparationSpec(**raw.get("preparation", {}))
        tomography = TomographySettings(**raw.get("tomography", {}))
        analysis = AnalysisSettings(**raw.get("analysis", {}))
        output = OutputSettings(**raw.get("output", {}))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
    _validate_semantics(bath, sequence, tomography, analysis)
    return RunConfig(
        system=system,
        n14_enabled=n14_enabled,
        bath=bath,
        sequence=sequence,
        preparation=preparation,
        tomography=tomography,
        analysis=analysis,
        output=output,
    )


def _validate_semantics(bath, sequence, tomography, analysis):
    if not (0.0 <= bath.abundance <= 1.0):
        raise ConfigError("bath.abundance: must be in [0, 1]")
    if not (0 < bath.r_min < bath.r_max):
        raise ConfigError("bath.r_min/r_max: need 0 < r_min < r_max")
    if bath.max_order < 1:
        raise ConfigError("bath.max_order: must be >= 1")
    if sequence.duration <= 0:
        raise ConfigError("sequence.duration: must be > 0")
    if sequence.n_samples < 2:
        raise ConfigError("sequence.n_samples: must be >= 2")
    if sequence.kind == "pdd" and sequence.n_pulses < 1:
        raise ConfigError("sequence.n_pulses: must be >= 1")
    if tomography.shots < 1:
        raise ConfigError("tomography.shots: must be >= 1")
    if not (0.0 < tomography.contrast <= 1.0):
        raise ConfigError("tomography.contrast: must be in (0, 1]")
    if tomography.n_resamples < 100:
        raise ConfigError("tomography.n_resamples: must be >= 100")
    tmax = analysis.tmax if analysis.tmax is not None else sequence.duration
    if not (0.0 <= analysis.t0 < tmax <= sequence.duration):
        raise ConfigError("analysis.t0/tmax: need 0 <= t0 < tmax <= duration")


def effective_raw(cfg: RunConfig) -> dict:
    """Complete raw dict (every key explicit) that re-parses to the same run."""
    return {
        "system": {
            "zero_field_splitting": cfg.system.zero_field_splitting,
            "gamma_e": cfg.system.gamma_e,
            "gamma_c": cfg.system.gamma_c,
            "b_field": cfg.system.b_field,
            "ancilla_hyperfine": [
                [float(x) for x in row] for row in cfg.system.ancilla_hyperfine
            ],
            "t2n_star": cfg.system.t2n_star,
            "n14": {
                "enabled": cfg.n14_enabled,
                "a_parallel": cfg.system.n14.a_parallel,
                "a_perp": cfg.system.n14.a_perp,
            },
        },
        "bath": {
            "seed": cfg.bath.seed,
            "abundance": cfg.bath.abundance,
            "r_min": cfg.bath.r_min,
            "r_max": cfg.bath.r_max,
            "max_order": cfg.bath.max_order,
            "pair_cutoff": cfg.bath.pair_cutoff,
            "method": cfg.bath.method,
        },
        "sequence": {
            "kind": cfg.sequence.kind,
            "n_pulses": cfg.sequence.n_pulses,
            "duration": cfg.sequence.duration,
            "n_samples": cfg.sequence.n_samples,
        },
        "preparation": {
            "polarization": cfg.preparation.polarization,
            "pulse_angle_error": cfg.preparation.pulse_angle_error,
        },
        "tomography": {
            "enabled": cfg.tomography.enabled,
            "shots": cfg.tomography.shots,
            "contrast": cfg.tomography.contrast,
            "n_resamples": cfg.tomography.n_resamples,
        },
        "analysis": {
            "t0": cfg.analysis.t0,
            "tmax": cfg.analysis.tmax,
            "ancilla_decay": cfg.analysis.ancilla_decay,
        },
        "output": {"path": cfg.output.path, "format": cfg.output.format},
    }


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def set_by_path(raw: dict, dotted: str, value) -> dict:
    """Return a copy of ``raw`` with the dotted key path set to ``value``."""
    keys = dotted.split(".")
    schema = _SCHEMA
    for k in keys[:-1]:
        if not isinstance(schema, dict) or k not in schema:
            raise ConfigError(f"unknown axis: {dotted}")
        schema = schema[k]
    if not isinstance(schema, dict) or keys[-1] not in schema:
        raise ConfigError(f"unknown axis: {dotted}")
    out = json.loads(json.dumps(raw))
    node = out
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
    return out
