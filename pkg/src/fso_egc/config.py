"""Run-configuration schema, parsing and bundled presets."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import jsonschema

from .egc import EgcLink, ModulationParams, transmit_diversity
from .errors import DomainError
from .mixture import GammaGammaParams, MixtureGamma, fit_gamma_gamma
from .pointing import PointingModel

METRICS = ("pdf", "cdf", "moments", "si", "outage", "aber", "asympt")
PRESETS = ("fig1", "fig2")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

_branch = {
    "oneOf": [
        {
            "type": "object",
            "required": ["alpha", "beta"],
            "properties": {"alpha": _pos, "beta": _pos},
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["terms"],
            "properties": {
                "terms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["a", "b", "c"],
                        "properties": {"a": _num, "b": _pos, "c": _pos},
                    },
                }
            },
            "additionalProperties": False,
        },
    ]
}

_model = {
    "type": "object",
    "required": ["xi"],
    "properties": {
        "label": {"type": "string"},
        "alpha": _pos,
        "beta": _pos,
        "branches": {"type": "array", "minItems": 1, "items": _branch},
        "L": {"type": "integer", "minimum": 1, "maximum": 64},
        "N": {
            "oneOf": [
                {"type": "integer", "minimum": 1},
                {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
            ]
        },
        "n_tx": {"type": "integer", "minimum": 1},
        "order": {"enum": ["min-shape", "as-given"]},
        "xi": {"oneOf": [_pos, {"const": "inf"}]},
        "a0": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "r": _pos,
        "wz": _pos,
    },
    "oneOf": [
        {"required": ["alpha", "beta"], "not": {"required": ["branches"]}},
        {"required": ["branches"], "not": {"anyOf": [{"required": ["alpha"]}, {"required": ["beta"]}]}},
    ],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["models", "sweep", "metrics"],
    "properties": {
        "name": {"type": "string"},
        "models": {"type": "array", "minItems": 1, "items": _model},
        "sweep": {
            "type": "object",
            "required": ["start_db", "stop_db", "step_db"],
            "properties": {
                "start_db": _num,
                "stop_db": _num,
                "step_db": _pos,
                "g": {"type": "array", "minItems": 1, "items": _pos},
            },
            "additionalProperties": False,
        },
        "metrics": {"type": "array", "minItems": 1, "uniqueItems": True, "items": {"enum": list(METRICS)}},
        "moments": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "mod": {
            "type": "object",
            "required": ["P", "Q"],
            "properties": {"P": _pos, "Q": _pos},
            "additionalProperties": False,
        },
        "outage": {
            "type": "object",
            "required": ["g_th"],
            "properties": {"g_th": _pos},
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "required": ["n_samples"],
            "properties": {
                "n_samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "chunk_size": {"type": "integer", "minimum": 1},
                "fading": {"enum": ["gamma-gamma", "mixture"]},
                "stop_db": _num,
            },
            "additionalProperties": False,
        },
        "strict_validity": {"type": "boolean"},
        "output": {
            "type": "object",
            "properties": {"format": {"enum": ["csv", "json"]}, "path": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

# blocks each metric needs beyond models/sweep
_NEEDS = {"outage": ("outage",), "asympt": ("outage",), "aber": ("mod",)}


@dataclass(frozen=True)
class ModelCase:
    """One (model, N) combination of a run."""

    label: str
    n: int
    link: EgcLink
    gbar_scale: float = 1.0   # transmit-aperture rescaling of gbar


def validate(doc: dict) -> dict:
    """Check ``doc`` against :data:`SCHEMA`; raises :class:`DomainError`."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DomainError(f"config schema violation at {where}: {exc.message}") from None
    for metric in doc["metrics"]:
        for block in _NEEDS.get(metric, ()):
            if block not in doc:
                raise DomainError(f"metric {metric!r} requires a {block!r} block")
    sw = doc["sweep"]
    if sw["stop_db"] < sw["start_db"]:
        raise DomainError("sweep stop_db must not be below start_db")
    return doc


def load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"config is not valid JSON: {exc}") from None
    except OSError as exc:
        raise DomainError(f"cannot read config: {exc}") from None
    return validate(doc)


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("fso_egc").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return validate(json.loads(text))


def with_overrides(doc: dict, seed: Optional[int] = None, fmt: Optional[str] = None,
                   strict: bool = False) -> dict:
    doc = copy.deepcopy(doc)
    if seed is not None:
        doc.setdefault("sim", {"n_samples": 10**5})["seed"] = seed
    if fmt is not None:
        doc.setdefault("output", {})["format"] = fmt
    if strict:
        doc["strict_validity"] = True
    return validate(doc)


def config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def gbar_grid_db(doc: dict) -> list[float]:
    sw = doc["sweep"]
    start, stop, step = sw["start_db"], sw["stop_db"], sw["step_db"]
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(start + k * step) for k in range(count)]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def modulation(doc: dict) -> ModulationParams:
    m = doc.get("mod", {"P": 0.5, "Q": 1.0})
    return ModulationParams(m["P"], m["Q"])


def model_cases(doc: dict) -> list[ModelCase]:
    strict = bool(doc.get("strict_validity", False))
    cases = []
    for k, m in enumerate(doc["models"]):
        pointing = PointingModel.from_dict({key: m[key] for key in ("xi", "a0", "r", "wz") if key in m})
        L = m.get("L", 10)
        order = m.get("order", "min-shape")
        n_tx = m.get("n_tx", 1)
        if "branches" in m:
            fitted = [
                fit_gamma_gamma(GammaGammaParams(b["alpha"], b["beta"]), L, order)
                if "alpha" in b else MixtureGamma.from_dict(b)
                for b in m["branches"]
            ]
            ns = [m.get("N", len(fitted))] if not isinstance(m.get("N"), list) else m["N"]
            default = f"model{k}"
        else:
            fitted = [fit_gamma_gamma(GammaGammaParams(m["alpha"], m["beta"]), L, order)]
            n_raw = m.get("N", 1)
            ns = n_raw if isinstance(n_raw, list) else [n_raw]
            default = f"a{m['alpha']:g}_b{m['beta']:g}_xi{m['xi']}"
        label = m.get("label", default)
        for n in ns:
            if len(fitted) == 1:
                branches = fitted * n
            elif n == len(fitted):
                branches = fitted
            else:
                raise DomainError(f"model {label!r}: N={n} but {len(fitted)} branches are listed")
            total, scale = transmit_diversity(n_tx, n, 1.0)
            branches = branches * n_tx if n_tx > 1 else branches
            assert len(branches) == total
            cases.append(ModelCase(label, n, EgcLink(tuple(branches), pointing, strict), scale))
    return cases
