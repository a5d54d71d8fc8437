"""Run configuration: JSON schema, validation with JSON-pointer paths, and object construction."""

from __future__ import annotations

import os
from typing import Any, Mapping

import jsonschema

from .family import FamilyOrbit, RhoSpec, decode_complex, orbit
from .report import DEFAULT_POLE_GUARD
from .rmatrix import Params, StructuredR, builtin_rational, builtin_trig, polynomial_ratio_form
from .rules import RULE_FAMILIES

SEED_ENV = "RLLFORGE_SEED"

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_SEQ = {
    "oneOf": [
        _COMPLEX,
        {
            "type": "object",
            "properties": {"default": _COMPLEX, "values": {"type": "object", "patternProperties": {"^-?[0-9]+$": _COMPLEX}, "additionalProperties": False}},
            "additionalProperties": False,
        },
    ]
}
_POLY = {"type": "array", "items": _COMPLEX, "minItems": 1}
_RHO = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["identity", "phase_shift", "period_recursion", "period_replace"]},
        "shifts": _SEQ,
        "charges": _SEQ,
        "periods": _SEQ,
        "overrides": {"type": "object", "patternProperties": {"^-?[0-9]+$": {"$ref": "#/$defs/rho"}}, "additionalProperties": False},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "rllforge run configuration",
    "type": "object",
    "$defs": {"rho": _RHO},
    "required": ["seed"],
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "R": {
            "type": "object",
            "properties": {
                "builtin": {"enum": ["trig", "rational"]},
                "eta": _COMPLEX,
                "hbar": _COMPLEX,
                "inline": {
                    "type": "object",
                    "patternProperties": {"^[abcdst]$": {"type": "array", "prefixItems": [_POLY, _POLY], "minItems": 2, "maxItems": 2}},
                    "additionalProperties": False,
                },
                "grading": {"enum": [1, -1]},
            },
            "oneOf": [{"required": ["builtin"]}, {"required": ["inline"]}],
            "additionalProperties": False,
        },
        "rho": {"$ref": "#/$defs/rho"},
        "range": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "pair": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "epsilon": {"enum": [1, -1]},
        "c": _COMPLEX,
        "ef_quanta": {"type": "integer", "minimum": 1},
        "samples": {
            "type": "object",
            "properties": {k: {"type": "integer", "minimum": 1} for k in ("unitarity", "ybe", "points", "tags", "transfer")},
            "additionalProperties": False,
        },
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "pole_guard": {"type": "number", "exclusiveMinimum": 0},
        "box": {"type": "number", "exclusiveMinimum": 0},
        "out": {"type": "string"},
        "fault_injection": {"type": "array", "items": {"enum": list(RULE_FAMILIES)}, "uniqueItems": True},
        "chain": {
            "type": "object",
            "properties": {
                "lengths": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "source": {"enum": ["degenerate", "orbit"]},
            },
            "additionalProperties": False,
        },
    },
}

DEFAULT_SAMPLES = {"unitarity": 100, "ybe": 50, "points": 20, "tags": 20, "transfer": 10}


class ConfigError(ValueError):
    """Config validation failure; ``pointer`` is the JSON pointer of the offending value."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


def _pointer(parts) -> str:
    return "".join(f"/{str(p).replace('~', '~0').replace('/', '~1')}" for p in parts)


def validate(config: Mapping[str, Any]) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if not errors:
        return
    err = errors[0]
    path = list(err.absolute_path)
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path.append(missing[0])
    raise ConfigError(_pointer(path), err.message)


def resolve_seed(config: Mapping[str, Any], cli_seed: int | None, environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    """Merge seed sources: command line over config over the environment variable."""
    environ = os.environ if environ is None else environ
    merged = dict(config)
    if cli_seed is not None:
        merged["seed"] = cli_seed
    elif "seed" not in merged and SEED_ENV in environ:
        try:
            merged["seed"] = int(environ[SEED_ENV])
        except ValueError as exc:
            raise ConfigError("/seed", f"{SEED_ENV}={environ[SEED_ENV]!r} is not an integer") from exc
    return merged


def as_complex(v: Any) -> complex:
    return decode_complex(v)


def build_rho(data: Mapping[str, Any] | None) -> RhoSpec:
    return RhoSpec.from_json(data) if data else RhoSpec("identity")


def build_r(data: Mapping[str, Any] | None, pole_guard: float = DEFAULT_POLE_GUARD) -> StructuredR:
    data = data or {"builtin": "trig"}
    grading = int(data.get("grading", 1))
    if "inline" in data:
        table = {k: ([as_complex(x) for x in num], [as_complex(x) for x in den]) for k, (num, den) in data["inline"].items()}
        R = StructuredR(polynomial_ratio_form(table), Params(0j, as_complex(data.get("hbar", 0))), grading)
    elif data["builtin"] == "trig":
        kw = {k: as_complex(data[k]) for k in ("eta", "hbar") if k in data}
        R = builtin_trig(grading=grading, **kw)
    else:
        R = builtin_rational(as_complex(data["hbar"]) if "hbar" in data else 0.3, grading)
    return R.with_guard(pole_guard)


def build_orbit(config: Mapping[str, Any]) -> FamilyOrbit:
    R = build_r(config.get("R"), config.get("pole_guard", DEFAULT_POLE_GUARD))
    lo, hi = config.get("range", (-3, 3))
    return orbit(R, build_rho(config.get("rho")), (lo, hi))


def samples(config: Mapping[str, Any], key: str) -> int:
    return int(config.get("samples", {}).get(key, DEFAULT_SAMPLES[key]))
