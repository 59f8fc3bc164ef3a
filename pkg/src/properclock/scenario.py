"""Loading and validating scenario documents.

A scenario document is a JSON object::

    {
      "units": "natural" | "si",
      "mass_kg": <float>,               # required in SI mode only
      "sigma": <float>,                 # hbar/(m c^2) or seconds
      "clock_b": {"pbar": p, "delta": d},
      "clock_a": {"pbar": p, "delta": d}
               | {"pbar": p, "pbar_prime": p2, "delta": d,
                  "theta": t, "phi": f}
    }

Momenta are fractions of ``m c`` in natural mode and kg m/s in SI mode;
each may be a number (motion along x) or a 3-vector. Unknown keys are
rejected.
"""
import json

import jsonschema

from . import units
from .states import ClockFiducial, GaussianPacket, MomentumSuperposition, Scenario

_MOMENTUM = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
    ]
}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

_PACKET = {
    "type": "object",
    "properties": {"pbar": _MOMENTUM, "delta": _POSITIVE},
    "required": ["pbar", "delta"],
    "additionalProperties": False,
}
_SUPERPOSITION = {
    "type": "object",
    "properties": {
        "pbar": _MOMENTUM,
        "pbar_prime": _MOMENTUM,
        "delta": _POSITIVE,
        "theta": {"type": "number"},
        "phi": {"type": "number"},
    },
    "required": ["pbar", "pbar_prime", "delta", "theta", "phi"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "units": {"enum": ["natural", "si"]},
        "mass_kg": _POSITIVE,
        "sigma": _POSITIVE,
        "clock_b": _PACKET,
        "clock_a": {"oneOf": [_PACKET, _SUPERPOSITION]},
    },
    "required": ["units", "sigma", "clock_a", "clock_b"],
    "additionalProperties": False,
    "if": {"properties": {"units": {"const": "si"}}},
    "then": {"required": ["mass_kg"]},
    "else": {"not": {"required": ["mass_kg"]}},
}


class ScenarioError(ValueError):
    """Scenario document failed schema or physical validation."""


def _momentum(value, scale):
    if isinstance(value, list):
        return tuple(v * scale for v in value)
    return value * scale


def scenario_from_dict(doc):
    """Validate ``doc`` and build a natural-unit :class:`Scenario`."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{path}: {exc.message}") from None
    mass_kg = doc.get("mass_kg")
    if doc["units"] == "si":
        p_scale = 1.0 / (mass_kg * units.C)
        sigma = units.time_to_natural(doc["sigma"], mass_kg)
    else:
        p_scale = 1.0
        sigma = doc["sigma"]
    try:
        b = doc["clock_b"]
        cm_b = GaussianPacket(_momentum(b["pbar"], p_scale), b["delta"] * p_scale)
        a = doc["clock_a"]
        first = GaussianPacket(_momentum(a["pbar"], p_scale), a["delta"] * p_scale)
        if "pbar_prime" in a:
            second = GaussianPacket(_momentum(a["pbar_prime"], p_scale), a["delta"] * p_scale)
            cm_a = MomentumSuperposition(first, second, a["theta"], a["phi"])
        else:
            cm_a = first
        fid = ClockFiducial(sigma)
        return Scenario(1.0, cm_a, cm_b, fid, fid, units=doc["units"], mass_kg=mass_kg)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(str(exc)) from None


def load_scenario(path):
    """Read a scenario document from ``path`` (UTF-8 JSON)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return scenario_from_dict(doc)
