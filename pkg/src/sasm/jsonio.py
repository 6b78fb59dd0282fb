"""Canonical JSON documents for sandpiles and (sub-)configurations.

Canonical text uses sorted object keys, sorted site lists and sorted rule
multisets, so equal values always serialize to identical bytes.  Rule lists
keep their order because rule indices refer to it.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ParseError, SchemaError
from .model import Configuration, SandpileSpec, SubConfiguration


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _require_object(doc, field):
    if not isinstance(doc, dict):
        raise SchemaError(field, "expected an object")
    return doc


def _require_height(value, field):
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise SchemaError(field, f"expected a natural number, got {value!r}")
    return value


def spec_to_json(spec: SandpileSpec) -> dict:
    doc = {
        "name": spec.name,
        "sites": list(spec.sites),
        "capacity": dict(spec.capacity),
        "rules": {v: [list(t) for t in ts] for v, ts in spec.rules.items()},
    }
    if spec.metadata:
        doc["metadata"] = dict(spec.metadata)
    return doc


def spec_from_json(doc: Any) -> SandpileSpec:
    _require_object(doc, "<document>")
    for key in ("name", "sites", "capacity", "rules"):
        if key not in doc:
            raise SchemaError(key, "missing field")
    extra = set(doc) - {"name", "sites", "capacity", "rules", "metadata"}
    if extra:
        raise SchemaError(sorted(extra)[0], "unexpected field")
    if not isinstance(doc["name"], str):
        raise SchemaError("name", "expected a string")
    sites = doc["sites"]
    if not isinstance(sites, list) or not all(isinstance(v, str) for v in sites):
        raise SchemaError("sites", "expected an array of strings")
    if len(set(sites)) != len(sites):
        raise SchemaError("sites", "duplicate site identifiers")
    capacity = _require_object(doc["capacity"], "capacity")
    if set(capacity) != set(sites):
        missing = sorted(set(sites) - set(capacity))
        detail = f"omits {', '.join(missing)}" if missing else "names undeclared sites"
        raise SchemaError("capacity", detail)
    for v, c in capacity.items():
        if not isinstance(c, int) or isinstance(c, bool):
            raise SchemaError(f"capacity.{v}", f"expected an integer, got {c!r}")
    rules = _require_object(doc["rules"], "rules")
    if set(rules) != set(sites):
        missing = sorted(set(sites) - set(rules))
        detail = f"omits {', '.join(missing)}" if missing else "names undeclared sites"
        raise SchemaError("rules", detail)
    for v, ts in rules.items():
        if not isinstance(ts, list) or not all(
            isinstance(t, list) and all(isinstance(u, str) for u in t) for t in ts
        ):
            raise SchemaError(f"rules.{v}", "expected an array of arrays of site strings")
    metadata = doc.get("metadata", {})
    _require_object(metadata, "metadata")
    return SandpileSpec(doc["name"], tuple(sites), capacity, rules, metadata)


def configuration_to_json(config: Configuration) -> dict:
    return {"heights": dict(config.heights)}


def configuration_from_json(doc: Any, spec: SandpileSpec | None = None) -> Configuration:
    _require_object(doc, "<document>")
    if set(doc) != {"heights"}:
        raise SchemaError("heights", "expected exactly one field 'heights'")
    heights = _require_object(doc["heights"], "heights")
    for v, h in heights.items():
        _require_height(h, f"heights.{v}")
    if spec is not None and set(heights) != set(spec.sites):
        raise SchemaError("heights", "must assign every site of the sandpile exactly once")
    return Configuration(heights)


def subconfiguration_to_json(sub: SubConfiguration) -> dict:
    return {"region_heights": dict(sub.heights)}


def subconfiguration_from_json(doc: Any, spec: SandpileSpec | None = None) -> SubConfiguration:
    _require_object(doc, "<document>")
    if set(doc) != {"region_heights"}:
        raise SchemaError("region_heights", "expected exactly one field 'region_heights'")
    heights = _require_object(doc["region_heights"], "region_heights")
    if not heights:
        raise SchemaError("region_heights", "region must be nonempty")
    for v, h in heights.items():
        _require_height(h, f"region_heights.{v}")
    if spec is not None:
        unknown = sorted(set(heights) - set(spec.sites))
        if unknown:
            raise SchemaError("region_heights", f"unknown sites {', '.join(unknown)}")
    return SubConfiguration(heights)


def serialize(value) -> str:
    """Canonical JSON text for a spec, configuration or sub-configuration."""
    if isinstance(value, SandpileSpec):
        return dumps(spec_to_json(value))
    if isinstance(value, Configuration):
        return dumps(configuration_to_json(value))
    if isinstance(value, SubConfiguration):
        return dumps(subconfiguration_to_json(value))
    raise TypeError(f"cannot serialize {type(value).__name__}")


def parse_spec(text: str) -> SandpileSpec:
    return spec_from_json(loads(text))


def parse_configuration(text: str, spec: SandpileSpec | None = None) -> Configuration:
    return configuration_from_json(loads(text), spec)


def parse_subconfiguration(text: str, spec: SandpileSpec | None = None) -> SubConfiguration:
    return subconfiguration_from_json(loads(text), spec)
