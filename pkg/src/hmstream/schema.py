"""Minimal JSON-schema checker for the shipped output schemas.

Supports the subset the schemas use: type, properties, required,
additionalProperties, items, enum, minimum. Returns a list of violation
paths; empty means valid.
"""
from __future__ import annotations

import json
from importlib import resources as importlib_resources

_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "integer": int,
    "boolean": bool,
    "null": type(None),
}


def load_schema(name: str) -> dict:
    ref = importlib_resources.files("hmstream").joinpath("schemas", f"{name}.schema.json")
    return json.loads(ref.read_text())


def validate(obj, schema: dict, path: str = "$") -> list[str]:
    problems: list[str] = []
    expected = schema.get("type")
    if expected is not None:
        options = expected if isinstance(expected, list) else [expected]

        def matches(kind: str) -> bool:
            if kind == "number":
                return isinstance(obj, (int, float)) and not isinstance(obj, bool)
            if kind == "integer":
                return isinstance(obj, int) and not isinstance(obj, bool)
            return isinstance(obj, _TYPES[kind])

        if not any(matches(kind) for kind in options):
            return [f"{path}: expected {expected}, got {type(obj).__name__}"]
        if obj is None:
            return problems
    if "enum" in schema and obj not in schema["enum"]:
        problems.append(f"{path}: {obj!r} not in {schema['enum']}")
    if "minimum" in schema and isinstance(obj, (int, float)) and obj < schema["minimum"]:
        problems.append(f"{path}: {obj} below minimum {schema['minimum']}")
    if isinstance(obj, dict):
        for key in schema.get("required", []):
            if key not in obj:
                problems.append(f"{path}: missing required key {key!r}")
        props = schema.get("properties", {})
        for key, value in obj.items():
            if key in props:
                problems.extend(validate(value, props[key], f"{path}.{key}"))
            elif schema.get("additionalProperties") is False:
                problems.append(f"{path}: unexpected key {key!r}")
    if isinstance(obj, list) and "items" in schema:
        for i, item in enumerate(obj):
            problems.extend(validate(item, schema["items"], f"{path}[{i}]"))
    return problems
