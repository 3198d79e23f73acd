#!/usr/bin/env python3
"""Validate recorded service samples against the shipped JSON schemas."""
import argparse
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource

PREFIXES = [
    ("request_rewrite", "rewrite_request.json"),
    ("request_score", "score_request.json"),
    ("rewrite_", "rewrite_response.json"),
    ("score", "score_response.json"),
    ("health_", "health_response.json"),
    ("error_", "error_response.json"),
]


def load_registry(schema_dir):
    schemas = {}
    for path in sorted(schema_dir.glob("*.json")):
        schemas[path.name] = json.loads(path.read_text())
    registry = Registry().with_resources(
        (s["$id"], Resource.from_contents(s)) for s in schemas.values())
    return schemas, registry


def schema_for(name):
    for prefix, schema in PREFIXES:
        if name.startswith(prefix):
            return schema
    return None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--samples", required=True, type=pathlib.Path)
    args = ap.parse_args()

    schemas, registry = load_registry(args.schemas)
    for schema in schemas.values():
        jsonschema.Draft202012Validator.check_schema(schema)

    samples = sorted(args.samples.glob("*.json"))
    if not samples:
        print(f"no samples in {args.samples}", file=sys.stderr)
        return 1
    failures = 0
    covered = set()
    for path in samples:
        target = schema_for(path.stem)
        if target is None:
            print(f"SKIP {path.name}: no schema")
            continue
        covered.add(target)
        validator = jsonschema.Draft202012Validator(schemas[target], registry=registry)
        errors = sorted(validator.iter_errors(json.loads(path.read_text())), key=str)
        if errors:
            failures += 1
            print(f"FAIL {path.name} ({target}): {errors[0].message}")
        else:
            print(f"ok   {path.name} ({target})")
    missing = {s for _, s in PREFIXES} - covered
    for name in sorted(missing):
        failures += 1
        print(f"FAIL no sample covers {name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
