#!/usr/bin/env python3
"""Run the CLI on a few phantoms and validate every JSON it writes."""
import argparse
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--work", required=True, type=pathlib.Path)
    args = ap.parse_args()

    schemas = {p.name: load(p) for p in sorted(args.schemas.glob("*.schema.json"))}
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items())
    for s in schemas.values():
        jsonschema.Draft202012Validator.check_schema(s)

    def validator(name):
        return jsonschema.Draft202012Validator(schemas[name], registry=registry)

    failures = 0

    def check(name, path):
        nonlocal failures
        errors = list(validator(name).iter_errors(load(path)))
        for e in errors:
            print(f"{path}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
        failures += bool(errors)

    def cli(*a):
        subprocess.run([args.cli, *map(str, a)], check=True, stdout=subprocess.DEVNULL)

    shutil.rmtree(args.work, ignore_errors=True)
    for seed in (1, 2, 3, 4, 5):
        d = args.work / f"seed{seed}"
        d.mkdir(parents=True)
        cli("phantom", "--seed", seed, "--size", 256, "--noise", 0.02, "--out-dir", d)
        cli("analyze", "-i", d / "mask.png", "--pixel-size-file", d / "pixel_size.json",
            "-o", d / "report.json")
        cli("evaluate", "--pred", d / "report.json", "--gt", d / "truth.json",
            "--pred-mask", d / "mask.png", "--gt-mask", d / "mask.png", "-o", d / "metrics.json")
        cli("evaluate", "--pred-mask", d / "mask.png", "--gt-mask", d / "mask.png",
            "-o", d / "pixel_only.json")
        check("phantom_spec.schema.json", d / "spec.json")
        check("pixel_size.schema.json", d / "pixel_size.json")
        check("truth.schema.json", d / "truth.json")
        check("report.schema.json", d / "report.json")
        check("metrics.schema.json", d / "metrics.json")
        check("metrics.schema.json", d / "pixel_only.json")

    print("schema failures:", failures)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
