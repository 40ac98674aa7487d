"""Validates every bundled scenario against docs/scenario.schema.json."""
import glob
import json
import sys

import jsonschema

root = sys.argv[1]
schema = json.load(open(f"{root}/docs/scenario.schema.json"))
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
bad = 0
for path in sorted(glob.glob(f"{root}/scenarios/*.json")):
    errors = list(validator.iter_errors(json.load(open(path))))
    for e in errors:
        print(f"{path}: {'/'.join(map(str, e.path))}: {e.message}")
    bad += bool(errors)
    print(f"{path}: {'ok' if not errors else 'INVALID'}")
sys.exit(1 if bad else 0)
