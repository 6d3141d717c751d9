#!/usr/bin/env python3
# Copyright 2026 The SoVTP Toolkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Checks the sidecar corpus against the published JSON Schema."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads(pathlib.Path(sys.argv[2]).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
index = json.loads((root / "index.json").read_text())

failures = 0
for name, meta in sorted(index.items()):
    try:
        doc = json.loads((root / name).read_text())
        ok = validator.is_valid(doc)
    except json.JSONDecodeError:
        ok = False
    if meta["valid"] and not ok:
        print(f"FAIL {name}: valid file rejected by schema")
        failures += 1
    elif not meta["valid"] and meta["schema_detects"] and ok:
        print(f"FAIL {name}: schema accepted a defect it should catch")
        failures += 1
print(f"{len(index)} files, {failures} disagreements")
sys.exit(1 if failures else 0)
