import json
import sys

import jsonschema

schema_path, *reports = sys.argv[1:]
with open(schema_path) as f:
    schema = json.load(f)
jsonschema.Draft202012Validator.check_schema(schema)
for path in reports:
    with open(path) as f:
        jsonschema.validate(json.load(f), schema)
    print("valid:", path)
