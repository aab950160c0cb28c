"""Sketches: abstracting a program into its control-and-types skeleton,
and flattening that skeleton into the production paths the decoder
learns from.

Run:  python3 demos/02_sketches_and_paths.py
"""

import json

from sketchgen import abstract, parse_program, production_paths, sketch_to_record
from sketchgen.datasets import toy_database
from sketchgen.sketch import training_paths

db = toy_database()

text = ("try { let fr = FileReader.new($String); "
        "let br = BufferedReader.new(fr); "
        "while (let s = br.readLine() : s) do { skip }; call br.close() } "
        "catch (e: FileNotFoundException) { call e.printStackTrace() } "
        "catch (g: IOException) { call g.printStackTrace() }")

sketch = abstract(parse_program(text), db)

print("the sketch keeps control flow and call types, and drops names:")
print(json.dumps(sketch_to_record(sketch), indent=2))
print()


def show(path):
    return " ".join(f"({sym},{'c' if e == 'child' else 's' if e else '.'})"
                    for sym, e in path)


print("its production paths (depth first, child before sibling):")
for path in production_paths(sketch):
    print(" ", show(path))
print()
print("training additionally sees explicit chain-termination steps:")
for path in training_paths(sketch):
    print(" ", show(path))
