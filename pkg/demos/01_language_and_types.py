"""The core language: parse a program, type-check it against an API
database, and print it back canonically.

Run:  python3 demos/01_language_and_types.py
"""

from sketchgen import parse_program, print_program, type_check
from sketchgen.datasets import toy_database
from sketchgen.typecheck import TypeCheckError

db = toy_database()
print(f"API database: {len(db.types)} types, {len(db.methods)} method signatures")
print()

# A file-reading loop. Variables written $T are environment inputs: one
# implicitly bound input per API type T.
text = """
try {
  let fr = FileReader.new($String);
  let br = BufferedReader.new(fr);
  while (let s = br.readLine() : s) do { skip };
  call br.close()
} catch (e: FileNotFoundException) { skip }
  catch (g: IOException) { call g.printStackTrace() }
"""

program = parse_program(text)
typed = type_check(program, db)

print("the program, canonically printed:")
print(" ", print_program(program))
print()
print("its typing environment:")
for name, type_name in sorted(typed.env.items()):
    print(f"  {name}: {type_name}")
print()
print("every call site resolves to exactly one signature:")
for res in typed.resolutions.values():
    print(f"  {res.signature}")

# Ill-typed programs are rejected with the offending node.
print()
for bad in ("call br.readLine()",                  # br not in scope
            "let x = $BufferedReader.close()",     # binding a void result
            "let fw = FileWriter.new($InputStream)"):  # wrong argument type
    try:
        type_check(parse_program(bad), db)
    except TypeCheckError as exc:
        print(f"rejected: {bad!r}\n  -> {exc}")
