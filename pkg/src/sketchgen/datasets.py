"""A small file-I/O flavored API database and a 50-program corpus.

The corpus is written so that every program sits inside its own sketch's
concretization space (constructors on type names, slots filled by the
in-scope variable when one exists, conditions as let-chains), each label
is unique, and every per-sketch space stays small. This is the fixture
world used by the demos and the end-to-end tests.
"""

from __future__ import annotations

import json

from .api import ApiDatabase, MethodSignature

_TYPES = {
    "String": "core",
    "boolean": "core",
    "int": "core",
    "File": "fs",
    "FileReader": "io.read",
    "BufferedReader": "io.read",
    "InputStream": "io.read",
    "InputStreamReader": "io.read",
    "FileWriter": "io.write",
    "BufferedWriter": "io.write",
    "IOException": "error",
    "FileNotFoundException": "error",
}

_METHODS = [
    ("FileReader", "new", ["String"], "FileReader"),
    ("FileReader", "new", ["File"], "FileReader"),
    ("FileReader", "close", [], "void"),
    ("BufferedReader", "new", ["FileReader"], "BufferedReader"),
    ("BufferedReader", "new", ["InputStreamReader"], "BufferedReader"),
    ("BufferedReader", "readLine", [], "String"),
    ("BufferedReader", "ready", [], "boolean"),
    ("BufferedReader", "close", [], "void"),
    ("InputStreamReader", "new", ["InputStream"], "InputStreamReader"),
    ("InputStreamReader", "close", [], "void"),
    ("FileWriter", "new", ["String"], "FileWriter"),
    ("FileWriter", "new", ["File"], "FileWriter"),
    ("FileWriter", "close", [], "void"),
    ("BufferedWriter", "new", ["FileWriter"], "BufferedWriter"),
    ("BufferedWriter", "write", ["String"], "void"),
    ("BufferedWriter", "newLine", [], "void"),
    ("BufferedWriter", "flush", [], "void"),
    ("BufferedWriter", "close", [], "void"),
    ("File", "new", ["String"], "File"),
    ("File", "exists", [], "boolean"),
    ("File", "delete", [], "boolean"),
    ("File", "getName", [], "String"),
    ("String", "isEmpty", [], "boolean"),
    ("String", "trim", [], "String"),
    ("String", "length", [], "int"),
    ("IOException", "getMessage", [], "String"),
    ("IOException", "printStackTrace", [], "void"),
    ("FileNotFoundException", "getMessage", [], "String"),
    ("FileNotFoundException", "printStackTrace", [], "void"),
]

_SUBTYPING = [("FileNotFoundException", "IOException")]


def toy_database() -> ApiDatabase:
    methods = [MethodSignature(r, n, tuple(p), ret) for r, n, p, ret in _METHODS]
    return ApiDatabase(_TYPES.keys(), methods, _SUBTYPING, _TYPES)


_READ_LOOP = ("let fr = FileReader.new($String); let br = BufferedReader.new(fr); "
              "while (let s = br.readLine() : s) do { skip }; call br.close()")

TOY_PROGRAMS = [
    # readers
    f"try {{ {_READ_LOOP} }} catch (e: FileNotFoundException) {{ skip }} "
    "catch (g: IOException) { skip }",
    _READ_LOOP,
    f"try {{ {_READ_LOOP} }} catch (e: IOException) {{ call e.printStackTrace() }}",
    "let f = File.new($String); let fr = FileReader.new(f); "
    "let br = BufferedReader.new(fr); "
    "while (let s = br.readLine() : s) do { skip }; call br.close()",
    "let isr = InputStreamReader.new($InputStream); "
    "let br = BufferedReader.new(isr); "
    "while (let s = br.readLine() : s) do { skip }",
    "try { let isr = InputStreamReader.new($InputStream); "
    "let br = BufferedReader.new(isr); "
    "while (let s = br.readLine() : s) do { skip }; call br.close() } "
    "catch (e: IOException) { skip }",
    "let fr = FileReader.new($String); let br = BufferedReader.new(fr); "
    "let s = br.readLine()",
    "let fr = FileReader.new($String); let br = BufferedReader.new(fr); "
    "if (let b = br.ready() : b) then { let s = br.readLine() } else { skip }",
    "try { let fr = FileReader.new($String); let br = BufferedReader.new(fr); "
    "let s = br.readLine(); call br.close() } "
    "catch (e: FileNotFoundException) { call e.printStackTrace() }",
    "let fr = FileReader.new($String); let br = BufferedReader.new(fr); "
    "while (let b = br.ready() : b) do { let s = br.readLine() }; call br.close()",
    "let br = BufferedReader.new($FileReader); let s = br.readLine(); "
    "let t = s.trim()",
    "let br = BufferedReader.new($FileReader); let s = br.readLine(); "
    "if (let b = s.isEmpty() : b) then { skip } else { call br.close() }",
    f"try {{ {_READ_LOOP} }} catch (e: FileNotFoundException) "
    "{ call e.printStackTrace() } catch (g: IOException) { call g.printStackTrace() }",
    "let fr = FileReader.new($String); call fr.close()",
    # writers
    "let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); call bw.close()",
    "let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); call bw.newLine(); call bw.flush(); call bw.close()",
    "try { let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); call bw.newLine(); call bw.flush(); call bw.close() } "
    "catch (e: IOException) { skip }",
    "try { let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); call bw.newLine(); call bw.flush(); call bw.close() } "
    "catch (e: IOException) { call e.printStackTrace() }",
    "let f = File.new($String); let fw = FileWriter.new(f); "
    "let bw = BufferedWriter.new(fw); call bw.write($String); call bw.close()",
    "let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); call bw.write($String); call bw.flush(); call bw.close()",
    "let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); "
    "if (let b = $File.exists() : b) then { call bw.flush() } else { skip }; "
    "call bw.close()",
    "let fw = FileWriter.new($String); call fw.close()",
    "let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.newLine(); call bw.flush(); call bw.close()",
    "try { let fw = FileWriter.new($String); let bw = BufferedWriter.new(fw); "
    "call bw.write($String); call bw.close() } "
    "catch (e: FileNotFoundException) { skip } catch (g: IOException) { skip }",
    "let bw = BufferedWriter.new($FileWriter); call bw.write($String); "
    "call bw.newLine(); call bw.close()",
    "try { let bw = BufferedWriter.new($FileWriter); call bw.write($String) } "
    "catch (e: IOException) { let m = e.getMessage() }",
    "let bw = BufferedWriter.new($FileWriter); call bw.flush(); call bw.close()",
    "let f = File.new($String); let n = f.getName(); "
    "let bw = BufferedWriter.new($FileWriter); call bw.write(n); call bw.close()",
    # files
    "let f = File.new($String); "
    "if (let b = f.exists() : b) then { call f.delete() } else { skip }",
    "let f = File.new($String); let n = f.getName()",
    "let f = File.new($String); "
    "if (let b = f.exists() : b) then { let n = f.getName() } else { skip }",
    "let f = File.new($String); call f.delete()",
    "let f = File.new($String); "
    "if (let b = f.exists() : b) then { let fr = FileReader.new(f); "
    "call fr.close() } else { skip }",
    "let f = File.new($String); let n = f.getName(); "
    "if (let b = n.isEmpty() : b) then { skip } else { skip }",
    "try { let f = File.new($String); call f.delete() } "
    "catch (e: IOException) { skip }",
    "let f = File.new($String); "
    "while (let b = f.exists() : b) do { call f.delete() }; let n = f.getName()",
    "let f = File.new($String); let g = File.new($String)",
    "try { let f = File.new($String); let n = f.getName() } "
    "catch (e: IOException) { call e.printStackTrace() }",
    # mixed
    "let br = BufferedReader.new($FileReader); let s = br.readLine(); "
    "let bw = BufferedWriter.new($FileWriter); call bw.write(s); "
    "call bw.newLine(); call bw.close(); call br.close()",
    "let br = BufferedReader.new($FileReader); "
    "let bw = BufferedWriter.new($FileWriter); "
    "while (let s = br.readLine() : s) do { call bw.write($String) }; "
    "call bw.close()",
    "let isr = InputStreamReader.new($InputStream); "
    "let br = BufferedReader.new(isr); let s = br.readLine(); call isr.close()",
    "let f = File.new($String); "
    "if (let b = f.exists() : b) then { let fw = FileWriter.new(f); "
    "call fw.close() } else { skip }",
    "let br = BufferedReader.new($FileReader); "
    "if (let b = br.ready() : b) then { let s = br.readLine() } else { skip }; "
    "call br.close()",
    "try { let fr = FileReader.new($String); call fr.close() } "
    "catch (e: IOException) { let m = e.getMessage() }",
    "while (let b = $BufferedReader.ready() : b) do "
    "{ let s = $BufferedReader.readLine() }",
    "let s = $BufferedReader.readLine(); let t = s.trim(); "
    "if (let b = t.isEmpty() : b) then { skip } else { skip }",
    "try { let br = BufferedReader.new($FileReader); let s = br.readLine(); "
    "call br.close() } catch (e: IOException) { call e.printStackTrace() }",
    "let isr = InputStreamReader.new($InputStream); "
    "let br = BufferedReader.new(isr); call br.close(); call isr.close()",
    "let s = $BufferedReader.readLine(); let n = s.length()",
    "let f = File.new($String); let n = f.getName(); "
    "let fr = FileReader.new(n); call fr.close()",
]


def write_toy_corpus(corpus_path, labels: bool = False) -> int:
    """Write the corpus as line-delimited records; labels are normally left
    out and re-extracted during ingestion."""
    from .labels import extract_label
    db = toy_database()
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for text in TOY_PROGRAMS:
            row = {"program": text}
            if labels:
                from .parser import parse_program
                row["label"] = extract_label(parse_program(text), db).to_json()
            fh.write(json.dumps(row) + "\n")
    return len(TOY_PROGRAMS)


def write_toy_database(db_path) -> None:
    from .api import save_api_database
    save_api_database(toy_database(), db_path)
