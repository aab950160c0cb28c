import json
import random

import pytest

from sketchgen.parser import parse_program
from sketchgen.sketch import (CHILD, SIBLING, Cexp, MalformedRecordError,
                              ROOT, SkCall, SkIf, SkSeq, SkSkip, SkTry,
                              SkWhile, TreeNode, abstract, decoder_tree,
                              production_paths, record_to_sketch,
                              sketch_from_tree, sketch_to_record, tree_paths,
                              training_paths)

from .generators import random_sketch

FR_NEW = Cexp("FileReader", "new", ("String",))
BR_NEW = Cexp("BufferedReader", "new", ("FileReader",))
READ = Cexp("BufferedReader", "readLine", ())
CLOSE = Cexp("BufferedReader", "close", ())
PST_F = Cexp("FileNotFoundException", "printStackTrace", ())
PST_I = Cexp("IOException", "printStackTrace", ())

READER_SKETCH = SkTry(
    SkSeq((SkCall(FR_NEW), SkCall(BR_NEW), SkWhile((READ,), SkSkip()),
           SkCall(CLOSE))),
    (("FileNotFoundException", SkCall(PST_F)),
     ("IOException", SkCall(PST_I))),
)


def test_abstract_single_call(toy_db):
    p = parse_program("let br = BufferedReader.new($FileReader); call br.readLine()")
    y = abstract(p, toy_db)
    assert y == SkSeq((SkCall(BR_NEW), SkCall(READ)))


def test_abstract_skip(toy_db):
    assert abstract(parse_program("skip"), toy_db) == SkSkip()


def test_abstract_drops_let_binding(toy_db):
    bound = abstract(parse_program("let s = $BufferedReader.readLine()"), toy_db)
    called = abstract(parse_program("call $BufferedReader.readLine()"), toy_db)
    assert bound == called == SkCall(READ)


def test_abstract_let_chain_condition(toy_db):
    p = parse_program("while (let s = $BufferedReader.readLine() : s) do { skip }")
    y = abstract(p, toy_db)
    assert y == SkWhile((READ,), SkSkip())


def test_abstract_constant_condition_is_empty_list(toy_db):
    p = parse_program("if ($boolean) then { skip } else { skip }")
    assert abstract(p, toy_db) == SkIf((), SkSkip(), SkSkip())


def test_abstract_reader_program(toy_db):
    text = ("try { let fr = FileReader.new($String); "
            "let br = BufferedReader.new(fr); "
            "while (let s = br.readLine() : s) do { skip }; call br.close() } "
            "catch (e: FileNotFoundException) { call e.printStackTrace() } "
            "catch (g: IOException) { call g.printStackTrace() }")
    assert abstract(parse_program(text), toy_db) == READER_SKETCH


def test_production_paths_of_skip():
    assert production_paths(SkSkip()) == [((ROOT, CHILD), ("skip", None))]


def test_reader_sketch_has_exactly_four_paths():
    paths = production_paths(READER_SKETCH)
    root = (ROOT, CHILD)
    assert paths == [
        (root, ("try", CHILD), ("FileReader.new(String)", SIBLING),
         ("BufferedReader.new(FileReader)", SIBLING), ("while", CHILD),
         ("BufferedReader.readLine()", CHILD), ("skip", None)),
        (root, ("try", CHILD), ("FileReader.new(String)", SIBLING),
         ("BufferedReader.new(FileReader)", SIBLING), ("while", SIBLING),
         ("BufferedReader.close()", None)),
        (root, ("try", SIBLING), ("catch", CHILD),
         ("FileNotFoundException", CHILD),
         ("FileNotFoundException.printStackTrace()", None)),
        (root, ("try", SIBLING), ("catch", SIBLING), ("catch", CHILD),
         ("IOException", CHILD),
         ("IOException.printStackTrace()", None)),
    ]


def test_sequence_becomes_sibling_chain():
    y = SkSeq((SkCall(FR_NEW), SkCall(BR_NEW)))
    assert production_paths(y) == [
        ((ROOT, CHILD), ("FileReader.new(String)", SIBLING),
         ("BufferedReader.new(FileReader)", None))]


def test_training_paths_carry_termination_steps():
    paths = training_paths(SkSkip())
    assert paths == [((ROOT, CHILD), ("skip", SIBLING), ("<stop>", None))]
    # condition-to-body transitions go through the explicit `do`
    loop = SkWhile((READ,), SkSkip())
    flat = {sym for path in training_paths(loop) for sym, _ in path}
    assert "do" in flat and "<stop>" in flat


def _rebuild_from_paths(paths):
    """Reconstruction oracle: paths form a trie over (symbol, edge) pairs."""
    root = TreeNode(paths[0][0][0])
    for path in paths:
        node = root
        for (sym, edge), (nxt, _) in zip(path, path[1:]):
            assert node.symbol == sym
            if edge == CHILD:
                if node.child is None:
                    node.child = TreeNode(nxt)
                node = node.child
            else:
                if node.sibling is None:
                    node.sibling = TreeNode(nxt)
                node = node.sibling
            assert node.symbol == nxt
    return root


def test_paths_reconstruct_tree_and_sketch():
    rnd = random.Random(2024)
    for _ in range(150):
        y = random_sketch(rnd)
        rebuilt = _rebuild_from_paths(training_paths(y))
        assert sketch_from_tree(rebuilt) == y


def test_paths_injective_on_random_sketches():
    rnd = random.Random(7)
    seen = {}
    for _ in range(300):
        y = random_sketch(rnd)
        key = tuple(production_paths(y))
        if key in seen:
            assert seen[key] == y
        seen[key] = y


def test_record_round_trip_fixed_cases():
    assert sketch_to_record(SkSkip()) == {"node": "skip"}
    assert record_to_sketch({"node": "skip"}) == SkSkip()
    rec = sketch_to_record(READER_SKETCH)
    assert rec["node"] == "try"
    assert rec["catches"][0]["type"] == "FileNotFoundException"
    assert record_to_sketch(json.loads(json.dumps(rec))) == READER_SKETCH


def test_record_round_trip_random():
    rnd = random.Random(5)
    for _ in range(200):
        y = random_sketch(rnd)
        assert record_to_sketch(json.loads(json.dumps(sketch_to_record(y)))) == y


def test_malformed_records_rejected():
    with pytest.raises(MalformedRecordError):
        record_to_sketch({"node": "nope"})
    with pytest.raises(MalformedRecordError):
        record_to_sketch({"no_node": 1})
    with pytest.raises(MalformedRecordError):
        record_to_sketch({"node": "call", "call": "not a token"})
    with pytest.raises(MalformedRecordError):
        record_to_sketch({"node": "try", "body": {"node": "skip"}, "catches": []})


def test_cexp_token_round_trip():
    token = Cexp("BufferedWriter", "write", ("String",)).token()
    assert token == "BufferedWriter.write(String)"
    assert Cexp.from_token(token) == Cexp("BufferedWriter", "write", ("String",))


def test_abstraction_fixpoint_on_corpus(toy_db, toy_records):
    # sketches of corpus programs re-abstract to themselves after a
    # print/parse round trip
    from sketchgen.lang import print_program
    for record in toy_records:
        again = parse_program(print_program(record.program()))
        assert abstract(again, toy_db) == record.sketch
