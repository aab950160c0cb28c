import random

import pytest

from sketchgen.api import ApiDatabase, MethodSignature
from sketchgen.metrics import canonical_rename
from sketchgen.parser import parse_program
from sketchgen.typecheck import (AmbiguousCallError, ArityMismatchError,
                                 NoMatchingSignatureError, TypeCheckError,
                                 TypeMismatchError, UndeclaredVariableError,
                                 resolve_signature, type_check)

FIG_READER = ("try { let fr = FileReader.new($String); "
              "let br = BufferedReader.new(fr); "
              "while (let s = br.readLine() : s) do { skip }; "
              "call br.close() } "
              "catch (e: FileNotFoundException) { skip } "
              "catch (g: IOException) { skip }")


def test_reader_program_environment(toy_db):
    tp = type_check(parse_program(FIG_READER), toy_db)
    env = tp.env
    assert env["fr"] == "FileReader"
    assert env["br"] == "BufferedReader"
    assert env["s"] == "String"
    assert env["$String"] == "String"
    assert env["e"] == "FileNotFoundException"


def test_skip_has_empty_environment(toy_db):
    assert type_check(parse_program("skip"), toy_db).env == {}


def test_undeclared_variable(toy_db):
    with pytest.raises(UndeclaredVariableError):
        type_check(parse_program("call nobody.readLine()"), toy_db)


def test_no_matching_signature(toy_db):
    with pytest.raises(NoMatchingSignatureError) as info:
        type_check(parse_program("call $String.readLine()"), toy_db)
    assert info.value.node is not None


def test_arity_mismatch(toy_db):
    with pytest.raises(ArityMismatchError):
        type_check(parse_program("call $BufferedReader.readLine($String)"), toy_db)


def test_type_mismatch_on_argument(toy_db):
    with pytest.raises(TypeMismatchError):
        type_check(parse_program("let fw = FileWriter.new($InputStream)"), toy_db)


def test_cannot_bind_void(toy_db):
    with pytest.raises(TypeMismatchError):
        type_check(parse_program("let x = $BufferedReader.close()"), toy_db)


def test_void_condition_rejected(toy_db):
    with pytest.raises(TypeMismatchError):
        type_check(parse_program(
            "while ($BufferedReader.close()) do { skip }"), toy_db)


def test_constructor_on_instance_rejected(toy_db):
    with pytest.raises(TypeCheckError):
        type_check(parse_program(
            "let fr = FileReader.new($String); let x = fr.new($String)"), toy_db)


def test_non_constructor_on_type_name_rejected(toy_db):
    with pytest.raises(NoMatchingSignatureError):
        type_check(parse_program("call FileReader.close()"), toy_db)


def test_shadowing_rejected(toy_db):
    with pytest.raises(TypeMismatchError, match="shadows"):
        type_check(parse_program(
            "let s = $BufferedReader.readLine(); let s = $BufferedReader.readLine()"),
            toy_db)


def test_catch_binds_declared_type(toy_db):
    tp = type_check(parse_program(
        "try { skip } catch (oops: IOException) { let m = oops.getMessage() }"),
        toy_db)
    assert tp.env["oops"] == "IOException"
    assert tp.env["m"] == "String"


def test_resolution_is_unique_and_deterministic(toy_db):
    p = parse_program(FIG_READER)
    first = type_check(p, toy_db)
    second = type_check(p, toy_db)
    sigs1 = sorted(str(r.signature) for r in first.resolutions.values())
    sigs2 = sorted(str(r.signature) for r in second.resolutions.values())
    assert sigs1 == sigs2
    assert len(first.resolutions) == 4  # two constructors, readLine, close


def test_subtyped_receiver_resolves_most_specific(toy_db):
    # FileNotFoundException <: IOException and both declare printStackTrace
    tp = type_check(parse_program(
        "try { skip } catch (e: FileNotFoundException) { call e.printStackTrace() }"),
        toy_db)
    (res,) = [r for r in tp.resolutions.values()]
    assert res.signature.receiver == "FileNotFoundException"


def test_subtyped_argument_accepted():
    db = ApiDatabase(
        ["Animal", "Cat", "Keeper"],
        [MethodSignature("Keeper", "feed", ("Animal",), "void"),
         MethodSignature("Cat", "new", (), "Cat")],
        [("Cat", "Animal")])
    tp = type_check(parse_program("let c = Cat.new(); call $Keeper.feed(c)"), db)
    (feed,) = [r for r in tp.resolutions.values() if r.signature.name == "feed"]
    assert feed.arg_types == ("Cat",)
    assert feed.signature.params == ("Animal",)


def test_ambiguous_overload_rejected():
    db = ApiDatabase(
        ["A", "B", "T"],
        [MethodSignature("T", "m", ("A",), "void"),
         MethodSignature("T", "m", ("B",), "void"),
         MethodSignature("B", "new", (), "B")],
        [("B", "A")])
    # argument of static type B matches both m(A) and m(B) on the same receiver
    with pytest.raises(AmbiguousCallError):
        type_check(parse_program("let b = B.new(); call $T.m(b)"), db)


def test_resolve_signature_direct(toy_db):
    sig = resolve_signature(toy_db, "BufferedReader", "readLine", ())
    assert sig.returns == "String"
    with pytest.raises(NoMatchingSignatureError):
        resolve_signature(toy_db, "String", "readLine", ())


def test_alpha_invariance_of_type_check(toy_db, toy_records):
    # renaming binders consistently must not change accept/reject
    for record in toy_records:
        renamed = canonical_rename(record.program())
        tp = type_check(renamed, toy_db)
        assert set(tp.env.values()) == set(type_check(record.program(), toy_db).env.values())


def test_constants_need_their_types_in_db(toy_db):
    tp = type_check(parse_program('let f = File.new("data.txt")'), toy_db)
    assert tp.env["f"] == "File"
    tiny = ApiDatabase(["A"], [MethodSignature("A", "new", (), "A")])
    with pytest.raises(TypeCheckError):
        type_check(parse_program('call A.new("x")'), tiny)
