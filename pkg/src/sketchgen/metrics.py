"""Equivalence-proxy metrics over (expected program, predicted programs).

M1 is exact syntactic match up to variable renaming. M2/M3 are minimum
Jaccard distances over call-sequence sets and call sets. M4/M5 are
relative differences in statement and control-structure counts. All five
are invariant under variable renaming, and M1 = 1 forces the rest to 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .api import ApiDatabase, MethodSignature
from .lang import (Call, CallExpr, Catch, Const, If, Let, LetExp, Program,
                   Seq, Skip, Try, Var, While, count_control_structures,
                   count_statements)
from .typecheck import type_check


class PathExplosionError(Exception):
    """Control-flow path enumeration exceeded the configured cap."""


# -- alpha equivalence -------------------------------------------------------

def _rename_exp(e, env, counter):
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return Var(env.get(e.name, e.name))
    if isinstance(e, CallExpr):
        return CallExpr(_rename_exp(e.receiver, env, counter), e.method,
                        tuple(_rename_exp(a, env, counter) for a in e.args))
    if isinstance(e, LetExp):
        call = _rename_exp(e.call, env, counter)
        name = f"v{next(counter)}"
        inner = dict(env)
        inner[e.var] = name
        return LetExp(name, call, _rename_exp(e.body, inner, counter))
    raise TypeError(f"not an expression: {e!r}")


def _rename_stmt(p, env, counter):
    """Returns (renamed statement, environment for following statements)."""
    if isinstance(p, Skip):
        return p, env
    if isinstance(p, Call):
        return Call(_rename_exp(p.call, env, counter)), env
    if isinstance(p, Let):
        call = _rename_exp(p.call, env, counter)
        name = f"v{next(counter)}"
        env2 = dict(env)
        env2[p.var] = name
        return Let(name, call), env2
    if isinstance(p, Seq):
        first, env1 = _rename_stmt(p.first, env, counter)
        rest, env2 = _rename_stmt(p.rest, env1, counter)
        return Seq(first, rest), env2
    if isinstance(p, If):
        cond = _rename_exp(p.cond, env, counter)
        then, _ = _rename_stmt(p.then, env, counter)
        orelse, _ = _rename_stmt(p.orelse, env, counter)
        return If(cond, then, orelse), env
    if isinstance(p, While):
        cond = _rename_exp(p.cond, env, counter)
        body, _ = _rename_stmt(p.body, env, counter)
        return While(cond, body), env
    if isinstance(p, Try):
        body, _ = _rename_stmt(p.body, env, counter)
        catches = []
        for c in p.catches:
            name = f"v{next(counter)}"
            inner = dict(env)
            inner[c.var] = name
            cbody, _ = _rename_stmt(c.body, inner, counter)
            catches.append(Catch(name, c.exc_type, cbody))
        return Try(body, tuple(catches)), env
    raise TypeError(f"not a statement: {p!r}")


def canonical_rename(p: Program) -> Program:
    """Rename every binder to v1, v2, ... in traversal order; free names
    (environment inputs and type names) are untouched."""
    renamed, _ = _rename_stmt(p, {}, itertools.count(1))
    return renamed


def alpha_equal(p1: Program, p2: Program) -> bool:
    """Identical trees under a consistent bijective renaming of bound
    variables."""
    return canonical_rename(p1) == canonical_rename(p2)


# -- call sequences and sets --------------------------------------------------

def _exp_call_seq(e, tp) -> tuple[MethodSignature, ...]:
    if isinstance(e, (Const, Var)):
        return ()
    if isinstance(e, CallExpr):
        return (tp.resolution_for(e).signature,)
    if isinstance(e, LetExp):
        return (tp.resolution_for(e.call).signature,) + _exp_call_seq(e.body, tp)
    raise TypeError(f"not an expression: {e!r}")


def call_sequences(p: Program, db: ApiDatabase, unroll: int = 1,
                   cap: int = 4096) -> frozenset[tuple[MethodSignature, ...]]:
    """All control-flow paths' API call sequences, with loops unrolled
    0..unroll times and exceptions modeled as any body prefix followed by
    one handler. Identity is on resolved signatures, so the result is
    renaming-invariant. Requires the program to type-check."""
    tp = type_check(p, db)

    def guard(paths):
        if len(paths) > cap:
            raise PathExplosionError(f"more than {cap} control-flow paths")
        return paths

    def walk(node) -> list[tuple]:
        if isinstance(node, Skip):
            return [()]
        if isinstance(node, (Call, Let)):
            return [(tp.resolution_for(node.call).signature,)]
        if isinstance(node, Seq):
            firsts = walk(node.first)
            rests = walk(node.rest)
            return guard([a + b for a in firsts for b in rests])
        if isinstance(node, If):
            c = _exp_call_seq(node.cond, tp)
            return guard([c + t for t in walk(node.then)]
                         + [c + e for e in walk(node.orelse)])
        if isinstance(node, While):
            c = _exp_call_seq(node.cond, tp)
            body = walk(node.body)
            out = [c]
            level = [c]
            for _ in range(unroll):
                level = [p + b + c for p in level for b in body]
                out = guard(out + level)
            return out
        if isinstance(node, Try):
            bodies = walk(node.body)
            handlers = [h for c in node.catches for h in walk(c.body)]
            out = list(bodies)
            for b in bodies:
                for i in range(len(b) + 1):
                    for h in handlers:
                        out.append(b[:i] + h)
            return guard(out)
        raise TypeError(f"not a statement: {node!r}")

    return frozenset(walk(p))


def call_set(p: Program, db: ApiDatabase) -> frozenset[MethodSignature]:
    """The flat set of API calls a program makes."""
    tp = type_check(p, db)
    return frozenset(r.signature for r in tp.resolutions.values())


def jaccard_distance(s1: frozenset, s2: frozenset) -> float:
    """1 - |intersection| / |union|; two empty sets are at distance 0."""
    if not s1 and not s2:
        return 0.0
    union = len(s1 | s2)
    return 1.0 - len(s1 & s2) / union


# -- the five metrics -----------------------------------------------------------

def m1(expected: Program, predicted: list[Program]) -> int:
    """1 iff some prediction equals the expected program up to renaming."""
    return int(any(alpha_equal(expected, p) for p in predicted))


def m2(expected: Program, predicted: list[Program], db: ApiDatabase,
       unroll: int = 1) -> float:
    if not predicted:
        return 1.0
    expected_seqs = call_sequences(expected, db, unroll)
    return min(jaccard_distance(expected_seqs, call_sequences(p, db, unroll))
               for p in predicted)


def m3(expected: Program, predicted: list[Program], db: ApiDatabase) -> float:
    if not predicted:
        return 1.0
    expected_set = call_set(expected, db)
    return min(jaccard_distance(expected_set, call_set(p, db))
               for p in predicted)


def _relative_count_diff(expected_count: int, predicted_count: int) -> float:
    if expected_count == 0:
        return 0.0 if predicted_count == 0 else 1.0
    return abs(expected_count - predicted_count) / expected_count


def m4(expected: Program, predicted: list[Program]) -> float:
    if not predicted:
        return 1.0
    e = count_statements(expected)
    return min(_relative_count_diff(e, count_statements(p)) for p in predicted)


def m5(expected: Program, predicted: list[Program]) -> float:
    if not predicted:
        return 1.0
    e = count_control_structures(expected)
    return min(_relative_count_diff(e, count_control_structures(p)) for p in predicted)


@dataclass
class EvalRecord:
    """Scores of one expected program against a ranked prediction list."""
    expected: Program
    predicted: list[Program]
    m1: int
    m2: float
    m3: float
    m4: float
    m5: float

    @staticmethod
    def score(expected: Program, predicted: list[Program],
              db: ApiDatabase, unroll: int = 1) -> "EvalRecord":
        return EvalRecord(expected, predicted,
                          m1(expected, predicted),
                          m2(expected, predicted, db, unroll),
                          m3(expected, predicted, db),
                          m4(expected, predicted),
                          m5(expected, predicted))
