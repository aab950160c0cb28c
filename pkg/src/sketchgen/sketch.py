"""Program sketches: the abstraction of programs, and their flattening
into production paths for the tree decoder.

A sketch keeps control structure and typed abstract calls but drops all
variable names and constants. Abstract calls are written
"Receiver.method(T1,T2)". Boolean conditions become lists of abstract
calls (a constant or variable condition becomes the empty list).

For the decoder, a sketch is encoded as a binary first-child/next-sibling
tree over grammar symbols. Two synthetic symbols make generation
well-founded: "<stop>" terminates every statement chain and "do" closes a
condition list before its body. Production paths, the externally visible
flattening, are taken over the projection of that tree with the synthetic
symbols spliced out; the projected form is what the sketch itself
determines, with condition-to-body transitions shown as child edges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .api import ApiDatabase
from .lang import (Call, CallExpr, Catch, Const, If, Let, LetExp, Program,
                   Seq, Skip, Try, Var, While, statements)
from .typecheck import TypedProgram, type_check

CHILD = "child"
SIBLING = "sibling"

ROOT = "<root>"
STOP = "<stop>"
NOCALL = "<nocall>"
SKIP = "skip"
IF = "if"
WHILE = "while"
TRY = "try"
CATCH = "catch"
ELSE = "else"
DO = "do"

CONTROL_SYMBOLS = (ROOT, STOP, NOCALL, SKIP, IF, WHILE, TRY, CATCH, ELSE, DO)

_CEXP_RE = re.compile(
    r"(?P<recv>[A-Za-z_][A-Za-z0-9_]*)\.(?P<method>[A-Za-z_][A-Za-z0-9_]*)"
    r"\((?P<params>[^)]*)\)$")


class MalformedRecordError(Exception):
    """Raised when a sketch record cannot be decoded."""


@dataclass(frozen=True)
class Cexp:
    """Abstract method call: receiver type, method name, argument types."""
    receiver: str
    method: str
    params: tuple[str, ...]

    def token(self) -> str:
        return f"{self.receiver}.{self.method}({','.join(self.params)})"

    @staticmethod
    def from_token(token: str) -> "Cexp":
        m = _CEXP_RE.match(token)
        if not m:
            raise MalformedRecordError(f"bad abstract call token: {token!r}")
        params = tuple(p.strip() for p in m.group("params").split(",") if p.strip())
        return Cexp(m.group("recv"), m.group("method"), params)


# -- sketch nodes -----------------------------------------------------------

@dataclass(frozen=True)
class SkSkip:
    pass


@dataclass(frozen=True)
class SkCall:
    cexp: Cexp


@dataclass(frozen=True)
class SkSeq:
    """Flattened sequential composition: at least two items, none of which
    is itself a SkSeq. Keeping sequences canonical makes the path encoding
    invertible."""
    items: tuple["Sketch", ...]

    def __post_init__(self):
        assert len(self.items) >= 2
        assert not any(isinstance(i, SkSeq) for i in self.items)


@dataclass(frozen=True)
class SkIf:
    cond: tuple[Cexp, ...]
    then: "Sketch"
    orelse: "Sketch"


@dataclass(frozen=True)
class SkWhile:
    cond: tuple[Cexp, ...]
    body: "Sketch"


@dataclass(frozen=True)
class SkTry:
    body: "Sketch"
    catches: tuple[tuple[str, "Sketch"], ...]


Sketch = SkSkip | SkCall | SkSeq | SkIf | SkWhile | SkTry


def sketch_seq(items) -> Sketch:
    """Sequence constructor that flattens nested sequences and collapses
    singletons."""
    flat: list[Sketch] = []
    for it in items:
        if isinstance(it, SkSeq):
            flat.extend(it.items)
        else:
            flat.append(it)
    if not flat:
        return SkSkip()
    if len(flat) == 1:
        return flat[0]
    return SkSeq(tuple(flat))


def sketch_items(y: Sketch) -> tuple[Sketch, ...]:
    if isinstance(y, SkSeq):
        return y.items
    return (y,)


# -- abstraction ------------------------------------------------------------

def _cexp_of(call: CallExpr, tp: TypedProgram) -> Cexp:
    res = tp.resolution_for(call)
    return Cexp(res.receiver_type, call.method, res.arg_types)


def _abstract_exp(e, tp) -> tuple[Cexp, ...]:
    if isinstance(e, (Const, Var)):
        return ()
    if isinstance(e, CallExpr):
        return (_cexp_of(e, tp),)
    if isinstance(e, LetExp):
        return (_cexp_of(e.call, tp),) + _abstract_exp(e.body, tp)
    raise TypeError(f"not an expression: {e!r}")


def _abstract(p: Program, tp: TypedProgram) -> Sketch:
    if isinstance(p, Skip):
        return SkSkip()
    if isinstance(p, (Call, Let)):
        return SkCall(_cexp_of(p.call, tp))
    if isinstance(p, Seq):
        return sketch_seq([_abstract(s, tp) for s in statements(p)])
    if isinstance(p, If):
        return SkIf(_abstract_exp(p.cond, tp),
                    _abstract(p.then, tp), _abstract(p.orelse, tp))
    if isinstance(p, While):
        return SkWhile(_abstract_exp(p.cond, tp), _abstract(p.body, tp))
    if isinstance(p, Try):
        return SkTry(_abstract(p.body, tp),
                     tuple((c.exc_type, _abstract(c.body, tp)) for c in p.catches))
    raise TypeError(f"not a statement: {p!r}")


def abstract(program: Program, db: ApiDatabase) -> Sketch:
    """Abstraction function: drop names and constants, keep control
    structure and the static types at every call site. Requires the
    program to type-check (the types of subexpressions are needed)."""
    tp = type_check(program, db)
    return _abstract(program, tp)


def abstract_typed(tp: TypedProgram) -> Sketch:
    return _abstract(tp.program, tp)


# -- decoder tree -----------------------------------------------------------

@dataclass
class TreeNode:
    """Binary first-child/next-sibling node over grammar symbols."""
    symbol: str
    child: "TreeNode | None" = None
    sibling: "TreeNode | None" = None


def _encode_stmt(y: Sketch) -> tuple[TreeNode, TreeNode]:
    """Encode one statement; returns (head, tail) where tail is the node
    whose sibling pointer carries the enclosing chain's continuation."""
    if isinstance(y, SkSkip):
        n = TreeNode(SKIP)
        return n, n
    if isinstance(y, SkCall):
        n = TreeNode(y.cexp.token())
        return n, n
    if isinstance(y, SkWhile):
        n = TreeNode(WHILE)
        n.child = _encode_cond(y.cond, y.body)
        return n, n
    if isinstance(y, SkIf):
        n = TreeNode(IF)
        n.child = _encode_cond(y.cond, y.then)
        els = TreeNode(ELSE)
        els.child = _encode_chain(y.orelse)
        n.sibling = els
        return n, els
    if isinstance(y, SkTry):
        n = TreeNode(TRY)
        n.child = _encode_chain(y.body)
        tail = n
        for exc_type, handler in y.catches:
            c = TreeNode(CATCH)
            t = TreeNode(exc_type)
            t.child = _encode_chain(handler)
            c.child = t
            tail.sibling = c
            tail = c
        return n, tail
    raise TypeError(f"not a sketch: {y!r}")


def _encode_cond(cond: tuple[Cexp, ...], body: Sketch) -> TreeNode:
    elems = [TreeNode(c.token()) for c in cond] or [TreeNode(NOCALL)]
    for a, b in zip(elems, elems[1:]):
        a.sibling = b
    do = TreeNode(DO)
    do.child = _encode_chain(body)
    elems[-1].sibling = do
    return elems[0]


def _encode_chain(y: Sketch) -> TreeNode:
    head = None
    tail = None
    for item in sketch_items(y):
        h, t = _encode_stmt(item)
        if head is None:
            head = h
        else:
            tail.sibling = h
        tail = t
    tail.sibling = TreeNode(STOP)
    return head


def decoder_tree(y: Sketch) -> TreeNode:
    """Full generation tree, including the synthetic <stop>/do symbols the
    decoder is trained on."""
    root = TreeNode(ROOT)
    root.child = _encode_chain(y)
    return root


def _project(node: TreeNode | None) -> TreeNode | None:
    """Strip synthetic symbols: drop <stop> leaves and splice `do` nodes so
    the body hangs, via a child edge, off the last condition element."""
    if node is None or node.symbol == STOP:
        return None
    out = TreeNode(node.symbol)
    if node.sibling is not None and node.sibling.symbol == DO:
        out.child = _project(node.sibling.child)
    else:
        out.child = _project(node.child)
        out.sibling = _project(node.sibling)
    return out


def projected_tree(y: Sketch) -> TreeNode:
    return _project(decoder_tree(y))


# -- production paths -------------------------------------------------------

# A production path is a root-to-leaf list of (symbol, edge) pairs; the
# edge on each pair connects it to the next pair, and the final pair's
# edge is None. Enumeration is depth-first, child before sibling.
ProductionPath = tuple[tuple[str, str | None], ...]


def tree_paths(root: TreeNode) -> list[ProductionPath]:
    out: list[ProductionPath] = []

    def walk(node: TreeNode, prefix):
        branches = []
        if node.child is not None:
            branches.append((CHILD, node.child))
        if node.sibling is not None:
            branches.append((SIBLING, node.sibling))
        if not branches:
            out.append(tuple(prefix + [(node.symbol, None)]))
            return
        for edge, nxt in branches:
            walk(nxt, prefix + [(node.symbol, edge)])

    walk(root, [])
    return out


def production_paths(y: Sketch) -> list[ProductionPath]:
    """Depth-first flattening of the sketch into production paths.

    Symbols on the right-hand side of one rule are linked by sibling edges
    (sequential composition becomes a sibling chain); the step from a rule
    to its sub-structure is a child edge.
    """
    return tree_paths(projected_tree(y))


def training_paths(y: Sketch) -> list[ProductionPath]:
    """Paths over the full generation tree, including the synthetic
    chain-termination steps the decoder must learn to emit."""
    return tree_paths(decoder_tree(y))


def grammar_symbols(y: Sketch) -> set[str]:
    """All symbols the decoder needs in its vocabulary for this sketch."""
    syms = set()

    def walk(node):
        if node is None:
            return
        syms.add(node.symbol)
        walk(node.child)
        walk(node.sibling)

    walk(decoder_tree(y))
    return syms


# -- decoding a generation tree back into a sketch --------------------------

def _decode_chain(node: TreeNode, call_tokens) -> Sketch:
    items: list[Sketch] = []
    cur = node
    while cur.symbol != STOP:
        if cur.symbol == SKIP:
            items.append(SkSkip())
            cur = cur.sibling
        elif cur.symbol == WHILE:
            cond, body = _decode_cond(cur.child, call_tokens)
            items.append(SkWhile(cond, body))
            cur = cur.sibling
        elif cur.symbol == IF:
            cond, then = _decode_cond(cur.child, call_tokens)
            els = cur.sibling
            if els is None or els.symbol != ELSE:
                raise MalformedRecordError("if without else branch")
            orelse = _decode_chain(els.child, call_tokens)
            items.append(SkIf(cond, then, orelse))
            cur = els.sibling
        elif cur.symbol == TRY:
            body = _decode_chain(cur.child, call_tokens)
            catches = []
            nxt = cur.sibling
            while nxt is not None and nxt.symbol == CATCH:
                tnode = nxt.child
                catches.append((tnode.symbol, _decode_chain(tnode.child, call_tokens)))
                nxt = nxt.sibling
            if not catches:
                raise MalformedRecordError("try without catch clause")
            items.append(SkTry(body, tuple(catches)))
            cur = nxt
        else:
            items.append(SkCall(Cexp.from_token(cur.symbol)))
            cur = cur.sibling
        if cur is None:
            raise MalformedRecordError("statement chain without terminator")
    return sketch_seq(items)


def _decode_cond(node: TreeNode, call_tokens) -> tuple[tuple[Cexp, ...], Sketch]:
    elems: list[Cexp] = []
    cur = node
    while cur.symbol != DO:
        if cur.symbol != NOCALL:
            elems.append(Cexp.from_token(cur.symbol))
        cur = cur.sibling
        if cur is None:
            raise MalformedRecordError("condition chain without `do`")
    return tuple(elems), _decode_chain(cur.child, call_tokens)


def sketch_from_tree(root: TreeNode) -> Sketch:
    """Inverse of decoder_tree on well-formed generation trees."""
    if root.symbol != ROOT or root.child is None:
        raise MalformedRecordError("generation tree must start at the root symbol")
    return _decode_chain(root.child, None)


# -- record (de)serialization ------------------------------------------------

def sketch_to_record(y: Sketch) -> dict:
    """Lossless JSON-compatible encoding of a sketch."""
    if isinstance(y, SkSkip):
        return {"node": "skip"}
    if isinstance(y, SkCall):
        return {"node": "call", "call": y.cexp.token()}
    if isinstance(y, SkSeq):
        return {"node": "seq", "items": [sketch_to_record(i) for i in y.items]}
    if isinstance(y, SkIf):
        return {"node": "if", "cond": [c.token() for c in y.cond],
                "then": sketch_to_record(y.then),
                "else": sketch_to_record(y.orelse)}
    if isinstance(y, SkWhile):
        return {"node": "while", "cond": [c.token() for c in y.cond],
                "body": sketch_to_record(y.body)}
    if isinstance(y, SkTry):
        return {"node": "try", "body": sketch_to_record(y.body),
                "catches": [{"type": t, "body": sketch_to_record(b)}
                            for t, b in y.catches]}
    raise TypeError(f"not a sketch: {y!r}")


def record_to_sketch(record) -> Sketch:
    if not isinstance(record, dict) or "node" not in record:
        raise MalformedRecordError(f"bad sketch record: {record!r}")
    kind = record["node"]
    try:
        if kind == "skip":
            return SkSkip()
        if kind == "call":
            return SkCall(Cexp.from_token(record["call"]))
        if kind == "seq":
            items = [record_to_sketch(r) for r in record["items"]]
            if len(items) < 2:
                raise MalformedRecordError("seq record needs at least two items")
            return sketch_seq(items)
        if kind == "if":
            return SkIf(tuple(Cexp.from_token(t) for t in record["cond"]),
                        record_to_sketch(record["then"]),
                        record_to_sketch(record["else"]))
        if kind == "while":
            return SkWhile(tuple(Cexp.from_token(t) for t in record["cond"]),
                           record_to_sketch(record["body"]))
        if kind == "try":
            catches = tuple((c["type"], record_to_sketch(c["body"]))
                            for c in record["catches"])
            if not catches:
                raise MalformedRecordError("try record needs a catch clause")
            return SkTry(record_to_sketch(record["body"]), catches)
    except (KeyError, TypeError) as exc:
        raise MalformedRecordError(f"bad sketch record field: {exc}") from None
    raise MalformedRecordError(f"unknown sketch node kind: {kind!r}")


def sketch_types(y: Sketch) -> set[str]:
    """All type names visible in the sketch (call types and catch types)."""
    out: set[str] = set()

    def walk(s):
        if isinstance(s, SkCall):
            out.add(s.cexp.receiver)
            out.update(s.cexp.params)
        elif isinstance(s, SkSeq):
            for i in s.items:
                walk(i)
        elif isinstance(s, SkIf):
            _cond(s.cond)
            walk(s.then)
            walk(s.orelse)
        elif isinstance(s, SkWhile):
            _cond(s.cond)
            walk(s.body)
        elif isinstance(s, SkTry):
            walk(s.body)
            for t, b in s.catches:
                out.add(t)
                walk(b)

    def _cond(cond):
        for c in cond:
            out.add(c.receiver)
            out.update(c.params)

    walk(y)
    return out


def sketch_calls(y: Sketch) -> list[Cexp]:
    """All abstract calls in the sketch, in depth-first order."""
    out: list[Cexp] = []

    def walk(s):
        if isinstance(s, SkCall):
            out.append(s.cexp)
        elif isinstance(s, SkSeq):
            for i in s.items:
                walk(i)
        elif isinstance(s, SkIf):
            out.extend(s.cond)
            walk(s.then)
            walk(s.orelse)
        elif isinstance(s, SkWhile):
            out.extend(s.cond)
            walk(s.body)
        elif isinstance(s, SkTry):
            walk(s.body)
            for _, b in s.catches:
                walk(b)

    walk(y)
    return out
