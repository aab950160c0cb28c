"""Type checking against an API database.

A program is accepted if every call site resolves to exactly one method
signature (receiver type, arity, and parameter types, up to the declared
subtyping relation) and every variable is either let-bound in scope, a
catch binder, or an environment input "$T" for a declared type T.

Constructor calls are written on the type name itself (`FileReader.new(...)`),
and "new" cannot be invoked on an instance. Conversely, only "new" may be
called on a bare type name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .api import VOID, ApiDatabase, MethodSignature
from .lang import (Call, CallExpr, Catch, Const, Exp, If, Let, LetExp,
                   Program, Seq, Skip, Try, Var, While, env_input_type,
                   is_env_input)


class TypeCheckError(Exception):
    """Base class for typing failures; carries the offending AST node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class UndeclaredVariableError(TypeCheckError):
    pass


class NoMatchingSignatureError(TypeCheckError):
    pass


class ArityMismatchError(TypeCheckError):
    pass


class TypeMismatchError(TypeCheckError):
    pass


class AmbiguousCallError(TypeCheckError):
    pass


@dataclass(frozen=True)
class CallResolution:
    """Static types observed at a call site plus the resolved signature."""
    receiver_type: str
    arg_types: tuple[str, ...]
    signature: MethodSignature


@dataclass
class TypedProgram:
    """A type-checked program: the flat binder environment plus, for each
    call node (by identity), its resolution."""
    program: Program
    env: dict[str, str]
    resolutions: dict[int, CallResolution] = field(default_factory=dict)

    def resolution_for(self, call: CallExpr) -> CallResolution:
        return self.resolutions[id(call)]


def constant_type(c: Const) -> str:
    text = c.value
    if text.startswith('"'):
        return "String"
    if text in ("true", "false"):
        return "boolean"
    return "int"


def resolve_signature(db: ApiDatabase, receiver_type: str, method: str,
                      arg_types: tuple[str, ...], node=None) -> MethodSignature:
    """The unique signature a call site resolves to.

    Filters the database by name, receiver compatibility, arity, and
    argument types (all up to subtyping), then picks the most specific
    receiver. Raises the matching TypeCheckError subclass when no or more
    than one signature fits.
    """
    candidates = [s for s in db.methods_named(method)
                  if db.is_subtype(receiver_type, s.receiver)]
    if not candidates:
        raise NoMatchingSignatureError(
            f"no method {method!r} on type {receiver_type!r}", node)
    arity = [s for s in candidates if len(s.params) == len(arg_types)]
    if not arity:
        raise ArityMismatchError(
            f"{receiver_type}.{method} does not take {len(arg_types)} arguments", node)
    typed = [s for s in arity
             if all(db.is_subtype(a, p) for a, p in zip(arg_types, s.params))]
    if not typed:
        raise TypeMismatchError(
            f"argument types ({', '.join(arg_types)}) do not match any "
            f"{receiver_type}.{method} signature", node)
    best = [s for s in typed
            if not any(t is not s and t.receiver != s.receiver
                       and db.is_subtype(t.receiver, s.receiver)
                       for t in typed)]
    if len(best) != 1:
        raise AmbiguousCallError(
            f"call to {method!r} matches {len(best) or len(typed)} signatures", node)
    return best[0]


class _Checker:
    def __init__(self, db: ApiDatabase):
        self.db = db
        self.env: dict[str, str] = {}
        self.resolutions: dict[int, CallResolution] = {}

    # -- helpers -------------------------------------------------------

    def record_binding(self, name, type_name):
        # disjoint scopes may legitimately reuse a name; the flat summary
        # keeps the first occurrence
        self.env.setdefault(name, type_name)

    def bind(self, scope, name, type_name, node):
        if name in scope:
            raise TypeMismatchError(f"{name!r} shadows a variable in scope", node)
        if name in self.db.types:
            raise TypeMismatchError(f"{name!r} collides with a type name", node)
        scope = dict(scope)
        scope[name] = type_name
        self.record_binding(name, type_name)
        return scope

    def sexp_type(self, e, scope) -> str:
        if isinstance(e, Const):
            t = constant_type(e)
            if t not in self.db.types:
                raise TypeMismatchError(
                    f"constant {e.value} has type {t}, not in the database", e)
            return t
        if isinstance(e, Var):
            if is_env_input(e.name):
                t = env_input_type(e.name)
                if t not in self.db.types:
                    raise UndeclaredVariableError(
                        f"environment input {e.name!r} names an unknown type", e)
                self.record_binding(e.name, t)
                return t
            if e.name in scope:
                return scope[e.name]
            raise UndeclaredVariableError(f"undeclared variable {e.name!r}", e)
        raise TypeMismatchError(f"not a simple operand: {e!r}", e)

    def check_call(self, call: CallExpr, scope) -> str:
        # a bare type name as receiver is a constructor invocation
        recv = call.receiver
        is_static = (isinstance(recv, Var) and not is_env_input(recv.name)
                     and recv.name not in scope and recv.name in self.db.types)
        if is_static:
            recv_type = recv.name
            if call.method != "new":
                raise NoMatchingSignatureError(
                    f"only constructors may be called on the type name {recv.name!r}", call)
        else:
            recv_type = self.sexp_type(recv, scope)
            if call.method == "new":
                raise TypeMismatchError(
                    "constructors must be called on the type name, not an instance", call)
        arg_types = tuple(self.sexp_type(a, scope) for a in call.args)
        sig = resolve_signature(self.db, recv_type, call.method, arg_types, call)
        self.resolutions[id(call)] = CallResolution(recv_type, arg_types, sig)
        return sig.returns

    def check_exp(self, e: Exp, scope) -> str:
        if isinstance(e, (Const, Var)):
            return self.sexp_type(e, scope)
        if isinstance(e, CallExpr):
            return self.check_call(e, scope)
        if isinstance(e, LetExp):
            t = self.check_call(e.call, scope)
            if t == VOID:
                raise TypeMismatchError(f"cannot bind void result of {e.call}", e)
            inner = self.bind(scope, e.var, t, e)
            return self.check_exp(e.body, inner)
        raise TypeMismatchError(f"not an expression: {e!r}", e)

    def check_stmt(self, p: Program, scope) -> dict:
        """Checks one statement; returns the scope for following statements."""
        if isinstance(p, Skip):
            return scope
        if isinstance(p, Call):
            self.check_call(p.call, scope)
            return scope
        if isinstance(p, Let):
            t = self.check_call(p.call, scope)
            if t == VOID:
                raise TypeMismatchError(f"cannot bind void result of {p.call}", p)
            return self.bind(scope, p.var, t, p)
        if isinstance(p, Seq):
            scope = self.check_stmt(p.first, scope)
            return self.check_stmt(p.rest, scope)
        if isinstance(p, If):
            t = self.check_exp(p.cond, scope)
            if t == VOID:
                raise TypeMismatchError("condition has no value", p)
            self.check_stmt(p.then, scope)
            self.check_stmt(p.orelse, scope)
            return scope
        if isinstance(p, While):
            t = self.check_exp(p.cond, scope)
            if t == VOID:
                raise TypeMismatchError("condition has no value", p)
            self.check_stmt(p.body, scope)
            return scope
        if isinstance(p, Try):
            self.check_stmt(p.body, scope)
            for c in p.catches:
                if c.exc_type not in self.db.types:
                    raise TypeMismatchError(
                        f"catch clause names unknown type {c.exc_type!r}", c)
                inner = self.bind(scope, c.var, c.exc_type, c)
                self.check_stmt(c.body, inner)
            return scope
        raise TypeMismatchError(f"not a statement: {p!r}", p)


def type_check(program: Program, db: ApiDatabase) -> TypedProgram:
    """Check a program against the database.

    Returns a TypedProgram whose env maps every binder and every used
    environment input to its type, and which records the unique resolved
    signature of every call site. Raises a TypeCheckError subclass on the
    first failure, carrying the offending node.
    """
    checker = _Checker(db)
    checker.check_stmt(program, {})
    return TypedProgram(program, checker.env, checker.resolutions)
