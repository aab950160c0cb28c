"""Abstract syntax and canonical printing for the typed core language.

Programs are finite trees built from statements (skip, sequencing, calls,
let bindings, branches, loops, try/catch) over object-valued expressions.
Expressions are constants, variables, method calls over simple operands,
and let-chains that feed one call's result into a larger expression.

Variables written "$T" denote environment inputs: one implicitly bound
variable per API type T, always in scope.
"""

from __future__ import annotations

from dataclasses import dataclass


# -- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Const:
    """Literal constant; the token decides its type (String/int/boolean)."""
    value: str

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Var:
    """Variable reference: a bound name, an environment input "$T", or a
    type name used as the receiver of a constructor call."""
    name: str

    def __str__(self):
        return self.name


Sexp = Const | Var


@dataclass(frozen=True)
class CallExpr:
    """Method call over simple operands: receiver.method(arg, ...)."""
    receiver: Sexp
    method: str
    args: tuple[Sexp, ...]

    def __str__(self):
        return f"{self.receiver}.{self.method}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class LetExp:
    """Expression-level binding: let x = call : body."""
    var: str
    call: CallExpr
    body: "Exp"


Exp = Const | Var | CallExpr | LetExp


# -- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Call:
    """Call statement; any returned value is discarded."""
    call: CallExpr


@dataclass(frozen=True)
class Let:
    """Statement-level binding of a call result to a fresh variable."""
    var: str
    call: CallExpr


@dataclass(frozen=True)
class Seq:
    first: "Program"
    rest: "Program"


@dataclass(frozen=True)
class If:
    cond: Exp
    then: "Program"
    orelse: "Program"


@dataclass(frozen=True)
class While:
    cond: Exp
    body: "Program"


@dataclass(frozen=True)
class Catch:
    var: str
    exc_type: str
    body: "Program"


@dataclass(frozen=True)
class Try:
    body: "Program"
    catches: tuple[Catch, ...]


Program = Skip | Call | Let | Seq | If | While | Try


def seq_of(stmts) -> Program:
    """Right-associated sequence of statements; the canonical shape that
    the parser produces."""
    stmts = list(stmts)
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def statements(p: Program) -> list[Program]:
    """Flatten nested sequencing into the list of component statements."""
    if isinstance(p, Seq):
        return statements(p.first) + statements(p.rest)
    return [p]


def is_env_input(name: str) -> bool:
    return name.startswith("$")


def env_input_type(name: str) -> str:
    return name[1:]


# -- canonical printing ----------------------------------------------------

def print_exp(e: Exp) -> str:
    if isinstance(e, (Const, Var)):
        return str(e)
    if isinstance(e, CallExpr):
        return str(e)
    if isinstance(e, LetExp):
        return f"let {e.var} = {e.call} : {print_exp(e.body)}"
    raise TypeError(f"not an expression: {e!r}")


def _print_stmt(p: Program) -> str:
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Call):
        return f"call {p.call}"
    if isinstance(p, Let):
        return f"let {p.var} = {p.call}"
    if isinstance(p, If):
        return (f"if ({print_exp(p.cond)}) then {{ {print_program(p.then)} }}"
                f" else {{ {print_program(p.orelse)} }}")
    if isinstance(p, While):
        return f"while ({print_exp(p.cond)}) do {{ {print_program(p.body)} }}"
    if isinstance(p, Try):
        parts = [f"try {{ {print_program(p.body)} }}"]
        for c in p.catches:
            parts.append(f"catch ({c.var}: {c.exc_type}) {{ {print_program(c.body)} }}")
        return " ".join(parts)
    raise TypeError(f"not a statement: {p!r}")


def print_program(p: Program) -> str:
    """Canonical single-line text; parsing it reproduces the same tree
    (sequences are emitted flat and re-read right-associated)."""
    return "; ".join(_print_stmt(s) for s in statements(p))


def count_statements(p: Program) -> int:
    """Number of statement leaves (skip, call, and let nodes)."""
    if isinstance(p, (Skip, Call, Let)):
        return 1
    if isinstance(p, Seq):
        return count_statements(p.first) + count_statements(p.rest)
    if isinstance(p, If):
        return count_statements(p.then) + count_statements(p.orelse)
    if isinstance(p, While):
        return count_statements(p.body)
    if isinstance(p, Try):
        return count_statements(p.body) + sum(count_statements(c.body) for c in p.catches)
    raise TypeError(f"not a statement: {p!r}")


def count_control_structures(p: Program) -> int:
    """Number of branch, loop, and try/catch nodes."""
    if isinstance(p, (Skip, Call, Let)):
        return 0
    if isinstance(p, Seq):
        return count_control_structures(p.first) + count_control_structures(p.rest)
    if isinstance(p, If):
        return 1 + count_control_structures(p.then) + count_control_structures(p.orelse)
    if isinstance(p, While):
        return 1 + count_control_structures(p.body)
    if isinstance(p, Try):
        return 1 + count_control_structures(p.body) + sum(
            count_control_structures(c.body) for c in p.catches)
    raise TypeError(f"not a statement: {p!r}")


def _exp_size(e: Exp) -> int:
    if isinstance(e, (Const, Var)):
        return 1
    if isinstance(e, CallExpr):
        return 1 + _exp_size(e.receiver) + sum(_exp_size(a) for a in e.args)
    if isinstance(e, LetExp):
        return 1 + _exp_size(e.call) + _exp_size(e.body)
    raise TypeError(f"not an expression: {e!r}")


def program_size(p: Program) -> int:
    """Total AST node count; used as a simplicity measure when ranking."""
    if isinstance(p, Skip):
        return 1
    if isinstance(p, Call):
        return 1 + _exp_size(p.call)
    if isinstance(p, Let):
        return 1 + _exp_size(p.call)
    if isinstance(p, Seq):
        return 1 + program_size(p.first) + program_size(p.rest)
    if isinstance(p, If):
        return 1 + _exp_size(p.cond) + program_size(p.then) + program_size(p.orelse)
    if isinstance(p, While):
        return 1 + _exp_size(p.cond) + program_size(p.body)
    if isinstance(p, Try):
        return 1 + program_size(p.body) + sum(1 + program_size(c.body) for c in p.catches)
    raise TypeError(f"not a statement: {p!r}")
