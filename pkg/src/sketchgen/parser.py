"""Recursive-descent parser for the concrete program syntax.

Statement forms:

    skip
    call recv.m(a1, a2)
    let x = recv.m(...)
    if (exp) then { ... } else { ... }
    while (exp) do { ... }
    try { ... } catch (x: T) { ... } catch (y: U) { ... }
    p1 ; p2

Expression forms: constants ("text", 42, true/false), variables (x, $T),
calls over simple operands, and `let x = call : exp` chains.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .lang import (CallExpr, Call, Catch, Const, If, Let, LetExp, Program,
                   Seq, Skip, Try, Var, While, seq_of)

KEYWORDS = {"skip", "call", "let", "if", "then", "else", "while", "do",
            "try", "catch", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"[^"\n]*")
  | (?P<int>-?[0-9]+)
  | (?P<ident>\$?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[();{}.,:=])
    """,
    re.VERBOSE,
)


class AmlSyntaxError(Exception):
    """Syntax error with 1-based line/column position."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "keyword", "string", "int", or the punct char
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise AmlSyntaxError(f"unexpected character {text[pos]!r}",
                                 line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.lastgroup == "ws":
            chunk = m.group(0)
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = pos + chunk.rfind("\n") + 1
        elif m.lastgroup == "punct":
            tokens.append(_Token(m.group(0), m.group(0), line, col))
        elif m.lastgroup == "ident":
            word = m.group(0)
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(_Token(kind, word, line, col))
        else:
            tokens.append(_Token(m.lastgroup, m.group(0), line, col))
        pos = m.end()
    tokens.append(_Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers ------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message):
        tok = self.peek()
        raise AmlSyntaxError(message, tok.line, tok.column)

    def expect(self, kind, text=None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of input"
            self.error(f"expected {want!r}, found {got!r}")
        return self.next()

    def at_keyword(self, word) -> bool:
        tok = self.peek()
        return tok.kind == "keyword" and tok.text == word

    # -- grammar ------------------------------------------------------

    def parse_program(self) -> Program:
        stmts = [self.parse_statement()]
        while self.peek().kind == ";":
            self.next()
            stmts.append(self.parse_statement())
        return seq_of(stmts)

    def parse_statement(self) -> Program:
        tok = self.peek()
        if tok.kind != "keyword":
            self.error(f"expected a statement, found {tok.text or 'end of input'!r}")
        if tok.text == "skip":
            self.next()
            return Skip()
        if tok.text == "call":
            self.next()
            return Call(self.parse_call())
        if tok.text == "let":
            self.next()
            name = self.expect("ident").text
            if name.startswith("$"):
                self.error("cannot bind an environment input")
            self.expect("=")
            return Let(name, self.parse_call())
        if tok.text == "if":
            self.next()
            self.expect("(")
            cond = self.parse_exp()
            self.expect(")")
            self.expect("keyword", "then")
            then = self.parse_block()
            self.expect("keyword", "else")
            orelse = self.parse_block()
            return If(cond, then, orelse)
        if tok.text == "while":
            self.next()
            self.expect("(")
            cond = self.parse_exp()
            self.expect(")")
            self.expect("keyword", "do")
            return While(cond, self.parse_block())
        if tok.text == "try":
            self.next()
            body = self.parse_block()
            catches = []
            while self.at_keyword("catch"):
                self.next()
                self.expect("(")
                var = self.expect("ident").text
                if var.startswith("$"):
                    self.error("cannot bind an environment input")
                self.expect(":")
                exc = self.expect("ident").text
                self.expect(")")
                catches.append(Catch(var, exc, self.parse_block()))
            if not catches:
                self.error("try requires at least one catch clause")
            return Try(body, tuple(catches))
        self.error(f"expected a statement, found {tok.text!r}")

    def parse_block(self) -> Program:
        self.expect("{")
        if self.peek().kind == "}":
            self.next()
            return Skip()
        body = self.parse_program()
        self.expect("}")
        return body

    def parse_exp(self):
        if self.at_keyword("let"):
            self.next()
            name = self.expect("ident").text
            if name.startswith("$"):
                self.error("cannot bind an environment input")
            self.expect("=")
            call = self.parse_call()
            self.expect(":")
            return LetExp(name, call, self.parse_exp())
        operand = self.parse_sexp()
        if self.peek().kind == ".":
            return self.parse_call_tail(operand)
        return operand

    def parse_call(self) -> CallExpr:
        recv = self.parse_sexp()
        if self.peek().kind != ".":
            self.error("expected a method call")
        return self.parse_call_tail(recv)

    def parse_call_tail(self, recv) -> CallExpr:
        self.expect(".")
        method = self.expect("ident").text
        self.expect("(")
        args = []
        if self.peek().kind != ")":
            args.append(self.parse_sexp())
            while self.peek().kind == ",":
                self.next()
                args.append(self.parse_sexp())
        self.expect(")")
        return CallExpr(recv, method, tuple(args))

    def parse_sexp(self):
        tok = self.peek()
        if tok.kind == "string" or tok.kind == "int":
            self.next()
            return Const(tok.text)
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.next()
            return Const(tok.text)
        if tok.kind == "ident":
            self.next()
            return Var(tok.text)
        self.error(f"expected an operand, found {tok.text or 'end of input'!r}")


def parse_program(text: str) -> Program:
    """Parse program text into its AST; raises AmlSyntaxError with the
    offending position on malformed input."""
    parser = _Parser(text)
    program = parser.parse_program()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.error(f"unexpected trailing input {tok.text!r}")
    return program
