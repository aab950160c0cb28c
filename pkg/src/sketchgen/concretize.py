"""Type-directed concretization: turning sketches into type-safe programs
by random walks over partially concretized trees.

A partially concretized tree mixes concrete statements with two marker
nodes: an abstract call statement, and a partially built condition. Each
walk step rewrites the leftmost abstract node with one type-consistent
choice of receiver and arguments. The choice space is deliberately small:

  * a slot of type T is filled by an in-scope variable of exactly type T;
    the environment input $T is available only when no such variable
    exists (matching how generated programs read their inputs);
  * constructors are invoked on the type name itself;
  * an abstract call statement either discards its result (`call ...`) or
    binds it to a fresh variable (`let x = ...`) when it returns a value;
  * condition lists concretize elementwise into a let-chain whose final
    value is the last bound variable; an empty condition list becomes a
    bare in-scope variable or environment input.

Walks that reach a dead end restart from the sketch; budgets bound the
number of steps and restarts so unsatisfiable sketches fail cleanly.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .api import VOID, ApiDatabase
from .lang import (Call, CallExpr, Catch, Const, If, Let, LetExp, Program,
                   Seq, Skip, Try, Var, While, print_program, program_size,
                   seq_of)
from .metrics import canonical_rename
from .sketch import (Cexp, SkCall, SkIf, SkSeq, SkSkip, SkTry, SkWhile,
                     Sketch, abstract_typed, sketch_to_record)
from .typecheck import TypeCheckError, constant_type, resolve_signature, type_check


class BudgetExhaustedError(Exception):
    """All walks were rejected within the step/restart budget; the sketch
    is likely unsatisfiable under the given database."""


class ConcretizationBug(Exception):
    """Internal invariant violation: a finished walk failed its type or
    abstraction check."""


@dataclass(frozen=True)
class WalkConfig:
    max_steps: int | None = None  # default: 10 * sketch node count
    max_restarts: int = 50
    simplicity_bias: float = 0.5

    def __post_init__(self):
        if self.max_steps is not None and self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.max_restarts <= 0:
            raise ValueError("max_restarts must be positive")
        if self.simplicity_bias < 0:
            raise ValueError("simplicity_bias must be nonnegative")


# -- partially concretized trees ---------------------------------------------

@dataclass(frozen=True)
class AbsStmt:
    """Not-yet-concretized call statement."""
    cexp: Cexp


@dataclass(frozen=True)
class AbsCond:
    """Condition list mid-concretization: bindings made so far (name, call,
    result type) and the abstract elements still to place."""
    bound: tuple[tuple[str, CallExpr, str], ...]
    todo: tuple[Cexp, ...]


@dataclass(frozen=True)
class PCS:
    """Partially concretized tree plus the cost of the step that made it."""
    root: object
    step_cost: int = 0

    def is_concrete(self) -> bool:
        return not _has_abstract(self.root)

    def to_program(self) -> Program:
        if not self.is_concrete():
            raise ValueError("tree still contains abstract nodes")
        return self.root


def _has_abstract(node) -> bool:
    if isinstance(node, (AbsStmt, AbsCond)):
        return True
    if isinstance(node, (Skip, Call, Let)):
        return False
    if isinstance(node, Seq):
        return _has_abstract(node.first) or _has_abstract(node.rest)
    if isinstance(node, (If, While)):
        cond_abs = isinstance(node.cond, AbsCond)
        if isinstance(node, If):
            return cond_abs or _has_abstract(node.then) or _has_abstract(node.orelse)
        return cond_abs or _has_abstract(node.body)
    if isinstance(node, Try):
        return _has_abstract(node.body) or any(_has_abstract(c.body) for c in node.catches)
    raise TypeError(f"unexpected node {node!r}")


def _bound_names(node, out: set):
    if isinstance(node, (Skip, AbsStmt)):
        return
    if isinstance(node, Call):
        return
    if isinstance(node, Let):
        out.add(node.var)
        return
    if isinstance(node, Seq):
        _bound_names(node.first, out)
        _bound_names(node.rest, out)
        return
    if isinstance(node, (If, While)):
        cond = node.cond
        if isinstance(cond, AbsCond):
            out.update(name for name, _, _ in cond.bound)
        else:
            _exp_bound(cond, out)
        if isinstance(node, If):
            _bound_names(node.then, out)
            _bound_names(node.orelse, out)
        else:
            _bound_names(node.body, out)
        return
    if isinstance(node, Try):
        _bound_names(node.body, out)
        for c in node.catches:
            out.add(c.var)
            _bound_names(c.body, out)
        return
    raise TypeError(f"unexpected node {node!r}")


def _exp_bound(e, out: set):
    if isinstance(e, LetExp):
        out.add(e.var)
        _exp_bound(e.body, out)


def _fresh_name(type_name: str, used: set, db: ApiDatabase) -> str:
    prefix = "".join(c for c in type_name if c.isupper()).lower() or type_name[0].lower()
    for i in itertools.count(1):
        name = f"{prefix}{i}"
        if name not in used and name not in db.types:
            used.add(name)
            return name


def initial_pcs(y: Sketch, db: ApiDatabase) -> PCS:
    """Sketch with control structure made concrete (catch binders named)
    and every call and condition left abstract."""
    used: set[str] = set()

    def conv(s):
        if isinstance(s, SkSkip):
            return Skip()
        if isinstance(s, SkCall):
            return AbsStmt(s.cexp)
        if isinstance(s, SkSeq):
            return seq_of([conv(i) for i in s.items])
        if isinstance(s, SkIf):
            return If(AbsCond((), s.cond), conv(s.then), conv(s.orelse))
        if isinstance(s, SkWhile):
            return While(AbsCond((), s.cond), conv(s.body))
        if isinstance(s, SkTry):
            catches = tuple(
                Catch(_fresh_name(t, used, db), t, conv(b)) for t, b in s.catches)
            return Try(conv(s.body), catches)
        raise TypeError(f"not a sketch: {s!r}")

    return PCS(conv(y))


# -- neighbor enumeration ------------------------------------------------------

def _sexp_type(db, env, e) -> str:
    if isinstance(e, Const):
        return constant_type(e)
    if isinstance(e, Var):
        if e.name.startswith("$"):
            return e.name[1:]
        if e.name in env:
            return env[e.name]
        if e.name in db.types:
            return e.name
    raise ConcretizationBug(f"cannot type operand {e!r}")


def _call_return(db, env, call: CallExpr) -> str:
    recv_type = _sexp_type(db, env, call.receiver)
    arg_types = tuple(_sexp_type(db, env, a) for a in call.args)
    return resolve_signature(db, recv_type, call.method, arg_types).returns


def _slot_options(db, env, type_name: str) -> list[Var]:
    names = sorted(n for n, t in env.items() if t == type_name)
    if names:
        return [Var(n) for n in names]
    if type_name in db.types:
        return [Var("$" + type_name)]
    return []


def _call_options(db, env, cexp: Cexp):
    """All concrete call expressions realizing an abstract call, with its
    resolved signature; ([], None) marks a dead end."""
    try:
        sig = resolve_signature(db, cexp.receiver, cexp.method, cexp.params)
    except TypeCheckError:
        return None, []
    if cexp.method == "new":
        receivers = [Var(cexp.receiver)]
    else:
        receivers = _slot_options(db, env, cexp.receiver)
    arg_options = [_slot_options(db, env, p) for p in cexp.params]
    if not receivers or any(not opts for opts in arg_options):
        return sig, []
    calls = [CallExpr(r, cexp.method, tuple(args))
             for r in receivers
             for args in itertools.product(*arg_options)]
    return sig, calls


def _chain_exp(bound, final_name: str):
    exp = Var(final_name)
    for name, call, _ in reversed(bound):
        exp = LetExp(name, call, exp)
    return exp


def _expand_cond(ac: AbsCond, env, db, used):
    """One concretization step inside a condition list."""
    inner = dict(env)
    for name, _, ret in ac.bound:
        inner[name] = ret
    if ac.todo:
        cexp = ac.todo[0]
        sig, calls = _call_options(db, inner, cexp)
        if sig is None or sig.returns == VOID or not calls:
            return []
        name = _fresh_name(sig.returns, set(used), db)
        cost = 4 + len(cexp.params)
        out = []
        for call in calls:
            new_bound = ac.bound + ((name, call, sig.returns),)
            if len(ac.todo) == 1:
                out.append((_chain_exp(new_bound, name), cost + 1))
            else:
                out.append((AbsCond(new_bound, ac.todo[1:]), cost))
        return out
    # empty condition list: any in-scope value, or an environment input of
    # a type no variable currently covers
    covered = set(inner.values())
    options = [Var(n) for n in sorted(inner)]
    options += [Var("$" + t) for t in sorted(db.types) if t not in covered]
    return [(v, 1) for v in options]


def _expand(node, env, db, used):
    """Rewrites of the leftmost abstract node inside `node`, as a list of
    (replacement subtree, step cost); None when nothing is abstract here."""
    if isinstance(node, (Skip, Call, Let)):
        return None
    if isinstance(node, AbsStmt):
        cexp = node.cexp
        sig, calls = _call_options(db, env, cexp)
        if sig is None:
            return []
        out = []
        base = 3 + len(cexp.params)
        for call in calls:
            out.append((Call(call), base))
        if sig.returns != VOID:
            name = _fresh_name(sig.returns, set(used), db)
            for call in calls:
                out.append((Let(name, call), base + 1))
        return out
    if isinstance(node, Seq):
        first = _expand(node.first, env, db, used)
        if first is not None:
            return [(Seq(n, node.rest), c) for n, c in first]
        env2 = dict(env)
        _extend_env(node.first, env2, db)
        rest = _expand(node.rest, env2, db, used)
        if rest is None:
            return None
        return [(Seq(node.first, n), c) for n, c in rest]
    if isinstance(node, If):
        if isinstance(node.cond, AbsCond):
            return [(If(c, node.then, node.orelse), cost)
                    for c, cost in _expand_cond(node.cond, env, db, used)]
        then = _expand(node.then, env, db, used)
        if then is not None:
            return [(If(node.cond, n, node.orelse), c) for n, c in then]
        orelse = _expand(node.orelse, env, db, used)
        if orelse is None:
            return None
        return [(If(node.cond, node.then, n), c) for n, c in orelse]
    if isinstance(node, While):
        if isinstance(node.cond, AbsCond):
            return [(While(c, node.body), cost)
                    for c, cost in _expand_cond(node.cond, env, db, used)]
        body = _expand(node.body, env, db, used)
        if body is None:
            return None
        return [(While(node.cond, n), c) for n, c in body]
    if isinstance(node, Try):
        body = _expand(node.body, env, db, used)
        if body is not None:
            return [(Try(n, node.catches), c) for n, c in body]
        for i, catch in enumerate(node.catches):
            env2 = dict(env)
            env2[catch.var] = catch.exc_type
            inner = _expand(catch.body, env2, db, used)
            if inner is not None:
                return [(Try(node.body,
                             node.catches[:i]
                             + (Catch(catch.var, catch.exc_type, n),)
                             + node.catches[i + 1:]), c)
                        for n, c in inner]
        return None
    raise TypeError(f"unexpected node {node!r}")


def _extend_env(stmt, env: dict, db):
    """Bindings a finished statement contributes to its successors."""
    if isinstance(stmt, Let):
        env[stmt.var] = _call_return(db, env, stmt.call)
    elif isinstance(stmt, Seq):
        _extend_env(stmt.first, env, db)
        _extend_env(stmt.rest, env, db)


def neighbors(pcs: PCS, db: ApiDatabase) -> list[PCS]:
    """All single-step concretizations of the leftmost abstract node; empty
    both at dead ends and on fully concrete trees."""
    used: set[str] = set()
    _bound_names(pcs.root, used)
    result = _expand(pcs.root, {}, db, used)
    if result is None:
        return []
    return [PCS(node, cost) for node, cost in result]


def step_distribution(candidates: list[PCS], cfg: WalkConfig) -> np.ndarray:
    """Probability of stepping to each candidate: proportional to
    exp(-simplicity_bias * step_cost), strictly positive everywhere."""
    if not candidates:
        raise ValueError("no candidates")
    costs = np.array([c.step_cost for c in candidates], dtype=float)
    weights = np.exp(-cfg.simplicity_bias * (costs - costs.min()))
    return weights / weights.sum()


def _sketch_nodes(y: Sketch) -> int:
    if isinstance(y, SkSkip):
        return 1
    if isinstance(y, SkCall):
        return 1
    if isinstance(y, SkSeq):
        return sum(_sketch_nodes(i) for i in y.items)
    if isinstance(y, SkIf):
        return 1 + len(y.cond) + _sketch_nodes(y.then) + _sketch_nodes(y.orelse)
    if isinstance(y, SkWhile):
        return 1 + len(y.cond) + _sketch_nodes(y.body)
    if isinstance(y, SkTry):
        return 1 + _sketch_nodes(y.body) + sum(1 + _sketch_nodes(b) for _, b in y.catches)
    raise TypeError(f"not a sketch: {y!r}")


def random_walk(y: Sketch, db: ApiDatabase, cfg: WalkConfig,
                rng: np.random.Generator) -> Program:
    """One concretization of the sketch, or BudgetExhaustedError after the
    restart budget. Every returned program type-checks and abstracts back
    to exactly the input sketch."""
    max_steps = cfg.max_steps if cfg.max_steps is not None else 10 * _sketch_nodes(y)
    for _ in range(cfg.max_restarts):
        pcs = initial_pcs(y, db)
        steps = 0
        while steps < max_steps:
            cands = neighbors(pcs, db)
            if not cands:
                break
            probs = step_distribution(cands, cfg)
            pcs = cands[int(rng.choice(len(cands), p=probs))]
            steps += 1
        if pcs.is_concrete():
            program = pcs.to_program()
            tp = type_check(program, db)
            if abstract_typed(tp) != y:
                raise ConcretizationBug("finished walk does not abstract to its sketch")
            return program
    raise BudgetExhaustedError(
        f"no walk finished within {cfg.max_restarts} restarts; "
        f"the sketch is likely unsatisfiable")


def _binder_count(p, acc=0) -> int:
    names: set[str] = set()
    _bound_names(p, names)
    return len(names)


def concretize_top_k(sketches, db: ApiDatabase, cfg: WalkConfig, k: int,
                     rng: np.random.Generator,
                     walks_per_sketch: int = 20) -> list[Program]:
    """Concretize a batch of sampled sketches and rank the distinct
    resulting programs.

    Duplicate programs (up to variable renaming) are merged; ranking is by
    how often the program's sketch was sampled, then by the sketch's walk
    success rate, then by program simplicity. At most k programs are
    returned; the list is empty when every sketch fails.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    freq = Counter(sketches)
    order = sorted(freq, key=lambda y: (-freq[y], json.dumps(sketch_to_record(y))))
    ranked: dict[str, tuple] = {}
    for y in order:
        successes = []
        attempts = 0
        for _ in range(walks_per_sketch):
            attempts += 1
            try:
                successes.append(random_walk(y, db, cfg, rng))
            except BudgetExhaustedError:
                break  # all restarts already failed; further walks would too
        if not successes:
            continue
        rate = len(successes) / attempts
        for prog in successes:
            key = print_program(canonical_rename(prog))
            if key not in ranked:
                cost = program_size(prog) + _binder_count(prog)
                ranked[key] = (-freq[y], -rate, cost, key, prog)
    ordered = sorted(ranked.values())
    return [entry[4] for entry in ordered[:k]]
