"""API universe: data types, method signatures, and the subtyping relation.

Programs are never executed; everything the generator knows about an API
comes from a database of method signatures loaded from a YAML document.
The database also carries an optional "package" tag per type, used when
exporting latent vectors grouped by API family.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import yaml

VOID = "void"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")

# Words reserved by the concrete program syntax. A type named "while" would
# be unparseable, so these are rejected when the database is loaded.
RESERVED_WORDS = frozenset({
    "skip", "call", "let", "if", "then", "else", "while", "do", "try",
    "catch", "true", "false", VOID,
})


class ApiDatabaseError(Exception):
    """Malformed API database document."""


@dataclass(frozen=True)
class MethodSignature:
    """One callable API method: receiver.name(params) -> returns.

    Constructors are methods named "new" whose return type equals the
    receiver type.
    """

    receiver: str
    name: str
    params: tuple[str, ...]
    returns: str

    @property
    def is_constructor(self) -> bool:
        return self.name == "new"

    def key(self) -> tuple:
        return (self.receiver, self.name, self.params)

    def __str__(self) -> str:
        return f"{self.receiver}.{self.name}({', '.join(self.params)}) -> {self.returns}"


class ApiDatabase:
    """Immutable universe of API types and method signatures.

    Subtyping defaults to the identity relation; explicit edges may be
    declared in the database file and are closed reflexively/transitively.
    """

    def __init__(self, types, methods, subtype_edges=(), packages=None):
        self.types: frozenset[str] = frozenset(types)
        self.packages: dict[str, str] = dict(packages or {})
        self.methods: tuple[MethodSignature, ...] = tuple(methods)
        self._by_name: dict[str, list[MethodSignature]] = {}
        self._ancestors: dict[str, frozenset[str]] = {}
        self._validate_types()
        self._build_subtyping(subtype_edges)
        self._index_methods()

    # -- construction ------------------------------------------------------

    def _validate_types(self):
        for t in self.types:
            if not _IDENT_RE.match(t):
                raise ApiDatabaseError(f"invalid type name: {t!r}")
            if t in RESERVED_WORDS:
                raise ApiDatabaseError(f"type name is a reserved word: {t!r}")
        for t in self.packages:
            if t not in self.types:
                raise ApiDatabaseError(f"package declared for unknown type {t!r}")

    def _build_subtyping(self, edges):
        parents: dict[str, set[str]] = {t: set() for t in self.types}
        for sub, sup in edges:
            for t in (sub, sup):
                if t not in self.types:
                    raise ApiDatabaseError(f"subtyping edge mentions unknown type {t!r}")
            parents[sub].add(sup)
        # reflexive-transitive closure
        for t in self.types:
            seen = {t}
            frontier = [t]
            while frontier:
                cur = frontier.pop()
                for sup in parents[cur]:
                    if sup not in seen:
                        seen.add(sup)
                        frontier.append(sup)
            self._ancestors[t] = frozenset(seen)
        # antisymmetry: a <= b and b <= a only if a == b
        for a in self.types:
            for b in self._ancestors[a]:
                if a != b and a in self._ancestors[b]:
                    raise ApiDatabaseError(f"subtyping cycle between {a!r} and {b!r}")

    def _index_methods(self):
        seen = set()
        for sig in self.methods:
            for t in (sig.receiver, *sig.params):
                if t not in self.types:
                    raise ApiDatabaseError(f"signature {sig} mentions unknown type {t!r}")
            if sig.returns != VOID and sig.returns not in self.types:
                raise ApiDatabaseError(f"signature {sig} returns unknown type {sig.returns!r}")
            if not _IDENT_RE.match(sig.name) or sig.name in RESERVED_WORDS - {"new"}:
                raise ApiDatabaseError(f"invalid method name: {sig.name!r}")
            if sig.is_constructor and sig.returns != sig.receiver:
                raise ApiDatabaseError(f"constructor must return its receiver type: {sig}")
            if sig.key() in seen:
                raise ApiDatabaseError(f"duplicate signature: {sig}")
            seen.add(sig.key())
            self._by_name.setdefault(sig.name, []).append(sig)

    # -- queries -----------------------------------------------------------

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self._ancestors.get(sub, frozenset())

    def methods_named(self, name: str) -> list[MethodSignature]:
        return self._by_name.get(name, [])

    def package_of(self, type_name: str) -> str:
        return self.packages.get(type_name, "")

    def __contains__(self, type_name: str) -> bool:
        return type_name in self.types


def _as_type_entry(entry):
    """A types: entry is either a bare name or {name: ..., package: ...}."""
    if isinstance(entry, str):
        return entry, None
    if isinstance(entry, dict) and "name" in entry:
        return str(entry["name"]), entry.get("package")
    raise ApiDatabaseError(f"bad types entry: {entry!r}")


def database_from_dict(doc: dict) -> ApiDatabase:
    if not isinstance(doc, dict):
        raise ApiDatabaseError("database document must be a mapping")
    names = []
    packages = {}
    for entry in doc.get("types", []) or []:
        name, package = _as_type_entry(entry)
        if name in names:
            raise ApiDatabaseError(f"duplicate type name: {name!r}")
        names.append(name)
        if package is not None:
            packages[name] = str(package)
    methods = []
    for m in doc.get("methods", []) or []:
        if not isinstance(m, dict):
            raise ApiDatabaseError(f"bad methods entry: {m!r}")
        try:
            sig = MethodSignature(
                receiver=str(m["receiver"]),
                name=str(m["name"]),
                params=tuple(str(p) for p in (m.get("params") or [])),
                returns=str(m.get("returns", VOID)),
            )
        except KeyError as exc:
            raise ApiDatabaseError(f"methods entry missing field {exc}: {m!r}") from None
        methods.append(sig)
    edges = []
    for e in doc.get("subtyping", []) or []:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise ApiDatabaseError(f"bad subtyping entry (want [sub, super]): {e!r}")
        edges.append((str(e[0]), str(e[1])))
    return ApiDatabase(names, methods, edges, packages)


def load_api_database(path) -> ApiDatabase:
    """Load and validate an API database from a YAML file.

    Raises ApiDatabaseError with line/column information on parse errors,
    and on duplicate signatures or signatures mentioning undeclared types.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ApiDatabaseError(f"cannot parse database{where}: {exc}") from None
    if doc is None:
        doc = {}
    return database_from_dict(doc)


def database_to_dict(db: ApiDatabase) -> dict:
    types = []
    for t in sorted(db.types):
        if t in db.packages:
            types.append({"name": t, "package": db.packages[t]})
        else:
            types.append(t)
    methods = [
        {
            "receiver": s.receiver,
            "name": s.name,
            "params": list(s.params),
            "returns": s.returns,
        }
        for s in sorted(db.methods, key=lambda s: s.key())
    ]
    edges = sorted(
        [a, b]
        for a in db.types
        for b in db._ancestors[a]
        if a != b and _is_direct_edge(db, a, b)
    )
    return {"types": types, "methods": methods, "subtyping": edges}


def _is_direct_edge(db: ApiDatabase, a: str, b: str) -> bool:
    # an edge is direct if no strictly intermediate type sits between a and b
    for c in db._ancestors[a]:
        if c not in (a, b) and b in db._ancestors[c]:
            return False
    return True


def save_api_database(db: ApiDatabase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(database_to_dict(db), fh, sort_keys=False)
