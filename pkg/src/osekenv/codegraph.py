"""Entity/relation graph over functions and variables, with closure queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import ConsistencyError, UnknownFunction, UnknownVariable
from .frontend.facts import FactKind, FactRecord


def _adjacency(edges: Iterable[tuple[str, str]], nodes: Iterable[str], reverse: bool = False) -> Mapping[str, tuple[str, ...]]:
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        if reverse:
            a, b = b, a
        adj[a].add(b)
    return MappingProxyType({n: tuple(sorted(s)) for n, s in adj.items()})


@dataclass(frozen=True)
class CodeGraph:
    functions: Mapping[str, str]  # id -> "file:line" of the definition
    variables: Mapping[str, str]
    calls: frozenset[tuple[str, str]]
    sets_edges: frozenset[tuple[str, str]]
    uses_edges: frozenset[tuple[str, str]]
    dep_edges: frozenset[tuple[str, str]]  # lhs -> rhs
    api_set: frozenset[str]
    assertions: tuple[tuple[str, str, str], ...] = ()  # (function, expression, location)
    _callees: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _callers: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _deps: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_callees", _adjacency(self.calls, self.functions))
        object.__setattr__(self, "_callers", _adjacency(self.calls, self.functions, reverse=True))
        object.__setattr__(self, "_deps", _adjacency(self.dep_edges, self.variables))

    def callees(self, f: str) -> tuple[str, ...]:
        return self._callees[f]

    def callers(self, f: str) -> tuple[str, ...]:
        return self._callers[f]

    def summary(self) -> dict[str, int]:
        return {
            "functions": len(self.functions),
            "variables": len(self.variables),
            "calls": len(self.calls),
            "sets": len(self.sets_edges),
            "uses": len(self.uses_edges),
            "deps": len(self.dep_edges),
            "apis": len(self.api_set),
        }


def build_graph(facts: Iterable[FactRecord]) -> CodeGraph:
    """Collapse a fact list into a :class:`CodeGraph`.

    Raises :class:`ConsistencyError` naming every dangling reference.
    """
    facts = list(facts)
    functions: dict[str, str] = {}
    variables: dict[str, str] = {}
    for r in facts:
        if r.kind is FactKind.FunctionDef:
            functions.setdefault(r.subject, r.location)
        elif r.kind is FactKind.VariableDef:
            variables.setdefault(r.subject, r.location)

    problems: list[str] = []

    def need(name: str, table: dict, what: str, r: FactRecord) -> bool:
        if name in table:
            return True
        problems.append(f"{r.kind.tag} at {r.location}: undeclared {what} {name!r}")
        return False

    calls, sets_, uses, deps = set(), set(), set(), set()
    apis: set[str] = set()
    assertions = []
    for r in facts:
        k = r.kind
        if k is FactKind.Call:
            if need(r.subject, functions, "function", r) & need(r.object, functions, "function", r):
                calls.add((r.subject, r.object))
        elif k in (FactKind.Sets, FactKind.Uses):
            if need(r.subject, functions, "function", r) & need(r.object, variables, "variable", r):
                (sets_ if k is FactKind.Sets else uses).add((r.subject, r.object))
        elif k is FactKind.DependsOn:
            if need(r.subject, variables, "variable", r) & need(r.object, variables, "variable", r):
                deps.add((r.subject, r.object))
        elif k is FactKind.ApiMarker:
            if need(r.subject, functions, "function", r):
                apis.add(r.subject)
        elif k is FactKind.Assertion:
            if need(r.subject, functions, "function", r):
                assertions.append((r.subject, r.object, r.location))
    if problems:
        raise ConsistencyError(problems)
    return CodeGraph(
        functions=MappingProxyType(dict(sorted(functions.items()))),
        variables=MappingProxyType(dict(sorted(variables.items()))),
        calls=frozenset(calls),
        sets_edges=frozenset(sets_),
        uses_edges=frozenset(uses),
        dep_edges=frozenset(deps),
        api_set=frozenset(apis),
        assertions=tuple(assertions),
    )


def _closure(adj: Mapping[str, tuple[str, ...]], seeds: Iterable[str]) -> frozenset[str]:
    seen = set(seeds)
    queue = deque(seen)
    while queue:
        n = queue.popleft()
        for m in adj[n]:
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return frozenset(seen)


def _check_function(g: CodeGraph, f: str) -> None:
    if f not in g.functions:
        raise UnknownFunction(f)


def backward_call_closure(g: CodeGraph, f: str) -> frozenset[str]:
    """Every function from which ``f`` is reachable over call edges, ``f`` included."""
    _check_function(g, f)
    return _closure(g._callers, [f])


def forward_call_closure(g: CodeGraph, f: str) -> frozenset[str]:
    """Every function reachable from ``f`` over call edges, ``f`` included."""
    _check_function(g, f)
    return _closure(g._callees, [f])


def forward_closure_of(g: CodeGraph, roots: Iterable[str]) -> frozenset[str]:
    roots = list(roots)
    for r in roots:
        _check_function(g, r)
    return _closure(g._callees, roots)


def variable_dependency_closure(
    g: CodeGraph, vars: Iterable[str], through_functions: bool = False
) -> frozenset[str]:
    """Close ``vars`` under the lhs -> rhs dependency relation.

    With ``through_functions`` a variable ``w`` is also pulled in when some
    function that sets a variable of the set uses ``w``.  This is the
    coarser variable -> function -> variable reading and is off by default.
    """
    vars = list(vars)
    for v in vars:
        if v not in g.variables:
            raise UnknownVariable(v)
    if not through_functions:
        return _closure(g._deps, vars)
    setters: dict[str, set[str]] = {}
    for f, v in g.sets_edges:
        setters.setdefault(v, set()).add(f)
    used_by: dict[str, set[str]] = {}
    for f, v in g.uses_edges:
        used_by.setdefault(f, set()).add(v)
    seen = set(vars)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        nxt = set(g._deps[v])
        for f in setters.get(v, ()):
            nxt |= used_by.get(f, set())
        for w in sorted(nxt - seen):
            seen.add(w)
            queue.append(w)
    return frozenset(seen)


def to_dot(g: CodeGraph) -> str:
    """Graphviz rendering; functions are boxes, variables ellipses, APIs bold."""
    lines = ["digraph code {", "  rankdir=LR;"]
    for f in g.functions:
        style = ', style=bold' if f in g.api_set else ""
        lines.append(f'  "{f}" [shape=box{style}];')
    for v in g.variables:
        lines.append(f'  "{v}" [shape=ellipse];')
    for a, b in sorted(g.calls):
        lines.append(f'  "{a}" -> "{b}";')
    for a, b in sorted(g.sets_edges):
        lines.append(f'  "{a}" -> "{b}" [style=dashed, label="sets"];')
    for a, b in sorted(g.uses_edges):
        lines.append(f'  "{a}" -> "{b}" [style=dashed, label="uses"];')
    for a, b in sorted(g.dep_edges):
        lines.append(f'  "{a}" -> "{b}" [style=dotted, label="dep"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
