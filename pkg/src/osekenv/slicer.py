"""Property-driven function extraction.

Pipeline for one property::

    target variables --dep closure--> extended variables
        --sets/uses--> end-level functions
        --called-by closure ∩ APIs--> root-level functions
        --call closure--> abstract kernel

plus the count constraints that order end-level calls.
"""

from __future__ import annotations

import enum
import json
import warnings
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .codegraph import (
    CodeGraph,
    backward_call_closure,
    forward_closure_of,
    variable_dependency_closure,
)
from .errors import EmptyResultWarning, UnknownIdentifierWarning, UnknownVariable
from .frontend.property import Property


class SliceMode(str, enum.Enum):
    MODIFY_ONLY = "modify_only"
    MODIFY_OR_USE = "modify_or_use"


@dataclass(frozen=True)
class CountConstraint:
    """``count(successor) < count(p)`` must hold for every predecessor ``p``
    whenever ``successor`` is about to be called."""

    successor: str
    predecessors: tuple[str, ...]

    def __post_init__(self):
        if not self.predecessors:
            raise ValueError("CountConstraint needs at least one predecessor")
        if self.successor in self.predecessors:
            raise ValueError(f"{self.successor} cannot precede itself")
        object.__setattr__(self, "predecessors", tuple(sorted(set(self.predecessors))))

    def admits(self, counts: Mapping[str, int]) -> bool:
        n = counts.get(self.successor, 0)
        return all(n < counts.get(p, 0) for p in self.predecessors)

    def __str__(self) -> str:
        return " && ".join(f"(#{self.successor} < #{p})" for p in self.predecessors)


@dataclass(frozen=True)
class SliceResult:
    property: Property
    vtv: tuple[str, ...]
    evtv: tuple[str, ...]
    elf: tuple[str, ...]
    rlf: tuple[str, ...]
    abstract_fns: tuple[str, ...]
    internal_constraints: tuple[CountConstraint, ...]
    mode: SliceMode = SliceMode.MODIFY_OR_USE
    locations: Mapping[str, str] = field(default_factory=dict)
    unknown_identifiers: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "format": "osekenv-slice/1",
            "property": self.property.raw_text,
            "mode": self.mode.value,
            "vtv": list(self.vtv),
            "evtv": list(self.evtv),
            "elf": list(self.elf),
            "rlf": list(self.rlf),
            "abstract_fns": list(self.abstract_fns),
            "internal_constraints": [
                {"successor": c.successor, "predecessors": list(c.predecessors)} for c in self.internal_constraints
            ],
            "locations": {k: self.locations[k] for k in sorted(self.locations)},
            "unknown_identifiers": list(self.unknown_identifiers),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SliceResult":
        if d.get("format") != "osekenv-slice/1":
            raise ValueError(f"not a slice report (format={d.get('format')!r})")
        return cls(
            property=Property(d["property"], tuple(d["vtv"])),
            vtv=tuple(d["vtv"]),
            evtv=tuple(d["evtv"]),
            elf=tuple(d["elf"]),
            rlf=tuple(d["rlf"]),
            abstract_fns=tuple(d["abstract_fns"]),
            internal_constraints=tuple(
                CountConstraint(c["successor"], tuple(c["predecessors"])) for c in d["internal_constraints"]
            ),
            mode=SliceMode(d["mode"]),
            locations=dict(d.get("locations", {})),
            unknown_identifiers=tuple(d.get("unknown_identifiers", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "SliceResult":
        return cls.from_dict(json.loads(text))


def _split_identifiers(p: Property, g: CodeGraph) -> tuple[list[str], list[str]]:
    known, unknown = [], []
    for name in p.identifiers():
        if name in g.variables:
            known.append(name)
        elif name not in g.functions:
            unknown.append(name)
    return known, unknown


def extract_target_variables(p: Property, g: CodeGraph) -> tuple[str, ...]:
    """Variables of ``g`` named in the property expression.

    Identifiers that are not variables (enum literals, macros such as
    ``NULL``) are reported through :class:`UnknownIdentifierWarning`.
    """
    known, unknown = _split_identifiers(p, g)
    for name in unknown:
        warnings.warn(f"property identifier {name!r} is not a variable of the code graph", UnknownIdentifierWarning, stacklevel=2)
    return tuple(sorted(known))


def end_level_functions(g: CodeGraph, evtv: Iterable[str], mode: SliceMode | str = SliceMode.MODIFY_OR_USE) -> tuple[str, ...]:
    mode = SliceMode(mode)
    evtv = set(evtv)
    missing = evtv - set(g.variables)
    if missing:
        raise UnknownVariable(sorted(missing)[0])
    found = {f for f, v in g.sets_edges if v in evtv}
    if mode is SliceMode.MODIFY_OR_USE:
        found |= {f for f, v in g.uses_edges if v in evtv}
    return tuple(sorted(found))


def root_level_functions(g: CodeGraph, elf: Iterable[str]) -> tuple[str, ...]:
    """APIs from which some end-level function is reachable (an API in ``elf`` counts)."""
    elf = list(elf)
    roots: set[str] = set()
    for e in elf:
        roots |= backward_call_closure(g, e) & g.api_set
    if elf and not roots:
        warnings.warn("no API reaches any end-level function", EmptyResultWarning, stacklevel=2)
    return tuple(sorted(roots))


def abstract_kernel(g: CodeGraph, roots: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(forward_closure_of(g, roots)))


def elf_frontier(g: CodeGraph, start: str, elf: Iterable[str]) -> frozenset[str]:
    """End-level functions reached from ``start`` before any other end-level function.

    Calls made inside an end-level function belong to that function's own
    behaviour, so the search does not continue through them.
    """
    elf = frozenset(elf)
    if start not in g.functions:
        return frozenset()
    if start in elf:
        return frozenset([start])
    found: set[str] = set()
    seen = {start}
    queue = deque([start])
    while queue:
        f = queue.popleft()
        for callee in g.callees(f):
            if callee in elf:
                found.add(callee)
            elif callee not in seen:
                seen.add(callee)
                queue.append(callee)
    return frozenset(found)


def _precondition_map(ext) -> Mapping[str, frozenset[str]]:
    if hasattr(ext, "precondition_apis"):
        return ext.precondition_apis
    return {k: frozenset(v) for k, v in ext.items()}


def derive_internal_constraints(g: CodeGraph, ext, elf: Iterable[str]) -> list[CountConstraint]:
    """Turn API preconditions into count constraints between end-level functions.

    ``ext`` is an external constraint table (or a plain mapping from API to
    the APIs that must precede it).  For an end-level function ``e`` let
    callers(e) be the APIs whose frontier (:func:`elf_frontier`) contains
    ``e``.  When every caller has at least one precondition API,
    ``e`` must follow each ``e2 != e`` that lies on the frontier of some
    precondition API of *every* caller.  Nothing is emitted for ``e`` if
    callers(e) is empty, a caller has no preconditions, or no such ``e2``
    exists.
    """
    elf = tuple(sorted(set(elf)))
    if not elf:
        return []
    pre = _precondition_map(ext)
    frontier = {a: elf_frontier(g, a, elf) for a in sorted(g.api_set | set(pre))}
    out: list[CountConstraint] = []
    for e in elf:
        callers = [c for c in sorted(g.api_set) if e in frontier[c]]
        if not callers or any(not pre.get(c) for c in callers):
            continue
        common: set[str] | None = None
        for c in callers:
            reach = set().union(*(frontier.get(a, frozenset()) for a in pre[c]))
            common = reach if common is None else common & reach
        preds = sorted((common or set()) - {e})
        if preds:
            out.append(CountConstraint(e, tuple(preds)))
    return out


def slice(
    p: Property | str,
    g: CodeGraph,
    mode: SliceMode | str = SliceMode.MODIFY_OR_USE,
    ext=None,
    through_functions: bool = False,
) -> SliceResult:
    """Run the whole extraction for one property."""
    if isinstance(p, str):
        p = Property.parse(p)
    if ext is None:
        from .osek.constraints import DEFAULT_TABLE

        ext = DEFAULT_TABLE
    mode = SliceMode(mode)
    known, unknown = _split_identifiers(p, g)
    for name in unknown:
        warnings.warn(f"property identifier {name!r} is not a variable of the code graph", UnknownIdentifierWarning, stacklevel=2)
    vtv = tuple(sorted(known))
    evtv = tuple(sorted(variable_dependency_closure(g, vtv, through_functions=through_functions)))
    elf = end_level_functions(g, evtv, mode)
    rlf = root_level_functions(g, elf)
    abstract = abstract_kernel(g, set(rlf) | set(elf))
    constraints = tuple(derive_internal_constraints(g, ext, elf))
    return SliceResult(
        property=replace(p, variables=vtv),
        vtv=vtv,
        evtv=evtv,
        elf=elf,
        rlf=rlf,
        abstract_fns=abstract,
        internal_constraints=constraints,
        mode=mode,
        locations={f: g.functions[f] for f in abstract},
        unknown_identifiers=tuple(unknown),
    )
