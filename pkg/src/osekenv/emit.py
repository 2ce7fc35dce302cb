"""Text emitters for the verification side of the pipeline.

All emitters are pure functions of their inputs and produce UTF-8 text
with LF line endings and a trailing newline.
"""

from __future__ import annotations

import re
from typing import Mapping

from .errors import EmptySlice
from .osek.state import ApiCall
from .scenario import Scenario
from .slicer import SliceResult

NONDET = "__VERIFIER_nondet_int"
ASSUME = "__VERIFIER_assume"


def _counter(fn: str) -> str:
    return f"cnt_{fn}"


def emit_nondet_harness(sr: SliceResult, unwind: int, arities: Mapping[str, int] | None = None) -> str:
    """Bounded environment for a model checker.

    Each of ``unwind`` iterations picks one end-level function through an
    unconstrained nondeterministic integer; a function with count
    constraints is only callable when its counter is below every
    predecessor counter.  The property is checked once after the loop.
    ``arities`` gives the parameter count of each function (default 0);
    every parameter receives a fresh nondeterministic value.
    """
    if not sr.elf:
        raise EmptySlice("slice has no end-level functions")
    if unwind < 0:
        raise ValueError("unwind must be >= 0")
    arities = arities or {}
    guards = {c.successor: c for c in sr.internal_constraints}
    counted = sorted({f for c in sr.internal_constraints for f in (c.successor, *c.predecessors)})

    out = [
        "/* nondeterministic end-level environment */",
        f"/* property: {sr.property.raw_text} */",
        f"/* end-level functions: {len(sr.elf)}; count constraints: {len(sr.internal_constraints)}; unwind: {unwind} */",
        "/* compile together with the sources listed in the abstraction manifest */",
        "",
        f"extern int {NONDET}(void);",
        f"extern void {ASSUME}(int cond);",
        "",
    ]
    for f in counted:
        out.append(f"static unsigned int {_counter(f)} = 0;")
    if counted:
        out.append("")
    out += ["int main(void)", "{"]
    if unwind > 0:
        out += [
            "    int i;",
            f"    for (i = 0; i < {unwind}; i++) {{",
            f"        int choice = {NONDET}();",
            f"        {ASSUME}(0 <= choice && choice < {len(sr.elf)});",
            "        switch (choice) {",
        ]
        for k, f in enumerate(sr.elf):
            out.append(f"        case {k}:")
            if f in guards:
                cond = " && ".join(f"{_counter(f)} < {_counter(p)}" for p in guards[f].predecessors)
                out.append(f"            {ASSUME}({cond});")
            args = ", ".join(f"{NONDET}()" for _ in range(arities.get(f, 0)))
            out.append(f"            {f}({args});")
            if f in counted:
                out.append(f"            {_counter(f)}++;")
            out.append("            break;")
        out += ["        }", "    }"]
    out += [f"    assert({sr.property.raw_text});", "    return 0;", "}"]
    return "\n".join(out) + "\n"


def emit_concrete_harness(scn: Scenario) -> str:
    """Straight-line C body replaying ``scn``, one call per line."""
    out = [
        f"/* concrete {scn.level.value} scenario, seed {scn.seed}, {len(scn.calls)} call(s) */",
        "void osekenv_scenario(void)",
        "{",
    ]
    for c in scn.calls:
        out.append(f"    {c.name}({', '.join(c.args)});")
    out.append("}")
    return "\n".join(out) + "\n"


_CALL_LINE = re.compile(r"^    ([A-Za-z_]\w*)\(([^()]*)\);$")


def parse_concrete_harness(text: str) -> list[ApiCall]:
    """Call list of a harness produced by :func:`emit_concrete_harness`."""
    calls = []
    for line in text.splitlines():
        m = _CALL_LINE.match(line)
        if m:
            args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
            calls.append(ApiCall(m.group(1), args))
    return calls


def emit_abstraction_manifest(sr: SliceResult) -> str:
    """``function<TAB>file:line`` for every abstract-kernel function, sorted."""
    return "".join(f"{f}\t{sr.locations.get(f, '?')}\n" for f in sorted(sr.abstract_fns))
