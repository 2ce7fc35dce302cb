"""Reference implementations used only by the tests.

Nothing here imports the package's graph code.  Reachability is computed
twice, by repeated squaring of a boolean matrix and by summing matrix
powers (walks of every length up to n), and the slicing sets are then
defined directly from those matrices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np


def _matrix(nodes: list[str], edges) -> np.ndarray:
    index = {n: i for i, n in enumerate(nodes)}
    m = np.zeros((len(nodes), len(nodes)), dtype=bool)
    for a, b in edges:
        m[index[a], index[b]] = True
    return m


def closure_by_squaring(nodes: list[str], edges) -> np.ndarray:
    """Reflexive-transitive closure R with R[i, j] iff j is reachable from i."""
    n = len(nodes)
    r = _matrix(nodes, edges) | np.eye(n, dtype=bool)
    while True:
        nxt = (r.astype(np.int64) @ r.astype(np.int64)) > 0
        if (nxt == r).all():
            return r
        r = nxt


def closure_by_walks(nodes: list[str], edges) -> np.ndarray:
    """Same relation, as OR over k = 0..n of A^k (a walk of exactly k steps)."""
    n = len(nodes)
    a = _matrix(nodes, edges).astype(np.int64)
    power = np.eye(n, dtype=np.int64)
    reach = power > 0
    for _ in range(n):
        power = ((power @ a) > 0).astype(np.int64)
        reach |= power > 0
    return reach


def reachable_from(nodes: list[str], reach: np.ndarray, seeds) -> set[str]:
    index = {n: i for i, n in enumerate(nodes)}
    out: set[str] = set()
    for s in seeds:
        out |= {nodes[j] for j in np.flatnonzero(reach[index[s]])}
    return out


def reaching(nodes: list[str], reach: np.ndarray, targets) -> set[str]:
    index = {n: i for i, n in enumerate(nodes)}
    out: set[str] = set()
    for t in targets:
        out |= {nodes[i] for i in np.flatnonzero(reach[:, index[t]])}
    return out


@dataclass
class RandomProgram:
    functions: list[str]
    variables: list[str]
    calls: set[tuple[str, str]]
    sets: set[tuple[str, str]]
    uses: set[tuple[str, str]]
    deps: set[tuple[str, str]]
    apis: set[str]

    def fact_lines(self) -> str:
        lines = [f"FUNC\t{f}\t\tgen.c:{i + 1}" for i, f in enumerate(self.functions)]
        lines += [f"VAR\t{v}\t\tgen.c:{100 + i}" for i, v in enumerate(self.variables)]
        lines += [f"API\t{a}\t\tgen.c:1" for a in sorted(self.apis)]
        for tag, edges in (("CALL", self.calls), ("SETS", self.sets), ("USES", self.uses), ("DEP", self.deps)):
            lines += [f"{tag}\t{a}\t{b}\tgen.c:200" for a, b in sorted(edges)]
        return "\n".join(lines) + "\n"


def random_program(seed: int, max_functions: int = 25, max_variables: int = 15) -> RandomProgram:
    rng = random.Random(seed)
    nf = rng.randint(1, max_functions)
    nv = rng.randint(1, max_variables)
    fs = [f"f{i}" for i in range(nf)]
    vs = [f"v{i}" for i in range(nv)]
    density = rng.uniform(0.02, 0.25)

    def edges(src, dst, p, allow_self=True):
        return {(a, b) for a in src for b in dst if (allow_self or a != b) and rng.random() < p}

    return RandomProgram(
        functions=fs,
        variables=vs,
        calls=edges(fs, fs, density),
        sets=edges(fs, vs, density),
        uses=edges(fs, vs, density),
        deps=edges(vs, vs, density, allow_self=False),
        apis={f for f in fs if rng.random() < 0.3},
    )


def oracle_slice(prog: RandomProgram, vtv, mode: str = "modify_or_use") -> dict[str, set[str]]:
    """Slicing sets straight from their definitions."""
    call_reach = closure_by_walks(prog.functions, prog.calls)
    dep_reach = closure_by_walks(prog.variables, prog.deps)
    evtv = reachable_from(prog.variables, dep_reach, vtv)
    elf = {f for f, v in prog.sets if v in evtv}
    if mode == "modify_or_use":
        elf |= {f for f, v in prog.uses if v in evtv}
    rlf = reaching(prog.functions, call_reach, elf) & prog.apis
    abstract = reachable_from(prog.functions, call_reach, rlf | elf)
    return {"evtv": evtv, "elf": elf, "rlf": rlf, "abstract_fns": abstract}


def prefix_counts_ok(calls: list[str], constraints: list[tuple[str, tuple[str, ...]]]) -> bool:
    """Independent recount: at each call of a successor, its count so far is
    strictly below the count so far of every predecessor."""
    counts: dict[str, int] = {}
    for name in calls:
        for succ, preds in constraints:
            if name == succ and not all(counts.get(name, 0) < counts.get(p, 0) for p in preds):
                return False
        counts[name] = counts.get(name, 0) + 1
    return True
