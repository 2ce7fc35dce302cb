"""Project configuration: a key=value file naming the inputs of one study.

Recognised keys::

    sources       whitespace-separated mini-C files (or one .facts file)
    oil           OIL configuration
    bindings      end-level binding table
    property      property expression to slice for
    mode          modify_only | modify_or_use
    counter_bits  activation-counter width, overrides the OIL value
    through_functions  true | false

Relative paths resolve against the directory of the config file.  With no
config at all the bundled Trampoline-style fixture is used.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

from .codegraph import CodeGraph, build_graph
from .errors import ValidationError
from .frontend.facts import FactRecord, load_facts
from .frontend.minic import parse_minic_files
from .frontend.oil import OilConfig, load_oil
from .slicer import SliceMode

_SECTION = "project"
_KEYS = {"sources", "oil", "bindings", "property", "mode", "counter_bits", "through_functions"}

PROPERTY_1 = "tpl_fifo_rw[tpl_h_prio].size > 0"


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("osekenv") / "fixtures" / name))


@dataclass
class Project:
    sources: tuple[Path, ...]
    oil: Path
    bindings: Path | None = None
    property: str = PROPERTY_1
    mode: SliceMode = SliceMode.MODIFY_OR_USE
    counter_bits: int | None = None
    through_functions: bool = False

    def facts(self) -> list[FactRecord]:
        if len(self.sources) == 1 and self.sources[0].suffix == ".facts":
            return load_facts(self.sources[0])
        return parse_minic_files(self.sources)

    @cached_property
    def graph(self) -> CodeGraph:
        return build_graph(self.facts())

    @cached_property
    def cfg(self) -> OilConfig:
        return load_oil(self.oil)

    def effective_counter_bits(self) -> int:
        return self.cfg.counter_bits if self.counter_bits is None else self.counter_bits

    def load_bindings(self):
        from .scenario import load_bindings

        if self.bindings is None:
            raise ValidationError("project has no binding table")
        return load_bindings(self.bindings)


def default_project() -> Project:
    return Project(
        sources=(fixture_path("trampoline_lite.c"),),
        oil=fixture_path("fixture.oil"),
        bindings=fixture_path("end_bindings.tsv"),
    )


def parse_project(text: str, base: Path = Path(".")) -> Project:
    """Parse key=value text.  Unknown keys are an error."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as e:
        raise ValidationError(f"bad project config: {e}") from None
    raw = dict(cp[_SECTION])
    unknown = set(raw) - _KEYS
    if unknown:
        raise ValidationError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    proj = default_project()

    def path(v: str) -> Path:
        p = Path(v)
        return p if p.is_absolute() else base / p

    if "sources" in raw:
        proj.sources = tuple(path(v) for v in raw["sources"].split())
        if not proj.sources:
            raise ValidationError("sources must name at least one file")
    if "oil" in raw:
        proj.oil = path(raw["oil"])
    if "bindings" in raw:
        proj.bindings = path(raw["bindings"]) if raw["bindings"] else None
    if "property" in raw:
        proj.property = raw["property"]
    if "mode" in raw:
        try:
            proj.mode = SliceMode(raw["mode"])
        except ValueError:
            raise ValidationError(f"mode must be modify_only or modify_or_use, not {raw['mode']!r}") from None
    if "counter_bits" in raw:
        try:
            proj.counter_bits = int(raw["counter_bits"])
        except ValueError:
            raise ValidationError(f"counter_bits must be an integer, not {raw['counter_bits']!r}") from None
        if not 1 <= proj.counter_bits <= 64:
            raise ValidationError("counter_bits must be between 1 and 64")
    if "through_functions" in raw:
        proj.through_functions = cp.getboolean(_SECTION, "through_functions")
    return proj


def load_project(path: str | Path) -> Project:
    path = Path(path)
    return parse_project(path.read_text(encoding="utf-8"), path.parent)
