"""Parser for the OIL subset used to describe a system instance.

Only TASK, RESOURCE, EVENT, OS and APPMODE objects are understood,
optionally wrapped in a single ``CPU name { ... };`` block.  See
``docs/grammars.md`` for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import SourceSyntaxError, ValidationError

DEFAULT_COUNTER_BITS = 8

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>/\*.*?\*/|//[^\n]*)
  | (?P<num>0[xX][0-9a-fA-F]+|[0-9]+)
  | (?P<str>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[{}=;])
    """,
    re.VERBOSE | re.DOTALL,
)

_OBJECT_KINDS = {"OS", "TASK", "RESOURCE", "EVENT", "APPMODE"}
# attributes accepted and ignored because they do not affect the model
_IGNORED_ATTRS = {
    "TASK": {"STACKSIZE", "TYPE", "KIND"},
    "OS": {"STATUS", "STARTUPHOOK", "SHUTDOWNHOOK", "ERRORHOOK", "PRETASKHOOK", "POSTTASKHOOK", "USEGETSERVICEID", "USEPARAMETERACCESS", "USERESSCHEDULER"},
    "RESOURCE": {"RESOURCEPROPERTY"},
    "EVENT": {"MASK"},
    "APPMODE": set(),
}


@dataclass(frozen=True)
class TaskConfig:
    name: str
    priority: int
    autostart: bool = False
    max_activations: int = 1
    extended: bool = False
    events: tuple[str, ...] = ()
    resources: tuple[str, ...] = ()


@dataclass(frozen=True)
class OilConfig:
    tasks: tuple[TaskConfig, ...] = ()
    resources: tuple[str, ...] = ()
    events: tuple[str, ...] = ()
    counter_bits: int = DEFAULT_COUNTER_BITS

    def task(self, name: str) -> TaskConfig:
        for t in self.tasks:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def task_names(self) -> list[str]:
        return [t.name for t in self.tasks]

    def validate(self) -> "OilConfig":
        seen: set[str] = set()
        for t in self.tasks:
            if t.name in seen:
                raise ValidationError(f"duplicate task {t.name!r}")
            seen.add(t.name)
            if t.priority < 0:
                raise ValidationError(f"task {t.name!r}: negative priority")
            if t.max_activations < 1:
                raise ValidationError(f"task {t.name!r}: ACTIVATION must be >= 1")
            for e in t.events:
                if e not in self.events:
                    raise ValidationError(f"task {t.name!r} references undeclared event {e!r}")
            for r in t.resources:
                if r not in self.resources:
                    raise ValidationError(f"task {t.name!r} references undeclared resource {r!r}")
        for kind, names in (("resource", self.resources), ("event", self.events)):
            if len(set(names)) != len(names):
                dup = sorted({n for n in names if names.count(n) > 1})
                raise ValidationError(f"duplicate {kind} {dup[0]!r}")
        if self.counter_bits < 1:
            raise ValidationError("COUNTER_BITS must be positive")
        return self


@dataclass
class _Attr:
    name: str
    value: str
    line: int
    children: list["_Attr"] = field(default_factory=list)


def _tokenize(source: str, filename: str) -> list[tuple[str, str, int]]:
    out = []
    pos, line = 0, 1
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise SourceSyntaxError(f"unexpected character {source[pos]!r}", filename, line)
        kind, text = m.lastgroup, m.group()
        if kind in ("num", "str", "ident", "op"):
            out.append((kind, text, line))
        line += text.count("\n")
        pos = m.end()
    out.append(("eof", "", line))
    return out


class _OilParser:
    def __init__(self, source: str, filename: str):
        self.filename = filename
        self.toks = _tokenize(source, filename)
        self.pos = 0

    @property
    def tok(self):
        return self.toks[self.pos]

    def error(self, msg: str) -> SourceSyntaxError:
        return SourceSyntaxError(msg, self.filename, self.tok[2])

    def accept(self, text: str) -> bool:
        if self.tok[1] == text and self.tok[0] in ("op", "ident"):
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            raise self.error(f"expected {text!r}, found {self.tok[1] or 'end of input'!r}")

    def ident(self) -> tuple[str, int]:
        kind, text, line = self.tok
        if kind != "ident":
            raise self.error(f"expected identifier, found {text or 'end of input'!r}")
        self.pos += 1
        return text, line

    def parse(self) -> list[tuple[str, str, int, list[_Attr]]]:
        objects = []
        while self.tok[0] != "eof":
            if self.accept("OIL_VERSION"):
                self.expect("=")
                if self.tok[0] != "str":
                    raise self.error("OIL_VERSION expects a string")
                self.pos += 1
                self.expect(";")
            elif self.accept("IMPLEMENTATION"):
                raise self.error("IMPLEMENTATION sections are outside the subset")
            elif self.accept("CPU"):
                self.ident()
                self.expect("{")
                while not self.accept("}"):
                    objects.append(self.parse_object())
                self.expect(";")
            else:
                objects.append(self.parse_object())
        return objects

    def parse_object(self):
        kind, line = self.ident()
        if kind not in _OBJECT_KINDS:
            self.pos -= 1
            raise self.error(f"unsupported object kind {kind!r}")
        name, _ = self.ident()
        attrs: list[_Attr] = []
        if self.accept("{"):
            while not self.accept("}"):
                attrs.append(self.parse_attr())
        self.expect(";")
        return kind, name, line, attrs

    def parse_attr(self) -> _Attr:
        name, line = self.ident()
        self.expect("=")
        kind, value, _ = self.tok
        if kind not in ("num", "ident", "str"):
            raise self.error(f"bad value for {name}")
        self.pos += 1
        attr = _Attr(name, value, line)
        if self.accept("{"):
            while not self.accept("}"):
                attr.children.append(self.parse_attr())
        self.expect(";")
        return attr


def _int(attr: _Attr, filename: str) -> int:
    try:
        return int(attr.value, 0)
    except ValueError:
        raise SourceSyntaxError(f"{attr.name} expects an integer, got {attr.value!r}", filename, attr.line) from None


def _bool(attr: _Attr, filename: str) -> bool:
    if attr.value not in ("TRUE", "FALSE"):
        raise SourceSyntaxError(f"{attr.name} expects TRUE or FALSE", filename, attr.line)
    return attr.value == "TRUE"


def parse_oil(source: str, filename: str = "<oil>") -> OilConfig:
    """Parse OIL-subset text into a validated :class:`OilConfig`."""
    objects = _OilParser(source, filename).parse()
    tasks: list[TaskConfig] = []
    resources: list[str] = []
    events: list[str] = []
    counter_bits = DEFAULT_COUNTER_BITS
    for kind, name, line, attrs in objects:
        if kind == "TASK":
            fields: dict = {"events": [], "resources": []}
            for a in attrs:
                if a.name == "PRIORITY":
                    fields["priority"] = _int(a, filename)
                elif a.name == "AUTOSTART":
                    fields["autostart"] = _bool(a, filename)
                elif a.name == "ACTIVATION":
                    fields["max_activations"] = _int(a, filename)
                elif a.name == "EVENT":
                    fields["events"].append(a.value)
                elif a.name == "RESOURCE":
                    fields["resources"].append(a.value)
                elif a.name == "SCHEDULE":
                    if a.value != "FULL":
                        raise ValidationError(f"task {name!r}: only SCHEDULE = FULL is supported")
                elif a.name not in _IGNORED_ATTRS["TASK"]:
                    raise ValidationError(f"task {name!r}: unknown attribute {a.name}")
            if "priority" not in fields:
                raise ValidationError(f"task {name!r} has no PRIORITY")
            evs = tuple(fields.pop("events"))
            tasks.append(
                TaskConfig(name=name, events=evs, resources=tuple(fields.pop("resources")), extended=bool(evs), **fields)
            )
        elif kind == "OS":
            for a in attrs:
                if a.name == "COUNTER_BITS":
                    counter_bits = _int(a, filename)
                elif a.name not in _IGNORED_ATTRS["OS"]:
                    raise ValidationError(f"OS {name!r}: unknown attribute {a.name}")
        elif kind in ("RESOURCE", "EVENT"):
            for a in attrs:
                if a.name not in _IGNORED_ATTRS[kind]:
                    raise ValidationError(f"{kind} {name!r}: unknown attribute {a.name}")
            (resources if kind == "RESOURCE" else events).append(name)
    return OilConfig(tuple(tasks), tuple(resources), tuple(events), counter_bits).validate()


def load_oil(path: str | Path) -> OilConfig:
    path = Path(path)
    return parse_oil(path.read_text(encoding="utf-8"), path.name)
