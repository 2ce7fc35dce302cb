"""Fact records and the line-oriented facts file.

Each line of a facts file is ``KIND<TAB>subject<TAB>object<TAB>file:line``.
Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import MalformedFactError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class FactKind(enum.Enum):
    FunctionDef = "FUNC"
    VariableDef = "VAR"
    Call = "CALL"
    Sets = "SETS"
    Uses = "USES"
    DependsOn = "DEP"
    Assertion = "ASSERT"
    ApiMarker = "API"

    @property
    def tag(self) -> str:
        return self.value


# kinds whose object column is empty
_NO_OBJECT = {FactKind.FunctionDef, FactKind.VariableDef, FactKind.ApiMarker}


@dataclass(frozen=True)
class FactRecord:
    kind: FactKind
    subject: str
    object: str
    file: str
    line: int

    @property
    def location(self) -> str:
        return f"{self.file}:{self.line}"

    def to_line(self) -> str:
        return f"{self.kind.tag}\t{self.subject}\t{self.object}\t{self.location}"


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


def parse_fact_line(line: str, lineno: int) -> FactRecord:
    parts = line.split("\t")
    if len(parts) != 4:
        raise MalformedFactError(f"expected 4 tab-separated fields, got {len(parts)}", lineno)
    tag, subject, obj, loc = parts
    try:
        kind = FactKind(tag)
    except ValueError:
        raise MalformedFactError(f"unknown kind tag {tag!r}", lineno) from None
    if not is_identifier(subject):
        raise MalformedFactError(f"subject {subject!r} is not an identifier", lineno)
    if kind in _NO_OBJECT:
        if obj:
            raise MalformedFactError(f"{tag} records take no object", lineno)
    elif kind is FactKind.Assertion:
        if not obj.strip():
            raise MalformedFactError("ASSERT record with empty expression", lineno)
    elif not is_identifier(obj):
        raise MalformedFactError(f"object {obj!r} is not an identifier", lineno)
    file, sep, line_text = loc.rpartition(":")
    if not sep or not file or not line_text.isdigit():
        raise MalformedFactError(f"bad location {loc!r}", lineno)
    return FactRecord(kind, subject, obj, file, int(line_text))


def loads_facts(text: str) -> list[FactRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        records.append(parse_fact_line(line, lineno))
    return records


def load_facts(path: str | Path) -> list[FactRecord]:
    """Read a facts file. I/O errors propagate unchanged."""
    return loads_facts(Path(path).read_text(encoding="utf-8"))


def dumps_facts(records: Iterable[FactRecord]) -> str:
    return "".join(r.to_line() + "\n" for r in records)


def dump_facts(records: Iterable[FactRecord], path: str | Path) -> None:
    Path(path).write_text(dumps_facts(records), encoding="utf-8", newline="\n")
