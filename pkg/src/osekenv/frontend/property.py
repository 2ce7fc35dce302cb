from __future__ import annotations

from dataclasses import dataclass, field

from .minic import expression_identifiers, parse_expression


@dataclass(frozen=True)
class Property:
    """An assertion expression over kernel state.

    ``variables`` is empty until the slicer resolves the expression
    against a code graph.
    """

    raw_text: str
    variables: tuple[str, ...] = field(default=())

    @classmethod
    def parse(cls, text: str) -> "Property":
        text = " ".join(text.split())
        if text.startswith("assert(") and text.endswith(")"):
            text = text[len("assert("):-1].strip()
        parse_expression(text, "<property>")
        return cls(text)

    def identifiers(self) -> list[str]:
        return expression_identifiers(parse_expression(self.raw_text, "<property>"))
