"""Fact extraction for a small, pointer-alias-free subset of C.

The accepted language (full EBNF in ``docs/grammars.md``) covers global
variable declarations, ``struct``/``enum``/``typedef`` declarations,
function prototypes and definitions, local declarations, assignments,
calls, ``if``/``else``, ``while``, ``return``, ``break``/``continue`` and
``assert(...)``.  Anything else raises :class:`SourceSyntaxError`.

Extraction is name based.  Locals and parameters never become entities;
a local that carries a global value through an assignment is resolved
(flow-insensitively, within its function) to the globals it was computed
from, so ``t = g; h = t;`` still yields ``DEP h g``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from ..errors import SourceSyntaxError
from .facts import FactKind, FactRecord

API_ANNOTATION = "/*@api*/"

# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<annot>/\*@api\*/)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<lcomment>//[^\n]*)
  | (?P<pp>\#[^\n]*)
  | (?P<num>0[xX][0-9a-fA-F]+[uUlL]*|[0-9]+[uUlL]*)
  | (?P<char>'(?:\\.|[^\\'\n])')
  | (?P<str>"(?:\\.|[^\\"\n])*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|\+\+|--|<<=|>>=|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^]=|[-+*/%&|^!~<>=?:;,.(){}\[\]])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, num, char, str, op, annot, eof
    text: str
    line: int
    start: int
    end: int


def tokenize(source: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos, line = 0, 1
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise SourceSyntaxError(f"unexpected character {source[pos]!r}", filename, line)
        kind = m.lastgroup
        text = m.group()
        if kind == "pp":
            raise SourceSyntaxError("preprocessor directives are outside the subset", filename, line)
        if kind in ("ident", "num", "char", "str", "op", "annot"):
            tokens.append(Token(kind, text, line, m.start(), m.end()))
        line += text.count("\n")
        pos = m.end()
    tokens.append(Token("eof", "", line, pos, pos))
    return tokens


# ---------------------------------------------------------------------------
# AST


@dataclass
class Name:
    id: str
    line: int


@dataclass
class Num:
    line: int


@dataclass
class Unary:
    op: str
    operand: object
    line: int


@dataclass
class Binary:
    op: str
    left: object
    right: object
    line: int


@dataclass
class Cond:
    test: object
    body: object
    orelse: object
    line: int


@dataclass
class Assign:
    op: str  # "=", "+=", ... ; "++"/"--" for increments
    target: object
    value: object | None
    line: int


@dataclass
class Call:
    func: str
    args: list
    line: int
    text: str = ""  # raw argument text, kept for assert()


@dataclass
class Index:
    base: object
    index: object
    line: int


@dataclass
class Member:
    base: object
    field: str
    line: int


@dataclass
class Block:
    body: list
    line: int


@dataclass
class ExprStmt:
    expr: object
    line: int


@dataclass
class Decl:
    names: list[str]
    inits: list  # expressions (or None) aligned with names
    line: int


@dataclass
class If:
    test: object
    body: list
    orelse: list
    line: int


@dataclass
class While:
    test: object
    body: list
    line: int


@dataclass
class Return:
    value: object | None
    line: int


@dataclass
class Jump:
    line: int


@dataclass
class FunctionDef:
    name: str
    params: list[str]
    body: list
    line: int
    end_line: int
    is_api: bool


@dataclass
class TranslationUnit:
    filename: str
    functions: list[FunctionDef] = field(default_factory=list)
    globals: list[tuple[str, int]] = field(default_factory=list)
    enum_constants: set[str] = field(default_factory=set)


# ---------------------------------------------------------------------------
# parser

_BASE_TYPES = {
    "void", "char", "short", "int", "long", "float", "double", "_Bool", "bool",
    "uint8", "uint16", "uint32", "sint8", "sint16", "sint32",
    "int8_t", "int16_t", "int32_t", "uint8_t", "uint16_t", "uint32_t",
}
_QUALIFIERS = {"const", "volatile", "static", "extern", "unsigned", "signed", "inline", "register"}
_REJECTED = {"for", "do", "switch", "case", "default", "goto", "sizeof", "union"}

_BINARY_PREC = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]
_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}


class _Parser:
    def __init__(self, source: str, filename: str, typedefs: set[str] | None = None):
        self.source = source
        self.filename = filename
        self.tokens = tokenize(source, filename)
        self.pos = 0
        self.typedefs: set[str] = set() if typedefs is None else typedefs
        self.enum_constants: set[str] = set()

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> SourceSyntaxError:
        tok = tok or self.tok
        return SourceSyntaxError(msg, self.filename, tok.line)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        if self.tok.text in _REJECTED:
            raise self.error(f"'{self.tok.text}' is outside the subset")
        return self.advance()

    # -- types
    def starts_type(self, tok: Token | None = None) -> bool:
        tok = tok or self.tok
        if tok.kind != "ident":
            return False
        return (
            tok.text in _BASE_TYPES
            or tok.text in _QUALIFIERS
            or tok.text in ("struct", "enum", "typedef")
            or tok.text in self.typedefs
        )

    def parse_type(self) -> None:
        seen_base = False
        while True:
            t = self.tok
            if t.kind != "ident":
                break
            if t.text in _QUALIFIERS:
                self.advance()
                continue
            if seen_base:
                if t.text in ("int", "long", "char", "short", "double"):
                    self.advance()  # long int, long long, ...
                    continue
                break
            if t.text in _BASE_TYPES or t.text in self.typedefs:
                self.advance()
                seen_base = True
            elif t.text == "struct":
                self.advance()
                if self.tok.kind == "ident":
                    self.advance()
                if self.at("{"):
                    self.parse_struct_body()
                seen_base = True
            elif t.text == "enum":
                self.advance()
                if self.tok.kind == "ident":
                    self.advance()
                if self.at("{"):
                    self.parse_enum_body()
                seen_base = True
            else:
                break
        if not seen_base:
            # "unsigned x;" is an int
            prev = self.tokens[self.pos - 1] if self.pos else None
            if prev is None or prev.text not in ("unsigned", "signed"):
                raise self.error(f"expected a type, found {self.tok.text or 'end of input'!r}")

    def parse_struct_body(self) -> None:
        self.expect("{")
        while not self.accept("}"):
            self.parse_type()
            while True:
                self.parse_declarator()
                if not self.accept(","):
                    break
            self.expect(";")

    def parse_enum_body(self) -> None:
        self.expect("{")
        while not self.at("}"):
            name = self.expect_ident()
            self.enum_constants.add(name.text)
            if self.accept("="):
                self.parse_conditional()
            if not self.accept(","):
                break
        self.expect("}")

    def parse_declarator(self) -> Token:
        while self.accept("*"):
            while self.tok.text in ("const", "volatile"):
                self.advance()
        name = self.expect_ident()
        while self.accept("["):
            if not self.at("]"):
                self.parse_conditional()
            self.expect("]")
        return name

    def skip_initializer_list(self) -> list:
        """Parse a brace initializer and return its scalar expressions."""
        self.expect("{")
        exprs: list = []
        while not self.at("}"):
            if self.at("{"):
                exprs.extend(self.skip_initializer_list())
            else:
                if self.accept("."):
                    self.expect_ident()
                    self.expect("=")
                exprs.append(self.parse_assignment())
            if not self.accept(","):
                break
        self.expect("}")
        return exprs

    # -- top level
    def parse_unit(self) -> TranslationUnit:
        unit = TranslationUnit(self.filename)
        while self.tok.kind != "eof":
            is_api = False
            while self.tok.kind == "annot":
                self.advance()
                is_api = True
            if self.tok.kind == "eof":
                break
            if self.accept(";"):
                continue
            self.parse_external(unit, is_api)
        unit.enum_constants = set(self.enum_constants)
        return unit

    def parse_external(self, unit: TranslationUnit, is_api: bool) -> None:
        start = self.tok
        if start.kind == "ident" and start.text in _REJECTED:
            raise self.error(f"'{start.text}' is outside the subset")
        if self.accept("typedef"):
            self.parse_type()
            name = self.parse_declarator()
            self.typedefs.add(name.text)
            self.expect(";")
            return
        if not self.starts_type():
            raise self.error(f"expected a declaration, found {start.text or 'end of input'!r}")
        self.parse_type()
        if self.accept(";"):  # bare struct/enum definition
            if is_api:
                raise self.error("/*@api*/ must precede a function definition", start)
            return
        name = self.parse_declarator()
        if self.at("("):
            params = self.parse_params()
            if self.accept(";"):
                return  # prototype
            body = self.parse_block()
            end_line = self.tokens[self.pos - 1].line
            unit.functions.append(FunctionDef(name.text, params, body, name.line, end_line, is_api))
            return
        if is_api:
            raise self.error("/*@api*/ must precede a function definition", start)
        names = [(name.text, name.line)]
        while True:
            if self.accept("="):
                if self.at("{"):
                    self.skip_initializer_list()
                else:
                    self.parse_assignment()
            if not self.accept(","):
                break
            nxt = self.parse_declarator()
            names.append((nxt.text, nxt.line))
        self.expect(";")
        unit.globals.extend(names)

    def parse_params(self) -> list[str]:
        self.expect("(")
        params: list[str] = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        while not self.at(")"):
            self.parse_type()
            params.append(self.parse_declarator().text)
            if not self.accept(","):
                break
        self.expect(")")
        return params

    # -- statements
    def parse_block(self) -> list:
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.parse_statement())
        return stmts

    def parse_body(self) -> list:
        if self.at("{"):
            return self.parse_block()
        return [self.parse_statement()]

    def parse_statement(self):
        t = self.tok
        if t.kind == "annot":
            raise self.error("/*@api*/ must precede a top-level function definition")
        if t.kind == "ident" and t.text in _REJECTED:
            raise self.error(f"'{t.text}' is outside the subset")
        if self.at("{"):
            return Block(self.parse_block(), t.line)
        if self.accept(";"):
            return Jump(t.line)
        if self.accept("if"):
            self.expect("(")
            test = self.parse_expression()
            self.expect(")")
            body = self.parse_body()
            orelse = self.parse_body() if self.accept("else") else []
            return If(test, body, orelse, t.line)
        if self.accept("while"):
            self.expect("(")
            test = self.parse_expression()
            self.expect(")")
            return While(test, self.parse_body(), t.line)
        if self.accept("return"):
            value = None if self.at(";") else self.parse_expression()
            self.expect(";")
            return Return(value, t.line)
        if self.at("break") or self.at("continue"):
            self.advance()
            self.expect(";")
            return Jump(t.line)
        if self.starts_type() and not (t.text in self.typedefs and self.peek().text in ("=", "(", "[", ".", "->")):
            if t.text in ("typedef", "extern"):
                raise self.error(f"'{t.text}' declarations must be at file scope")
            self.parse_type()
            names, inits = [], []
            while True:
                names.append(self.parse_declarator().text)
                init = None
                if self.accept("="):
                    if self.at("{"):
                        elems = self.skip_initializer_list()
                        init = _fold(elems, t.line)
                    else:
                        init = self.parse_assignment()
                inits.append(init)
                if not self.accept(","):
                    break
            self.expect(";")
            return Decl(names, inits, t.line)
        expr = self.parse_expression()
        self.expect(";")
        return ExprStmt(expr, t.line)

    # -- expressions
    def parse_expression(self):
        expr = self.parse_assignment()
        while self.at(","):
            line = self.advance().line
            expr = Binary(",", expr, self.parse_assignment(), line)
        return expr

    def parse_assignment(self):
        left = self.parse_conditional()
        if self.tok.kind == "op" and self.tok.text in _ASSIGN_OPS:
            op = self.advance()
            if not _is_lvalue(left):
                raise self.error("assignment to a non-lvalue", op)
            return Assign(op.text, left, self.parse_assignment(), op.line)
        return left

    def parse_conditional(self):
        test = self.parse_binary(0)
        if self.at("?"):
            line = self.advance().line
            body = self.parse_expression()
            self.expect(":")
            return Cond(test, body, self.parse_conditional(), line)
        return test

    def parse_binary(self, level: int):
        if level == len(_BINARY_PREC):
            return self.parse_unary()
        left = self.parse_binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_PREC[level]:
            op = self.advance()
            left = Binary(op.text, left, self.parse_binary(level + 1), op.line)
        return left

    def parse_unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("++", "--"):
            self.advance()
            target = self.parse_unary()
            if not _is_lvalue(target):
                raise self.error(f"'{t.text}' needs an lvalue", t)
            return Assign(t.text, target, None, t.line)
        if t.kind == "op" and t.text in ("!", "~", "-", "+", "*", "&"):
            self.advance()
            return Unary(t.text, self.parse_unary(), t.line)
        if self.at("(") and self.starts_type(self.peek()) and self.peek().text != "typedef":
            self.advance()
            self.parse_type()
            while self.accept("*"):
                pass
            self.expect(")")
            return self.parse_unary()  # cast
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            t = self.tok
            if self.accept("("):
                if not isinstance(expr, Name):
                    raise self.error("calls through function pointers are outside the subset", t)
                args = []
                start = self.tok.start
                while not self.at(")"):
                    args.append(self.parse_assignment())
                    if not self.accept(","):
                        break
                end = self.tok.start
                self.expect(")")
                expr = Call(expr.id, args, expr.line, " ".join(self.source[start:end].split()))
            elif self.accept("["):
                idx = self.parse_expression()
                self.expect("]")
                expr = Index(expr, idx, t.line)
            elif self.at(".") or self.at("->"):
                self.advance()
                expr = Member(expr, self.expect_ident().text, t.line)
            elif self.at("++") or self.at("--"):
                self.advance()
                if not _is_lvalue(expr):
                    raise self.error(f"'{t.text}' needs an lvalue", t)
                expr = Assign(t.text, expr, None, t.line)
            else:
                return expr

    def parse_primary(self):
        t = self.tok
        if t.kind in ("num", "char"):
            self.advance()
            return Num(t.line)
        if t.kind == "str":
            self.advance()
            while self.tok.kind == "str":
                self.advance()
            return Num(t.line)
        if t.kind == "ident":
            if t.text in _REJECTED:
                raise self.error(f"'{t.text}' is outside the subset")
            if t.text in _BASE_TYPES or t.text in ("struct", "enum", "typedef"):
                raise self.error(f"unexpected type name {t.text!r} in expression")
            self.advance()
            return Name(t.text, t.line)
        if self.accept("("):
            expr = self.parse_expression()
            self.expect(")")
            return expr
        raise self.error(f"unexpected {t.text or 'end of input'!r} in expression")


def _fold(exprs: list, line: int):
    """Combine initializer elements into one expression for dependency purposes."""
    out = None
    for e in exprs:
        out = e if out is None else Binary(",", out, e, line)
    return out if out is not None else Num(line)


def _is_lvalue(e) -> bool:
    if isinstance(e, Name):
        return True
    if isinstance(e, (Index, Member)):
        return _is_lvalue(e.base) or isinstance(e.base, Unary)
    if isinstance(e, Unary) and e.op == "*":
        return True
    return False


def parse_expression(text: str, filename: str = "<expr>"):
    """Parse one C-subset expression and return its AST."""
    parser = _Parser(text, filename)
    expr = parser.parse_expression()
    if parser.tok.kind != "eof":
        raise parser.error(f"trailing input {parser.tok.text!r}")
    return expr


def expression_identifiers(expr) -> list[str]:
    """Identifiers read by an expression, in first-occurrence order.

    Member names (``s.f``, ``p->f``) are not identifiers; callee names of
    calls are excluded.
    """
    seen: dict[str, None] = {}
    for name in _reads(expr):
        seen.setdefault(name.id, None)
    return list(seen)


def _reads(e) -> Iterator[Name]:
    """Every Name read while evaluating ``e`` in source order."""
    if e is None or isinstance(e, Num):
        return
    if isinstance(e, Name):
        yield e
    elif isinstance(e, Unary):
        yield from _reads(e.operand)
    elif isinstance(e, Binary):
        yield from _reads(e.left)
        yield from _reads(e.right)
    elif isinstance(e, Cond):
        yield from _reads(e.test)
        yield from _reads(e.body)
        yield from _reads(e.orelse)
    elif isinstance(e, Index):
        yield from _reads(e.base)
        yield from _reads(e.index)
    elif isinstance(e, Member):
        yield from _reads(e.base)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _reads(a)
    elif isinstance(e, Assign):
        if e.op != "=":
            yield from _reads(e.target)
        else:
            yield from _lvalue_index_reads(e.target)
        yield from _reads(e.value)


def _lvalue_base(e) -> Name | None:
    while True:
        if isinstance(e, Name):
            return e
        if isinstance(e, (Index, Member)):
            e = e.base
        elif isinstance(e, Unary) and e.op == "*":
            e = e.operand
        else:
            return None


def _lvalue_index_reads(e) -> Iterator[Name]:
    """Names read inside subscripts of an lvalue (``a[i].f = ...`` reads i)."""
    if isinstance(e, Index):
        yield from _lvalue_index_reads(e.base)
        yield from _reads(e.index)
    elif isinstance(e, Member):
        yield from _lvalue_index_reads(e.base)
    elif isinstance(e, Unary):
        yield from _lvalue_index_reads(e.operand)


def _calls(e) -> Iterator[Call]:
    if e is None or isinstance(e, (Num, Name)):
        return
    if isinstance(e, Call):
        yield e
        for a in e.args:
            yield from _calls(a)
    elif isinstance(e, Unary):
        yield from _calls(e.operand)
    elif isinstance(e, Binary):
        yield from _calls(e.left)
        yield from _calls(e.right)
    elif isinstance(e, Cond):
        for sub in (e.test, e.body, e.orelse):
            yield from _calls(sub)
    elif isinstance(e, Index):
        yield from _calls(e.base)
        yield from _calls(e.index)
    elif isinstance(e, Member):
        yield from _calls(e.base)
    elif isinstance(e, Assign):
        yield from _calls(e.target)
        yield from _calls(e.value)


def _assigns(e) -> Iterator[Assign]:
    if e is None or isinstance(e, (Num, Name)):
        return
    if isinstance(e, Assign):
        yield from _assigns(e.target)
        yield from _assigns(e.value)
        yield e
    elif isinstance(e, Unary):
        yield from _assigns(e.operand)
    elif isinstance(e, Binary):
        yield from _assigns(e.left)
        yield from _assigns(e.right)
    elif isinstance(e, Cond):
        for sub in (e.test, e.body, e.orelse):
            yield from _assigns(sub)
    elif isinstance(e, Index):
        yield from _assigns(e.base)
        yield from _assigns(e.index)
    elif isinstance(e, Member):
        yield from _assigns(e.base)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _assigns(a)


# ---------------------------------------------------------------------------
# extraction


def _walk_statements(stmts: list) -> Iterator[tuple[object, list]]:
    """Yield (statement, expressions evaluated by it) depth-first in source order."""
    for s in stmts:
        if isinstance(s, ExprStmt):
            yield s, [s.expr]
        elif isinstance(s, Decl):
            yield s, [i for i in s.inits if i is not None]
        elif isinstance(s, Return):
            yield s, [s.value] if s.value is not None else []
        elif isinstance(s, Block):
            yield from _walk_statements(s.body)
        elif isinstance(s, If):
            yield s, [s.test]
            yield from _walk_statements(s.body)
            yield from _walk_statements(s.orelse)
        elif isinstance(s, While):
            yield s, [s.test]
            yield from _walk_statements(s.body)


class _FunctionExtractor:
    def __init__(self, fn: FunctionDef, filename: str, functions: set[str], enums: set[str]):
        self.fn = fn
        self.filename = filename
        self.functions = functions
        self.enums = enums
        self.locals: set[str] = set(fn.params)
        for stmt, _ in _walk_statements(fn.body):
            if isinstance(stmt, Decl):
                self.locals.update(stmt.names)
        self.local_deps: dict[str, set[str]] = {name: set() for name in self.locals}

    def classify(self, name: Name) -> str:
        if name.id in self.locals:
            return "local"
        if name.id in self.enums:
            return "const"
        if name.id in self.functions:
            raise SourceSyntaxError(
                f"function {name.id!r} used as a value (function pointers are outside the subset)",
                self.filename,
                name.line,
            )
        return "global"

    def resolve(self, names: Iterable[Name]) -> list[str]:
        """Global variables the given names carry, locals resolved through local_deps."""
        out: dict[str, None] = {}
        for n in names:
            kind = self.classify(n)
            if kind == "global":
                out.setdefault(n.id, None)
            elif kind == "local":
                for g in sorted(self.local_deps[n.id]):
                    out.setdefault(g, None)
        return list(out)

    def collect_local_flows(self) -> None:
        edges: list[tuple[str, list[Name]]] = []
        for stmt, exprs in _walk_statements(self.fn.body):
            if isinstance(stmt, Decl):
                for name, init in zip(stmt.names, stmt.inits):
                    if init is not None:
                        edges.append((name, list(_reads(init))))
            for e in exprs:
                for a in _assigns(e):
                    base = _lvalue_base(a.target)
                    if base is not None and base.id in self.locals and a.value is not None:
                        edges.append((base.id, list(_reads(a.value))))
        changed = True
        while changed:
            changed = False
            for local, reads in edges:
                new = set(self.resolve(reads)) - self.local_deps[local]
                if new:
                    self.local_deps[local] |= new
                    changed = True

    def records(self) -> list[FactRecord]:
        self.collect_local_flows()
        fname, file = self.fn.name, self.filename
        out: list[FactRecord] = []
        for stmt, exprs in _walk_statements(self.fn.body):
            calls: list[FactRecord] = []
            asserts: list[FactRecord] = []
            deps: list[FactRecord] = []
            sets: list[FactRecord] = []
            uses: list[FactRecord] = []
            for e in exprs:
                for c in _calls(e):
                    if c.func in self.locals:
                        raise SourceSyntaxError(
                            f"call through local {c.func!r} (function pointers are outside the subset)", file, c.line
                        )
                    if c.func == "assert":
                        if len(c.args) != 1:
                            raise SourceSyntaxError("assert takes exactly one argument", file, c.line)
                        asserts.append(FactRecord(FactKind.Assertion, fname, c.text, file, c.line))
                    else:
                        calls.append(FactRecord(FactKind.Call, fname, c.func, file, c.line))
                for a in _assigns(e):
                    base = _lvalue_base(a.target)
                    if base is None or self.classify(base) != "global":
                        continue
                    if a.value is not None:
                        for src in self.resolve(_reads(a.value)):
                            if src != base.id:
                                deps.append(FactRecord(FactKind.DependsOn, base.id, src, file, a.line))
                    sets.append(FactRecord(FactKind.Sets, fname, base.id, file, base.line))
                for n in _reads(e):
                    if self.classify(n) == "global":
                        uses.append(FactRecord(FactKind.Uses, fname, n.id, file, n.line))
            for group in (calls, asserts, deps, sets, uses):
                seen: set = set()
                for r in group:
                    key = (r.kind, r.subject, r.object, r.line)
                    if key not in seen:
                        seen.add(key)
                        out.append(r)
        return out


def parse_units(units: Sequence[tuple[str, str]]) -> list[FactRecord]:
    """Extract facts from several ``(filename, source)`` translation units.

    Typedef names and enum constants are shared across units in order, the
    way a header included everywhere would share them.
    """
    typedefs: set[str] = set()
    parsed: list[TranslationUnit] = []
    for filename, source in units:
        parser = _Parser(source, filename, typedefs)
        parsed.append(parser.parse_unit())
    enums = set().union(*(u.enum_constants for u in parsed)) if parsed else set()

    defined: dict[str, tuple[str, int]] = {}
    for u in parsed:
        for fn in u.functions:
            if fn.name in defined:
                prev_file, prev_line = defined[fn.name]
                raise SourceSyntaxError(
                    f"duplicate definition of function {fn.name!r} (first defined at {prev_file}:{prev_line})",
                    u.filename,
                    fn.line,
                )
            defined[fn.name] = (u.filename, fn.line)
    functions = set(defined)

    records: list[FactRecord] = []
    for u in parsed:
        # source order: globals and functions interleaved by line
        items: list[tuple[int, int, object]] = [(line, 0, (name, line)) for name, line in u.globals]
        items += [(fn.line, 1, fn) for fn in u.functions]
        for _, _, item in sorted(items, key=lambda t: (t[0], t[1])):
            if isinstance(item, tuple):
                name, line = item
                records.append(FactRecord(FactKind.VariableDef, name, "", u.filename, line))
                continue
            fn = item
            records.append(FactRecord(FactKind.FunctionDef, fn.name, "", u.filename, fn.line))
            if fn.is_api:
                records.append(FactRecord(FactKind.ApiMarker, fn.name, "", u.filename, fn.line))
            records.extend(_FunctionExtractor(fn, u.filename, functions, enums).records())
    return records


def parse_minic(source: str, filename: str = "<input>") -> list[FactRecord]:
    """Extract facts from one mini-C translation unit."""
    return parse_units([(filename, source)])


def parse_minic_files(paths: Iterable[str | Path]) -> list[FactRecord]:
    return parse_units([(Path(p).name, Path(p).read_text(encoding="utf-8")) for p in paths])


def function_spans(source: str, filename: str = "<input>") -> dict[str, tuple[int, int]]:
    """Map each defined function to its (first line, last line)."""
    unit = _Parser(source, filename).parse_unit()
    return {fn.name: (fn.line, fn.end_line) for fn in unit.functions}


def function_arities(paths: Iterable[str | Path]) -> dict[str, int]:
    """Number of declared parameters of every function defined in ``paths``."""
    typedefs: set[str] = set()
    out: dict[str, int] = {}
    for p in paths:
        unit = _Parser(Path(p).read_text(encoding="utf-8"), Path(p).name, typedefs).parse_unit()
        out.update({fn.name: len(fn.params) for fn in unit.functions})
    return out
