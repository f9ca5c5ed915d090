"""Surface syntax: a hand-written lexer and recursive-descent parser, plus the
inverse pretty-printer.

Program files look like::

    signature "gates.json"      -- optional, must come first
    type bool = I + I ;;
    def not = lift (\\b:bool. case b of { left u -> right u | right u -> left u }) ;;
    box[qubit] (lift h)

Types, loosest first: ``A -o B`` (right assoc), ``A + B`` (right assoc),
``A * B`` (right assoc), ``!A``; atoms ``0``, ``I``, wire names,
``Diag(T, U)`` and aliases.  Terms: binders and ``m; n`` at the top,
then left-associative application, then the prefix forms ``lift``,
``force``, ``left[A,B]``, ``right[A,B]``, ``box[T]``, ``initial[C]``, then
atoms ``x``, ``*``, ``<m, n>``, ``apply(m, n)``, ``case m of {...}`` and
parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .diagrams import KEYWORDS, Signature, demo_signature
from .syntax import (
    Apply,
    App,
    Bang,
    BoxedDiag,
    Box,
    Case,
    Const,
    Diag,
    Force,
    Initial,
    Label,
    Lambda,
    Left,
    Let,
    LetPair,
    Lift,
    Lollipop,
    Pair,
    Rec,
    Right,
    Seq,
    Span,
    Star,
    Sum,
    Tensor,
    Term,
    Type,
    Unit,
    Var,
    Wire,
    Zero,
    is_mtype,
)


class ParseError(Exception):
    """Syntax error with a 1-based position and the set of tokens that would have been accepted."""

    def __init__(self, line: int, col: int, expected: set[str] | frozenset[str], found: str, length: int = 1):
        self.line, self.col, self.length = line, col, max(1, length)
        self.expected = frozenset(expected)
        self.found = found
        super().__init__(f"{line}:{col}: expected {' or '.join(sorted(self.expected))}, found {found}")

    @property
    def span(self) -> Span:
        return Span(self.line, self.col, self.length)

    kind = "SyntaxError"


class UnknownWireType(ParseError):
    kind = "UnknownWireType"

    def __init__(self, name: str, line: int, col: int):
        super().__init__(line, col, {"declared wire type"}, repr(name), len(name))
        self.name = name
        self.args = (f"{line}:{col}: unknown wire type {name!r}",)

    def __str__(self) -> str:
        return self.args[0]


# ---------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "label", "string", "eof", or the literal symbol
    text: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col, max(1, len(self.text)))


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<diag>\#diag\{)
  | (?P<label>\#[A-Za-z0-9_]+)
  | (?P<string>"[^"\n]*")
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>;;|->|-o|[\\.:;,<>()\[\]{}|=*+!0])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, {"token"}, repr(text[pos]))
        kind = m.lastgroup
        chunk = m.group()
        if kind == "diag":
            raise ParseError(line, col, {"term"}, "#diag{ (boxed diagrams have no surface syntax)", len(chunk))
        if kind == "id":
            tokens.append(Token("id", chunk, line, col))
        elif kind == "label":
            tokens.append(Token("label", chunk, line, col))
        elif kind == "string":
            tokens.append(Token("string", chunk[1:-1], line, col))
        elif kind == "sym":
            tokens.append(Token(chunk, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------- programs


@dataclass
class SourceProgram:
    signature_path: str | None
    definitions: list[tuple[str, Term]]
    main: Term
    signature: Signature = field(default_factory=demo_signature, repr=False)
    aliases: dict[str, Type] = field(default_factory=dict, repr=False)

    @property
    def term(self) -> Term:
        """The main term with definitions desugared into nested lets."""
        out = self.main
        for name, body in reversed(self.definitions):
            out = Let(name, body, out, span=body.span)
        return out


def _token_desc(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class _Parser:
    def __init__(self, text: str, signature: Signature, allow_labels: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.signature = signature
        self.allow_labels = allow_labels
        self.aliases: dict[str, Type] = {}
        self.scope: list[str] = []

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        t = self.tok
        return t.kind in kinds or (t.kind == "id" and t.text in kinds)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected) -> ParseError:
        t = self.tok
        return ParseError(t.line, t.col, set(expected), _token_desc(t), len(t.text))

    def expect(self, kind: str) -> Token:
        if self.at(kind):
            return self.advance()
        raise self.fail({kind})

    def ident(self) -> Token:
        t = self.tok
        if t.kind == "id" and t.text not in KEYWORDS:
            return self.advance()
        raise self.fail({"identifier"})

    def span_from(self, start: Token) -> Span:
        prev = self.toks[self.i - 1]
        if prev.line == start.line:
            return Span(start.line, start.col, max(1, prev.col + len(prev.text) - start.col))
        return Span(start.line, start.col, max(1, len(start.text)))

    # -- types

    def type_(self) -> Type:
        left = self.type_sum()
        if self.at("-o"):
            self.advance()
            return Lollipop(left, self.type_())
        return left

    def type_sum(self) -> Type:
        left = self.type_tensor()
        if self.at("+"):
            self.advance()
            return Sum(left, self.type_sum())
        return left

    def type_tensor(self) -> Type:
        left = self.type_bang()
        if self.at("*"):
            self.advance()
            return Tensor(left, self.type_tensor())
        return left

    def type_bang(self) -> Type:
        if self.at("!"):
            self.advance()
            return Bang(self.type_bang())
        return self.type_atom()

    def type_atom(self) -> Type:
        t = self.tok
        if t.kind == "0":
            self.advance()
            return Zero()
        if t.kind == "(":
            self.advance()
            inner = self.type_()
            self.expect(")")
            return inner
        if t.kind == "id":
            if t.text == "I":
                self.advance()
                return Unit()
            if t.text == "Diag":
                self.advance()
                self.expect("(")
                dom_tok = self.tok
                dom = self.type_()
                self.expect(",")
                cod_tok = self.tok
                cod = self.type_()
                self.expect(")")
                for side, tk in ((dom, dom_tok), (cod, cod_tok)):
                    if not is_mtype(side):
                        raise ParseError(tk.line, tk.col, {"M-type (wires, I and *)"}, print_type(side))
                return Diag(dom, cod)
            if t.text in self.aliases:
                self.advance()
                return self.aliases[t.text]
            if t.text not in KEYWORDS:
                if t.text not in self.signature.wires:
                    raise UnknownWireType(t.text, t.line, t.col)
                self.advance()
                return Wire(t.text)
        raise self.fail({"type"})

    # -- terms

    def term(self) -> Term:
        start = self.tok
        if self.at("let"):
            self.advance()
            if self.at("<"):
                self.advance()
                x = self.ident().text
                self.expect(",")
                y = self.ident().text
                self.expect(">")
                self.expect("=")
                bound = self.term()
                self.expect("in")
                body = self.scoped([x, y], self.term)
                return LetPair(x, y, bound, body, span=self.span_from(start))
            x = self.ident().text
            self.expect("=")
            bound = self.term()
            self.expect("in")
            body = self.scoped([x], self.term)
            return Let(x, bound, body, span=self.span_from(start))
        if self.at("\\"):
            self.advance()
            x = self.ident().text
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            body = self.scoped([x], self.term)
            return Lambda(x, ty, body, span=self.span_from(start))
        if self.at("rec"):
            self.advance()
            x = self.ident().text
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            body = self.scoped([x], self.term)
            return Rec(x, ty, body, span=self.span_from(start))
        first = self.application()
        if self.at(";"):
            self.advance()
            second = self.term()
            return Seq(first, second, span=self.span_from(start))
        return first

    def scoped(self, names, fn):
        self.scope.extend(names)
        try:
            return fn()
        finally:
            del self.scope[len(self.scope) - len(names):]

    def starts_operand(self) -> bool:
        t = self.tok
        if t.kind == "id":
            return t.text not in KEYWORDS or t.text in ("lift", "force", "left", "right", "box", "initial", "apply", "case")
        return t.kind in ("label", "*", "<", "(")

    def application(self) -> Term:
        start = self.tok
        fun = self.prefix()
        while self.starts_operand():
            arg = self.prefix()
            fun = App(fun, arg, span=self.span_from(start))
        return fun

    def opt_pair_annotation(self) -> tuple[Type | None, Type | None]:
        if self.at("["):
            self.advance()
            a = self.type_()
            self.expect(",")
            b = self.type_()
            self.expect("]")
            return a, b
        return None, None

    def prefix(self) -> Term:
        start = self.tok
        if self.at("lift"):
            self.advance()
            return Lift(self.prefix(), span=self.span_from(start))
        if self.at("force"):
            self.advance()
            return Force(self.prefix(), span=self.span_from(start))
        if self.at("left") or self.at("right"):
            word = self.advance().text
            a, b = self.opt_pair_annotation()
            body = self.prefix()
            cls = Left if word == "left" else Right
            return cls(a, b, body, span=self.span_from(start))
        if self.at("box"):
            self.advance()
            self.expect("[")
            ty_tok = self.tok
            ty = self.type_()
            self.expect("]")
            if not is_mtype(ty):
                raise ParseError(ty_tok.line, ty_tok.col, {"M-type (wires, I and *)"}, print_type(ty))
            body = self.prefix()
            return Box(ty, body, span=self.span_from(start))
        if self.at("initial"):
            self.advance()
            ty = None
            if self.at("["):
                self.advance()
                ty = self.type_()
                self.expect("]")
            body = self.prefix()
            return Initial(ty, body, span=self.span_from(start))
        return self.atom()

    def atom(self) -> Term:
        start = self.tok
        t = self.tok
        if t.kind == "*":
            self.advance()
            return Star(span=t.span)
        if t.kind == "label":
            if not self.allow_labels:
                raise ParseError(t.line, t.col, {"term"}, f"label {t.text} (labels have no surface syntax)", len(t.text))
            self.advance()
            return Label(t.text, span=t.span)
        if t.kind == "<":
            self.advance()
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(">")
            return Pair(a, b, span=self.span_from(start))
        if t.kind == "(":
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        if self.at("apply"):
            self.advance()
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return Apply(a, b, span=self.span_from(start))
        if self.at("case"):
            self.advance()
            scrut = self.term()
            self.expect("of")
            self.expect("{")
            self.expect("left")
            x = self.ident().text
            self.expect("->")
            lbody = self.scoped([x], self.term)
            self.expect("|")
            self.expect("right")
            y = self.ident().text
            self.expect("->")
            rbody = self.scoped([y], self.term)
            self.expect("}")
            return Case(scrut, x, lbody, y, rbody, span=self.span_from(start))
        if t.kind == "id" and t.text not in KEYWORDS:
            self.advance()
            if t.text not in self.scope and t.text in self.signature.generators:
                return Const(t.text, span=t.span)
            return Var(t.text, span=t.span)
        raise self.fail({"term"})

    # -- programs

    def program(self, base_dir: Path | None, signature_override: Signature | None) -> SourceProgram:
        sig_path = None
        if self.at("signature"):
            self.advance()
            sig_tok = self.expect("string")
            sig_path = sig_tok.text
            if signature_override is None:
                path = Path(sig_path)
                if not path.is_absolute() and base_dir is not None:
                    path = base_dir / path
                try:
                    self.signature = Signature.load(path)
                except OSError as exc:
                    raise ParseError(sig_tok.line, sig_tok.col, {"readable signature file"}, f"{sig_path!r} ({exc.strerror})", len(sig_path) + 2) from exc
        definitions: list[tuple[str, Term]] = []
        while self.at("def") or self.at("type"):
            if self.advance().text == "type":
                name_tok = self.ident()
                self.expect("=")
                self.aliases[name_tok.text] = self.type_()
                self.expect(";;")
                continue
            name_tok = self.ident()
            if any(name_tok.text == n for n, _ in definitions):
                raise ParseError(name_tok.line, name_tok.col, {"fresh definition name"}, repr(name_tok.text), len(name_tok.text))
            self.expect("=")
            body = self.term()
            self.expect(";;")
            definitions.append((name_tok.text, body))
            self.scope.append(name_tok.text)
        main = self.term()
        self.expect("eof")
        return SourceProgram(sig_path, definitions, main, self.signature, dict(self.aliases))


def parse_program(text: str, signature: Signature | None = None, base_dir: str | Path | None = None) -> SourceProgram:
    """Parse a whole program file.

    An explicit ``signature`` wins over the file's ``signature`` line, which
    wins over the built-in demo signature.
    """
    p = _Parser(text, signature or demo_signature())
    return p.program(Path(base_dir) if base_dir is not None else None, signature)


def parse_term(text: str, signature: Signature | None = None, allow_labels: bool = False) -> Term:
    p = _Parser(text, signature or demo_signature(), allow_labels)
    m = p.term()
    p.expect("eof")
    return m


def parse_type(text: str, signature: Signature | None = None) -> Type:
    p = _Parser(text, signature or demo_signature())
    t = p.type_()
    p.expect("eof")
    return t


# ---------------------------------------------------------------- printing


def print_type(t: Type, level: int = 0) -> str:
    match t:
        case Zero():
            s, own = "0", 4
        case Unit():
            s, own = "I", 4
        case Wire(name):
            s, own = name, 4
        case Diag(a, b):
            s, own = f"Diag({print_type(a)}, {print_type(b)})", 4
        case Bang(a):
            s, own = "!" + print_type(a, 3), 3
        case Tensor(a, b):
            s, own = f"{print_type(a, 3)} * {print_type(b, 2)}", 2
        case Sum(a, b):
            s, own = f"{print_type(a, 2)} + {print_type(b, 1)}", 1
        case Lollipop(a, b):
            s, own = f"{print_type(a, 1)} -o {print_type(b, 0)}", 0
        case _:
            raise TypeError(f"not a type: {t!r}")
    return f"({s})" if own < level else s


def _annot(a: Type | None, b: Type | None) -> str:
    return f"[{print_type(a)}, {print_type(b)}]" if a is not None and b is not None else ""


def print_term(m: Term, level: int = 0) -> str:
    """Render ``m`` in surface syntax, parenthesizing only where needed."""
    match m:
        case Var(name) | Const(name):
            s, own = name, 3
        case Label(name):
            s, own = name, 3
        case Star():
            s, own = "*", 3
        case Pair(a, b):
            s, own = f"<{print_term(a)}, {print_term(b)}>", 3
        case Apply(a, b):
            s, own = f"apply({print_term(a)}, {print_term(b)})", 3
        case Case(a, x, b, y, c):
            s, own = f"case {print_term(a)} of {{ left {x} -> {print_term(b)} | right {y} -> {print_term(c)} }}", 3
        case BoxedDiag(ins, d, outs):
            gens = " ".join(n.gen for n in d.nodes) or "id"
            s, own = f"#diag{{{print_term(ins)} | {gens} | {print_term(outs)}}}", 3
        case Lift(a):
            s, own = "lift " + print_term(a, 2), 2
        case Force(a):
            s, own = "force " + print_term(a, 2), 2
        case Left(ta, tb, a):
            s, own = f"left{_annot(ta, tb)} {print_term(a, 2)}", 2
        case Right(ta, tb, a):
            s, own = f"right{_annot(ta, tb)} {print_term(a, 2)}", 2
        case Box(t, a):
            s, own = f"box[{print_type(t)}] {print_term(a, 2)}", 2
        case Initial(t, a):
            ann = f"[{print_type(t)}]" if t is not None else ""
            s, own = f"initial{ann} {print_term(a, 2)}", 2
        case App(f, a):
            s, own = f"{print_term(f, 1)} {print_term(a, 2)}", 1
        case Seq(a, b):
            s, own = f"{print_term(a, 1)}; {print_term(b, 0)}", 0
        case Let(x, a, b):
            s, own = f"let {x} = {print_term(a)} in {print_term(b)}", 0
        case LetPair(x, y, a, b):
            s, own = f"let <{x}, {y}> = {print_term(a)} in {print_term(b)}", 0
        case Lambda(x, t, b):
            s, own = f"\\{x}:{print_type(t)}. {print_term(b)}", 0
        case Rec(x, t, b):
            s, own = f"rec {x}:{print_type(t)}. {print_term(b)}", 0
        case _:
            raise TypeError(f"not a term: {m!r}")
    return f"({s})" if own < level else s
