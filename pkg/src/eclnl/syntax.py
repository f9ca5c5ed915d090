"""Abstract syntax of the calculus: types, terms, contexts and the syntactic
predicates every other module relies on.

Terms keep user-written names.  Alpha-equivalence is decided on demand by
converting to a nameless key (`alpha_key`), so stored ASTs and error messages
never lose the names the programmer chose.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping


@dataclass(frozen=True)
class Span:
    """A region of source text (1-based line and column)."""

    line: int
    col: int
    length: int = 1

    def as_dict(self) -> dict:
        return {"line": self.line, "col": self.col, "len": self.length}


# ---------------------------------------------------------------- types


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        from .parser import print_type

        return print_type(self)


@dataclass(frozen=True)
class Zero(Type):
    pass


@dataclass(frozen=True)
class Unit(Type):
    pass


@dataclass(frozen=True)
class Sum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Tensor(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Lollipop(Type):
    arg: Type
    res: Type


@dataclass(frozen=True)
class Bang(Type):
    body: Type


@dataclass(frozen=True)
class Wire(Type):
    name: str


@dataclass(frozen=True)
class Diag(Type):
    dom: Type
    cod: Type

    def __post_init__(self):
        for t in (self.dom, self.cod):
            if not is_mtype(t):
                raise ValueError(f"Diag arguments must be M-types, got {t!r}")


def is_mtype(t: Type) -> bool:
    """True for types built from wires, I and tensor only."""
    match t:
        case Wire() | Unit():
            return True
        case Tensor(a, b):
            return is_mtype(a) and is_mtype(b)
    return False


def is_intuitionistic(t: Type) -> bool:
    """Membership in the grammar P ::= 0 | P+R | I | P*R | !A | Diag(T,U)."""
    match t:
        case Zero() | Unit() | Bang() | Diag():
            return True
        case Sum(a, b) | Tensor(a, b):
            return is_intuitionistic(a) and is_intuitionistic(b)
    return False


def is_linear(t: Type) -> bool:
    return not is_intuitionistic(t)


def tensor_of(types: Iterable[Type]) -> Type:
    """Right-nested tensor of a sequence; the empty sequence gives I."""
    types = list(types)
    if not types:
        return Unit()
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Tensor(t, out)
    return out


def wire_leaves(t: Type) -> list[str]:
    """Wire names of an M-type in left-to-right order."""
    match t:
        case Wire(name):
            return [name]
        case Unit():
            return []
        case Tensor(a, b):
            return wire_leaves(a) + wire_leaves(b)
    raise ValueError(f"not an M-type: {t!r}")


def type_mentions(t: Type, kinds: tuple[type, ...]) -> bool:
    if isinstance(t, kinds):
        return True
    match t:
        case Sum(a, b) | Tensor(a, b) | Lollipop(a, b) | Diag(a, b):
            return type_mentions(a, kinds) or type_mentions(b, kinds)
        case Bang(a):
            return type_mentions(a, kinds)
    return False


def is_diagram_free_type(t: Type) -> bool:
    return not type_mentions(t, (Wire, Diag))


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Term:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)

    def __str__(self) -> str:
        from .parser import print_term

        return print_term(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class Let(Term):
    name: str
    bound: Term
    body: Term


@dataclass(frozen=True)
class Initial(Term):
    type: Type | None
    body: Term


@dataclass(frozen=True)
class Left(Term):
    left_type: Type | None
    right_type: Type | None
    body: Term


@dataclass(frozen=True)
class Right(Term):
    left_type: Type | None
    right_type: Type | None
    body: Term


@dataclass(frozen=True)
class Case(Term):
    scrutinee: Term
    left_name: str
    left_body: Term
    right_name: str
    right_body: Term


@dataclass(frozen=True)
class Star(Term):
    pass


@dataclass(frozen=True)
class Seq(Term):
    first: Term
    second: Term


@dataclass(frozen=True)
class Pair(Term):
    first: Term
    second: Term


@dataclass(frozen=True)
class LetPair(Term):
    left_name: str
    right_name: str
    bound: Term
    body: Term


@dataclass(frozen=True)
class Lambda(Term):
    name: str
    type: Type
    body: Term


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True)
class Lift(Term):
    body: Term


@dataclass(frozen=True)
class Force(Term):
    body: Term


@dataclass(frozen=True)
class Label(Term):
    name: str


@dataclass(frozen=True)
class Box(Term):
    type: Type
    body: Term


@dataclass(frozen=True)
class Apply(Term):
    diagram: Term
    arg: Term


@dataclass(frozen=True)
class BoxedDiag(Term):
    """A boxed diagram value (inputs, diagram, outputs).

    The labels of both tuples are internal names of the diagram's boundary;
    a boxed diagram has no free labels.
    """

    inputs: Term
    diagram: object  # diagrams.LabelledDiagram; kept untyped to avoid an import cycle
    outputs: Term


@dataclass(frozen=True)
class Rec(Term):
    name: str
    type: Type  # the !A of the bound variable
    body: Term


VarContext = dict  # ordered name -> Type
LabelContext = dict  # label -> wire-type name


def is_intuitionistic_context(gamma: Mapping[str, Type]) -> bool:
    return all(is_intuitionistic(t) for t in gamma.values())


# ---------------------------------------------------------------- predicates


def is_value(m: Term) -> bool:
    match m:
        case Var() | Const() | Star() | Lambda() | Lift() | Label() | BoxedDiag():
            return True
        case Left(_, _, v) | Right(_, _, v):
            return is_value(v)
        case Pair(v, w):
            return is_value(v) and is_value(w)
    return False


def is_label_tuple(m: Term) -> bool:
    match m:
        case Label() | Star():
            return True
        case Pair(a, b):
            return is_label_tuple(a) and is_label_tuple(b)
    return False


def tuple_labels(m: Term) -> list[str]:
    """Labels of a label tuple, left to right."""
    match m:
        case Label(name):
            return [name]
        case Star():
            return []
        case Pair(a, b):
            return tuple_labels(a) + tuple_labels(b)
    raise ValueError(f"not a label tuple: {m!r}")


def children(m: Term) -> tuple[Term, ...]:
    match m:
        case Let(_, a, b) | Seq(a, b) | Pair(a, b) | LetPair(_, _, a, b) | App(a, b) | Apply(a, b):
            return (a, b)
        case Initial(_, a) | Left(_, _, a) | Right(_, _, a) | Lambda(_, _, a) | Lift(a) | Force(a) | Box(_, a) | Rec(_, _, a):
            return (a,)
        case Case(a, _, b, _, c):
            return (a, b, c)
    return ()


def term_depth(m: Term) -> int:
    kids = children(m)
    return 1 + max((term_depth(k) for k in kids), default=0)


def term_size(m: Term) -> int:
    return 1 + sum(term_size(k) for k in children(m))


def free_vars(m: Term) -> frozenset[str]:
    match m:
        case Var(name):
            return frozenset([name])
        case Let(x, a, b):
            return free_vars(a) | (free_vars(b) - {x})
        case LetPair(x, y, a, b):
            return free_vars(a) | (free_vars(b) - {x, y})
        case Case(a, x, b, y, c):
            return free_vars(a) | (free_vars(b) - {x}) | (free_vars(c) - {y})
        case Lambda(x, _, b) | Rec(x, _, b):
            return free_vars(b) - {x}
    out: frozenset[str] = frozenset()
    for k in children(m):
        out |= free_vars(k)
    return out


def free_labels(m: Term) -> frozenset[str]:
    match m:
        case Label(name):
            return frozenset([name])
        case BoxedDiag():
            return frozenset()
    out: frozenset[str] = frozenset()
    for k in children(m):
        out |= free_labels(k)
    return out


def bound_names(m: Term) -> set[str]:
    out: set[str] = set()
    match m:
        case Let(x, _, _) | Lambda(x, _, _) | Rec(x, _, _):
            out.add(x)
        case LetPair(x, y, _, _) | Case(_, x, _, y, _):
            out.update((x, y))
    for k in children(m):
        out |= bound_names(k)
    return out


def max_label_index(m: Term) -> int:
    """Largest N among labels spelled ``#lN`` anywhere in ``m`` (or -1)."""
    best = -1
    match m:
        case Label(name):
            return _label_index(name)
        case BoxedDiag(ins, d, outs):
            best = max(max_label_index(ins), max_label_index(outs), d.max_label_index())
    for k in children(m):
        best = max(best, max_label_index(k))
    return best


def _label_index(name: str) -> int:
    if name.startswith("#l") and name[2:].isdigit():
        return int(name[2:])
    return -1


# ---------------------------------------------------------------- substitution


def fresh_name(base: str, avoid: set[str] | frozenset[str]) -> str:
    stem = base.rstrip("'")
    for i in itertools.count(1):
        cand = f"{stem}_{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def substitute(m: Term, v: Term, x: str) -> Term:
    """Capture-avoiding m[v/x]."""
    return substitute_many(m, {x: v})


def substitute_many(m: Term, sub: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    if not sub:
        return m
    fv_sub: frozenset[str] = frozenset()
    for t in sub.values():
        fv_sub |= free_vars(t)
    return _subst(m, dict(sub), fv_sub)


def _binder(name: str, body: Term, sub: dict, fv_sub: frozenset[str], *others: Term):
    """Prepare to go under a binder: drop shadowed entries, rename on capture."""
    inner = {k: t for k, t in sub.items() if k != name}
    if name in fv_sub and inner and any(k in free_vars(body) for k in inner):
        avoid = set(fv_sub) | free_vars(body) | set(inner)
        for o in others:
            avoid |= free_vars(o)
        new = fresh_name(name, avoid)
        body = _subst(body, {name: Var(new)}, frozenset([new]))
        return new, body, inner
    return name, body, inner


def _subst(m: Term, sub: dict, fv_sub: frozenset[str]) -> Term:
    if not sub:
        return m
    match m:
        case Var(name):
            return sub.get(name, m)
        case Const() | Star() | Label() | BoxedDiag():
            return m
        case Let(x, a, b):
            x2, b2, inner = _binder(x, b, sub, fv_sub)
            return Let(x2, _subst(a, sub, fv_sub), _subst(b2, inner, fv_sub), span=m.span)
        case LetPair(x, y, a, b):
            inner = {k: t for k, t in sub.items() if k not in (x, y)}
            x2, b2, _ = _binder(x, b, inner, fv_sub, Var(y))
            y2, b2, _ = _binder(y, b2, inner, fv_sub, Var(x2))
            return LetPair(x2, y2, _subst(a, sub, fv_sub), _subst(b2, inner, fv_sub), span=m.span)
        case Case(a, x, b, y, c):
            x2, b2, in_b = _binder(x, b, sub, fv_sub)
            y2, c2, in_c = _binder(y, c, sub, fv_sub)
            return Case(_subst(a, sub, fv_sub), x2, _subst(b2, in_b, fv_sub), y2, _subst(c2, in_c, fv_sub), span=m.span)
        case Lambda(x, t, b):
            x2, b2, inner = _binder(x, b, sub, fv_sub)
            return Lambda(x2, t, _subst(b2, inner, fv_sub), span=m.span)
        case Rec(x, t, b):
            x2, b2, inner = _binder(x, b, sub, fv_sub)
            return Rec(x2, t, _subst(b2, inner, fv_sub), span=m.span)
        case Initial(t, a):
            return Initial(t, _subst(a, sub, fv_sub), span=m.span)
        case Left(s, t, a):
            return Left(s, t, _subst(a, sub, fv_sub), span=m.span)
        case Right(s, t, a):
            return Right(s, t, _subst(a, sub, fv_sub), span=m.span)
        case Seq(a, b):
            return Seq(_subst(a, sub, fv_sub), _subst(b, sub, fv_sub), span=m.span)
        case Pair(a, b):
            return Pair(_subst(a, sub, fv_sub), _subst(b, sub, fv_sub), span=m.span)
        case App(a, b):
            return App(_subst(a, sub, fv_sub), _subst(b, sub, fv_sub), span=m.span)
        case Apply(a, b):
            return Apply(_subst(a, sub, fv_sub), _subst(b, sub, fv_sub), span=m.span)
        case Lift(a):
            return Lift(_subst(a, sub, fv_sub), span=m.span)
        case Force(a):
            return Force(_subst(a, sub, fv_sub), span=m.span)
        case Box(t, a):
            return Box(t, _subst(a, sub, fv_sub), span=m.span)
    raise TypeError(f"Unexpected term in substitute: {m!r}")


def rename_labels(m: Term, renaming: Mapping[str, str]) -> Term:
    """Rename free labels (boxed diagrams are closed and left alone)."""
    match m:
        case Label(name):
            return Label(renaming.get(name, name), span=m.span)
        case Pair(a, b):
            return Pair(rename_labels(a, renaming), rename_labels(b, renaming), span=m.span)
        case Star():
            return m
    raise ValueError(f"rename_labels expects a label tuple, got {m!r}")


# ---------------------------------------------------------------- alpha-equivalence


def alpha_key(m: Term, env: tuple[str, ...] = ()) -> tuple:
    """Nameless key: bound variables become binder depths, spans are dropped."""

    def var(name: str):
        for depth in range(len(env) - 1, -1, -1):
            if env[depth] == name:
                return ("bv", depth)
        return ("fv", name)

    match m:
        case Var(name):
            return var(name)
        case Const(name):
            return ("const", name)
        case Label(name):
            return ("label", name)
        case Star():
            return ("star",)
        case Let(x, a, b):
            return ("let", alpha_key(a, env), alpha_key(b, env + (x,)))
        case LetPair(x, y, a, b):
            return ("letpair", alpha_key(a, env), alpha_key(b, env + (x, y)))
        case Case(a, x, b, y, c):
            return ("case", alpha_key(a, env), alpha_key(b, env + (x,)), alpha_key(c, env + (y,)))
        case Lambda(x, t, b):
            return ("lam", t, alpha_key(b, env + (x,)))
        case Rec(x, t, b):
            return ("rec", t, alpha_key(b, env + (x,)))
        case Initial(t, a):
            return ("initial", t, alpha_key(a, env))
        case Left(s, t, a):
            return ("left", s, t, alpha_key(a, env))
        case Right(s, t, a):
            return ("right", s, t, alpha_key(a, env))
        case Seq(a, b):
            return ("seq", alpha_key(a, env), alpha_key(b, env))
        case Pair(a, b):
            return ("pair", alpha_key(a, env), alpha_key(b, env))
        case App(a, b):
            return ("app", alpha_key(a, env), alpha_key(b, env))
        case Apply(a, b):
            return ("apply", alpha_key(a, env), alpha_key(b, env))
        case Lift(a):
            return ("lift", alpha_key(a, env))
        case Force(a):
            return ("force", alpha_key(a, env))
        case Box(t, a):
            return ("box", t, alpha_key(a, env))
        case BoxedDiag(ins, d, outs):
            return ("diag",) + d.boxed_key(ins, outs)
    raise TypeError(f"Unexpected term in alpha_key: {m!r}")


def alpha_eq(m: Term, n: Term) -> bool:
    return alpha_key(m) == alpha_key(n)
