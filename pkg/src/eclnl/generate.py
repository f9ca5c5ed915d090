"""Random well-typed terms and configurations.

Generation is type directed and resource aware: every request names the
linear resources (variables or labels) the term must consume exactly once,
so well-typedness holds by construction.  Callers still run the typechecker
on the output; the generator is a test fixture, not a trusted component.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import diagrams as dg
from .diagrams import LabelledDiagram
from .syntax import (
    App,
    Apply,
    Bang,
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
    Star,
    Sum,
    Tensor,
    Term,
    Type,
    Unit,
    Var,
    Wire,
    Zero,
    is_intuitionistic,
    is_mtype,
)

QUBIT, BIT = Wire("qubit"), Wire("bit")
BOOL = Sum(Unit(), Unit())


@dataclass(frozen=True)
class Res:
    """A linear resource: a variable or a label of the given type."""

    name: str
    type: Type
    label: bool = False

    def term(self) -> Term:
        return Label(self.name) if self.label else Var(self.name)


class TermGenerator:
    """Random generator over the demo signature.

    With ``diagrams=False`` no wire or Diag types, generators or labels are
    produced, giving terms of the diagram-free fragment.
    """

    def __init__(self, seed: int = 0, diagrams: bool = True, recursion: bool = True, max_type_depth: int = 2):
        self.rng = random.Random(seed)
        self.diagrams = diagrams
        self.recursion = recursion
        self.max_type_depth = max_type_depth
        self.counter = 0

    # ------------------------------------------------------------ types

    def fresh(self, stem: str = "v") -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    def mtype(self, depth: int = 1) -> Type:
        r = self.rng.random()
        if depth <= 0 or r < 0.55:
            return QUBIT if r < 0.45 else Unit()
        if r < 0.7:
            return BIT
        return Tensor(self.mtype(depth - 1), self.mtype(depth - 1))

    def type(self, depth: int | None = None) -> Type:
        depth = self.max_type_depth if depth is None else depth
        rng = self.rng
        if depth <= 0:
            return rng.choice([Unit(), BOOL] + ([QUBIT] if self.diagrams else []))
        options = ["unit", "bool", "sum", "tensor", "lolli", "bang"]
        if self.diagrams:
            options += ["qubit", "qubit", "bit", "diag"]
        match rng.choice(options):
            case "unit":
                return Unit()
            case "bool":
                return BOOL
            case "qubit":
                return QUBIT
            case "bit":
                return BIT
            case "sum":
                return Sum(self.type(depth - 1), self.type(depth - 1))
            case "tensor":
                return Tensor(self.type(depth - 1), self.type(depth - 1))
            case "lolli":
                return Lollipop(self.type(depth - 1), self.type(depth - 1))
            case "bang":
                return Bang(self.type(depth - 1))
            case "diag":
                return Diag(self.mtype(), self.mtype())
        raise AssertionError

    # ------------------------------------------------------------ terms

    def split(self, lin: list[Res]) -> tuple[list[Res], list[Res]]:
        a, b = [], []
        for r in lin:
            (a if self.rng.random() < 0.5 else b).append(r)
        return a, b

    def term(self, t: Type, lin: list[Res] | None = None, intu: list[Res] | None = None, depth: int = 4) -> Term:
        """A term of type ``t`` consuming exactly the resources ``lin``."""
        lin = list(lin or [])
        intu = list(intu or [])
        if depth <= 0:
            return self.base(t, lin, intu)
        rng = self.rng
        choices = self.choices(t, lin, intu)
        kind = rng.choice(choices)
        return self.build(kind, t, lin, intu, depth)

    def choices(self, t: Type, lin: list[Res], intu: list[Res]) -> list[str]:
        out = ["intro", "intro", "let", "app", "case", "seq", "letpair"]
        if len(lin) == 1 and lin[0].type == t:
            out += ["use", "use", "use"]
        if not lin and any(r.type == t for r in intu):
            out += ["use", "use"]
        if not lin:
            out += ["force"]
            if self.recursion and isinstance(t, Lollipop):
                out += ["rec"]
        if self.diagrams and is_mtype(t) and t != Unit():
            out += ["apply", "gate"]
        if any(isinstance(r.type, Bang) for r in intu):
            out += ["force-var"]
        return out

    def build(self, kind: str, t: Type, lin: list[Res], intu: list[Res], depth: int) -> Term:
        rng, d = self.rng, depth - 1
        match kind:
            case "use":
                if len(lin) == 1 and lin[0].type == t:
                    return lin[0].term()
                return rng.choice([r for r in intu if r.type == t]).term()
            case "intro":
                return self.intro(t, lin, intu, depth)
            case "let":
                a = self.type(1)
                l1, l2 = self.split(lin)
                x = Res(self.fresh("x"), a)
                bound = self.term(a, l1, intu, d)
                l2b, intub = self.bind(x, l2, intu)
                return Let(x.name, bound, self.term(t, l2b, intub, d))
            case "app":
                a = self.type(1)
                l1, l2 = self.split(lin)
                x = Res(self.fresh("x"), a)
                l1b, intub = self.bind(x, l1, intu)
                fun = Lambda(x.name, a, self.term(t, l1b, intub, d))
                return App(fun, self.term(a, l2, intu, d))
            case "case":
                a, b = self.type(1), self.type(1)
                l1, l2 = self.split(lin)
                x, y = Res(self.fresh("x"), a), Res(self.fresh("y"), b)
                scrut = self.term(Sum(a, b), l1, intu, d)
                lx, ix = self.bind(x, l2, intu)
                ly, iy = self.bind(y, l2, intu)
                return Case(scrut, x.name, self.term(t, lx, ix, d), y.name, self.term(t, ly, iy, d))
            case "seq":
                l1, l2 = self.split(lin)
                return Seq(self.term(Unit(), l1, intu, d), self.term(t, l2, intu, d))
            case "letpair":
                a, b = self.type(1), self.type(1)
                l1, l2 = self.split(lin)
                x, y = Res(self.fresh("x"), a), Res(self.fresh("y"), b)
                bound = self.term(Tensor(a, b), l1, intu, d)
                l2x, ix = self.bind(x, l2, intu)
                l2xy, ixy = self.bind(y, l2x, ix)
                return LetPair(x.name, y.name, bound, self.term(t, l2xy, ixy, d))
            case "force":
                return Force(Lift(self.term(t, [], intu, d)))
            case "force-var":
                f = rng.choice([r for r in intu if isinstance(r.type, Bang)])
                # use the thunk, then produce t from the result
                x = Res(self.fresh("x"), f.type.body)
                lb, ib = self.bind(x, lin, intu)
                return Let(x.name, Force(f.term()), self.term(t, lb, ib, d))
            case "rec":
                assert isinstance(t, Lollipop)
                f = Res(self.fresh("f"), Bang(t))
                x = Res(self.fresh("x"), t.arg)
                inner_intu = intu + [f]
                lx, ix = self.bind(x, [], inner_intu)
                return Rec(f.name, Bang(t), Lambda(x.name, t.arg, self.term(t.res, lx, ix, d)))
            case "apply":
                a = self.mtype()
                l1, l2 = self.split(lin)
                return Apply(self.term(Diag(a, t), l1, intu, d), self.term(a, l2, intu, d))
            case "gate":
                return self.gate(t, lin, intu, d)
        raise AssertionError(kind)

    def bind(self, x: Res, lin: list[Res], intu: list[Res]) -> tuple[list[Res], list[Res]]:
        if is_intuitionistic(x.type):
            return lin, intu + [x]
        return lin + [x], intu

    def gate(self, t: Type, lin: list[Res], intu: list[Res], depth: int) -> Term:
        rng = self.rng
        match t:
            case Wire("qubit"):
                if rng.random() < 0.5:
                    return App(Const("h"), self.term(QUBIT, lin, intu, depth))
                return App(Const("new"), self.term(Unit(), lin, intu, depth))
            case Wire("bit"):
                return App(Const("meas"), self.term(QUBIT, lin, intu, depth))
            case Tensor(Wire("qubit"), Wire("qubit")):
                return App(Const("cnot"), self.term(t, lin, intu, depth))
        return self.intro(t, lin, intu, depth + 1)

    def intro(self, t: Type, lin: list[Res], intu: list[Res], depth: int) -> Term:
        """Introduction form for ``t``, or a fallback when none is available."""
        rng, d = self.rng, depth - 1
        match t:
            case Unit():
                if not lin:
                    return Star()
                return self.consume_all(lin, Star())
            case Sum(a, b):
                if rng.random() < 0.5:
                    return Left(a, b, self.term(a, lin, intu, d))
                return Right(a, b, self.term(b, lin, intu, d))
            case Tensor(a, b):
                l1, l2 = self.split(lin)
                return Pair(self.term(a, l1, intu, d), self.term(b, l2, intu, d))
            case Lollipop(a, b):
                x = Res(self.fresh("x"), a)
                lx, ix = self.bind(x, lin, intu)
                return Lambda(x.name, a, self.term(b, lx, ix, d))
            case Bang(a):
                if lin:
                    return self.consume_all(lin, Lift(self.term(a, [], intu, d)))
                return Lift(self.term(a, [], intu, d))
            case Diag(a, b):
                x = Res(self.fresh("q"), a)
                body = Lift(Lambda(x.name, a, self.term(b, [x], intu, d)))
                return self.consume_all(lin, Box(a, body))
            case Wire():
                return self.gate(t, lin, intu, d) if d > 0 else self.base(t, lin, intu)
            case Zero():
                return self.consume_all(lin, Initial(Zero(), self.diverge(Zero())))
        raise AssertionError(t)

    def base(self, t: Type, lin: list[Res], intu: list[Res]) -> Term:
        """Small closing term: consume ``lin`` then build a canonical ``t``."""
        if len(lin) == 1 and lin[0].type == t:
            return lin[0].term()
        return self.consume_all(lin, self.canonical(t, intu))

    def canonical(self, t: Type, intu: list[Res]) -> Term:
        for r in intu:
            if r.type == t:
                return r.term()
        match t:
            case Unit():
                return Star()
            case Sum(a, b):
                return Left(a, b, self.canonical(a, intu))
            case Tensor(a, b):
                return Pair(self.canonical(a, intu), self.canonical(b, intu))
            case Lollipop(a, b):
                x = Res(self.fresh("x"), a)
                return Lambda(x.name, a, self.consume_all([x], self.canonical(b, intu)))
            case Bang(a):
                return Lift(self.canonical(a, intu))
            case Wire("qubit"):
                return App(Const("new"), Star())
            case Wire("bit"):
                return App(Const("meas"), App(Const("new"), Star()))
            case Diag(a, b):
                x = Res(self.fresh("q"), a)
                return Box(a, Lift(Lambda(x.name, a, self.consume_all([x], self.canonical(b, [])))))
            case Zero():
                return self.diverge(Zero())
        raise AssertionError(t)

    def diverge(self, t: Type) -> Term:
        z = self.fresh("z")
        return Rec(z, Bang(t), Force(Var(z)))

    def consume_all(self, lin: list[Res], then: Term) -> Term:
        out = then
        for r in reversed(lin):
            out = Seq(self.consume(r.term(), r.type), out)
        return out

    def consume(self, m: Term, t: Type) -> Term:
        """A term of type I that uses up ``m : t``."""
        match t:
            case Unit():
                return m
            case Wire("qubit"):
                return App(Const("free"), m)
            case Wire("bit"):
                return App(Const("discard"), m)
            case Wire(name):
                raise ValueError(f"no way to discard wire type {name}")
            case Tensor(a, b):
                x, y = self.fresh("x"), self.fresh("y")
                return LetPair(x, y, m, Seq(self.consume(Var(x), a), self.consume(Var(y), b)))
            case Sum(a, b):
                x, y = self.fresh("x"), self.fresh("y")
                return Case(m, x, self.consume(Var(x), a), y, self.consume(Var(y), b))
            case Lollipop(a, b):
                x = self.fresh("x")
                return Let(x, App(m, self.canonical(a, [])), self.consume(Var(x), b))
            case Zero():
                return Initial(Unit(), m)
        # intuitionistic: drop it through a let
        x = self.fresh("x")
        return Let(x, m, Star())

    # ------------------------------------------------------------ configurations

    def configuration(self, depth: int = 4) -> tuple[dict, LabelledDiagram, Term, Type]:
        """A random well-typed configuration (q, S, m, A).

        S is built by a few random gates on fresh inputs; m consumes a random
        subset of S's outputs.
        """
        rng = self.rng
        fresh = dg.FreshLabels(0)
        n_in = rng.randint(0, 3)
        q = {fresh(): rng.choice(["qubit", "qubit", "bit"]) for _ in range(n_in)}
        s = dg.identity(q)
        sig = dg.demo_signature()
        for _ in range(rng.randint(0, 3)):
            qubits = [l for l, w in s.cod if w == "qubit"]
            choices = ["new"] + (["h", "meas"] if qubits else []) + (["cnot"] if len(qubits) >= 2 else [])
            g = sig.generators[rng.choice(choices)]
            picked = rng.sample(qubits, len(g.ins))
            tup = _tuple_of(picked)
            s, _ = dg.apply_generator(s, g, tup, fresh)
        outs = list(s.cod)
        used = [Res(l, Wire(w), label=True) for l, w in outs if rng.random() < 0.6]
        t = self.type()
        m = self.term(t, used, [], depth)
        return q, s, m, t


def _tuple_of(labels: list[str]) -> Term:
    if not labels:
        return Star()
    out: Term = Label(labels[-1])
    for l in reversed(labels[:-1]):
        out = Pair(Label(l), out)
    return out


def closed_terms(n: int, seed: int = 0, diagrams: bool = True, depth: int = 4, max_depth: int = 7) -> list[tuple[Term, Type]]:
    """``n`` closed terms paired with their intended types, of depth at most ``max_depth``."""
    from .syntax import term_depth

    gen = TermGenerator(seed, diagrams=diagrams)
    out: list[tuple[Term, Type]] = []
    while len(out) < n:
        t = gen.type()
        m = gen.term(t, [], [], depth)
        if term_depth(m) <= max_depth:
            out.append((m, t))
    return out


def configurations(n: int, seed: int = 0, max_depth: int = 7) -> list[tuple[dict, LabelledDiagram, Term, Type]]:
    """``n`` random configurations whose terms have depth at most ``max_depth``."""
    from .syntax import term_depth

    gen = TermGenerator(seed)
    out = []
    while len(out) < n:
        c = gen.configuration(gen.rng.choice([1, 2, 3]))
        if term_depth(c[2]) <= max_depth:
            out.append(c)
    return out
