"""Big-step evaluation of configurations (S, m).

The big-step rules are run by an explicit-stack machine so deep recursion in
object programs never hits Python's recursion limit.  Each time a term is
scheduled for evaluation one unit of fuel is spent; running out yields
`FuelExhausted` instead of a value.  Evaluation is left to right in every
rule with two premises.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator

from . import diagrams as dg
from .diagrams import FreshLabels, LabelledDiagram, Signature
from .syntax import (
    App,
    Apply,
    Box,
    BoxedDiag,
    Case,
    Const,
    Force,
    Initial,
    Label,
    Lambda,
    Left,
    Let,
    LetPair,
    Lift,
    Pair,
    Rec,
    Right,
    Seq,
    Star,
    Term,
    Type,
    Var,
    children,
    is_label_tuple,
    is_value,
    max_label_index,
    substitute,
    substitute_many,
    tuple_labels,
)

DEFAULT_FUEL = 100_000


def default_fuel() -> int:
    raw = os.environ.get("ECLNL_FUEL")
    if raw is None:
        return DEFAULT_FUEL
    value = int(raw)
    if value < 1:
        raise ValueError("ECLNL_FUEL must be a positive integer")
    return value


@dataclass(frozen=True)
class Configuration:
    diagram: LabelledDiagram
    term: Term
    fresh: int | None = None  # next label index; None means "after every label already present"

    def next_label(self) -> int:
        if self.fresh is not None:
            return self.fresh
        return 1 + max(self.diagram.max_label_index(), max_label_index(self.term))


@dataclass(frozen=True)
class Value:
    diagram: LabelledDiagram
    term: Term
    steps: int
    fresh: int

    @property
    def configuration(self) -> Configuration:
        return Configuration(self.diagram, self.term, self.fresh)


@dataclass(frozen=True)
class Error:
    rule: str
    detail: str
    steps: int = 0


@dataclass(frozen=True)
class FuelExhausted:
    steps: int


Outcome = Value | Error | FuelExhausted


class _Stuck(Exception):
    def __init__(self, rule: str, detail: str):
        self.rule, self.detail = rule, detail


# continuation frames
@dataclass(frozen=True)
class _LetK:
    name: str
    body: Term


@dataclass(frozen=True)
class _CaseK:
    left_name: str
    left_body: Term
    right_name: str
    right_body: Term


@dataclass(frozen=True)
class _SeqK:
    second: Term


@dataclass(frozen=True)
class _PairFstK:
    second: Term


@dataclass(frozen=True)
class _PairSndK:
    first: Term


@dataclass(frozen=True)
class _LetPairK:
    left_name: str
    right_name: str
    body: Term


@dataclass(frozen=True)
class _AppFunK:
    arg: Term


@dataclass(frozen=True)
class _AppArgK:
    fun: Term


@dataclass(frozen=True)
class _InjK:
    left: bool
    left_type: Type | None
    right_type: Type | None


@dataclass(frozen=True)
class _InitialK:
    pass


@dataclass(frozen=True)
class _ForceK:
    pass


@dataclass(frozen=True)
class _BoxK:
    type: Type


@dataclass(frozen=True)
class _BoxDoneK:
    outer: LabelledDiagram
    inputs: Term


@dataclass(frozen=True)
class _ApplyFunK:
    arg: Term


@dataclass(frozen=True)
class _ApplyArgK:
    boxed: Term


class _Machine:
    def __init__(self, signature: Signature, diagram: LabelledDiagram, fresh: FreshLabels, fuel: int):
        self.signature = signature
        self.diagram = diagram
        self.fresh = fresh
        self.fuel = fuel
        self.steps = 0

    def run(self, term: Term) -> Outcome:
        stack: list = []
        mode, cur = "eval", term
        try:
            while True:
                if mode == "eval":
                    if self.steps >= self.fuel:
                        return FuelExhausted(self.steps)
                    self.steps += 1
                    mode, cur = self.step(cur, stack)
                else:
                    if not stack:
                        return Value(self.diagram, cur, self.steps, self.fresh.next_index)
                    mode, cur = self.resume(stack.pop(), cur, stack)
        except _Stuck as stuck:
            return Error(stuck.rule, stuck.detail, self.steps)

    def step(self, m: Term, stack: list) -> tuple[str, Term]:
        match m:
            case Var(x):
                raise _Stuck("var", f"free variable {x!r} during evaluation")
            case Const() | Star() | Lambda() | Lift() | Label() | BoxedDiag():
                return "ret", m
            case Let(x, a, b):
                stack.append(_LetK(x, b))
                return "eval", a
            case Initial(_, a):
                stack.append(_InitialK())
                return "eval", a
            case Left(ta, tb, a) | Right(ta, tb, a):
                if is_value(a) and not _has_var_head(a):
                    return "ret", m
                stack.append(_InjK(isinstance(m, Left), ta, tb))
                return "eval", a
            case Case(s, x, n, y, p):
                stack.append(_CaseK(x, n, y, p))
                return "eval", s
            case Seq(a, b):
                stack.append(_SeqK(b))
                return "eval", a
            case Pair(a, b):
                if is_value(m) and not _has_var_head(m):
                    return "ret", m
                stack.append(_PairFstK(b))
                return "eval", a
            case LetPair(x, y, a, b):
                stack.append(_LetPairK(x, y, b))
                return "eval", a
            case App(f, a):
                stack.append(_AppFunK(a))
                return "eval", f
            case Force(a):
                stack.append(_ForceK())
                return "eval", a
            case Box(t, a):
                stack.append(_BoxK(t))
                return "eval", a
            case Apply(f, a):
                stack.append(_ApplyFunK(a))
                return "eval", f
            case Rec(x, _, b):
                return "eval", substitute(b, Lift(m), x)
        raise _Stuck("term", f"not a term: {m!r}")

    def resume(self, k, v: Term, stack: list) -> tuple[str, Term]:
        match k:
            case _LetK(x, body):
                return "eval", substitute(body, v, x)
            case _InitialK():
                raise _Stuck("initial", "a value of the empty type was produced")
            case _InjK(is_left, ta, tb):
                return "ret", (Left if is_left else Right)(ta, tb, v)
            case _CaseK(x, n, y, p):
                match v:
                    case Left(_, _, w):
                        return "eval", substitute(n, w, x)
                    case Right(_, _, w):
                        return "eval", substitute(p, w, y)
                raise _Stuck("case", f"case of a non-injection {_short(v)}")
            case _SeqK(second):
                if not isinstance(v, Star):
                    raise _Stuck("seq", f"sequencing expects *, got {_short(v)}")
                return "eval", second
            case _PairFstK(second):
                stack.append(_PairSndK(v))
                return "eval", second
            case _PairSndK(first):
                return "ret", Pair(first, v)
            case _LetPairK(x, y, body):
                if not isinstance(v, Pair):
                    raise _Stuck("let-pair", f"let-pair of a non-pair {_short(v)}")
                return "eval", substitute_many(body, {x: v.first, y: v.second})
            case _AppFunK(arg):
                stack.append(_AppArgK(v))
                return "eval", arg
            case _AppArgK(f):
                match f:
                    case Lambda(x, _, body):
                        return "eval", substitute(body, v, x)
                    case Const(c):
                        return "ret", self.apply_generator(c, v)
                raise _Stuck("app", f"application of a non-function {_short(f)}")
            case _ForceK():
                if not isinstance(v, Lift):
                    raise _Stuck("force", f"force of a non-lift value {_short(v)}")
                return "eval", v.body
            case _BoxK(t):
                if not isinstance(v, Lift):
                    raise _Stuck("box", f"box of a non-lift value {_short(v)}")
                ports, labels = dg.freshlabels(t, self.fresh)
                stack.append(_BoxDoneK(self.diagram, labels))
                self.diagram = dg.identity(ports)
                return "eval", App(v.body, labels)
            case _BoxDoneK(outer, inputs):
                inner = self.diagram
                self.diagram = outer
                if not is_label_tuple(v):
                    raise _Stuck("box", f"boxed function returned a non-label value {_short(v)}")
                outs = tuple_labels(v)
                if len(set(outs)) != len(outs) or set(outs) != set(inner.cod_context) or len(outs) != len(inner.cod):
                    raise _Stuck("box", "boxed function's result does not name exactly the diagram outputs")
                return "ret", BoxedDiag(inputs, inner, v)
            case _ApplyFunK(arg):
                stack.append(_ApplyArgK(v))
                return "eval", arg
            case _ApplyArgK(boxed):
                if not isinstance(boxed, BoxedDiag):
                    raise _Stuck("apply", f"apply of a non-diagram {_short(boxed)}")
                result = dg.append(self.diagram, v, boxed.inputs, boxed.diagram, boxed.outputs, self.fresh)
                if result is None:
                    raise _Stuck("apply", f"append undefined for inputs {_short(v)}")
                self.diagram, out = result
                return "ret", out
        raise AssertionError(k)

    def apply_generator(self, name: str, arg: Term) -> Term:
        g = self.signature.generators.get(name)
        if g is None:
            raise _Stuck("app", f"unknown generator {name!r}")
        result = dg.apply_generator(self.diagram, g, arg, self.fresh)
        if result is None:
            raise _Stuck("app", f"generator {name} applied to {_short(arg)}, which does not match its input wires")
        self.diagram, out = result
        return out


def _has_var_head(m: Term) -> bool:
    # values may still contain free variables in open terms; evaluate those so the var rule reports them
    match m:
        case Var():
            return True
        case Pair(a, b):
            return _has_var_head(a) or _has_var_head(b)
        case Left(_, _, a) | Right(_, _, a):
            return _has_var_head(a)
    return False


def _short(m: Term, limit: int = 60) -> str:
    text = str(m)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def evaluate(c: Configuration, fuel: int = DEFAULT_FUEL, signature: Signature | None = None) -> Outcome:
    """Run configuration ``c`` with at most ``fuel`` evaluation steps."""
    if fuel < 1:
        raise ValueError("fuel must be positive")
    sig = signature or dg.demo_signature()
    return _Machine(sig, c.diagram, FreshLabels(c.next_label()), fuel).run(c.term)


def run_term(m: Term, fuel: int = DEFAULT_FUEL, signature: Signature | None = None) -> Outcome:
    """Evaluate a closed term from the empty configuration."""
    return evaluate(Configuration(dg.identity({}), m, 0), fuel, signature)


def boxed_values(m: Term) -> Iterator[BoxedDiag]:
    """Every boxed diagram occurring in ``m``, left to right."""
    if isinstance(m, BoxedDiag):
        yield m
        return
    for k in children(m):
        yield from boxed_values(k)


@dataclass
class RunResult:
    type: Type
    outcome: Outcome
    diagram: LabelledDiagram | None = None
    boxed: list[BoxedDiag] = field(default_factory=list)
    pretty: str = ""


def run_program(program, signature: Signature | None = None, fuel: int | None = None) -> RunResult:
    """Typecheck then evaluate a parsed program from the empty configuration.

    Raises `TypeCheckError` without evaluating when the program is ill typed.
    """
    from .typechecker import check

    sig = signature or program.signature
    fuel = default_fuel() if fuel is None else fuel
    term = program.term
    derivation = check({}, {}, term, None, sig.constants)
    outcome = evaluate(Configuration(dg.identity({}), term, 0), fuel, sig)
    result = RunResult(derivation.type, outcome)
    if isinstance(outcome, Value):
        result.diagram = outcome.diagram
        result.boxed = list(boxed_values(outcome.term))
        result.pretty = str(outcome.term)
    return result
