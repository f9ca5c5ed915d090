"""Linear typechecking by usage synthesis.

Each subterm reports the linear variables and labels it consumes.  Rules
with several premises demand the premises' reports be disjoint; binders
demand their linear variable was consumed; ``lift``, ``rec`` and boxed
diagrams demand an empty report.  Intuitionistic variables never appear in
reports, so they may be used any number of times.  Because every rule's
context split is determined by what its premises consume, this is complete
for the declarative rules.

Annotations on ``left``/``right``/``initial`` may be omitted wherever an
expected type flows in from the context.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .syntax import (
    App,
    Apply,
    Bang,
    Box,
    BoxedDiag,
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
    free_labels,
    is_intuitionistic,
    is_label_tuple,
    tuple_labels,
)

ERROR_KINDS = frozenset(
    {
        "LinearVarUnused",
        "LinearVarReused",
        "LabelUnused",
        "LabelReused",
        "LinearVarInIntuitionisticPosition",
        "TypeMismatch",
        "UnknownVariable",
        "UnknownConstant",
        "UnknownLabel",
        "NotAFunction",
        "NotABang",
        "NotADiag",
        "CaseBranchResourceMismatch",
        "MissingAnnotation",
        "DuplicateBinder",
        "DanglingLabel",
    }
)


class TypeCheckError(Exception):
    def __init__(self, kind: str, span: Span | None, detail: str, name: str | None = None, type: Type | None = None):
        assert kind in ERROR_KINDS, kind
        self.kind, self.span, self.detail = kind, span, detail
        self.name, self.type = name, type
        super().__init__(f"{kind}: {detail}")

    def as_dict(self) -> dict:
        span = self.span or Span(1, 1, 1)
        return {"kind": self.kind, "span": span.as_dict(), "detail": self.detail}

    def __str__(self) -> str:
        where = f"{self.span.line}:{self.span.col}: " if self.span else ""
        return f"{where}{self.kind}: {self.detail}"


@dataclass(frozen=True)
class Derivation:
    """One node of a typing derivation.

    ``context`` is every variable in scope at this node, innermost last;
    ``used_vars``/``used_labels`` are the linear resources this subtree
    consumes.
    """

    rule: str
    term: Term
    type: Type
    context: tuple[tuple[str, Type], ...]
    used_vars: frozenset[str]
    used_labels: frozenset[str]
    premises: tuple["Derivation", ...] = field(default=())

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


def _fmt(t: Type) -> str:
    return str(t)


class _Checker:
    def __init__(self, constants: Mapping[str, Type], labels: Mapping[str, str]):
        self.constants = constants
        self.labels = dict(labels)

    def err(self, kind, m: Term, detail, name=None, type=None) -> TypeCheckError:
        return TypeCheckError(kind, m.span, detail, name, type)

    def disjoint(self, m: Term, *parts: Derivation) -> tuple[frozenset[str], frozenset[str]]:
        vs: frozenset[str] = frozenset()
        ls: frozenset[str] = frozenset()
        for d in parts:
            clash = vs & d.used_vars
            if clash:
                x = min(clash)
                raise self.err("LinearVarReused", d.term, f"linear variable {x!r} is used more than once", name=x)
            lclash = ls & d.used_labels
            if lclash:
                l = min(lclash)
                raise self.err("LabelReused", d.term, f"label {l} is used more than once", name=l)
            vs |= d.used_vars
            ls |= d.used_labels
        return vs, ls

    def bind(self, m: Term, ctx: tuple, body: Derivation, *names: tuple[str, Type]) -> frozenset[str]:
        used = body.used_vars
        for x, t in names:
            if not is_intuitionistic(t) and x not in used:
                raise self.err("LinearVarUnused", m, f"linear variable {x!r} : {_fmt(t)} is never used", x, t)
        return used - {x for x, _ in names}

    def require_closed(self, m: Term, d: Derivation, rule: str):
        if d.used_vars:
            x = min(d.used_vars)
            raise self.err(
                "LinearVarInIntuitionisticPosition",
                m,
                f"{rule} body uses linear variable {x!r}; only intuitionistic variables may occur here",
                name=x,
            )
        if d.used_labels:
            l = min(d.used_labels)
            raise self.err(
                "LinearVarInIntuitionisticPosition", m, f"{rule} body consumes label {l}; the label context must be empty", name=l
            )

    def check(self, ctx: tuple, m: Term, expected: Type | None) -> Derivation:
        d = self.synth(ctx, m, expected)
        if expected is not None and d.type != expected:
            raise self.err("TypeMismatch", m, f"expected {_fmt(expected)}, found {_fmt(d.type)}", type=d.type)
        return d

    def lookup(self, ctx: tuple, x: str) -> Type | None:
        for name, t in reversed(ctx):
            if name == x:
                return t
        return None

    def node(self, rule, m, t, ctx, used_vars=frozenset(), used_labels=frozenset(), *premises) -> Derivation:
        return Derivation(rule, m, t, ctx, frozenset(used_vars), frozenset(used_labels), tuple(premises))

    def synth(self, ctx: tuple, m: Term, expected: Type | None) -> Derivation:
        match m:
            case Var(x):
                t = self.lookup(ctx, x)
                if t is None:
                    raise self.err("UnknownVariable", m, f"unbound variable {x!r}", name=x)
                return self.node("var", m, t, ctx, frozenset() if is_intuitionistic(t) else {x})
            case Const(c):
                if c not in self.constants:
                    raise self.err("UnknownConstant", m, f"no generator named {c!r} in the signature", name=c)
                return self.node("const", m, self.constants[c], ctx)
            case Label(l):
                if l not in self.labels:
                    raise self.err("UnknownLabel", m, f"label {l} is not in the label context", name=l)
                return self.node("label", m, Wire(self.labels[l]), ctx, (), {l})
            case Star():
                return self.node("*", m, Unit(), ctx)
            case Let(x, a, b):
                da = self.check(ctx, a, None)
                inner = ctx + ((x, da.type),)
                db = self.check(inner, b, expected)
                body_used = self.bind(m, inner, db, (x, da.type))
                shadow = Derivation(db.rule, db.term, db.type, db.context, body_used, db.used_labels, db.premises)
                vs, ls = self.disjoint(m, da, shadow)
                return self.node("let", m, db.type, ctx, vs, ls, da, db)
            case Initial(c, a):
                target = c if c is not None else expected
                if target is None:
                    raise self.err("MissingAnnotation", m, "initial needs a result type annotation here")
                da = self.check(ctx, a, Zero())
                return self.node("initial", m, target, ctx, da.used_vars, da.used_labels, da)
            case Left(ta, tb, a) | Right(ta, tb, a):
                is_left = isinstance(m, Left)
                if ta is None or tb is None:
                    if not isinstance(expected, Sum):
                        word = "left" if is_left else "right"
                        raise self.err("MissingAnnotation", m, f"{word} needs annotations [A, B] here")
                    ta, tb = expected.left, expected.right
                da = self.check(ctx, a, ta if is_left else tb)
                return self.node("left" if is_left else "right", m, Sum(ta, tb), ctx, da.used_vars, da.used_labels, da)
            case Case(s, x, n, y, p):
                ds = self.check(ctx, s, None)
                if not isinstance(ds.type, Sum):
                    raise self.err("TypeMismatch", s, f"case scrutinee must have a sum type, found {_fmt(ds.type)}", type=ds.type)
                ta, tb = ds.type.left, ds.type.right
                lctx, rctx = ctx + ((x, ta),), ctx + ((y, tb),)
                try:
                    dn = self.check(lctx, n, expected)
                    dp = self.check(rctx, p, dn.type)
                except TypeCheckError as exc:
                    if exc.kind != "MissingAnnotation" or expected is not None:
                        raise
                    dp = self.check(rctx, p, None)
                    dn = self.check(lctx, n, dp.type)
                un = self.bind(n, lctx, dn, (x, ta))
                up = self.bind(p, rctx, dp, (y, tb))
                if un != up or dn.used_labels != dp.used_labels:
                    diff = sorted((un ^ up) | (dn.used_labels ^ dp.used_labels))
                    raise self.err(
                        "CaseBranchResourceMismatch", m, f"case branches consume different linear resources: {', '.join(diff)}"
                    )
                branch = Derivation(dn.rule, dn.term, dn.type, dn.context, un, dn.used_labels, dn.premises)
                vs, ls = self.disjoint(m, ds, branch)
                return self.node("case", m, dn.type, ctx, vs, ls, ds, dn, dp)
            case Seq(a, b):
                da = self.check(ctx, a, Unit())
                db = self.check(ctx, b, expected)
                vs, ls = self.disjoint(m, da, db)
                return self.node("seq", m, db.type, ctx, vs, ls, da, db)
            case Pair(a, b):
                ea, eb = (expected.left, expected.right) if isinstance(expected, Tensor) else (None, None)
                da = self.check(ctx, a, ea)
                db = self.check(ctx, b, eb)
                vs, ls = self.disjoint(m, da, db)
                return self.node("pair", m, Tensor(da.type, db.type), ctx, vs, ls, da, db)
            case LetPair(x, y, a, b):
                if x == y:
                    raise self.err("DuplicateBinder", m, f"pattern binds {x!r} twice", name=x)
                da = self.check(ctx, a, None)
                if not isinstance(da.type, Tensor):
                    raise self.err("TypeMismatch", a, f"let-pair needs a tensor type, found {_fmt(da.type)}", type=da.type)
                inner = ctx + ((x, da.type.left), (y, da.type.right))
                db = self.check(inner, b, expected)
                body_used = self.bind(m, inner, db, (x, da.type.left), (y, da.type.right))
                shadow = Derivation(db.rule, db.term, db.type, db.context, body_used, db.used_labels, db.premises)
                vs, ls = self.disjoint(m, da, shadow)
                return self.node("let-pair", m, db.type, ctx, vs, ls, da, db)
            case Lambda(x, t, b):
                res = expected.res if isinstance(expected, Lollipop) and expected.arg == t else None
                inner = ctx + ((x, t),)
                db = self.check(inner, b, res)
                used = self.bind(m, inner, db, (x, t))
                return self.node("abs", m, Lollipop(t, db.type), ctx, used, db.used_labels, db)
            case App(f, a):
                df = self.check(ctx, f, None)
                if not isinstance(df.type, Lollipop):
                    raise self.err("NotAFunction", f, f"applied term has type {_fmt(df.type)}, not a function type", type=df.type)
                da = self.check(ctx, a, df.type.arg)
                vs, ls = self.disjoint(m, df, da)
                return self.node("app", m, df.type.res, ctx, vs, ls, df, da)
            case Lift(a):
                inner_expected = expected.body if isinstance(expected, Bang) else None
                da = self.check(ctx, a, inner_expected)
                self.require_closed(m, da, "lift")
                return self.node("lift", m, Bang(da.type), ctx, (), (), da)
            case Force(a):
                da = self.check(ctx, a, Bang(expected) if expected is not None else None)
                if not isinstance(da.type, Bang):
                    raise self.err("NotABang", a, f"force needs a !-type, found {_fmt(da.type)}", type=da.type)
                return self.node("force", m, da.type.body, ctx, da.used_vars, da.used_labels, da)
            case Box(t, a):
                want = Bang(Lollipop(t, expected.cod)) if isinstance(expected, Diag) and expected.dom == t else None
                da = self.check(ctx, a, want)
                if not isinstance(da.type, Bang):
                    raise self.err("NotABang", a, f"box needs a term of type !({_fmt(t)} -o U), found {_fmt(da.type)}", type=da.type)
                fn = da.type.body
                if not isinstance(fn, Lollipop) or fn.arg != t:
                    raise self.err("TypeMismatch", a, f"box[{_fmt(t)}] needs !({_fmt(t)} -o U), found {_fmt(da.type)}", type=da.type)
                try:
                    result = Diag(t, fn.res)
                except ValueError:
                    raise self.err("TypeMismatch", a, f"boxed function must return an M-type, found {_fmt(fn.res)}", type=fn.res)
                return self.node("box", m, result, ctx, da.used_vars, da.used_labels, da)
            case Apply(f, a):
                df = self.check(ctx, f, None)
                if not isinstance(df.type, Diag):
                    raise self.err("NotADiag", f, f"apply needs a Diag type, found {_fmt(df.type)}", type=df.type)
                da = self.check(ctx, a, df.type.dom)
                vs, ls = self.disjoint(m, df, da)
                return self.node("apply", m, df.type.cod, ctx, vs, ls, df, da)
            case BoxedDiag(ins, d, outs):
                dom_t = self._tuple_type(m, ins, dict(d.dom))
                cod_t = self._tuple_type(m, outs, dict(d.cod))
                return self.node("diag", m, Diag(dom_t, cod_t), ctx)
            case Rec(x, t, b):
                if not isinstance(t, Bang):
                    raise self.err("NotABang", m, f"rec variable must be annotated with a !-type, found {_fmt(t)}", type=t)
                inner = ctx + ((x, t),)
                db = self.check(inner, b, t.body)
                self.require_closed(m, db, "rec")
                return self.node("rec", m, t.body, ctx, (), (), db)
        raise TypeError(f"not a term: {m!r}")

    def _tuple_type(self, m: Term, tup: Term, ports: Mapping[str, str]) -> Type:
        if not is_label_tuple(tup):
            raise self.err("TypeMismatch", m, "boxed diagram boundary must be a label tuple")
        labels = tuple_labels(tup)
        if len(set(labels)) != len(labels):
            raise self.err("LabelReused", m, "boxed diagram boundary repeats a label")
        if set(labels) != set(ports):
            raise self.err("UnknownLabel", m, "boxed diagram boundary does not enumerate the diagram's ports")

        def walk(u: Term) -> Type:
            match u:
                case Label(l):
                    return Wire(ports[l])
                case Star():
                    return Unit()
                case Pair(a, b):
                    return Tensor(walk(a), walk(b))
            raise AssertionError(u)

        return walk(tup)


def check(
    gamma: Mapping[str, Type] | None,
    q: Mapping[str, str] | None,
    m: Term,
    expected: Type | None = None,
    constants: Mapping[str, Type] | None = None,
) -> Derivation:
    """Decide gamma; q |- m : expected and return the derivation.

    With ``expected=None`` the type is synthesized.  Every linear variable of
    gamma and every label of q must be consumed exactly once.
    """
    if constants is None:
        from .diagrams import demo_signature

        constants = demo_signature().constants
    gamma = dict(gamma or {})
    q = dict(q or {})
    ctx = tuple(gamma.items())
    d = _Checker(constants, q).check(ctx, m, expected)
    for x, t in gamma.items():
        if not is_intuitionistic(t) and x not in d.used_vars:
            raise TypeCheckError("LinearVarUnused", m.span, f"linear variable {x!r} : {_fmt(t)} is never used", x, t)
    for l in q:
        if l not in d.used_labels:
            raise TypeCheckError("LabelUnused", m.span, f"label {l} is never used", l)
    return d


def type_of(m: Term, constants: Mapping[str, Type] | None = None) -> Type:
    return check({}, {}, m, None, constants).type


def check_configuration(
    q: Mapping[str, str], s, m: Term, a: Type, constants: Mapping[str, Type] | None = None
) -> tuple[dict[str, str], dict[str, str]]:
    """Check the configuration (s, m) with inputs q at type a.

    Returns (Q', Q'') where Q'' are the outputs of s that m consumes and Q'
    the outputs left untouched.
    """
    if dict(s.dom) != dict(q):
        raise ValueError(f"diagram inputs {dict(s.dom)} differ from q = {dict(q)}")
    cod = dict(s.cod)
    dangling = free_labels(m) - set(cod)
    if dangling:
        l = min(dangling)
        raise TypeCheckError("DanglingLabel", m.span, f"label {l} is not an output of the diagram", l)
    fl = free_labels(m)
    q2 = {l: w for l, w in cod.items() if l in fl}
    q1 = {l: w for l, w in cod.items() if l not in fl}
    check({}, q2, m, a, constants)
    return q1, q2
