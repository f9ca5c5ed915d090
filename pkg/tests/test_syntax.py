import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from eclnl.generate import BOOL, QUBIT, Res, TermGenerator
from eclnl.parser import parse_term
from eclnl.syntax import (
    App,
    Bang,
    Case,
    Diag,
    Lambda,
    Let,
    LetPair,
    Lollipop,
    Rec,
    Star,
    Sum,
    Tensor,
    Unit,
    Var,
    Wire,
    Zero,
    alpha_eq,
    children,
    free_vars,
    is_intuitionistic,
    is_mtype,
    is_value,
    substitute,
    tensor_of,
    term_depth,
)

I = Unit()


def test_intuitionistic_types():
    for t in [Zero(), I, Bang(QUBIT), Diag(QUBIT, QUBIT), Sum(I, Bang(Lollipop(I, I))), Tensor(BOOL, Zero())]:
        assert is_intuitionistic(t), t
    for t in [QUBIT, Lollipop(I, I), Tensor(I, QUBIT), Sum(Lollipop(Zero(), I), I)]:
        assert not is_intuitionistic(t), t


def test_mtypes():
    assert is_mtype(I) and is_mtype(Tensor(QUBIT, Tensor(I, Wire("bit"))))
    assert not is_mtype(BOOL) and not is_mtype(Bang(QUBIT))


def test_tensor_of_nests_right():
    assert tensor_of([QUBIT]) == QUBIT
    assert tensor_of([]) == I
    assert tensor_of([QUBIT, I, QUBIT]) == Tensor(QUBIT, Tensor(I, QUBIT))


def test_values():
    assert is_value(parse_term(r"<lift (rec x:!I. force x), left[I, I] *>"))
    assert not is_value(parse_term("force (lift *)"))
    assert not is_value(parse_term("<*, (\\x:I. x) *>"))


def test_free_vars_respect_binders():
    m = parse_term(r"\x:I. let <a, b> = y in case a of { left u -> x | right v -> u }")
    assert free_vars(m) == {"y", "u"}


def test_substitution_avoids_capture():
    m = parse_term(r"\y:I. x")
    out = substitute(m, Var("y"), "x")
    assert isinstance(out, Lambda) and out.name != "y"
    assert out.body == Var("y")
    assert alpha_eq(out, parse_term(r"\z:I. y"))


def test_substitution_stops_at_shadowing():
    m = parse_term("let x = x in x")
    assert substitute(m, Star(), "x") == Let("x", Star(), Var("x"))


# reference substitution: rename every binder apart, then replace textually


def _rename_apart(m, avoid: set, counter: itertools.count):
    def fresh():
        while True:
            name = f"r{next(counter)}"
            if name not in avoid:
                return name

    def go(m, ren):
        match m:
            case Var(x):
                return Var(ren.get(x, x))
            case Let(x, a, b):
                n = fresh()
                return Let(n, go(a, ren), go(b, {**ren, x: n}))
            case LetPair(x, y, a, b):
                n1, n2 = fresh(), fresh()
                return LetPair(n1, n2, go(a, ren), go(b, {**ren, x: n1, y: n2}))
            case Case(s, x, a, y, b):
                n1, n2 = fresh(), fresh()
                return Case(go(s, ren), n1, go(a, {**ren, x: n1}), n2, go(b, {**ren, y: n2}))
            case Lambda(x, t, b):
                n = fresh()
                return Lambda(n, t, go(b, {**ren, x: n}))
            case Rec(x, t, b):
                n = fresh()
                return Rec(n, t, go(b, {**ren, x: n}))
        return _map_children(m, lambda k: go(k, ren))

    return go(m, {})


def _map_children(m, f):
    import dataclasses

    from eclnl.syntax import Term

    kids = {fl.name: f(getattr(m, fl.name)) for fl in dataclasses.fields(m) if isinstance(getattr(m, fl.name), Term)}
    return dataclasses.replace(m, **kids) if kids else m


def _naive_replace(m, x, v):
    if m == Var(x):
        return v
    return _map_children(m, lambda k: _naive_replace(k, x, v))


def _open_terms(seed):
    gen = TermGenerator(seed, diagrams=False)
    lin = [Res("a", BOOL)]
    intu = [Res("x", Bang(I)), Res("y", I)]
    t = gen.type(1)
    return gen.term(t, lin, intu, 3), gen


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["x", "y", "a"]))
def test_substitution_matches_rename_then_replace(seed, x):
    m, gen = _open_terms(seed)
    v = gen.term(I, [], [Res("a", BOOL), Res("y", I)], 2)  # free names that could be captured
    expected = _naive_replace(_rename_apart(m, free_vars(v) | free_vars(m), itertools.count()), x, v)
    assert alpha_eq(substitute(m, v, x), expected)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_alpha_eq_ignores_binder_names(seed):
    m, _ = _open_terms(seed)
    renamed = _rename_apart(m, free_vars(m), itertools.count(100))
    assert alpha_eq(m, renamed)


def test_alpha_eq_distinguishes_free_names():
    assert not alpha_eq(parse_term(r"\x:I. y"), parse_term(r"\x:I. z"))
    assert not alpha_eq(parse_term(r"\x:I. \y:I. x"), parse_term(r"\x:I. \y:I. y"))


def test_depth_counts_nodes_on_longest_path():
    m = App(Var("f"), App(Var("g"), Star()))
    assert term_depth(m) == 3
    assert len(children(m)) == 2
