import itertools
import random

import pytest

import laws
from eclnl import oracle
from eclnl.diagrams import demo_signature
from eclnl.corpus import ADEQUACY_DIVERGING, REC_TERMS
from eclnl.generate import BOOL, Res, TermGenerator
from eclnl.oracle import Unsupported, check_adequacy, check_soundness, denote, denote_term, value_of
from eclnl.parser import parse_term, parse_type
from eclnl.syntax import Unit, term_depth
from eclnl.typechecker import TypeCheckError, check

I = Unit()


def T(text):
    return parse_type(text)


@pytest.mark.parametrize(
    "text, size",
    [("0", 1), ("I", 2), ("I + I", 3), ("I + I -o I + I", 9), ("!I", 3), ("I * I", 2), ("!(I + I)", 4), ("I -o I", 2)],
)
def test_carrier_sizes(text, size):
    assert oracle.carrier_size(T(text)) == size


def test_wire_types_have_no_denotation():
    with pytest.raises(Unsupported):
        oracle.denote_type(T("qubit"))
    with pytest.raises(Unsupported):
        oracle.denote_type(T("Diag(qubit, qubit)"))
    with pytest.raises(Unsupported):
        denote(check({}, {}, parse_term("lift (box[qubit] (lift h))"), None, demo_signature().constants))


def test_sum_is_coalesced_and_bang_adds_a_bottom():
    s = oracle.denote_type(T("I + I"))
    assert s.height == 1 and s.is_flat
    b = oracle.denote_type(T("!(I + I)"))
    assert b.height == 2
    assert b.le(("lift", None), ("lift", ("inl", "*")))


def test_unit_denotes_the_point():
    assert value_of(parse_term("*")) == "*"


def test_diverging_rec_denotes_bottom():
    f = denote_term(parse_term("rec x:!I. force x"))
    assert f == oracle.bottom(I, I)


def test_force_of_lift_is_the_term_itself():
    assert denote_term(parse_term("force (lift *)")) == denote_term(parse_term("*"))


@pytest.mark.parametrize(
    "text",
    [
        r"(\x:I. x) *",
        "case left[I, I] * of { left x -> x | right y -> y }",
        r"(rec f:!(I + I -o I). \b:I + I. case b of { left u -> u | right u -> force f (left[I, I] u) }) (right[I, I] *)",
    ],
)
def test_soundness_examples(text):
    v = check_soundness(parse_term(text))
    assert v.status == "pass", v


def test_adequacy_examples():
    assert check_adequacy(parse_term("lift (rec x:!I. force x)")).status == "pass"
    # I is intuitionistic, so the bare diverging term is covered too
    assert check_adequacy(parse_term("rec x:!I. force x"), fuel=2000).status == "pass-presumed-divergent"
    with pytest.raises(ValueError):
        check_adequacy(parse_term(r"\x:I. x"))
    v = check_adequacy(parse_term("force (lift (rec x:!(I + I). force x))"), fuel=2000)
    assert v.status == "pass-presumed-divergent"


def test_adequacy_reports_both_failure_directions():
    # a denotation that is not bottom but runs out of fuel
    v = check_adequacy(parse_term(r"(\b:I + I. b) (left[I, I] *)"), fuel=2)
    assert v.status == "fail" and "ran out of fuel" in v.detail


def test_open_derivations_denote_from_their_context():
    d = check({"p": BOOL}, {}, parse_term("case p of { left u -> right[I, I] u | right u -> left[I, I] u }"))
    f = denote(d)
    assert [f(x) for x in f.dom.proper] == [("inr", "*"), ("inl", "*")]


def test_kleene_iteration_respects_its_chain_bound():
    for text in REC_TERMS:
        d = check({}, {}, parse_term(text), None, {})
        assert oracle.rec_iterations(d) <= oracle.denote_type(d.type).height


def test_diverging_adequacy_terms_denote_bottom():
    for text in ADEQUACY_DIVERGING:
        assert value_of(parse_term(text)) is None


# ---------------------------------------------------------------- pointwise reference semantics


def pointwise(d, env):
    """Element denoted by derivation ``d`` in an environment of proper elements."""
    m = d.term
    ps = d.premises
    match d.rule:
        case "var":
            return env[m.name]
        case "*":
            return "*"
        case "lift":
            return ("lift", pointwise(ps[0], env))
        case "force":
            x = pointwise(ps[0], env)
            return None if x is None else x[1]
        case "left" | "right":
            x = pointwise(ps[0], env)
            return None if x is None else ("inl" if d.rule == "left" else "inr", x)
        case "initial":
            assert pointwise(ps[0], env) is None
            return None
        case "abs":
            return oracle.fn_make(d.type, lambda a: pointwise(ps[0], {**env, m.name: a}))
        case "app":
            return oracle.fn_apply(ps[0].type, pointwise(ps[0], env), pointwise(ps[1], env))
        case "pair":
            return oracle.smash_pair(pointwise(ps[0], env), pointwise(ps[1], env))
        case "seq":
            a, b = pointwise(ps[0], env), pointwise(ps[1], env)
            return None if a is None else b
        case "let":
            a = pointwise(ps[0], env)
            return None if a is None else pointwise(ps[1], {**env, m.name: a})
        case "let-pair":
            a = pointwise(ps[0], env)
            return None if a is None else pointwise(ps[1], {**env, m.left_name: a[1], m.right_name: a[2]})
        case "case":
            a = pointwise(ps[0], env)
            if a is None:
                return None
            if a[0] == "inl":
                return pointwise(ps[1], {**env, m.left_name: a[1]})
            return pointwise(ps[2], {**env, m.right_name: a[1]})
        case "rec":
            cur = None
            while True:
                nxt = pointwise(ps[0], {**env, m.name: ("lift", cur)})
                if nxt == cur:
                    return cur
                cur = nxt
    raise AssertionError(d.rule)


def _open_terms(n, seed):
    rng = random.Random(seed)
    pool = [("a", T("I -o I"), False), ("b", BOOL, True), ("p", T("!(I + I)"), True), ("u", I, True)]
    out = []
    while len(out) < n:
        gen = TermGenerator(rng.randrange(10**9), diagrams=False)
        ctx = rng.sample(pool, rng.randint(1, 3))
        lin = [Res(x, t) for x, t, intu in ctx if not intu]
        intu = [Res(x, t) for x, t, intu in ctx if intu]
        t = gen.type()
        if not _small(t):
            continue
        m = gen.term(t, lin, intu, rng.choice([1, 2, 3]))
        if term_depth(m) <= 7:
            out.append(({x: ty for x, ty, _ in ctx}, m))
    return out


def _small(t):
    try:
        return oracle.carrier_size(t) <= 64
    except oracle.CarrierTooLarge:
        return False


def _envs(d):
    names = [x for x, _ in d.context]
    carriers = [oracle.denote_type(t).proper for _, t in d.context]
    for comps in itertools.product(*carriers):
        yield comps, dict(zip(names, comps))


def test_denotation_matches_pointwise_semantics():
    checked = 0
    for gamma, m in _open_terms(250, seed=3):
        d = check(gamma, {}, m, None, {})
        try:
            f = denote(d)
        except oracle.CarrierTooLarge:
            continue
        for comps, env in _envs(d):
            assert f(oracle.encode(comps)) == pointwise(d, env), m
            checked += 1
    assert checked > 500


def test_closed_corpus_terms_match_pointwise_semantics():
    from eclnl.corpus import corpus
    from eclnl.parser import parse_program

    seen = 0
    for p in corpus():
        if not p.diagram_free:
            continue
        d = check({}, {}, parse_program(p.text, base_dir=p.base_dir).term, None, {})
        try:
            f = denote(d)
        except oracle.CarrierTooLarge:
            continue
        assert f("*") == pointwise(d, {})
        seen += 1
    assert seen > 200


# ---------------------------------------------------------------- derivation irrelevance


def every_derivation(d, cap=512):
    """Denotations of ``d`` under every way of splitting intuitionistic variables.

    Walks the tree of policy decisions depth first: each run replays a prefix
    of choices and records how many options each decision point had.
    """
    prefix: list[int] = []
    out = []
    while len(out) < cap:
        record: list[tuple[int, int]] = []

        def policy(name, t, need_l, need_r):
            opts = [(l, r) for l, r in ((True, True), (True, False), (False, True)) if (l or not need_l) and (r or not need_r)]
            i = len(record)
            c = prefix[i] if i < len(prefix) else 0
            record.append((c, len(opts)))
            return opts[c]

        out.append(denote(d, None, policy))
        while record and record[-1][0] + 1 >= record[-1][1]:
            record.pop()
        if not record:
            return out, True
        prefix = [c for c, _ in record[:-1]] + [record[-1][0] + 1]
    return out, False


def test_every_split_gives_the_same_denotation():
    multi = 0
    for gamma, m in _open_terms(300, seed=8):
        if term_depth(m) > 4:
            continue
        d = check(gamma, {}, m, None, {})
        try:
            maps, complete = every_derivation(d)
        except oracle.CarrierTooLarge:
            continue
        assert all(f == maps[0] for f in maps), m
        multi += len(maps) > 1
    assert multi > 30


def test_named_policies_agree():
    for gamma, m in _open_terms(100, seed=13):
        d = check(gamma, {}, m, None, {})
        try:
            ref = denote(d)
        except oracle.CarrierTooLarge:
            continue
        assert denote(d, None, oracle.share_needed) == ref
        assert denote(d, None, oracle.random_policy(1)) == ref


def test_linear_variables_cannot_be_shared():
    with pytest.raises(ValueError):
        oracle.rearrange((("a", T("I -o I")),), [(("a", T("I -o I")),), (("a", T("I -o I")),)])
    with pytest.raises(ValueError):
        oracle.discard(T("I -o I"))


# ---------------------------------------------------------------- structure maps


def test_structure_maps_are_natural():
    bad, seen = laws.naturality()
    assert not bad and seen > 100


def test_bottom_absorbs_composition():
    for a, b, c in itertools.product(laws.small_types(False)[:6], repeat=3):
        for f in oracle.strict_maps_between(a, b):
            assert f.then(oracle.bottom(b, c)) == oracle.bottom(a, c)
            assert oracle.bottom(c, a).then(f) == oracle.bottom(c, b)


def test_rec_is_a_fixpoint_of_its_operator():
    for text in REC_TERMS[:8]:
        d = check({}, {}, parse_term(text), None, {})
        sigma = denote(d)
        assert oracle.rec_operator(d)(sigma) == sigma


def test_typing_is_checked_before_denoting():
    with pytest.raises(TypeCheckError):
        denote_term(parse_term("force *"))
