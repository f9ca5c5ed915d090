from eclnl.corpus import (
    ADEQUACY_DIVERGING,
    ADEQUACY_TERMINATING,
    REC_TERMS,
    carrier_bound,
    corpus,
    curated_programs,
    generated_programs,
)
from eclnl.oracle import carrier_size, is_diagram_free
from eclnl.parser import parse_program, parse_term, parse_type
from eclnl.typechecker import check


def test_corpus_has_500_distinctly_named_programs():
    progs = corpus()
    assert len(progs) == 500
    assert len({p.name for p in progs}) == 500
    names = {p.name for p in progs}
    assert {"hadamard", "constructivity", "diverge"} <= names


def test_every_corpus_program_parses_and_typechecks():
    for p in corpus():
        prog = parse_program(p.text, base_dir=p.base_dir)
        check({}, {}, prog.term, None, prog.signature.constants)
        if p.diagram_free:
            assert is_diagram_free(prog.term)


def test_generation_is_deterministic():
    a = generated_programs(20, 5, True)
    b = generated_programs(20, 5, True)
    assert [p.text for p in a] == [p.text for p in b]
    assert len(curated_programs()) == 21


def test_carrier_bound_is_an_upper_bound():
    for text in ["I", "I + I", "!(I + I)", "I + I -o I", "(I + I) * (I + I)", "!(I -o I)"]:
        t = parse_type(text)
        assert carrier_size(t) <= carrier_bound(t)


def test_curated_term_lists_are_large_enough():
    assert len(ADEQUACY_TERMINATING) >= 30 and len(ADEQUACY_DIVERGING) >= 10 and len(REC_TERMS) >= 20
    for text in REC_TERMS:
        assert check({}, {}, parse_term(text), None, {}).rule == "rec"
