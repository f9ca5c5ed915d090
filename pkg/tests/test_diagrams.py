import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import diagram_enum as de
from eclnl import diagrams as dg
from eclnl.diagrams import BoundaryMismatch, Diagram, DiagramError, FreshLabels, LabelClash, LabelledDiagram, Node
from eclnl.generate import TermGenerator
from eclnl.syntax import Label, Pair, Star, Tensor, Unit, Wire

SIG = dg.demo_signature()
Q = "qubit"


def gate(name, ins, outs):
    return dg.generator_diagram(SIG.generators[name], ins, outs)


def random_diagram(seed: int) -> LabelledDiagram:
    _, s, _, _ = TermGenerator(seed).configuration(1)
    return s


def permute_nodes(s: LabelledDiagram, perm) -> LabelledDiagram:
    u = s.under
    nodes = sorted((Node(perm[n.id], n.gen, n.ins, n.outs) for n in u.nodes), key=lambda n: n.id)

    def m(e):
        return ("node", perm[e[1]], e[2]) if e[0] == "node" else e

    wires = tuple(sorted((m(a), m(b)) for a, b in u.wires))
    return LabelledDiagram(s.dom, s.cod, Diagram(u.dom, u.cod, tuple(nodes), wires))


# ---------------------------------------------------------------- construction


def test_identity_serializes_empty():
    doc = dg.to_json(dg.identity({}))
    assert doc == {"dom": [], "cod": [], "nodes": [], "edges": []}


def test_one_gate_dot_has_one_box():
    dot = dg.to_dot(gate("h", ["a"], ["b"]))
    assert dot.startswith("digraph")
    assert dot.count("shape=box") == 1


def test_validation_rejects_bad_wiring():
    h = SIG.generators["h"]
    node = Node(0, "h", h.ins, h.outs)
    with pytest.raises(DiagramError):  # output pin dangling
        Diagram((Q,), (Q,), (node,), ((("in", 0), ("node", 0, 0)),))
    with pytest.raises(DiagramError):  # self loop is a cycle
        Diagram((), (), (node,), ((("node", 0, 0), ("node", 0, 0)),))
    with pytest.raises(DiagramError):  # bit wire into a qubit pin
        Diagram(("bit",), (Q,), (node,), ((("in", 0), ("node", 0, 0)), (("node", 0, 0), ("out", 0))))


def test_tensor_requires_disjoint_labels():
    with pytest.raises(LabelClash):
        dg.tensor(dg.identity({"a": Q}), dg.identity({"a": Q}))


def test_compose_glues_by_label():
    s = gate("h", ["a"], ["b"])
    with pytest.raises(BoundaryMismatch):
        dg.compose(s, gate("h", ["c"], ["d"]))
    hh = dg.compose(s, gate("h", ["b"], ["c"]))
    assert [n.gen for n in hh.nodes] == ["h", "h"]
    assert hh.dom == (("a", Q),) and hh.cod == (("c", Q),)


def test_freshlabels_mirror_the_type():
    gen = FreshLabels(3)
    ports, tup = dg.freshlabels(Tensor(Wire(Q), Tensor(Unit(), Wire("bit"))), gen)
    assert ports == (("#l3", Q), ("#l4", "bit"))
    assert tup == Pair(Label("#l3"), Pair(Star(), Label("#l4")))
    assert gen.next_index == 5


def test_append_pastes_onto_chosen_outputs():
    gen = FreshLabels(10)
    s = dg.identity({"x": Q, "y": Q})
    box = gate("h", ["i"], ["o"])
    out = dg.append(s, Label("y"), Label("i"), box, Label("o"), gen)
    assert out is not None
    s2, k = out
    assert k == Label("#l10")
    assert dict(s2.cod) == {"x": Q, "#l10": Q}
    assert [n.gen for n in s2.nodes] == ["h"]


def test_append_undefined_on_mismatch():
    gen = FreshLabels(0)
    s = dg.identity({"x": "bit"})
    box = gate("h", ["i"], ["o"])
    assert dg.append(s, Label("x"), Label("i"), box, Label("o"), gen) is None
    assert dg.append(s, Label("nope"), Label("i"), box, Label("o"), gen) is None


def test_apply_generator_matches_append():
    g1, g2 = FreshLabels(5), FreshLabels(5)
    s = dg.identity({"x": Q, "y": Q})
    k = Pair(Label("y"), Label("x"))
    inline, t1 = dg.apply_generator(s, SIG.generators["cnot"], k, g1)
    box = gate("cnot", ["i", "j"], ["o", "p"])
    general, t2 = dg.append(s, k, Pair(Label("i"), Label("j")), box, Pair(Label("o"), Label("p")), g2)
    assert t1 == t2
    assert dg.diagram_eq(inline, general)


# ---------------------------------------------------------------- equality


def test_port_order_matters():
    cnot = gate("cnot", ["a", "b"], ["c", "d"])
    same = dg.relabel(cnot, {}, {})
    swapped_in = LabelledDiagram(
        (("b", Q), ("a", Q)),
        cnot.cod,
        Diagram((Q, Q), (Q, Q), cnot.under.nodes, tuple(sorted(
            ((("in", 1 - e[0][1]), e[1]) if e[0][0] == "in" else e) for e in cnot.under.wires
        ))),
    )
    assert dg.diagram_eq(cnot, same)
    assert not dg.diagram_eq(cnot, swapped_in)
    assert not dg.brute_force_isomorphic(cnot, swapped_in)


def test_closed_components_are_counted():
    scalar = dg.compose(gate("new", [], ["a"]), gate("free", ["a"], []))
    other = dg.compose(dg.compose(gate("new", [], ["a"]), gate("h", ["a"], ["b"])), gate("free", ["b"], []))
    h = gate("h", ["x"], ["y"])
    one = dg.tensor(h, scalar)
    two = dg.tensor(dg.tensor(scalar, h), dg.relabel(scalar, {}, {}))
    assert dg.diagram_eq(one, dg.tensor(dg.relabel(scalar, {}, {}), h))
    assert not dg.diagram_eq(one, two)
    assert not dg.diagram_eq(one, dg.tensor(h, other))
    assert dg.diagram_eq(dg.tensor(scalar, other), dg.tensor(other, scalar))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.randoms(use_true_random=False))
def test_node_renumbering_is_invisible(seed, rnd):
    s = random_diagram(seed)
    perm = list(range(len(s.nodes)))
    rnd.shuffle(perm)
    t = permute_nodes(s, perm)
    assert dg.diagram_eq(s, t)
    assert dg.brute_force_isomorphic(s, t)


def test_canonical_form_agrees_with_brute_force_on_small_diagrams():
    pool = de.all_diagrams()
    rel = de.Relabeller()
    pool += [rel.seq(s, t) for s in pool for t in pool if len(s.cod) == len(t.dom)][:400]
    by_shape: dict = {}
    for s in pool:
        by_shape.setdefault((len(s.dom), len(s.cod), len(s.nodes)), []).append(s)
    checked = 0
    for group in by_shape.values():
        for a, b in itertools.combinations(group[:40], 2):
            assert dg.diagram_eq(a, b) == dg.brute_force_isomorphic(a, b)
            checked += 1
    assert checked > 1000


def test_enumeration_has_no_duplicates():
    for i, o in itertools.product(range(de.MAX_WIDTH + 1), repeat=2):
        group = de.diagrams_of(i, o)
        for a, b in itertools.combinations(group, 2):
            assert not dg.brute_force_isomorphic(a, b)


def test_tensor_laws():
    rel = de.Relabeller()
    pool = de.all_diagrams()
    rng = random.Random(0)
    for _ in range(300):
        s, t, u = rng.choice(pool), rng.choice(pool), rng.choice(pool)
        assert dg.diagram_eq(rel.par(rel.par(s, t), u), rel.par(s, rel.par(t, u)))
        assert dg.diagram_eq(rel.par(de.identity(0), s), s)
        assert dg.diagram_eq(rel.par(s, de.identity(0)), s)


# ---------------------------------------------------------------- serialization


def test_json_round_trip_on_random_diagrams():
    for seed in range(100):
        s = random_diagram(seed)
        text = dg.emit(s, "json")
        back = dg.load(text, SIG)
        assert dg.diagram_eq(back, s)
        assert back.dom == s.dom and back.cod == s.cod
        assert dg.emit(back, "json") == text


def test_load_rejects_unknown_generator():
    text = '{"dom": [], "cod": [], "nodes": [[0, "toffoli"]], "edges": []}'
    with pytest.raises(DiagramError):
        dg.load(text, SIG)


def test_dot_lists_ports_and_nodes():
    s = random_diagram(3)
    dot = dg.emit(s, "dot")
    assert dot.count("shape=box") == len(s.nodes)
    assert dot.count("shape=plaintext") == len(s.dom) + len(s.cod)


def test_tensor_and_compose_build_valid_diagrams():
    # both skip validation for speed, so re-validate their results here
    rel = de.Relabeller()
    pool = de.all_diagrams()
    rng = random.Random(1)
    for _ in range(2000):
        s, t = rng.choice(pool), rng.choice(pool)
        out = [rel.par(s, t)]
        if len(s.cod) == len(t.dom):
            out.append(rel.seq(s, t))
        for r in out:
            u = r.under
            Diagram(u.dom, u.cod, u.nodes, u.wires)
