"""Exhaustive enumeration of small diagrams, shared by the diagram tests.

Over a one-wire signature with ``u: I -> a`` and ``m: a * a -> a`` every
diagram with at most two nodes and boundaries of width at most ``MAX_WIDTH``
is produced once per isomorphism class.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from eclnl import diagrams as dg
from eclnl.diagrams import DiagramError, Generator, LabelledDiagram, Node, Signature

MAX_WIDTH = 2


def signature() -> Signature:
    return Signature(["a"], [Generator("u", (), ("a",)), Generator("m", ("a", "a"), ("a",))])


NODE_SETS = [(), ("u",), ("m",), ("u", "u"), ("u", "m"), ("m", "u"), ("m", "m")]


def _label_ports(prefix: str, n: int):
    return tuple((f"{prefix}{i}", "a") for i in range(n))


@lru_cache(maxsize=None)
def diagrams_of(n_in: int, n_out: int) -> tuple[LabelledDiagram, ...]:
    sig = signature()
    found: dict = {}
    for names in NODE_SETS:
        gens = [sig.generators[n] for n in names]
        nodes = [Node(i, g.name, g.ins, g.outs) for i, g in enumerate(gens)]
        sources = [("in", i) for i in range(n_in)] + [("node", i, p) for i, g in enumerate(gens) for p in range(len(g.outs))]
        sinks = [("out", j) for j in range(n_out)] + [("node", i, p) for i, g in enumerate(gens) for p in range(len(g.ins))]
        if len(sources) != len(sinks):
            continue
        for perm in itertools.permutations(sinks):
            wires = list(zip(sources, perm))
            try:
                under = dg.Diagram(("a",) * n_in, ("a",) * n_out, tuple(nodes), tuple(sorted(wires)))
            except DiagramError:
                continue
            s = LabelledDiagram(_label_ports("i", n_in), _label_ports("o", n_out), under)
            found.setdefault(dg.canonical_form(s), s)
    return tuple(found.values())


def all_diagrams() -> list[LabelledDiagram]:
    return [s for i in range(MAX_WIDTH + 1) for o in range(MAX_WIDTH + 1) for s in diagrams_of(i, o)]


class Relabeller:
    def __init__(self):
        self.counter = itertools.count()

    def fresh(self, s: LabelledDiagram) -> LabelledDiagram:
        """Copy of ``s`` with brand-new labels on both boundaries."""
        dom = {l: f"x{next(self.counter)}" for l, _ in s.dom}
        cod = {l: f"x{next(self.counter)}" for l, _ in s.cod}
        return dg.relabel(s, dom, cod)

    def seq(self, s: LabelledDiagram, t: LabelledDiagram) -> LabelledDiagram:
        """Positional composite s ; t."""
        t = self.fresh(t)
        glue = {l: k for (l, _), (k, _) in zip(t.dom, s.cod)}
        return dg.compose(s, dg.relabel(t, glue, {}))

    def par(self, s: LabelledDiagram, t: LabelledDiagram) -> LabelledDiagram:
        return dg.tensor(self.fresh(s), self.fresh(t))


def identity(n: int) -> LabelledDiagram:
    return dg.identity(_label_ports("e", n))


def check_laws() -> dict[str, tuple[int, list]]:
    """Identity, associativity and interchange over every composable tuple.

    Returns law name -> (instances checked, counterexamples).
    """
    rel = Relabeller()
    pool = all_diagrams()
    eq = dg.diagram_eq
    out: dict[str, tuple[int, list]] = {}

    def record(name, cases, holds):
        bad = [c for c in cases if not holds(*c)]
        out[name] = (len(cases), bad)

    record("compose identity", [(s,) for s in pool],
           lambda s: eq(rel.seq(identity(len(s.dom)), s), s) and eq(rel.seq(s, identity(len(s.cod))), s))
    record("tensor unit", [(s,) for s in pool],
           lambda s: eq(rel.par(identity(0), s), s) and eq(rel.par(s, identity(0)), s))
    pairs = [(s, t) for s in pool for t in pool if len(s.cod) == len(t.dom)]
    triples = [(s, t, u) for s, t in pairs for u in pool if len(t.cod) == len(u.dom)]
    record("compose associativity", triples,
           lambda s, t, u: eq(rel.seq(rel.seq(s, t), u), rel.seq(s, rel.seq(t, u))))
    record("tensor associativity", [(s, t, u) for s in pool for t in pool for u in pool],
           lambda s, t, u: eq(rel.par(rel.par(s, t), u), rel.par(s, rel.par(t, u))))
    record("interchange", [(a, b) for a in pairs for b in pairs],
           lambda a, b: eq(rel.seq(rel.par(a[0], b[0]), rel.par(a[1], b[1])), rel.par(rel.seq(*a), rel.seq(*b))))
    return out
