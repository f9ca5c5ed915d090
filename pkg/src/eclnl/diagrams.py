"""Labelled string diagrams over a symmetric monoidal signature.

A `Diagram` is an acyclic port graph with ordered input and output ports;
wire crossings carry no structure, so symmetry is free.  A
`LabelledDiagram` names its boundary ports with labels, making it a morphism
between label contexts.  Every constructor validates linearity (each pin and
each port has exactly one wire), wire-type agreement and acyclicity.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .syntax import (
    Label,
    Lollipop,
    Pair,
    Star,
    Tensor,
    Term,
    Type,
    Unit,
    Wire,
    is_label_tuple,
    tensor_of,
    tuple_labels,
)

Endpoint = tuple  # ("in", i) | ("out", i) | ("node", id, pin)

KEYWORDS = frozenset(
    "let in case of left right box apply lift force rec initial def type signature Diag I".split()
)


class DiagramError(Exception):
    pass


class LabelClash(DiagramError):
    pass


class BoundaryMismatch(DiagramError):
    pass


class SignatureError(Exception):
    pass


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class Generator:
    name: str
    ins: tuple[str, ...]
    outs: tuple[str, ...]

    @property
    def type(self) -> Type:
        return Lollipop(tensor_of(Wire(w) for w in self.ins), tensor_of(Wire(w) for w in self.outs))


class Signature:
    """Wire types and generators; each generator g: ins -> outs is exposed to
    programs as a constant of type tensor(ins) -o tensor(outs)."""

    def __init__(self, wires: Iterable[str], generators: Iterable[Generator | tuple]):
        self.wires = frozenset(wires)
        self.generators: dict[str, Generator] = {}
        for g in generators:
            if not isinstance(g, Generator):
                name, ins, outs = g
                g = Generator(name, tuple(ins), tuple(outs))
            if g.name in self.generators:
                raise SignatureError(f"duplicate generator {g.name!r}")
            if g.name in KEYWORDS:
                raise SignatureError(f"generator name {g.name!r} is a keyword")
            for w in g.ins + g.outs:
                if w not in self.wires:
                    raise SignatureError(f"generator {g.name!r} uses undeclared wire type {w!r}")
            self.generators[g.name] = g
        for w in self.wires:
            if w in KEYWORDS:
                raise SignatureError(f"wire type name {w!r} is a keyword")

    @property
    def constants(self) -> dict[str, Type]:
        return {name: g.type for name, g in self.generators.items()}

    def __repr__(self) -> str:
        return f"Signature(wires={sorted(self.wires)}, generators={list(self.generators)})"

    def to_json(self) -> dict:
        return {
            "wires": sorted(self.wires),
            "generators": [
                {"name": g.name, "ins": list(g.ins), "outs": list(g.outs)} for g in self.generators.values()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Signature":
        try:
            gens = [Generator(g["name"], tuple(g["ins"]), tuple(g["outs"])) for g in data["generators"]]
            return cls(data["wires"], gens)
        except (KeyError, TypeError) as exc:
            raise SignatureError(f"malformed signature: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "Signature":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def demo_signature() -> Signature:
    """The built-in qubit signature used when a program names none."""
    return Signature(
        ["qubit", "bit"],
        [
            ("h", ["qubit"], ["qubit"]),
            ("cnot", ["qubit", "qubit"], ["qubit", "qubit"]),
            ("new", [], ["qubit"]),
            ("meas", ["qubit"], ["bit"]),
            ("free", ["qubit"], []),
            ("discard", ["bit"], []),
        ],
    )


# ---------------------------------------------------------------- port graphs


@dataclass(frozen=True)
class Node:
    id: int
    gen: str
    ins: tuple[str, ...]
    outs: tuple[str, ...]


@dataclass(frozen=True)
class Diagram:
    dom: tuple[str, ...]
    cod: tuple[str, ...]
    nodes: tuple[Node, ...]
    wires: tuple[tuple[Endpoint, Endpoint], ...]  # (source, sink), sorted

    def __post_init__(self):
        _validate(self)

    def node(self, nid: int) -> Node:
        return self.nodes[nid]

    @property
    def incoming(self) -> dict[Endpoint, Endpoint]:
        return {dst: src for src, dst in self.wires}

    @property
    def outgoing(self) -> dict[Endpoint, Endpoint]:
        return {src: dst for src, dst in self.wires}


def _make_diagram(dom, cod, nodes, wires, check: bool = True) -> Diagram:
    args = (tuple(dom), tuple(cod), tuple(nodes), tuple(sorted(wires)))
    if check:
        return Diagram(*args)
    # tensor and compose of valid diagrams are valid; skip the graph walk
    d = object.__new__(Diagram)
    for f, v in zip(("dom", "cod", "nodes", "wires"), args):
        object.__setattr__(d, f, v)
    return d


def _validate(d: Diagram) -> None:
    for i, n in enumerate(d.nodes):
        if n.id != i:
            raise DiagramError(f"node ids must be 0..n-1 in order, got {n.id} at {i}")
    sources: dict[Endpoint, str] = {("in", i): w for i, w in enumerate(d.dom)}
    sinks: dict[Endpoint, str] = {("out", i): w for i, w in enumerate(d.cod)}
    for n in d.nodes:
        for p, w in enumerate(n.outs):
            sources[("node", n.id, p)] = w
        for p, w in enumerate(n.ins):
            sinks[("node", n.id, p)] = w
    seen_src: set = set()
    seen_dst: set = set()
    for src, dst in d.wires:
        if src not in sources:
            raise DiagramError(f"wire from unknown source {src}")
        if dst not in sinks:
            raise DiagramError(f"wire into unknown sink {dst}")
        if src in seen_src:
            raise DiagramError(f"source {src} has two wires")
        if dst in seen_dst:
            raise DiagramError(f"sink {dst} has two wires")
        if sources[src] != sinks[dst]:
            raise DiagramError(f"wire {src}->{dst} joins {sources[src]} to {sinks[dst]}")
        seen_src.add(src)
        seen_dst.add(dst)
    if len(seen_src) != len(sources) or len(seen_dst) != len(sinks):
        raise DiagramError("dangling pin or port")
    # Kahn's algorithm over node-to-node wires
    indeg = [0] * len(d.nodes)
    succ: list[list[int]] = [[] for _ in d.nodes]
    for src, dst in d.wires:
        if src[0] == "node" and dst[0] == "node":
            succ[src[1]].append(dst[1])
            indeg[dst[1]] += 1
    ready = [i for i, k in enumerate(indeg) if k == 0]
    done = 0
    while ready:
        i = ready.pop()
        done += 1
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    if done != len(d.nodes):
        raise DiagramError("diagram has a cycle")


# ---------------------------------------------------------------- labelled diagrams


@dataclass(frozen=True)
class LabelledDiagram:
    """A diagram whose input and output ports are named by labels.

    ``dom``/``cod`` list (label, wire type) in port order.
    """

    dom: tuple[tuple[str, str], ...]
    cod: tuple[tuple[str, str], ...]
    under: Diagram

    def __post_init__(self):
        for side, ports, types in (("dom", self.dom, self.under.dom), ("cod", self.cod, self.under.cod)):
            labels = [l for l, _ in ports]
            if len(set(labels)) != len(labels):
                raise LabelClash(f"repeated label in {side}: {labels}")
            if tuple(w for _, w in ports) != types:
                raise DiagramError(f"{side} labels disagree with port wire types")

    @property
    def dom_context(self) -> dict[str, str]:
        return dict(self.dom)

    @property
    def cod_context(self) -> dict[str, str]:
        return dict(self.cod)

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self.under.nodes

    def max_label_index(self) -> int:
        best = -1
        for l, _ in self.dom + self.cod:
            if l.startswith("#l") and l[2:].isdigit():
                best = max(best, int(l[2:]))
        return best

    def boxed_key(self, ins: Term, outs: Term) -> tuple:
        """Key of a boxed value (ins, self, outs) invariant under label renaming."""
        dpos = {l: i for i, (l, _) in enumerate(self.dom)}
        cpos = {l: i for i, (l, _) in enumerate(self.cod)}
        return (_shape_key(ins, dpos), canonical_form(self), _shape_key(outs, cpos))

    def __repr__(self) -> str:
        return f"LabelledDiagram(dom={list(self.dom)}, cod={list(self.cod)}, nodes={[n.gen for n in self.nodes]})"


def _shape_key(t: Term, pos: Mapping[str, int]):
    match t:
        case Label(name):
            return ("l", pos.get(name, name))
        case Star():
            return ("*",)
        case Pair(a, b):
            return ("p", _shape_key(a, pos), _shape_key(b, pos))
    return ("?", repr(t))


def _ports(q) -> tuple[tuple[str, str], ...]:
    if isinstance(q, Mapping):
        return tuple(q.items())
    return tuple((l, w) for l, w in q)


def identity(q) -> LabelledDiagram:
    ports = _ports(q)
    wires = [(("in", i), ("out", i)) for i in range(len(ports))]
    types = [w for _, w in ports]
    return LabelledDiagram(ports, ports, _make_diagram(types, types, [], wires))


def generator_diagram(g: Generator, ins: Sequence[str], outs: Sequence[str]) -> LabelledDiagram:
    """One-node labelled diagram for generator ``g`` with the given boundary labels."""
    node = Node(0, g.name, g.ins, g.outs)
    wires = [(("in", i), ("node", 0, i)) for i in range(len(g.ins))]
    wires += [(("node", 0, j), ("out", j)) for j in range(len(g.outs))]
    under = _make_diagram(g.ins, g.outs, [node], wires)
    return LabelledDiagram(tuple(zip(ins, g.ins)), tuple(zip(outs, g.outs)), under)


def _shift(e: Endpoint, din: int, dout: int, dnode: int) -> Endpoint:
    if e[0] == "in":
        return ("in", e[1] + din)
    if e[0] == "out":
        return ("out", e[1] + dout)
    return ("node", e[1] + dnode, e[2])


def tensor(s: LabelledDiagram, d: LabelledDiagram) -> LabelledDiagram:
    """Side-by-side juxtaposition; boundaries must be label-disjoint."""
    if set(s.dom_context) & set(d.dom_context):
        raise LabelClash(f"input labels overlap: {sorted(set(s.dom_context) & set(d.dom_context))}")
    if set(s.cod_context) & set(d.cod_context):
        raise LabelClash(f"output labels overlap: {sorted(set(s.cod_context) & set(d.cod_context))}")
    a, b = s.under, d.under
    n = len(a.nodes)
    nodes = list(a.nodes) + [Node(x.id + n, x.gen, x.ins, x.outs) for x in b.nodes]
    wires = list(a.wires) + [
        (_shift(src, len(a.dom), len(a.cod), n), _shift(dst, len(a.dom), len(a.cod), n)) for src, dst in b.wires
    ]
    under = _make_diagram(a.dom + b.dom, a.cod + b.cod, nodes, wires, check=False)
    return LabelledDiagram(s.dom + d.dom, s.cod + d.cod, under)


def compose(s: LabelledDiagram, d: LabelledDiagram) -> LabelledDiagram:
    """Sequential composition s ; d, glued along equal labels."""
    if s.cod_context != d.dom_context:
        raise BoundaryMismatch(f"cannot compose: {dict(s.cod)} vs {dict(d.dom)}")
    a, b = s.under, d.under
    n = len(a.nodes)
    a_in = a.incoming
    out_index = {l: i for i, (l, _) in enumerate(s.cod)}
    nodes = list(a.nodes) + [Node(x.id + n, x.gen, x.ins, x.outs) for x in b.nodes]
    wires = [(src, dst) for src, dst in a.wires if dst[0] != "out"]
    for src, dst in b.wires:
        dst2 = dst if dst[0] == "out" else ("node", dst[1] + n, dst[2])
        if src[0] == "in":
            label = d.dom[src[1]][0]
            src2 = a_in[("out", out_index[label])]
        else:
            src2 = ("node", src[1] + n, src[2])
        wires.append((src2, dst2))
    under = _make_diagram(a.dom, b.cod, nodes, wires, check=False)
    return LabelledDiagram(s.dom, d.cod, under)


def relabel(s: LabelledDiagram, dom_map: Mapping[str, str], cod_map: Mapping[str, str]) -> LabelledDiagram:
    dom = tuple((dom_map.get(l, l), w) for l, w in s.dom)
    cod = tuple((cod_map.get(l, l), w) for l, w in s.cod)
    return LabelledDiagram(dom, cod, s.under)


# ---------------------------------------------------------------- fresh labels, append


class FreshLabels:
    """Monotone source of labels ``#l0, #l1, ...``; one per evaluation."""

    def __init__(self, start: int = 0):
        self.next_index = start

    def __call__(self) -> str:
        name = f"#l{self.next_index}"
        self.next_index += 1
        return name


def freshlabels(t: Type, gen: FreshLabels) -> tuple[tuple[tuple[str, str], ...], Term]:
    """Fresh label context Q and tuple l with  .; Q |- l : t."""
    ports: list[tuple[str, str]] = []

    def walk(u: Type) -> Term:
        match u:
            case Wire(name):
                label = gen()
                ports.append((label, name))
                return Label(label)
            case Unit():
                return Star()
            case Tensor(a, b):
                left = walk(a)
                return Pair(left, walk(b))
        raise ValueError(f"freshlabels needs an M-type, got {u!r}")

    tup = walk(t)
    return tuple(ports), tup


def _same_shape(k: Term, l: Term) -> bool:
    match (k, l):
        case (Label(), Label()) | (Star(), Star()):
            return True
        case (Pair(a, b), Pair(c, e)):
            return _same_shape(a, c) and _same_shape(b, e)
    return False


def _fresh_copy(t: Term, gen: FreshLabels, renaming: dict[str, str]) -> Term:
    match t:
        case Label(name):
            renaming[name] = gen()
            return Label(renaming[name])
        case Star():
            return Star()
        case Pair(a, b):
            left = _fresh_copy(a, gen, renaming)
            return Pair(left, _fresh_copy(b, gen, renaming))
    raise ValueError(t)


def append(
    s2: LabelledDiagram, k: Term, l: Term, d: LabelledDiagram, l2: Term, gen: FreshLabels
) -> tuple[LabelledDiagram, Term] | None:
    """Paste the boxed diagram (l, d, l2) onto the outputs k of s2.

    Returns the new diagram and the tuple of fresh labels naming d's outputs,
    or None when the boundaries do not line up.
    """
    if not (is_label_tuple(k) and is_label_tuple(l) and is_label_tuple(l2)):
        return None
    k_labels, l_labels, l2_labels = tuple_labels(k), tuple_labels(l), tuple_labels(l2)
    dom, cod = d.dom_context, d.cod_context
    if len(set(l_labels)) != len(l_labels) or set(l_labels) != set(dom) or len(l_labels) != len(dom):
        return None
    if len(set(l2_labels)) != len(l2_labels) or set(l2_labels) != set(cod) or len(l2_labels) != len(cod):
        return None
    if len(set(k_labels)) != len(k_labels) or not _same_shape(k, l):
        return None
    avail = s2.cod_context
    for kl, ll in zip(k_labels, l_labels):
        if avail.get(kl) != dom[ll]:
            return None
    out_map: dict[str, str] = {}
    k2 = _fresh_copy(l2, gen, out_map)
    d2 = relabel(d, dict(zip(l_labels, k_labels)), out_map)
    taken = set(k_labels)
    rest = tuple((lab, w) for lab, w in s2.cod if lab not in taken)
    return compose(s2, tensor(identity(rest), d2)), k2


def apply_generator(s: LabelledDiagram, g: Generator, k: Term, gen: FreshLabels) -> tuple[LabelledDiagram, Term] | None:
    """Inline append of a generator's one-node diagram onto the outputs k of s."""
    if not is_label_tuple(k) or not _same_shape_type(k, tensor_of(Wire(w) for w in g.ins)):
        return None
    k_labels = tuple_labels(k)
    if len(set(k_labels)) != len(k_labels):
        return None
    avail = s.cod_context
    if any(avail.get(kl) != w for kl, w in zip(k_labels, g.ins)):
        return None
    out_ports, out_tuple = freshlabels(tensor_of(Wire(w) for w in g.outs), gen)
    box = generator_diagram(g, k_labels, [lab for lab, _ in out_ports])
    taken = set(k_labels)
    rest = tuple((lab, w) for lab, w in s.cod if lab not in taken)
    return compose(s, tensor(identity(rest), box)), out_tuple


def _same_shape_type(k: Term, t: Type) -> bool:
    match (k, t):
        case (Label(), Wire()) | (Star(), Unit()):
            return True
        case (Pair(a, b), Tensor(c, e)):
            return _same_shape_type(a, c) and _same_shape_type(b, e)
    return False


# ---------------------------------------------------------------- equality


def canonical_form(s: LabelledDiagram | Diagram) -> tuple:
    """Complete isomorphism invariant respecting ordered boundaries.

    Nodes reachable from the boundary are numbered by a traversal that starts
    at the ordered ports and follows pins in order, so the numbering is
    canonical.  Closed components get the minimum encoding over all roots.
    """
    d = s.under if isinstance(s, LabelledDiagram) else s
    inc, out = d.incoming, d.outgoing
    order: dict[int, int] = {}
    queue: deque[int] = deque()

    def see(e: Endpoint):
        if e[0] == "node" and e[1] not in order:
            order[e[1]] = len(order)
            queue.append(e[1])

    def drain():
        while queue:
            nid = queue.popleft()
            n = d.nodes[nid]
            for p in range(len(n.ins)):
                see(inc[("node", nid, p)])
            for p in range(len(n.outs)):
                see(out[("node", nid, p)])

    for i in range(len(d.dom)):
        see(out[("in", i)])
    for j in range(len(d.cod)):
        see(inc[("out", j)])
    drain()
    main = _encode(d, order, inc)

    rest = [n.id for n in d.nodes if n.id not in order]
    components: list[tuple] = []
    while rest:
        comp_nodes = _component(d, rest[0], inc, out)
        best = None
        for root in sorted(comp_nodes):
            local: dict[int, int] = {}
            q2: deque[int] = deque([root])
            local[root] = 0
            while q2:
                nid = q2.popleft()
                n = d.nodes[nid]
                nbrs = [inc[("node", nid, p)] for p in range(len(n.ins))]
                nbrs += [out[("node", nid, p)] for p in range(len(n.outs))]
                for e in nbrs:
                    if e[0] == "node" and e[1] not in local:
                        local[e[1]] = len(local)
                        q2.append(e[1])
            enc = _encode(d, local, inc)
            if best is None or enc < best:
                best = enc
        components.append(best)
        rest = [r for r in rest if r not in comp_nodes]
    return (d.dom, d.cod, main, tuple(sorted(components)))


def _component(d: Diagram, start: int, inc, out) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        nid = stack.pop()
        n = d.nodes[nid]
        for e in [inc[("node", nid, p)] for p in range(len(n.ins))] + [out[("node", nid, p)] for p in range(len(n.outs))]:
            if e[0] == "node" and e[1] not in seen:
                seen.add(e[1])
                stack.append(e[1])
    return seen


def _encode(d: Diagram, order: Mapping[int, int], inc) -> tuple:
    def ren(e: Endpoint):
        if e[0] == "node":
            return ("node", order[e[1]], e[2])
        return e

    by_rank = sorted(order, key=order.get)
    nodes = []
    for nid in by_rank:
        n = d.nodes[nid]
        srcs = tuple(ren(inc[("node", nid, p)]) for p in range(len(n.ins)))
        nodes.append((n.gen, n.ins, n.outs, srcs))
    outs = tuple(ren(inc[("out", j)]) if inc[("out", j)][0] != "node" or inc[("out", j)][1] in order else None
                 for j in range(len(d.cod))) if order is not None else ()
    return (tuple(nodes), outs)


def diagram_eq(a: LabelledDiagram, b: LabelledDiagram) -> bool:
    """Equality up to renaming of labels and node ids, respecting port order."""
    return canonical_form(a) == canonical_form(b)


def brute_force_isomorphic(a: LabelledDiagram, b: LabelledDiagram) -> bool:
    """Reference check by trying every node bijection; tiny diagrams only."""
    x, y = a.under, b.under
    if x.dom != y.dom or x.cod != y.cod or len(x.nodes) != len(y.nodes):
        return False
    target = set(y.wires)
    for perm in itertools.permutations(range(len(y.nodes))):
        if any(
            (x.nodes[i].gen, x.nodes[i].ins, x.nodes[i].outs) != (y.nodes[j].gen, y.nodes[j].ins, y.nodes[j].outs)
            for i, j in enumerate(perm)
        ):
            continue

        def m(e):
            return ("node", perm[e[1]], e[2]) if e[0] == "node" else e

        if {(m(s), m(t)) for s, t in x.wires} == target:
            return True
    return False


# ---------------------------------------------------------------- serialization


def to_json(s: LabelledDiagram) -> dict:
    return {
        "dom": [[l, w] for l, w in s.dom],
        "cod": [[l, w] for l, w in s.cod],
        "nodes": [[n.id, n.gen] for n in s.nodes],
        "edges": [[list(src), list(dst)] for src, dst in s.under.wires],
    }


def from_json(data: Mapping, signature: Signature) -> LabelledDiagram:
    try:
        dom = tuple((l, w) for l, w in data["dom"])
        cod = tuple((l, w) for l, w in data["cod"])
        nodes = []
        for nid, gname in data["nodes"]:
            if gname not in signature.generators:
                raise DiagramError(f"unknown generator {gname!r}")
            g = signature.generators[gname]
            nodes.append(Node(int(nid), gname, g.ins, g.outs))
        nodes.sort(key=lambda n: n.id)
        wires = [(_endpoint(src), _endpoint(dst)) for src, dst in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DiagramError):
            raise
        raise DiagramError(f"malformed diagram JSON: {exc}") from exc
    under = _make_diagram([w for _, w in dom], [w for _, w in cod], nodes, wires)
    return LabelledDiagram(dom, cod, under)


def _endpoint(e) -> Endpoint:
    if e[0] in ("in", "out") and len(e) == 2:
        return (e[0], int(e[1]))
    if e[0] == "node" and len(e) == 3:
        return ("node", int(e[1]), int(e[2]))
    raise DiagramError(f"bad endpoint {e!r}")


def emit(s: LabelledDiagram, format: str = "json") -> str:
    if format == "json":
        return json.dumps(to_json(s), separators=(", ", ": "))
    if format == "dot":
        return to_dot(s)
    raise ValueError(f"unknown diagram format {format!r}")


def load(text: str, signature: Signature) -> LabelledDiagram:
    return from_json(json.loads(text), signature)


def to_dot(s: LabelledDiagram, name: str = "diagram") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for i, (l, w) in enumerate(s.dom):
        lines.append(f'  in{i} [shape=plaintext, label="{l}:{w}"];')
    for j, (l, w) in enumerate(s.cod):
        lines.append(f'  out{j} [shape=plaintext, label="{l}:{w}"];')
    for n in s.nodes:
        lines.append(f'  n{n.id} [shape=box, label="{n.gen}"];')
    types = {("in", i): w for i, (_, w) in enumerate(s.dom)}
    for n in s.nodes:
        for p, w in enumerate(n.outs):
            types[("node", n.id, p)] = w

    def dot_name(e: Endpoint) -> str:
        return f"{e[0]}{e[1]}" if e[0] != "node" else f"n{e[1]}"

    for src, dst in s.under.wires:
        attrs = [f'label="{types[src]}"']
        if src[0] == "node":
            attrs.append(f'taillabel="{src[2]}"')
        if dst[0] == "node":
            attrs.append(f'headlabel="{dst[2]}"')
        lines.append(f"  {dot_name(src)} -> {dot_name(dst)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
