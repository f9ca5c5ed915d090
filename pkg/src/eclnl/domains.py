"""Finite pointed posets and strict monotone maps.

Elements are plain hashable Python values and ``None`` is the bottom of
every poset.  Carriers are stored in a linear extension of the order with
bottom at index 0, so ``x <= y`` implies ``index(x) <= index(y)``; the order
itself is a numpy boolean matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np

MAX_CARRIER = 10**6
# orders are dense boolean matrices, so memory, not enumeration, is the real limit
MAX_DENSE = 16_000


class CarrierTooLarge(Exception):
    pass


class FinPoset:
    """A finite poset with least element ``None``."""

    def __init__(self, elements: Iterable[Hashable], leq: Callable[[Hashable, Hashable], bool], name: str = ""):
        elems = list(elements)
        if len(elems) > min(MAX_CARRIER, MAX_DENSE):
            raise CarrierTooLarge(f"{name or 'poset'} has {len(elems)} elements")
        if None not in elems:
            elems.insert(0, None)
        n = len(elems)
        mat = np.zeros((n, n), dtype=bool)
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                mat[i, j] = a is None or (b is not None and leq(a, b))
        self._init(elems, mat, name)

    @classmethod
    def from_matrix(cls, elements: Sequence[Hashable], leq: np.ndarray, name: str = "") -> "FinPoset":
        self = cls.__new__(cls)
        self._init(list(elements), np.asarray(leq, dtype=bool), name)
        return self

    def _init(self, elems: list, mat: np.ndarray, name: str):
        n = len(elems)
        if len(set(elems)) != n:
            raise ValueError("repeated element")
        if not np.all(np.diag(mat)):
            raise ValueError("order is not reflexive")
        if np.any(mat & mat.T & ~np.eye(n, dtype=bool)):
            raise ValueError("order is not antisymmetric")
        if n <= 400:
            m = mat.astype(np.int32)
            if np.any(((m @ m) > 0) & ~mat):
                raise ValueError("order is not transitive")
        # reorder into a linear extension: fewer elements below comes first
        below = mat.sum(axis=0)
        order = sorted(range(n), key=lambda i: (below[i], i))
        if elems[order[0]] is not None or not np.all(mat[elems.index(None)]):
            raise ValueError("None must be the least element")
        self.elements: list = [elems[i] for i in order]
        self.leq: np.ndarray = mat[np.ix_(order, order)]
        self.index: dict = {e: i for i, e in enumerate(self.elements)}
        self.name = name

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator:
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.index

    def __repr__(self) -> str:
        return f"FinPoset({self.name or '?'}, {len(self)} elements)"

    @property
    def bottom(self):
        return None

    @property
    def proper(self) -> list:
        """Elements other than bottom."""
        return self.elements[1:]

    def le(self, a, b) -> bool:
        return bool(self.leq[self.index[a], self.index[b]])

    @cached_property
    def height(self) -> int:
        """Length (number of strict steps) of the longest chain."""
        n = len(self)
        h = [0] * n
        for j in range(n):
            preds = [h[i] + 1 for i in range(j) if self.leq[i, j]]
            h[j] = max(preds, default=0)
        return max(h, default=0)

    def is_flat(self) -> bool:
        return int(self.leq.sum()) == 2 * len(self) - 1


@dataclass(frozen=True, eq=False)
class StrictMap:
    """A strict monotone map, stored as a table of codomain indices."""

    dom: FinPoset
    cod: FinPoset
    table: np.ndarray

    def __post_init__(self):
        t = self.table
        if t.shape != (len(self.dom),):
            raise ValueError("table size does not match domain")
        if t[0] != 0:
            raise ValueError("map is not strict")
        if not np.all(~self.dom.leq | self.cod.leq[np.ix_(t, t)]):
            raise ValueError("map is not monotone")

    @classmethod
    def trusted(cls, dom: FinPoset, cod: FinPoset, table: np.ndarray) -> "StrictMap":
        """Skip validation; for tables that are strict and monotone by construction."""
        self = object.__new__(cls)
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "table", table)
        return self

    @classmethod
    def from_fn(cls, dom: FinPoset, cod: FinPoset, fn: Callable) -> "StrictMap":
        table = np.fromiter((cod.index[fn(x)] if x is not None else 0 for x in dom.elements), dtype=np.int64, count=len(dom))
        return cls(dom, cod, table)

    def __call__(self, x):
        return self.cod.elements[self.table[self.dom.index[x]]]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StrictMap)
            and self.dom is other.dom
            and self.cod is other.cod
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self) -> int:
        return hash((id(self.dom), id(self.cod), self.table.tobytes()))

    def __repr__(self) -> str:
        pairs = ", ".join(f"{x!r}->{self(x)!r}" for x in self.dom.proper[:6])
        more = ", ..." if len(self.dom) > 7 else ""
        return f"StrictMap({self.dom.name} -> {self.cod.name}: {pairs}{more})"

    def is_bottom(self) -> bool:
        return not self.table.any()

    def is_total(self) -> bool:
        """Sends every non-bottom element to a non-bottom element."""
        return bool(np.all(self.table[1:] != 0))

    def then(self, g: "StrictMap") -> "StrictMap":
        """Diagrammatic composite: first self, then g."""
        if self.cod is not g.dom:
            raise ValueError(f"cannot compose {self.cod} with {g.dom}")
        return StrictMap.trusted(self.dom, g.cod, g.table[self.table])


def compose(*maps: StrictMap) -> StrictMap:
    """compose(g, f) is g after f."""
    out = maps[-1]
    for g in reversed(maps[:-1]):
        out = out.then(g)
    return out


def identity_map(p: FinPoset) -> StrictMap:
    return StrictMap(p, p, np.arange(len(p)))


def bottom_map(a: FinPoset, b: FinPoset) -> StrictMap:
    return StrictMap(a, b, np.zeros(len(a), dtype=np.int64))


def leq_maps(f: StrictMap, g: StrictMap) -> bool:
    return bool(np.all(f.cod.leq[f.table, g.table]))


def enumerate_strict_tables(dom: FinPoset, cod: FinPoset, limit: int = MAX_CARRIER) -> list[tuple[int, ...]]:
    """All strict monotone maps dom -> cod as index tuples over ``dom.proper``.

    Backtracks along the linear extension, so each element's lower covers are
    already assigned when it is reached.
    """
    n = len(dom)
    preds = [[i for i in range(1, j) if dom.leq[i, j]] for j in range(n)]
    up = cod.leq
    out: list[tuple[int, ...]] = []
    assign = [0] * n

    def go(j: int):
        if j == n:
            out.append(tuple(assign[1:]))
            if len(out) > limit:
                raise CarrierTooLarge(f"more than {limit} strict maps {dom.name} -> {cod.name}")
            return
        ps = preds[j]
        for v in range(len(cod)):
            if all(up[assign[i], v] for i in ps):
                assign[j] = v
                go(j + 1)
        assign[j] = 0

    go(1)
    return out


def strict_maps(dom: FinPoset, cod: FinPoset) -> list[StrictMap]:
    return [StrictMap(dom, cod, np.array((0,) + t, dtype=np.int64)) for t in enumerate_strict_tables(dom, cod)]


def kleene_fixpoint(step: Callable[[StrictMap], StrictMap], start: StrictMap, bound: int | None = None) -> tuple[StrictMap, int]:
    """Iterate ``step`` from ``start`` until it stabilizes; returns (fixpoint, iterations).

    In a finite poset the ascending chain is eventually constant; ``bound``
    guards the claimed chain length.
    """
    cur = start
    for i in range(1, (bound or MAX_CARRIER) + 2):
        nxt = step(cur)
        if nxt == cur:
            return cur, i - 1
        if not leq_maps(cur, nxt):
            raise AssertionError("fixpoint iteration is not increasing")
        cur = nxt
    raise AssertionError(f"fixpoint iteration exceeded its bound {bound}")
