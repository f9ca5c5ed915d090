import itertools
import random

import numpy as np
import pytest

from eclnl import oracle
from eclnl.domains import (
    CarrierTooLarge,
    FinPoset,
    StrictMap,
    bottom_map,
    compose,
    enumerate_strict_tables,
    identity_map,
    kleene_fixpoint,
    leq_maps,
    strict_maps,
)
from eclnl.parser import parse_type


def flat(n: int) -> FinPoset:
    return FinPoset(range(n), lambda a, b: a == b, f"flat{n}")


def diamond() -> FinPoset:
    # bottom < a, b < top
    order = {("a", "top"), ("b", "top")}
    return FinPoset(["top", "a", "b"], lambda x, y: x == y or (x, y) in order, "diamond")


POSETS = [flat(0), flat(1), flat(2), diamond(), oracle.denote_type(parse_type("!(I + I)")), oracle.denote_type(parse_type("I -o I"))]


def test_bottom_comes_first_and_order_is_a_linear_extension():
    for p in POSETS:
        assert p.elements[0] is None
        n = len(p)
        assert all(not p.leq[j, i] for i in range(n) for j in range(i + 1, n))


def test_invalid_orders_are_rejected():
    not_antisymmetric = np.array([[1, 1, 1], [0, 1, 1], [0, 1, 1]], dtype=bool)
    not_transitive = np.array([[1, 1, 0], [0, 1, 1], [0, 0, 1]], dtype=bool)
    for mat in (not_antisymmetric, not_transitive):
        with pytest.raises(ValueError):
            FinPoset.from_matrix([None, 1, 2], mat)


def test_heights():
    assert flat(3).height == 1
    assert diamond().height == 2
    assert oracle.denote_type(parse_type("!I")).height == 2
    assert flat(0).height == 0


def _brute_force_strict(dom: FinPoset, cod: FinPoset) -> set[tuple]:
    out = set()
    for table in itertools.product(range(len(cod)), repeat=len(dom) - 1):
        full = (0,) + table
        if all(not dom.leq[i, j] or cod.leq[full[i], full[j]] for i in range(len(dom)) for j in range(len(dom))):
            out.add(table)
    return out


@pytest.mark.parametrize("dom", POSETS, ids=lambda p: p.name)
@pytest.mark.parametrize("cod", POSETS, ids=lambda p: p.name)
def test_strict_map_enumeration_matches_brute_force(dom, cod):
    if len(cod) ** (len(dom) - 1) > 50_000:
        pytest.skip("brute force too large")
    tables = enumerate_strict_tables(dom, cod)
    assert len(tables) == len(set(tables))
    assert set(tables) == _brute_force_strict(dom, cod)


def test_strict_map_checks_its_table():
    p = flat(2)
    with pytest.raises(ValueError):  # not strict
        StrictMap(p, p, np.array([1, 1, 2]))
    d = diamond()
    table = np.arange(len(d))
    table[d.index["a"]], table[d.index["top"]] = d.index["top"], d.index["a"]
    with pytest.raises(ValueError):  # a <= top but top <= a fails
        StrictMap(d, d, table)


def test_composition_is_associative_with_identities():
    d = diamond()
    maps = strict_maps(d, d)
    for f, g, h in itertools.islice(itertools.product(maps, repeat=3), 2000):
        assert compose(h, compose(g, f)) == compose(compose(h, g), f)
    for f in maps:
        assert compose(identity_map(d), f) == f == compose(f, identity_map(d))


def _join(p: FinPoset, i: int, j: int) -> int:
    ubs = [k for k in range(len(p)) if p.leq[i, k] and p.leq[j, k]]
    return next(k for k in ubs if all(p.leq[k, u] for u in ubs))


def test_kleene_iteration_finds_the_least_fixpoint():
    # step(f) = base join (g . f . k) is monotone in f on the diamond lattice
    d = diamond()
    maps = strict_maps(d, d)
    rng = random.Random(2)
    for _ in range(60):
        base, g, k = rng.choice(maps), rng.choice(maps), rng.choice(maps)

        def step(f, base=base, g=g, k=k):
            inner = compose(g, f, k).table
            return StrictMap(d, d, np.array([_join(d, int(x), int(y)) for x, y in zip(base.table, inner)]))

        fix, _ = kleene_fixpoint(step, bottom_map(d, d), bound=len(maps))
        fixpoints = [f for f in maps if step(f) == f]
        assert fix in fixpoints
        assert all(leq_maps(fix, f) for f in fixpoints)


def test_kleene_iteration_guards_its_bound():
    p = oracle.denote_type(parse_type("!(!I)"))
    up = StrictMap.from_fn(p, p, lambda x: ("lift", ("lift", None)) if x == ("lift", None) else x)

    def step(f):
        return up

    with pytest.raises(AssertionError):
        kleene_fixpoint(lambda f: up if f.is_bottom() else identity_map(p), bottom_map(p, p), bound=0)
    assert kleene_fixpoint(step, bottom_map(p, p), bound=2)[0] == up


def test_large_carriers_are_refused():
    with pytest.raises(CarrierTooLarge):
        FinPoset(range(10**6 + 1), lambda a, b: a == b)
    with pytest.raises(CarrierTooLarge):
        oracle.denote_type(parse_type("(I + I + I) -o (I + I + I) -o (I + I + I)"))
