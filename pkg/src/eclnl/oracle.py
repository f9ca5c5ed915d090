"""Finite denotational model of the diagram-free fragment with recursion.

Types denote pointed finite posets and typing derivations denote strict
monotone maps:

* ``0`` is the one-point poset, ``I`` is ``{bottom, *}``;
* ``A + B`` is the coalesced sum and ``A * B`` the smash product;
* ``A -o B`` is the poset of strict monotone maps, ordered pointwise;
* ``!A`` is ``A`` with a fresh bottom added below it.

The last clause is lifting composed with the forgetful functor: the order of
``A`` is kept, only strictness is forgotten.  Intuitionistic types all have
the shape "dcpo plus fresh bottom", which is where discard, copy and lift
live.  A derivation is interpreted clause by clause with those maps, and
``rec`` is interpreted as the least fixpoint reached by Kleene iteration.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domains import (
    MAX_CARRIER,
    MAX_DENSE,
    CarrierTooLarge,
    FinPoset,
    StrictMap,
    bottom_map,
    enumerate_strict_tables,
    identity_map,
    kleene_fixpoint,
)
from .evaluator import FuelExhausted, Value, run_term
from .syntax import (
    Apply,
    Bang,
    Box,
    BoxedDiag,
    Const,
    Diag,
    Initial,
    Label,
    Lambda,
    Left,
    Lollipop,
    Rec,
    Right,
    Sum,
    Tensor,
    Term,
    Type,
    Unit,
    Wire,
    Zero,
    children,
    free_vars,
    is_diagram_free_type,
    is_intuitionistic,
)
from .typechecker import Derivation, check

Ctx = tuple[tuple[str, Type], ...]


class Unsupported(Exception):
    """Raised for wire types, diagram types and diagram terms."""


# ---------------------------------------------------------------- types

_TYPE_CACHE: dict[Type, FinPoset] = {}


def denote_type(t: Type) -> FinPoset:
    p = _TYPE_CACHE.get(t)
    if p is None:
        p = _build(t)
        p.type = t
        _TYPE_CACHE[t] = p
    return p


def _block(*mats: np.ndarray) -> np.ndarray:
    n = 1 + sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=bool)
    out[0, :] = True
    k = 1
    for m in mats:
        s = m.shape[0]
        out[k : k + s, k : k + s] = m
        k += s
    return out


def _build(t: Type) -> FinPoset:
    name = str(t)
    match t:
        case Zero():
            return FinPoset.from_matrix([None], np.ones((1, 1), dtype=bool), name)
        case Unit():
            return FinPoset.from_matrix([None, "*"], np.array([[1, 1], [0, 1]], dtype=bool), name)
        case Sum(a, b):
            pa, pb = denote_type(a), denote_type(b)
            elems = [None] + [("inl", x) for x in pa.proper] + [("inr", y) for y in pb.proper]
            _guard(len(elems), name)
            return FinPoset.from_matrix(elems, _block(pa.leq[1:, 1:], pb.leq[1:, 1:]), name)
        case Tensor(a, b):
            pa, pb = denote_type(a), denote_type(b)
            _guard((len(pa) - 1) * (len(pb) - 1) + 1, name)
            elems = [None] + [("pair", x, y) for x in pa.proper for y in pb.proper]
            return FinPoset.from_matrix(elems, _block(np.kron(pa.leq[1:, 1:], pb.leq[1:, 1:]).astype(bool)), name)
        case Bang(a):
            pa = denote_type(a)
            elems = [None] + [("lift", x) for x in pa.elements]
            _guard(len(elems), name)
            return FinPoset.from_matrix(elems, _block(pa.leq), name)
        case Lollipop(a, b):
            pa, pb = denote_type(a), denote_type(b)
            tables = enumerate_strict_tables(pa, pb, limit=min(MAX_CARRIER, MAX_DENSE))
            elems = [None if not any(tb) else ("fn", tb) for tb in tables]
            arr = np.array(tables, dtype=np.int64).reshape(len(tables), len(pa) - 1)
            mat = np.ones((len(tables), len(tables)), dtype=bool)
            for k in range(arr.shape[1]):
                col = arr[:, k]
                mat &= pb.leq[col[:, None], col[None, :]]
            return FinPoset.from_matrix(elems, mat, name)
        case Wire() | Diag():
            raise Unsupported(f"the finite model has no interpretation of {name}")
    raise TypeError(f"not a type: {t!r}")


def _guard(n: int, name: str):
    if n > min(MAX_CARRIER, MAX_DENSE):
        raise CarrierTooLarge(f"{name} would have {n} elements")


def carrier_size(t: Type) -> int:
    return len(denote_type(t))


# ---------------------------------------------------------------- elements


def smash_pair(a, b):
    return None if a is None or b is None else ("pair", a, b)


def fn_apply(t: Lollipop, f, a):
    if f is None or a is None:
        return None
    pa, pb = denote_type(t.arg), denote_type(t.res)
    return pb.elements[f[1][pa.index[a] - 1]]


def fn_make(t: Lollipop, g: Callable):
    pa, pb = denote_type(t.arg), denote_type(t.res)
    table = tuple(pb.index[g(a)] for a in pa.proper)
    return ("fn", table) if any(table) else None


def ctx_type(types: Sequence[Type]) -> Type:
    """Left-nested tensor of a context; the empty context is I."""
    types = list(types)
    if not types:
        return Unit()
    out = types[0]
    for t in types[1:]:
        out = Tensor(out, t)
    return out


def decode(n: int, e) -> tuple | None:
    """Split an element of a left-nested smash of ``n`` factors."""
    if e is None:
        return None
    if n == 0:
        return ()
    if n == 1:
        return (e,)
    rest = decode(n - 1, e[1])
    return rest + (e[2],)


def encode(comps: Sequence):
    if any(c is None for c in comps):
        return None
    if not comps:
        return "*"
    out = comps[0]
    for c in comps[1:]:
        out = ("pair", out, c)
    return out


# ---------------------------------------------------------------- structure maps


def _require_intuitionistic(p: Type, what: str):
    if not is_intuitionistic(p):
        raise ValueError(f"{what} is only defined on intuitionistic types, not {p}")


def discard(p: Type) -> StrictMap:
    """The map to I sending every proper element to *."""
    _require_intuitionistic(p, "discard")
    return StrictMap.from_fn(denote_type(p), denote_type(Unit()), lambda x: "*")


def copy(p: Type) -> StrictMap:
    _require_intuitionistic(p, "copy")
    return StrictMap.from_fn(denote_type(p), denote_type(Tensor(p, p)), lambda x: ("pair", x, x))


def lift_map(p: Type) -> StrictMap:
    _require_intuitionistic(p, "lift")
    return StrictMap.from_fn(denote_type(p), denote_type(Bang(p)), lambda x: ("lift", x))


def counit(a: Type) -> StrictMap:
    return StrictMap.from_fn(denote_type(Bang(a)), denote_type(a), lambda x: x[1])


def bang_map(f: StrictMap) -> StrictMap:
    a, b = f.dom.type, f.cod.type
    return StrictMap.from_fn(denote_type(Bang(a)), denote_type(Bang(b)), lambda x: ("lift", f(x[1])))


def bottom(a: Type, b: Type) -> StrictMap:
    return bottom_map(denote_type(a), denote_type(b))


def identity(a: Type) -> StrictMap:
    return identity_map(denote_type(a))


_SMASH: dict[tuple[FinPoset, FinPoset], tuple[FinPoset, np.ndarray]] = {}


def _smash(pa: FinPoset, pb: FinPoset) -> tuple[FinPoset, np.ndarray]:
    """The smash product poset and grid[i, j] = index of the pair (i, j), 0 when either is bottom."""
    hit = _SMASH.get((pa, pb))
    if hit is None:
        p = denote_type(Tensor(pa.type, pb.type))
        grid = np.zeros((len(pa), len(pb)), dtype=np.int64)
        for i, x in enumerate(pa.proper, 1):
            for j, y in enumerate(pb.proper, 1):
                grid[i, j] = p.index[("pair", x, y)]
        hit = _SMASH[(pa, pb)] = (p, grid)
    return hit


def tensor_maps(f: StrictMap, g: StrictMap) -> StrictMap:
    dom, dom_grid = _smash(f.dom, g.dom)
    cod, cod_grid = _smash(f.cod, g.cod)
    table = np.zeros(len(dom), dtype=np.int64)
    table[dom_grid] = cod_grid[f.table[:, None], g.table[None, :]]
    return StrictMap.trusted(dom, cod, table)


def evaluation(t: Lollipop) -> StrictMap:
    return StrictMap.from_fn(denote_type(Tensor(t, t.arg)), denote_type(t.res), lambda x: fn_apply(t, x[1], x[2]))


def injection(a: Type, b: Type, left: bool) -> StrictMap:
    src = a if left else b
    tag = "inl" if left else "inr"
    return StrictMap.from_fn(denote_type(src), denote_type(Sum(a, b)), lambda x: (tag, x))


def strict_maps_between(a: Type, b: Type) -> list[StrictMap]:
    pa, pb = denote_type(a), denote_type(b)
    return [StrictMap(pa, pb, np.array((0,) + t, dtype=np.int64)) for t in enumerate_strict_tables(pa, pb)]


def intuitionistic_maps(p1: Type, p2: Type) -> list[StrictMap]:
    """Maps of the form F(f'): strict maps sending no proper element to bottom."""
    _require_intuitionistic(p1, "intuitionistic map")
    _require_intuitionistic(p2, "intuitionistic map")
    return [f for f in strict_maps_between(p1, p2) if f.is_total()]


# ---------------------------------------------------------------- contexts


def _extend(ctx: Ctx, *entries: tuple[str, Type]) -> Ctx:
    names = {x for x, _ in entries}
    return tuple(e for e in ctx if e[0] not in names) + tuple(entries)


def _lookup_last(src: Sequence[tuple[str, Type]], comps: Sequence, name: str):
    for (x, _), c in zip(reversed(src), reversed(comps)):
        if x == name:
            return c
    raise KeyError(name)


def _env_to(src: Sequence[tuple[str, Type]], comps: Sequence, tgt: Ctx):
    """Encode the target context from source components (last binding wins)."""
    return encode([_lookup_last(src, comps, x) for x, _ in tgt])


def rearrange(src: Ctx, targets: Sequence[Ctx]) -> StrictMap:
    """Copy, discard and permute variables of ``src`` into the target contexts.

    Variables shared by several targets go through copy, unused ones through
    discard; both are only legal for intuitionistic types.
    """
    uses = {x: 0 for x, _ in src}
    for tgt in targets:
        for x, _ in tgt:
            uses[x] += 1
    for x, t in src:
        if uses[x] != 1 and not is_intuitionistic(t):
            raise ValueError(f"linear variable {x} would be {'dropped' if uses[x] == 0 else 'copied'}")
    dom = denote_type(ctx_type([t for _, t in src]))
    if len(targets) == 1:
        cod = denote_type(ctx_type([t for _, t in targets[0]]))
    else:
        cod = denote_type(ctx_type([ctx_type([t for _, t in tgt]) for tgt in targets]))

    def fn(e):
        comps = decode(len(src), e)
        parts = [_env_to(src, comps, tgt) for tgt in targets]
        return parts[0] if len(parts) == 1 else encode(parts)

    return StrictMap.from_fn(dom, cod, fn)


# ---------------------------------------------------------------- splitting policies


Policy = Callable[[str, Type, bool, bool], tuple[bool, bool]]


def share_all(name: str, t: Type, need_left: bool, need_right: bool) -> tuple[bool, bool]:
    """Every intuitionistic variable goes to both premises."""
    return True, True


def share_needed(name: str, t: Type, need_left: bool, need_right: bool) -> tuple[bool, bool]:
    """Send intuitionistic variables only where they occur (left if nowhere)."""
    if not (need_left or need_right):
        return True, False
    return need_left, need_right


def random_policy(seed: int) -> Policy:
    rng = random.Random(seed)

    def pick(name, t, need_left, need_right):
        options = [(l, r) for l, r in ((True, True), (True, False), (False, True)) if (l or not need_left) and (r or not need_right)]
        return rng.choice(options)

    return pick


def _split(ctx: Ctx, left: Term, right_fv: frozenset[str], policy: Policy) -> tuple[Ctx, Ctx]:
    lf = free_vars(left)
    lctx, rctx = [], []
    for x, t in ctx:
        need_l, need_r = x in lf, x in right_fv
        if is_intuitionistic(t):
            to_l, to_r = policy(x, t, need_l, need_r)
        else:
            to_l, to_r = need_l, need_r
        if to_l:
            lctx.append((x, t))
        if to_r:
            rctx.append((x, t))
    return tuple(lctx), tuple(rctx)


# ---------------------------------------------------------------- terms


def _types(ctx: Ctx) -> list[Type]:
    return [t for _, t in ctx]


def denote(d: Derivation, ctx: Ctx | None = None, policy: Policy = share_all) -> StrictMap:
    """Interpret derivation ``d`` as a strict map from the context to its type.

    ``ctx`` defaults to the variables of ``d``'s context that are in scope;
    ``policy`` decides how intuitionistic variables are split at rules with
    several premises, which selects one of the many derivations of the same
    judgement.
    """
    if ctx is None:
        seen: set[str] = set()
        kept = []
        for x, t in reversed(d.context):
            if x not in seen:
                seen.add(x)
                kept.append((x, t))
        ctx = tuple(reversed(kept))
    return _Denoter(policy).run(d, ctx)


class _Denoter:
    def __init__(self, policy: Policy):
        self.policy = policy

    def run(self, d: Derivation, ctx: Ctx) -> StrictMap:
        if not is_diagram_free_type(d.type):
            raise Unsupported(f"no finite interpretation of {d.type}")
        m = d.term
        dom = denote_type(ctx_type(_types(ctx)))
        match d.rule:
            case "var":
                return rearrange(ctx, [((m.name, d.type),)])
            case "*":
                return rearrange(ctx, [()])
            case "const" | "label" | "box" | "apply" | "diag":
                raise Unsupported(f"rule ({d.rule}) is outside the diagram-free fragment")
            case "lift":
                inner = self.run(d.premises[0], ctx)
                p = ctx_type(_types(ctx))
                return lift_map(p).then(bang_map(inner))
            case "force":
                inner = self.run(d.premises[0], ctx)
                return inner.then(counit(d.type))
            case "left" | "right":
                inner = self.run(d.premises[0], ctx)
                return inner.then(injection(d.type.left, d.type.right, d.rule == "left"))
            case "initial":
                inner = self.run(d.premises[0], ctx)
                return inner.then(bottom(Zero(), d.type))
            case "abs":
                body_ctx = _extend(ctx, (m.name, m.type))
                g = self.run(d.premises[0], body_ctx)
                src = ctx + ((m.name, m.type),)
                t = d.type

                def curry(e):
                    comps = decode(len(ctx), e)
                    return fn_make(t, lambda a: g(_env_to(src, comps + (a,), body_ctx)))

                return StrictMap.from_fn(dom, denote_type(t), curry)
            case "app" | "pair" | "seq":
                da, db = d.premises
                c1, c2 = _split(ctx, da.term, free_vars(db.term), self.policy)
                fa, fb = self.run(da, c1), self.run(db, c2)
                both = rearrange(ctx, [c1, c2]).then(tensor_maps(fa, fb))
                if d.rule == "pair":
                    return both
                if d.rule == "app":
                    return both.then(evaluation(da.type))
                unitor = StrictMap.from_fn(both.cod, denote_type(d.type), lambda x: x[2])
                return both.then(unitor)
            case "let" | "let-pair":
                da, db = d.premises
                names = (m.name,) if d.rule == "let" else (m.left_name, m.right_name)
                rest_fv = free_vars(db.term) - set(names)
                c1, c2 = _split(ctx, da.term, rest_fv, self.policy)
                fa = self.run(da, c1)
                if d.rule == "let":
                    bound = ((m.name, da.type),)
                else:
                    bound = ((m.left_name, da.type.left), (m.right_name, da.type.right))
                body_ctx = _extend(c2, *bound)
                fb = self.run(db, body_ctx)
                src = c2 + bound
                head = rearrange(ctx, [c1, c2]).then(tensor_maps(fa, identity(ctx_type(_types(c2)))))

                def bind(x):
                    comps = decode(len(c2), x[2])
                    vals = (x[1],) if len(bound) == 1 else (x[1][1], x[1][2])
                    return _env_to(src, comps + vals, body_ctx)

                iso = StrictMap.from_fn(head.cod, denote_type(ctx_type(_types(body_ctx))), bind)
                return head.then(iso).then(fb)
            case "case":
                ds, dn, dp = d.premises
                branch_fv = (free_vars(dn.term) - {m.left_name}) | (free_vars(dp.term) - {m.right_name})
                c1, c2 = _split(ctx, ds.term, branch_fv, self.policy)
                fs = self.run(ds, c1)
                ta, tb = ds.type.left, ds.type.right
                lctx = _extend(c2, (m.left_name, ta))
                rctx = _extend(c2, (m.right_name, tb))
                fn_l, fn_r = self.run(dn, lctx), self.run(dp, rctx)
                head = rearrange(ctx, [c1, c2]).then(tensor_maps(fs, identity(ctx_type(_types(c2)))))

                def branch(x):
                    tag, v = x[1]
                    comps = decode(len(c2), x[2])
                    if tag == "inl":
                        return fn_l(_env_to(c2 + ((m.left_name, ta),), comps + (v,), lctx))
                    return fn_r(_env_to(c2 + ((m.right_name, tb),), comps + (v,), rctx))

                return head.then(StrictMap.from_fn(head.cod, denote_type(d.type), branch))
            case "rec":
                sigma, _ = self.rec_fixpoint(d, ctx)
                return sigma
        raise Unsupported(f"unknown rule {d.rule}")

    def rec_step(self, d: Derivation, ctx: Ctx) -> Callable[[StrictMap], StrictMap]:
        """The operator f -> m o (id * !f) o (id * lift) o copy for ``rec x. m``."""
        m = d.term
        bang_a = m.type
        body_ctx = _extend(ctx, (m.name, bang_a))
        body = self.run(d.premises[0], body_ctx)
        p = ctx_type(_types(ctx))
        front = copy(p).then(tensor_maps(identity(p), lift_map(p)))
        src = ctx + ((m.name, bang_a),)
        iso = StrictMap.from_fn(
            denote_type(Tensor(p, bang_a)),
            denote_type(ctx_type(_types(body_ctx))),
            lambda x: _env_to(src, decode(len(ctx), x[1]) + (x[2],), body_ctx),
        )

        def step(f: StrictMap) -> StrictMap:
            return front.then(tensor_maps(identity(p), bang_map(f))).then(iso).then(body)

        return step

    def rec_fixpoint(self, d: Derivation, ctx: Ctx) -> tuple[StrictMap, int]:
        step = self.rec_step(d, ctx)
        p = ctx_type(_types(ctx))
        pa = denote_type(d.type)
        bound = (len(denote_type(p)) - 1) * pa.height
        return kleene_fixpoint(step, bottom(p, d.type), bound)


def rec_operator(d: Derivation, ctx: Ctx = (), policy: Policy = share_all) -> Callable[[StrictMap], StrictMap]:
    """The Kleene operator of a ``rec`` derivation, for checking fixpoint laws."""
    if d.rule != "rec":
        raise ValueError("not a rec derivation")
    return _Denoter(policy).rec_step(d, ctx)


def rec_iterations(d: Derivation, ctx: Ctx = ()) -> int:
    return _Denoter(share_all).rec_fixpoint(d, ctx)[1]


# ---------------------------------------------------------------- closed terms


def is_diagram_free(m: Term) -> bool:
    match m:
        case Const() | Label() | Box() | Apply() | BoxedDiag():
            return False
        case Lambda(_, t, _) | Rec(_, t, _):
            if not is_diagram_free_type(t):
                return False
        case Left(a, b, _) | Right(a, b, _):
            if any(x is not None and not is_diagram_free_type(x) for x in (a, b)):
                return False
        case Initial(c, _):
            if c is not None and not is_diagram_free_type(c):
                return False
    return all(is_diagram_free(k) for k in children(m))


def denote_term(m: Term | Derivation, expected: Type | None = None, policy: Policy = share_all) -> StrictMap:
    """Denotation of a closed term (or of a derivation) as a map out of I."""
    d = m if isinstance(m, Derivation) else check({}, {}, m, expected, {})
    return denote(d, None, policy)


def value_of(m: Term | Derivation, expected: Type | None = None) -> object:
    """The element of the type picked out by a closed term."""
    return denote_term(m, expected)("*")


@dataclass(frozen=True)
class Verdict:
    status: str  # pass | fail | inconclusive | pass-presumed-divergent
    detail: str = ""
    steps: int = 0

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "pass-presumed-divergent")


def check_soundness(m: Term, a: Type | None = None, fuel: int = 100_000) -> Verdict:
    """Evaluate ``m``; if it terminates, its value must denote what ``m`` denotes."""
    d = check({}, {}, m, a, {})
    source = denote(d)
    outcome = run_term(m, fuel)
    if isinstance(outcome, FuelExhausted):
        return Verdict("inconclusive", f"no value within {fuel} steps", outcome.steps)
    if not isinstance(outcome, Value):
        return Verdict("fail", f"evaluation error {outcome.rule}: {outcome.detail}", outcome.steps)
    target = denote(check({}, {}, outcome.term, d.type, {}))
    if source == target:
        return Verdict("pass", f"both denote {_show(source('*'))}", outcome.steps)
    return Verdict("fail", f"source denotes {_show(source('*'))} but value {outcome.term} denotes {_show(target('*'))}", outcome.steps)


def check_adequacy(m: Term, fuel: int = 100_000) -> Verdict:
    """Termination must coincide with a non-bottom denotation."""
    d = check({}, {}, m, None, {})
    if not is_intuitionistic(d.type):
        raise ValueError(f"adequacy is only claimed at intuitionistic types; {m} has type {d.type}")
    element = denote(d)("*")
    outcome = run_term(m, fuel)
    terminated = isinstance(outcome, Value)
    if not terminated and not isinstance(outcome, FuelExhausted):
        return Verdict("fail", f"evaluation error {outcome.rule}: {outcome.detail}", outcome.steps)
    if element is not None and terminated:
        return Verdict("pass", f"terminates and denotes {_show(element)}", outcome.steps)
    if element is not None:
        return Verdict("fail", f"denotes {_show(element)} but ran out of fuel after {fuel} steps", outcome.steps)
    if terminated:
        return Verdict("fail", f"denotes bottom but terminated with {outcome.term}", outcome.steps)
    return Verdict("pass-presumed-divergent", f"denotes bottom and used all {fuel} steps", outcome.steps)


def describe(f: StrictMap, limit: int = 12) -> list[str]:
    """Readable table of a map, one 'input -> output' line per proper element."""
    rows = [f"{_show(x)} -> {_show(f(x))}" for x in f.dom.proper[:limit]]
    if len(f.dom.proper) > limit:
        rows.append(f"... ({len(f.dom.proper) - limit} more)")
    return rows


def show_element(x, t: Type | None = None) -> str:
    return _show(x)


def _show(x) -> str:
    match x:
        case None:
            return "_|_"
        case "*":
            return "*"
        case ("inl", a):
            return f"inl {_show(a)}"
        case ("inr", a):
            return f"inr {_show(a)}"
        case ("pair", a, b):
            return f"<{_show(a)}, {_show(b)}>"
        case ("lift", a):
            return f"lift {_show(a)}"
        case ("fn", tb):
            return "fn" + str(list(tb))
    return repr(x)
