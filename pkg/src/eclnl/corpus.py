"""Program corpus used by the test-suite and the demos.

The corpus is the hand-written programs shipped in ``eclnl/programs`` topped
up with seeded random programs (printed to source text, so they go through
the parser like any other program).  Curated term lists for adequacy and the
fixpoint law live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .generate import TermGenerator
from .parser import print_term
from .syntax import Bang, Lollipop, Sum, Tensor, Type, term_depth

CORPUS_SIZE = 500


@dataclass(frozen=True)
class Program:
    name: str
    text: str
    base_dir: str | None = None
    diagram_free: bool = False


def programs_dir() -> Path:
    return Path(str(resources.files("eclnl") / "programs"))


def curated_programs() -> list[Program]:
    base = programs_dir()
    return [
        Program(p.stem, p.read_text(encoding="utf-8"), str(base))
        for p in sorted(base.glob("*.eclnl"))
    ]


def carrier_bound(t: Type) -> int:
    """Upper bound on the size of a type's finite interpretation, without building it."""
    from .syntax import Diag, Unit, Wire, Zero

    match t:
        case Zero():
            return 1
        case Unit():
            return 2
        case Sum(a, b):
            return carrier_bound(a) + carrier_bound(b) - 1
        case Tensor(a, b):
            return (carrier_bound(a) - 1) * (carrier_bound(b) - 1) + 1
        case Bang(a):
            return carrier_bound(a) + 1
        case Lollipop(a, b):
            return carrier_bound(b) ** (carrier_bound(a) - 1)
        case Wire() | Diag():
            return 1 << 62
    raise TypeError(t)


def generated_programs(n: int, seed: int, diagram_free: bool, max_depth: int = 7) -> list[Program]:
    gen = TermGenerator(seed, diagrams=not diagram_free)
    out: list[Program] = []
    stem = "gen-clnl" if diagram_free else "gen-diag"
    while len(out) < n:
        t = gen.type()
        if diagram_free and carrier_bound(t) > 64:
            continue
        m = gen.term(t, [], [], gen.rng.choice([1, 2, 3]))
        if term_depth(m) > max_depth:
            continue
        out.append(Program(f"{stem}-{len(out):03d}", print_term(m) + "\n", None, diagram_free))
    return out


@lru_cache(maxsize=None)
def corpus(size: int = CORPUS_SIZE) -> tuple[Program, ...]:
    """The curated programs followed by generated ones, ``size`` in total."""
    curated = curated_programs()
    rest = size - len(curated)
    free = rest // 2
    return tuple(curated + generated_programs(free, 7, True) + generated_programs(rest - free, 11, False))


# ---------------------------------------------------------------- curated terms

NOT = r"(\b:I + I. case b of { left u -> right[I, I] u | right u -> left[I, I] u })"
THREE_COUNTDOWN = (
    r"(rec f:!(I + (I + I) -o I). \n:I + (I + I). case n of { left u -> u | right m -> case m of { "
    r"left u -> force f (left[I, I + I] u) | right u -> force f (right[I, I + I] (left[I, I] u)) } })"
)

ADEQUACY_TERMINATING = [
    "*",
    "left[I, I] *",
    "right[I, I] *",
    "<*, *>",
    "lift *",
    "lift (rec x:!I. force x)",
    "force (lift *)",
    r"(\x:I. x) *",
    NOT + " (left[I, I] *)",
    "let <a, b> = <left[I, I] *, *> in b; a",
    "case right[I, I] * of { left u -> * | right u -> u }",
    r"(rec f:!(I + I -o I). \b:I + I. case b of { left u -> u | right u -> force f (left[I, I] u) }) (right[I, I] *)",
    r"lift (\x:I. x)",
    r"let f = lift (\b:I + I. b) in <force f (left[I, I] *), force f (right[I, I] *)>",
    "*; *",
    r"(\p:I * I. let <a, b> = p in a; b) <*, *>",
    "lift (lift *)",
    "force (force (lift (lift (left[I, I] *))))",
    r"(\f:I -o I. f *) (\x:I. x)",
    "let t = lift (rec x:!(I + I). force x) in left[I, !(I + I)] *",
    "<lift (rec x:!I. force x), *>",
    r"(rec f:!(I -o I). \x:I. x) *",
    r"case (\x:I. right[I, I] x) * of { left a -> lift a | right b -> lift b }",
    r"(\x:!(I -o I). force x *) (lift (\y:I. y))",
    "let twice = lift (\\b:I + I. " + NOT + " (" + NOT + " b)) in force twice (right[I, I] *)",
    THREE_COUNTDOWN + " (right[I, I + I] (right[I, I] *))",
    "left[I, 0] *",
    "<left[I + I, I] (right[I, I] *), lift <*, *>>",
    "case left[I + I, I] (left[I, I] *) of { left b -> b | right u -> right[I, I] u }",
    "lift (force (lift *))",
    r"lift (\v:0. initial[I] v)",
    "<lift (rec x:!(I + I). force x), left[I, I] *>",
]

ADEQUACY_DIVERGING = [
    "rec x:!I. force x",
    "force (lift (rec x:!(I + I). force x))",
    "rec x:!(I + I). force x",
    r"(rec f:!(I -o I). \x:I. force f x) *",
    "<*, rec x:!I. force x>",
    "left[I, I] (rec x:!I. force x)",
    "(rec x:!I. force x); *",
    "case (rec x:!(I + I). force x) of { left u -> u | right v -> v }",
    "rec x:!(!I). force x",
    "initial[I] (rec z:!0. force z)",
    r"(rec f:!(I + I -o I). \b:I + I. case b of { left u -> force f (right[I, I] u) | right u -> force f (left[I, I] u) }) (left[I, I] *)",
    "let <a, b> = <rec x:!I. force x, *> in a; b",
]

REC_TERMS = [
    "rec x:!I. force x",
    "rec x:!(I + I). force x",
    "rec x:!(I + I). left[I, I] *",
    "rec x:!I. *",
    r"rec f:!(I -o I). \y:I. y",
    r"rec f:!(I -o I). \y:I. force f y",
    r"rec f:!(I + I -o I + I). \b:I + I. case b of { left u -> right[I, I] u | right u -> force f (left[I, I] u) }",
    r"rec f:!(I + I -o I). \b:I + I. case b of { left u -> u | right u -> force f (left[I, I] u) }",
    r"rec f:!(I + I -o I + I). \b:I + I. force f b",
    r"rec f:!(I + I -o I + I). \b:I + I. case b of { left u -> force f (right[I, I] u) | right u -> right[I, I] u }",
    "rec x:!(!I). lift (force (force x))",
    "rec x:!(!I). force x",
    "rec x:!(!I). lift *",
    "rec x:!(I * I). <*, *>",
    "rec x:!(I * I). let <a, b> = force x in <b, a>",
    r"rec f:!(I -o I + I). \u:I. u; left[I, I] *",
    THREE_COUNTDOWN,
    r"rec f:!(I + I -o I -o I). \a:I + I. \b:I. case a of { left u -> u; b | right u -> force f (left[I, I] u) b }",
    "rec x:!(I + I). case force x of { left u -> right[I, I] u | right u -> left[I, I] u }",
    r"rec f:!(!I -o I). \t:!I. force t",
    "rec x:!(!(I + I)). lift (left[I, I] *)",
]
