# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # A finite model for the diagram-free fragment
#
# Every diagram-free type denotes a finite pointed poset, and every typing
# derivation a strict monotone map. With small types everything can be
# tabulated, so the agreement between evaluation and meaning is checked by
# comparing tables.

# %%
from eclnl import oracle
from eclnl.parser import parse_term, parse_type
from eclnl.typechecker import check

for text in ["0", "I", "I + I", "!(I + I)", "I + I -o I + I"]:
    p = oracle.denote_type(parse_type(text))
    print(f"{text:16} {len(p):3} elements, height {p.height}")

# %% [markdown]
# ## Recursion as a least fixpoint
#
# `rec` is interpreted by iterating its unrolling operator from the bottom
# map until the table stops changing.

# %%
countdown = parse_term(
    r"(rec f:!(I + I -o I). \b:I + I. case b of { left u -> u | right u -> force f (left[I, I] u) })"
)
d = check({}, {}, countdown, None, {})
f = oracle.denote(d)
print(oracle.describe(f))
print("iterations:", oracle.rec_iterations(d))

# %% [markdown]
# ## Soundness and adequacy verdicts
#
# A terminating program must denote what its value denotes. At intuitionistic
# types, a non-bottom meaning must coincide with termination.

# %%
for text in [
    r"(\x:I. x) *",
    "case left[I, I] * of { left x -> x | right y -> y }",
    "force (lift (rec x:!(I + I). force x))",
]:
    m = parse_term(text)
    print(text)
    print("  soundness:", oracle.check_soundness(m, fuel=5000))
    print("  adequacy: ", oracle.check_adequacy(m, fuel=5000))

# %% [markdown]
# ## Structure maps
#
# Copy, discard and lift exist on intuitionistic types and commute with
# every map that never sends a proper element to bottom.

# %%
bool_ = parse_type("I + I")
maps = oracle.intuitionistic_maps(bool_, bool_)
ok = all(
    oracle.copy(bool_).then(oracle.tensor_maps(g, g)) == g.then(oracle.copy(bool_))
    for g in maps
)
print(len(maps), "maps, copy natural:", ok)
