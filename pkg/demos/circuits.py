# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Building circuits by evaluation
#
# Programs build string diagrams as a side effect of evaluation. Gates from
# the signature are constants; applying one to labels appends a node to the
# current diagram and returns fresh labels for its outputs.

# %%
from eclnl import diagrams as dg
from eclnl.corpus import programs_dir
from eclnl.evaluator import run_program, run_term
from eclnl.parser import parse_program, parse_term
from eclnl.syntax import App, Force, Left, Right, Star, Unit
from eclnl.typechecker import type_of

# %% [markdown]
# ## Boxing a gate
#
# `box[qubit] (lift h)` turns a duplicable qubit function into a first-class
# diagram value. The surrounding configuration stays empty.

# %%
out = run_term(parse_term("box[qubit] (lift h)"))
boxed = out.term
print(type_of(parse_term("box[qubit] (lift h)")))
print([n.gen for n in boxed.diagram.nodes], boxed.diagram.dom, boxed.diagram.cod)

# %% [markdown]
# ## A Bell pair
#
# The program boxes a circuit that prepares two qubits and entangles them.
# Its diagram can be printed as DOT.

# %%
bell = parse_program((programs_dir() / "bell.eclnl").read_text())
res = run_program(bell)
print(res.pretty, ":", res.type)
print(dg.to_dot(res.boxed[0].diagram))

# %% [markdown]
# ## Families of diagrams
#
# A program of type `!(bool -o Diag(qubit, qubit))` is a recipe that picks a
# diagram from a runtime boolean. Forcing it and applying it to each boolean
# gives two different diagrams.

# %%
family = parse_program((programs_dir() / "constructivity.eclnl").read_text())
print(type_of(family.term))
for arg in (Left(Unit(), Unit(), Star()), Right(Unit(), Unit(), Star())):
    d = run_term(App(Force(family.term), arg)).term.diagram
    print([n.gen for n in d.nodes] or "identity wire")

# %% [markdown]
# ## Gates in the outer diagram
#
# Without `box`, gates land in the configuration's own diagram.

# %%
res = run_term(parse_term("let <a, b> = cnot <h (new *), new *> in <meas a, b>"))
print(res.term, [n.gen for n in res.diagram.nodes])

# %% [markdown]
# ## Diagram equality
#
# Equality is port-order-sensitive isomorphism of port graphs. Node numbering
# does not matter, but which wire enters which pin does.

# %%
sig = dg.demo_signature()
h1 = dg.generator_diagram(sig.generators["h"], ["a"], ["b"])
h2 = dg.generator_diagram(sig.generators["h"], ["b"], ["c"])
hh = dg.compose(h1, h2)
print(len(hh.nodes), dg.diagram_eq(hh, dg.relabel(hh, {}, {})))
