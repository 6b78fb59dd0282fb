"""
Manna's model on a 2x2 grid
===========================

Each site holds at most one particle. With two, it topples and sends one
particle either to both vertical neighbours or to both horizontal ones,
losing whatever would fall off the grid.
"""

# %%
# Build the grid and look at its rules.
from sasm import grid_ns_ew, reduce, recurrent_stable_set
from sasm.model import Configuration

spec = grid_ns_ew(2, 2)
for site, rules in spec.rules.items():
    print(site, rules)

# %%
# REDUCE flushes nothing: every rule of every site stays inside the grid,
# so the whole grid is irreducible and the empty configuration is forbidden.
trace = reduce(spec)
print("residual:", sorted(trace.residual))

# %%
# The oracle agrees. Of the 16 stable configurations exactly one is
# transient, and it is the empty one.
rset = recurrent_stable_set(spec)
print(len(rset), "of", rset.stable_count, "recurrent")
print("empty recurrent?", Configuration.empty(spec) in rset)

# %%
# One particle anywhere is enough. Each witness is a chain of additions and
# topplings starting at c_max.
single = Configuration.from_sparse(spec, {"r1c1": 1})
for step in rset.witness(single):
    print(step.to_json())
