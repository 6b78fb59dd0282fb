"""
The NE-SW grid has no forbidden sub-configurations
==================================================

Swapping Manna's vertical/horizontal pairs for north+east and south+west
changes everything: some corner can always dump a whole toppling into the
sink, and REDUCE peels the grid away layer by layer.
"""

# %%
from sasm import grid_ne_sw, reduce, recurrent_stable_set

for n in range(1, 7):
    trace = reduce(grid_ne_sw(n, n))
    print(f"{n}x{n}: {len(trace.layers)} layers, residual {sorted(trace.residual)}")

# %%
# The layers of the 3x3 grid run along anti-diagonals.
for k, layer in enumerate(reduce(grid_ne_sw(3, 3)).layers):
    print(k, sorted(layer))

# %%
# On 3x3 every one of the 512 stable configurations is recurrent.
rset = recurrent_stable_set(grid_ne_sw(3, 3))
print(len(rset), rset.stable_count, rset.is_everything)
