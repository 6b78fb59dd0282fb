"""
Gluing 2x2 blocks into longer forbidden patterns
================================================

Two zero blocks sharing one corner glue into a seven-site pattern with a
single particle on the shared corner. The oracle confirms the result is
still forbidden on a 3x3 grid.
"""

# %%
from sasm import grid_ns_ew, manna_fsc_chain, recurrent_stable_set
from sasm.fscgen import render
from sasm.model import SubConfiguration
from sasm.oracle import is_forbidden

chain = manna_fsc_chain(2)
print(render(chain, 3, 3))

# %%
spec = grid_ns_ew(3, 3)
rset = recurrent_stable_set(spec, witnesses=False)
print("forbidden on 3x3:", is_forbidden(spec, chain, rset))

# %%
# Drop the glue particle and the pattern stops being an exact gluing. The
# zero assignment on the union is still forbidden, since it contains a zero
# block.
heights = dict(chain.heights)
heights["r2c2"] = 0
print("zeros on union forbidden:", is_forbidden(spec, SubConfiguration(heights), rset))

# %%
# Longer chains need bigger grids. Three blocks fit on 4x4, whose full
# recurrent set (65,536 stable states) takes about a minute to build, so
# that check lives in the test suite instead.
print(render(manna_fsc_chain(3), 4, 4))
