"""Stochastic abelian sandpiles: REDUCE, an exhaustive recurrence oracle, and
generators of forbidden sub-configurations."""

from .builders import grid_ne_sw, grid_ns_ew, random_corpus, random_spec
from .fscgen import GlueSpec, glue, manna_fsc_chain, render, union_subsandpiles
from .model import (
    Configuration,
    SandpileSpec,
    SubConfiguration,
    ToppleEvent,
    ValidationReport,
    is_stable,
    stabilize,
    topple,
    unstable_sites,
    validate,
)
from .oracle import (
    RecurrentSet,
    enumerate_minimal_fscs,
    is_forbidden,
    is_recurrent,
    minimal_irreducible_subsandpiles,
    recurrent_stable_set,
    replay_witness,
    stabilize_outcomes,
)
from .reduce import (
    ReduceTrace,
    decide_fsc_exists,
    enumerate_fsc_supports,
    is_irreducible,
    is_minimal_irreducible,
    layered_decomposition,
    reduce,
    restrict,
)

__version__ = "0.1.0"
