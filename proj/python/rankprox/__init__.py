"""Trace-norm regularized matrix completion and LRR on the rank-r variety."""

from ._rankprox import (
    FixedRankMatrix,
    LineSearchError,
    Observations,
    ParseError,
    ProblemSpec,
    ShrinkKind,
    SolveStatus,
    Solution,
    SolverConfig,
    cluster,
    gen_subspaces,
    gen_synthetic,
    heuristics,
    load_triplets,
    prg_solve,
    rmse,
    rprg_solve,
    sp_solve,
)

__all__ = [
    "FixedRankMatrix",
    "LineSearchError",
    "Observations",
    "ParseError",
    "ProblemSpec",
    "ShrinkKind",
    "SolveStatus",
    "Solution",
    "SolverConfig",
    "cluster",
    "gen_subspaces",
    "gen_synthetic",
    "heuristics",
    "load_triplets",
    "prg_solve",
    "rmse",
    "rprg_solve",
    "sp_solve",
]
