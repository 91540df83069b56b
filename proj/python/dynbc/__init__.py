"""Bulk-surface P1 finite elements with dynamic boundary conditions.

The heavy lifting happens in the compiled ``_dynbc`` extension; this package
re-exports it and adds a few conveniences on top.
"""

from ._dynbc import (
    ArgumentError,
    Coefficients,
    DynbcError,
    Mesh,
    NonConvergenceError,
    ParseError,
    Problem,
    UnsupportedError,
    boundary_length,
    builtin_problem,
    builtin_problem_names,
    cfl,
    crisscross_square,
    disk_mesh,
    integrate,
    interpolate_exact,
    load_mesh,
    load_problem,
    run_convergence,
    scheme_names,
    total_area,
)

__all__ = [
    "ArgumentError",
    "Coefficients",
    "DynbcError",
    "Mesh",
    "NonConvergenceError",
    "ParseError",
    "Problem",
    "UnsupportedError",
    "boundary_length",
    "builtin_problem",
    "builtin_problem_names",
    "cfl",
    "crisscross_square",
    "disk_mesh",
    "eoc",
    "integrate",
    "interpolate_exact",
    "load_mesh",
    "load_problem",
    "run_convergence",
    "scheme_names",
    "total_area",
]


def eoc(errors, steps):
    """Experimental orders of convergence between consecutive (step, error) pairs."""
    import math

    pairs = list(zip(steps, errors))
    return [
        math.log(e0 / e1) / math.log(s0 / s1)
        for (s0, e0), (s1, e1) in zip(pairs, pairs[1:])
    ]
