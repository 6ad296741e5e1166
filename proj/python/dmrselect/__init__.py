"""Model selection with simultaneous deletion of continuous regressors and
merging of factor levels, driven by a C++ core.

The main entry points:

``select(continuous, factors, level_counts, y, family=..., penalty=..., linkage=...)``
    Run the backward search and return the chosen model, its coefficient
    vector and the whole nested path.

``generate_experiment(id, c, seed)`` / ``run_experiment(id, c, reps, seed)``
    The three synthetic benchmarks and their Monte Carlo harness.
"""

from ._core import (  # noqa: F401
    NumericalError,
    ValidationError,
    __version__,
    generate_experiment,
    run_experiment,
    select,
)

__all__ = [
    "select",
    "generate_experiment",
    "run_experiment",
    "ValidationError",
    "NumericalError",
    "__version__",
]
