"""Safe adaptive optimal control with barrier states.

Thin python surface over the C++ core: load or build scenario configs, run
closed-loop simulations, write/validate run artifacts, compare runs, and
cross-check the learner against the scalar Riccati closed form.
"""

from ._core import (
    Barrier,
    Config,
    ConfigurationError,
    SimulationError,
    benchmark_plant_deriv,
    check_csv,
    compare_dirs,
    git_blob_hash,
    lqr_oracle,
    preset_names,
    preset_text,
    run,
    scalar_are_solution,
    sym_min_eig,
    write_run,
)

__all__ = [
    "Barrier",
    "Config",
    "ConfigurationError",
    "SimulationError",
    "benchmark_plant_deriv",
    "check_csv",
    "compare_dirs",
    "git_blob_hash",
    "lqr_oracle",
    "preset_names",
    "preset_text",
    "run",
    "scalar_are_solution",
    "sym_min_eig",
    "write_run",
]

__version__ = "0.1.0"
