"""Bulk-surface phase-field solver: Python access to the C++ core."""

from ._core import (
    RUN_CSV_VERSION,
    ConfigError,
    DomainError,
    Mesh,
    MeshError,
    SolverError,
    compatibility,
    disk_mesh,
    load_mesh,
    read_run_csv,
    read_sweep_jsonl,
    run_config,
    yosida,
)

RUN_CSV_COLUMNS = (
    "step", "t", "boundary_mass", "total_mass_eps", "energy", "dissipation", "grad_u_bulk",
    "grad_u_surf", "env_bulk", "env_surf", "omega", "newton_iters", "residual",
)

__all__ = [
    "RUN_CSV_COLUMNS", "RUN_CSV_VERSION", "ConfigError", "DomainError", "Mesh", "MeshError",
    "SolverError", "compatibility", "disk_mesh", "load_mesh", "read_run_csv", "read_sweep_jsonl",
    "run_config", "yosida",
]
