"""Numerically exact qubit thermalization in a Drude-Lorentz bosonic bath.

Hierarchy-of-auxiliary-operators dynamics plus the pointer-basis analysis
harness: Gibbs geometry, pointer projections, steady-state sweeps, and
independent weak-coupling / finite-bath oracles.
"""

from .bath import (BathParams, KernelExpansion, exact_correlation, fit_kernel,
                   spectral_density, validate_fit)
from .errors import (ConfigError, InvalidStateError, ModelConstructionError,
                     NumericalBlowupError, ParameterError, PointerThermError)
from .heom import (HierarchyState, IntegratorConfig, convergence_check,
                   detect_steady, eta1, evolve, hierarchy_derivative,
                   init_hierarchy, stability_dt, step_rk4)
from .qubit import (PointerBasis, bloch_from_density, density_from_bloch,
                    gibbs_state, pointer_basis, pointer_matrix_elements,
                    pointer_project, von_neumann_entropy)
from .trajectory import (SweepResult, TrajectoryRecord, read_sweep_csv,
                         read_trajectory_csv, write_sweep_csv,
                         write_trajectory_csv)

__version__ = "0.1.0"

__all__ = [
    "BathParams", "KernelExpansion", "exact_correlation", "fit_kernel",
    "spectral_density", "validate_fit",
    "ConfigError", "InvalidStateError", "ModelConstructionError",
    "NumericalBlowupError", "ParameterError", "PointerThermError",
    "HierarchyState", "IntegratorConfig", "convergence_check", "detect_steady",
    "eta1", "evolve", "hierarchy_derivative", "init_hierarchy", "stability_dt",
    "step_rk4",
    "PointerBasis", "bloch_from_density", "density_from_bloch", "gibbs_state",
    "pointer_basis", "pointer_matrix_elements", "pointer_project",
    "von_neumann_entropy",
    "SweepResult", "TrajectoryRecord", "read_sweep_csv", "read_trajectory_csv",
    "write_sweep_csv", "write_trajectory_csv",
    "__version__",
]
