"""Single-mode spinor Boltzmann dynamics of a trapped spin-1 Bose gas,
temperature-dependent damping forces and thermal gauge potentials."""

from .config import ScenarioConfig, load_config, preset
from .spin_algebra import (build_interaction_tensor, clebsch_gordan, gellmann_basis, make_spin_matrices,
                           spin_basis, su3_decompose, su3_reconstruct)
from .transport import (assemble_single_mode, evolve_eigen, evolve_rk4, initial_state, oscillation_analysis,
                        pair_populations)

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "load_config",
    "preset",
    "build_interaction_tensor",
    "clebsch_gordan",
    "gellmann_basis",
    "make_spin_matrices",
    "spin_basis",
    "su3_decompose",
    "su3_reconstruct",
    "assemble_single_mode",
    "evolve_eigen",
    "evolve_rk4",
    "initial_state",
    "oscillation_analysis",
    "pair_populations",
]
