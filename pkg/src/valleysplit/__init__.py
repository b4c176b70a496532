"""1D finite-element solver for Si quantum well subbands and their
intervalley (z-valley pair) splitting under an applied electric field."""

from .materials import (KINETIC_EV_NM2, PRESETS, SIGE30_SI, SIO2_SI, UNITS,
                        MaterialSystem, UnitSystem, ValleyPairConstants,
                        coupling_weight, material_from_config, mixing_angle,
                        valley_pair_constants)
from .potential import PotentialProfile, WellGeometry, build_profile
from .fem import (ConvergenceStudy, EigenSolution, FemMatrices, Mesh1D,
                  assemble, build_mesh, convergence_study, solve, solve_well,
                  uniform_mesh)
from .coupling import (CoupledLevels, SplittingResult, bulk_inversion_estimate,
                       coupled_levels, interface_term, oscillatory_overlap,
                       valley_splitting)
from .sweeps import (FIGURE_PRESETS, ResultRow, SweepConfig, config_from_dict,
                     emit_csv, emit_gnuplot, run_field_sweep, run_figure,
                     run_width_sweep)
from .oracles import OracleReport, run_oracles

__version__ = "0.1.0"

__all__ = [
    "KINETIC_EV_NM2", "PRESETS", "SIGE30_SI", "SIO2_SI", "UNITS",
    "MaterialSystem", "UnitSystem", "ValleyPairConstants", "coupling_weight",
    "material_from_config", "mixing_angle", "valley_pair_constants",
    "PotentialProfile", "WellGeometry", "build_profile",
    "ConvergenceStudy", "EigenSolution", "FemMatrices", "Mesh1D", "assemble",
    "build_mesh", "convergence_study", "solve", "solve_well", "uniform_mesh",
    "CoupledLevels", "SplittingResult", "bulk_inversion_estimate",
    "coupled_levels", "interface_term", "oscillatory_overlap",
    "valley_splitting",
    "FIGURE_PRESETS", "ResultRow", "SweepConfig", "config_from_dict",
    "emit_csv", "emit_gnuplot", "run_field_sweep", "run_figure",
    "run_width_sweep",
    "OracleReport", "run_oracles",
    "__version__",
]
