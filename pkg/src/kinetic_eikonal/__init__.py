"""Numerical laboratory for the hydrodynamic limit of kinetic transport.

Velocity measures, effective Hamiltonians from the implicit dispersion
relation, macroscopic Hamilton-Jacobi runs with a Hopf-Lax oracle, and an
asymptotic-preserving phase-space solver with uniform-bound monitors.
"""

from .velocity import (VelocityModel, build_discrete_maxwellian,
                       build_uniform_maxwellian, parse_velocity_spec,
                       refine_near)
from .hamiltonian import (CorrectorResult, Hamiltonian, LegendreTable,
                          NumericalError, bracket, eigenfunction_q,
                          hamiltonian_from_spec, solve_corrector)
from .hj import (HJRunConfig, MacroField, evolve, hopf_lax, initial_profile,
                 lf_step, parse_initial_spec, solve_hj)
from .kinetic import (BoundsReport, ConvergenceTable, PhaseField, check_bounds,
                      converge_study, macro_phase, relaxation_step,
                      solve_kinetic, transport_step)

__version__ = "0.1.0"

__all__ = [
    "BoundsReport", "ConvergenceTable", "CorrectorResult", "HJRunConfig",
    "Hamiltonian", "LegendreTable", "MacroField", "NumericalError",
    "PhaseField", "VelocityModel", "bracket", "build_discrete_maxwellian",
    "build_uniform_maxwellian", "check_bounds", "converge_study",
    "eigenfunction_q", "evolve", "hamiltonian_from_spec", "hopf_lax",
    "initial_profile", "lf_step", "macro_phase", "parse_initial_spec",
    "parse_velocity_spec", "refine_near", "relaxation_step", "solve_corrector",
    "solve_hj", "solve_kinetic", "transport_step",
]
