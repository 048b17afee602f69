"""Landau-Zener dynamics through ODE, Riccati, Markov and exact representations."""

__version__ = "0.1.0"

from .core import AmplitudePair, ContractError, Params, PhaseDecomposition, Picture, Trajectory
from .integrate import (IntegrationError, RiccatiBlowUpError, RiccatiSolution, SolverConfig,
                        solve_interaction, solve_markov_ode, solve_riccati,
                        solve_riccati_from_minus_infinity, solve_schroedinger, solve_second_order)

__all__ = [
    "AmplitudePair", "ContractError", "Params", "PhaseDecomposition", "Picture", "Trajectory",
    "IntegrationError", "RiccatiBlowUpError", "RiccatiSolution", "SolverConfig",
    "solve_interaction", "solve_markov_ode", "solve_riccati", "solve_riccati_from_minus_infinity",
    "solve_schroedinger", "solve_second_order",
]
