"""Relativistic quantum clocks: conditional readings, time dilation and metrology."""
from .analytic import (
    ConditionalDistribution,
    DilationFactors,
    classical_dilation,
    conditional_density,
    conditional_distribution,
    dilation_factors,
    gamma_c_inv,
    gamma_q_inv,
    mean_tau,
    variance_tau,
)
from .oracle import (
    GridError,
    SpectralGrid,
    leading_order_density,
    nonperturbative_density,
    nonperturbative_distribution,
)
from .quadrature import QuadratureError, QuadratureSpec
from .scenario import ScenarioError, load_scenario, scenario_from_dict
from .states import (
    ClockFiducial,
    GaussianPacket,
    MomentumSuperposition,
    Scenario,
    cm_kinetic_energy,
    kinetic_energy_mean,
)

__version__ = "0.1.0"

__all__ = [
    "ClockFiducial",
    "ConditionalDistribution",
    "DilationFactors",
    "GaussianPacket",
    "GridError",
    "MomentumSuperposition",
    "QuadratureError",
    "QuadratureSpec",
    "Scenario",
    "ScenarioError",
    "SpectralGrid",
    "classical_dilation",
    "cm_kinetic_energy",
    "conditional_density",
    "conditional_distribution",
    "dilation_factors",
    "gamma_c_inv",
    "gamma_q_inv",
    "kinetic_energy_mean",
    "leading_order_density",
    "load_scenario",
    "mean_tau",
    "nonperturbative_density",
    "nonperturbative_distribution",
    "scenario_from_dict",
    "variance_tau",
]
