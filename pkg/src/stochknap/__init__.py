"""Chance-constrained stochastic knapsack solvers with exact and Monte Carlo checks."""

from .distributions import (
    Bernoulli,
    Beta,
    Exponential,
    Finite,
    Gamma,
    Gaussian,
    Laplace,
    MaxwellBoltzmann,
    Poisson,
    SizeDistribution,
    Uniform,
    distribution_from_json,
    hyper_constant,
    point_mass,
)
from .errors import BudgetError, InstanceError, UnsupportedDistributionError
from .instance import Instance, Item, Solution, SolverConfig, load_instance
from .oracles import OverflowEstimate, brute_force_opt, exact_overflow, mc_overflow
from .scheme_bernoulli import solve_bernoulli
from .scheme_hyper import solve_hyper
from .scheme_ksupport import solve_ksupport

__all__ = [
    "Bernoulli", "Beta", "Exponential", "Finite", "Gamma", "Gaussian", "Laplace", "MaxwellBoltzmann",
    "Poisson", "SizeDistribution", "Uniform", "distribution_from_json", "hyper_constant", "point_mass",
    "BudgetError", "InstanceError", "UnsupportedDistributionError",
    "Instance", "Item", "Solution", "SolverConfig", "load_instance",
    "OverflowEstimate", "brute_force_opt", "exact_overflow", "mc_overflow",
    "solve_bernoulli", "solve_hyper", "solve_ksupport",
]
