"""Waveform relaxation for time-fractional diffusion and diffusion-wave problems."""

from .bounds import (
    BoundCurve,
    BoundParams,
    WrongRegimeError,
    dnwr_bound_2d,
    dnwr_bound_subdiffusion,
    dnwr_bound_wave,
    estimate_matrix,
    nnwr_bound_1d,
    nnwr_bound_2d,
)
from .dnwr import DecompositionSpec, IterationHistory, dnwr_iterate, monodomain_reference, optimal_theta_dnwr
from .expcli import ExperimentConfig, reproduce, run_experiment
from .laplace_lab import LaplaceSymbol, RhoParams, eval_rho_blocks, eval_rho_closed, kernel_l1_norm, talbot_invert
from .nnwr import nnwr_iterate, optimal_theta_nnwr
from .solver1d import Dirichlet, Neumann, ProblemSpec, SubdomainGrid, solve_monodomain, solve_subdomain
from .solver2d import Problem2D, Split2D, monodomain_2d, nnwr2d_iterate
from .timegrid import TimeMesh, build_graded_mesh, caputo_weights

__version__ = "0.1.0"
