"""Numerical laboratory for weak Weyl laws on doubling metric measure spaces."""
from .dirichlet import (DirichletOperator, check_gradient_bound, gamma, gamma_edges, poincare_constant,
                        poincare_profile)
from .harness import WWLReport, load_config, run_experiment, verify_wwl
from .heat import gaussian_fit, heat_kernel, kernel_of, spectral_function_check, spectral_function
from .instances import Instance, InstanceSpec, build
from .lattice import Lattice, LatticeVerificationError, build_lattice, cardinality_sweep, verify_lattice
from .mms import (MetricMeasureSpace, ValidationError, ball, ball_volumes, check_ball_comparisons,
                  doubling_estimate)
from .spectral import (CapabilityError, SpectralDecomposition, bernstein_check, counting, decompose,
                       frame_bound, pw_project, weyl_fit)

__version__ = "0.1.0"

__all__ = [
    "MetricMeasureSpace", "ValidationError", "ball", "ball_volumes", "doubling_estimate",
    "check_ball_comparisons", "Lattice", "LatticeVerificationError", "build_lattice", "verify_lattice",
    "cardinality_sweep", "DirichletOperator", "gamma", "gamma_edges", "check_gradient_bound",
    "poincare_constant", "poincare_profile", "SpectralDecomposition", "CapabilityError", "decompose",
    "counting", "pw_project", "bernstein_check", "frame_bound", "weyl_fit", "heat_kernel", "kernel_of",
    "spectral_function", "gaussian_fit", "spectral_function_check", "Instance", "InstanceSpec", "build",
    "WWLReport", "verify_wwl", "load_config", "run_experiment",
]
