"""Particle (multi-peakon) approximation of Camassa-Holm solutions and its diagnostics."""
from .analysis import (
    DiagnosticReport,
    bl_cauchy_probe,
    default_f_battery,
    h1_distance,
    h1_norm_sq,
    holder_probe,
    initial_weak_star_probe,
    l1loc_convergence_probe,
    run_ensemble,
    time_lipschitz_probe,
    weak_star_probe,
)
from .discretize import InitialMeasure, cosine_bump, gaussian, quantize, reconstruct_u0, uniform
from .dynamics import (
    PeakonState,
    Trajectory,
    check_bounds,
    hamiltonian,
    integrate,
    invariants,
    lax_matrix,
    rhs_fast,
    rhs_reference,
    step,
)
from .fields import FieldSample, sample_field
from .greens import CHKernel, constants, convolve, eval_G, eval_Gp
from .measures import (
    DiscreteMeasure,
    bl_distance,
    bl_distance_oracle,
    bl_norm,
    pair,
    tv_norm,
    w1_distance,
    young_inequality_check,
)
from .weakform import QuadSpec, TestFunction, default_battery, residual, residual_battery

__version__ = "0.1.0"
