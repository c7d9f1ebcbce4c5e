"""Finite-difference laboratory for semilinear heat equations and reaction-diffusion pairs.

Grids and fields live in :mod:`rdlab.meshfield`, reactions are parsed by
:mod:`rdlab.dsl`, :func:`simulate` runs the adaptive IMEX stepper, and the
hypothesis checks, maximum-principle oracle and smoothing fit live in
:mod:`rdlab.diagnostics`. Scenarios and sweeps are driven from JSON configs.
"""
from .diagnostics import (
    check_mass_control,
    check_positivity_condition,
    check_ratio_trend,
    check_sign_condition,
    fit_smoothing,
    gronwall_ledger,
    lemma1_probe,
    max_principle_oracle,
    spike,
    theorem_probe,
)
from .dsl import ReactionSpec, builtin, evaluate, parse, to_text
from .meshfield import (
    Boundary,
    Domain,
    Field,
    Grid,
    heat_propagate_spectral,
    integrate,
    laplacian,
    norm_p,
)
from .odecmp import classify_criterion, compare_pde_ode, integrate_ode
from .scenarios import list_scenarios, load_config, run_scenario, run_sweep
from .stepper import Problem, StepperConfig, simulate, step_imex

__version__ = "0.1.0"
