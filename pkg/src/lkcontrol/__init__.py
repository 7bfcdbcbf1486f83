"""Truncated power-series solver and checks for the omega-controlled Loewner-Kufarev equation."""

from .analysis import (
    alexander_bound_closed_form,
    check_univalence,
    coefficient_bound,
    compute_alpha,
    extension_certificate,
    injectivity_spot_check,
)
from .control import (
    Composition,
    ControlFunction,
    check_superadditive,
    enumerate_compositions,
    iterated_integral,
    verify_controlled,
)
from .drivers import (
    DriverFamily,
    DriverPath,
    TimeGrid,
    check_driver_conditions,
    eval_xi,
    make_piecewise_linear,
    stieltjes_integral,
)
from .oracle import explicit_stepper, lk_residual, normwise_gap
from .report import Check, VerificationReport
from .series import TruncatedSeries, alexander_sum, derivative_eval, evaluate, radius_lower_bound
from .solver import (
    CoefficientTable,
    assemble_solution,
    compositions_table,
    solve_C,
    solve_coefficients_compositions,
    solve_coefficients_picard,
    solve_coefficients_recurrence,
)

__version__ = "0.1.0"
