"""Time integration: per-mode linear systems, exact transport, nonlinear runs."""
from .grenier import GrenierTrajectory, grenier_iterate, iterate_rate
from .grid import Grid1D
from .linear import (
    GrowthSeries,
    LinearOperator,
    ModeState,
    linear_growth,
    poisson_full,
    poisson_hydro,
    random_state,
    run_linear,
    step_linear,
    transport_exact,
    transport_only,
)
from .nonlinear import (
    Field2D,
    SpectralChannel,
    deviation_norm,
    equilibrium_field,
    instability_time,
    perturbed_equilibrium,
    step_nonlinear,
)
from .rescale import FlowSnapshot, check_eps, hydrostatic_rescale

__all__ = [
    "Field2D",
    "FlowSnapshot",
    "GrenierTrajectory",
    "Grid1D",
    "GrowthSeries",
    "LinearOperator",
    "ModeState",
    "SpectralChannel",
    "check_eps",
    "deviation_norm",
    "equilibrium_field",
    "grenier_iterate",
    "hydrostatic_rescale",
    "instability_time",
    "iterate_rate",
    "linear_growth",
    "perturbed_equilibrium",
    "poisson_full",
    "poisson_hydro",
    "random_state",
    "run_linear",
    "step_linear",
    "step_nonlinear",
    "transport_exact",
    "transport_only",
]
