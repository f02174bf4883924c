"""Event-triggered LQG: sampled-data controller design with optimal sampling.

The package splits the co-design problem into a continuous-time LQG layer
(:mod:`etlqg.lqg`), an equivalent impulse-reset system whose sampling policy
is optimized either in closed form for driftless plants
(:mod:`etlqg.integrator`) or numerically as a free-boundary PDE
(:mod:`etlqg.stefan`), and a Monte Carlo layer that validates the predicted
cost/rate tradeoffs (:mod:`etlqg.simulate`).
"""

from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    EmptyOmega,
    EtlqgError,
    InvalidPlant,
    NonFiniteState,
    NonFiniteValue,
    NoStabilizingSolution,
    NotHurwitz,
    NotPositiveDefinite,
    NotStationary,
    OmegaTouchesBoundary,
)
from .lqg import (
    LqgDesign,
    PlantModel,
    ResetSystem,
    build_reset_system,
    design_lqg,
    h2_cost_lyapunov,
    solve_care,
    validate_plant,
)
from .integrator import (
    EllipsoidBound,
    SlopePair,
    ellipsoid_trigger,
    integrator_costs,
    scalar_h,
    slopes_and_ratio,
    solve_riccati_like,
    solve_scalar_root,
    value_function_integrator,
    value_gradient_integrator,
    value_hessian_integrator,
)
from .stefan import (
    BoundaryPolyline,
    GridSpec,
    ValueFunctionGrid,
    auto_grid_spec,
    extract_boundary,
    grid_trigger,
    stefan_solve,
)
from .simulate import (
    Ellipsoid,
    GridBoundary,
    Periodic,
    SimConfig,
    SweepFailure,
    SweepResult,
    TradeoffPoint,
    periodic_cost,
    periodic_cost_reset,
    simulate,
    tradeoff_sweep,
)
from .config import RunConfig, load_run_config

__version__ = "0.1.0"

__all__ = [
    "BoundaryPolyline",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "Ellipsoid",
    "EllipsoidBound",
    "EmptyOmega",
    "EtlqgError",
    "GridBoundary",
    "GridSpec",
    "InvalidPlant",
    "LqgDesign",
    "NoStabilizingSolution",
    "NonFiniteState",
    "NonFiniteValue",
    "NotHurwitz",
    "NotPositiveDefinite",
    "NotStationary",
    "OmegaTouchesBoundary",
    "Periodic",
    "PlantModel",
    "ResetSystem",
    "RunConfig",
    "SimConfig",
    "SlopePair",
    "SweepFailure",
    "SweepResult",
    "TradeoffPoint",
    "ValueFunctionGrid",
    "auto_grid_spec",
    "build_reset_system",
    "design_lqg",
    "ellipsoid_trigger",
    "extract_boundary",
    "grid_trigger",
    "h2_cost_lyapunov",
    "integrator_costs",
    "load_run_config",
    "periodic_cost",
    "periodic_cost_reset",
    "scalar_h",
    "simulate",
    "slopes_and_ratio",
    "solve_care",
    "solve_riccati_like",
    "solve_scalar_root",
    "stefan_solve",
    "tradeoff_sweep",
    "validate_plant",
    "value_function_integrator",
    "value_gradient_integrator",
    "value_hessian_integrator",
    "__version__",
]
