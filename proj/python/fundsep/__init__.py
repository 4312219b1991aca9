"""Long-horizon optimal investment toolkit: python surface over the C++ core."""

from _fundsep import (  # noqa: F401
    AssumptionViolated,
    FundsepError,
    FundsepParseError,
    MarketSpec,
    StateModel,
    default_market,
    default_model,
    derive_constants,
    dynamic_portfolio,
    eigen_residual,
    estimate_f,
    estimate_f_z,
    estimate_u,
    fit_decay_rate,
    gaussian_f_oracle,
    girsanov_mean,
    moment_32,
    run_filter,
    simulate_filter_experiment,
    static_portfolio,
    static_sensitivity,
    steady_state_variance,
)

__all__ = [
    "AssumptionViolated",
    "FundsepError",
    "FundsepParseError",
    "MarketSpec",
    "StateModel",
    "default_market",
    "default_model",
    "derive_constants",
    "dynamic_portfolio",
    "eigen_residual",
    "estimate_f",
    "estimate_f_z",
    "estimate_u",
    "fit_decay_rate",
    "gaussian_f_oracle",
    "girsanov_mean",
    "moment_32",
    "run_filter",
    "simulate_filter_experiment",
    "static_portfolio",
    "static_sensitivity",
    "steady_state_variance",
]

__version__ = "1.0.0"
