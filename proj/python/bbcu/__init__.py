"""Bidirectional converter (BBCU) simulation and analysis toolkit."""

from ._core import (  # noqa: F401
    AnalysisError,
    ConfigError,
    DerivedParams,
    ParamError,
    PlantParams,
    PlantState,
    RoaError,
    RoaEstimate,
    StateBox,
    analysis_report,
    cubic_roots,
    derive,
    dynamic_matrix_u1,
    equilibrium,
    k_infinity_current,
    k_infinity_voltage,
    lyapunov_solve,
    max_decay_gevp,
    mode2_dynamic_matrix,
    relay,
    rhs,
    roa_estimate,
    routh_hurwitz_cubic,
    run_scenario,
    sigma,
    simulate,
    spectral_abscissa,
    x2_ref_upper_bound,
)

__all__ = [
    "AnalysisError",
    "ConfigError",
    "DerivedParams",
    "ParamError",
    "PlantParams",
    "PlantState",
    "RoaError",
    "RoaEstimate",
    "StateBox",
    "analysis_report",
    "cubic_roots",
    "derive",
    "dynamic_matrix_u1",
    "equilibrium",
    "k_infinity_current",
    "k_infinity_voltage",
    "lyapunov_solve",
    "max_decay_gevp",
    "mode2_dynamic_matrix",
    "relay",
    "rhs",
    "roa_estimate",
    "routh_hurwitz_cubic",
    "run_scenario",
    "sigma",
    "simulate",
    "spectral_abscissa",
    "x2_ref_upper_bound",
]
