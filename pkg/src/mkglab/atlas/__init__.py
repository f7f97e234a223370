"""Exact exponent calculus for the bilinear product estimates."""
from .catalog import (
    Catalog,
    ExponentPoint,
    SobolevInstance,
    closed_form_region,
    feasible_thetas,
    reduction_catalog,
    theta_grid,
)
from .checks import (
    ATLAS_CONDITIONS,
    STRICT_CONDITIONS,
    ConditionRecord,
    FeasibilityReport,
    ProductEstimate,
    atlas_holds,
    check_atlas,
    check_sobolev_product,
)
from .eps import EPS, EpsRational, as_eps, fmt_fraction

__all__ = [
    "ATLAS_CONDITIONS", "STRICT_CONDITIONS", "Catalog", "ConditionRecord", "EPS", "EpsRational",
    "ExponentPoint", "FeasibilityReport", "ProductEstimate", "SobolevInstance", "as_eps",
    "atlas_holds", "check_atlas", "check_sobolev_product", "closed_form_region", "feasible_thetas",
    "fmt_fraction", "reduction_catalog", "theta_grid",
]
