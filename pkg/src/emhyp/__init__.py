"""Euler-Mellin integrals, coamoebas, and A-hypergeometric verification."""

from .laurent import FactorList, LaurentPoly
from .polytope import NewtonData, newton_facets
from .coamoeba import (
    ComponentAtlas,
    TorusPoint,
    Zonotope,
    completely_nonvanishing_at,
    lopsided_membership,
    raster_coamoeba_2d,
    univariate_components,
)
from .emquad import EMProblem, QuadratureReport, em_integral, mb_integral, \
    simplex_closed_form
from .continuation import ContinuationExpr, rank_jump_extract
from .gkz import (
    CayleySystem,
    GaleData,
    cayley_matrix,
    em_mb_check,
    gale_dual,
    independence_rank,
    total_nonresonance_check,
)

__version__ = "0.1.0"

__all__ = [
    "CayleySystem",
    "ComponentAtlas",
    "ContinuationExpr",
    "EMProblem",
    "FactorList",
    "GaleData",
    "LaurentPoly",
    "NewtonData",
    "QuadratureReport",
    "TorusPoint",
    "Zonotope",
    "cayley_matrix",
    "completely_nonvanishing_at",
    "em_integral",
    "em_mb_check",
    "gale_dual",
    "independence_rank",
    "lopsided_membership",
    "mb_integral",
    "newton_facets",
    "rank_jump_extract",
    "raster_coamoeba_2d",
    "simplex_closed_form",
    "total_nonresonance_check",
    "univariate_components",
]
