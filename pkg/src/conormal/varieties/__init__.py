"""Catalog of embedded varieties given by section oracles."""

from .base import Degenerate, EmbeddedVariety, VarietyModel
from .catalog import (
    complete_intersection,
    complete_intersection_from_forms,
    genus4_canonical,
    genus5_canonical,
    gorenstein_points5,
    grassmannian_g25,
    pentagonal_curve,
    plane_canonical_from_form,
    plane_curve_canonical,
    rational_normal_curve,
    scroll,
    segre,
    tetragonal_curve,
    veronese,
)
from .oracles import POINTS, SYMBOLIC, OracleError, SectionOracle
from .points import FAIL, NO_POINTS_FOUND, PASS, smoothness_spot_check
from .scrolls import ScrollCurveData, chi_J_3H, scroll_cohomology
