"""Privacy index of disclosed optimization data: uncertainty sets, transforms and scenarios."""

from .privacy import Ordering, PrivacyIndex, compare, privacy_index
from .scenarios import get_scenario, run_scenario
from .uncertainty_sets import (
    AffineSlab, Ball, ConvexHullOfPoints, Ellipsoid, FinitePoints, FullSpace, Segment,
    UnboundedAffine, is_subset,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSlab", "Ball", "ConvexHullOfPoints", "Ellipsoid", "FinitePoints", "FullSpace",
    "Ordering", "PrivacyIndex", "Segment", "UnboundedAffine", "compare", "get_scenario",
    "is_subset", "privacy_index", "run_scenario",
]
