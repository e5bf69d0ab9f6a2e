"""Cut-and-project schemes, Meyer sets, weighted model combs and their diffraction."""

__version__ = "0.1.0"

from . import groups, scheme, pointset, combs, baake_moody, epsdual, diffraction  # noqa: E402,F401
from .geometry import Box, PointPatch, WeightedComb  # noqa: E402,F401
from .scheme import SchemeSpec, gallery, model_set, weighted_comb  # noqa: E402,F401

__all__ = [
    "Box", "PointPatch", "WeightedComb", "SchemeSpec", "gallery", "model_set", "weighted_comb",
    "groups", "scheme", "pointset", "combs", "baake_moody", "epsdual", "diffraction",
]
