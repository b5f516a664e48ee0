"""Rotation-minimizing frames and fields along curves in R^3, H^3 and C^n."""

from .core import (
    DEFAULT_TOL,
    EUCLID3,
    HYP3,
    CurveSpec,
    Frame,
    Manifold,
    NaturalCurvatures,
    NormalField,
    SurfaceMesh,
    Tolerances,
    arclength_reparametrize,
    complex_space,
    curve_from_json,
    curve_to_json,
    evaluate,
    resample,
)
from .errors import DegenerateWarning, InputError, NumericError, RMFrameError
from .transport import RMFrame

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "EUCLID3",
    "HYP3",
    "CurveSpec",
    "DegenerateWarning",
    "Frame",
    "InputError",
    "Manifold",
    "NaturalCurvatures",
    "NormalField",
    "NumericError",
    "RMFrame",
    "RMFrameError",
    "SurfaceMesh",
    "Tolerances",
    "arclength_reparametrize",
    "complex_space",
    "curve_from_json",
    "curve_to_json",
    "evaluate",
    "resample",
]
