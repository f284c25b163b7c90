"""Geometry of the Siegel-Jacobi ball under its balanced metric."""

from .core import (
    AuxMatrices,
    CoordinateIndexMap,
    JacobiBallPoint,
    ModelParams,
    SiegelBallPoint,
    aux_matrices,
    delta_tensor,
    index_map,
    random_point,
    validate_ball_point,
)
from .kernels import backend_name

__all__ = [
    "AuxMatrices",
    "CoordinateIndexMap",
    "JacobiBallPoint",
    "ModelParams",
    "SiegelBallPoint",
    "aux_matrices",
    "backend_name",
    "delta_tensor",
    "index_map",
    "random_point",
    "validate_ball_point",
]

__version__ = "0.1.0"
