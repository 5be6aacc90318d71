"""Conformally Reeb geodesic fields on the flat 3-torus and its cyclic quotients."""

from __future__ import annotations

__version__ = "0.1.0"

from .circle_map import CircleMap, ExtremaList, find_extrema, lift_samples
from .criterion import ReebDecision, decide, max_drawdown
from .diffeo import phi_inverse, std_map, std_pullback_residual, straightening_residual
from .errors import FlatReebError
from .expr import ThetaExpr, parse_theta
from .solver import ReebCertificate, functional_I, synthesize_certificate
from .synthesis import PhiFunction, ScrewData, build_equivariant_phi, build_phi

__all__ = [
    "CircleMap", "ExtremaList", "FlatReebError", "PhiFunction", "ReebCertificate",
    "ReebDecision", "ScrewData", "ThetaExpr", "build_equivariant_phi", "build_phi", "decide",
    "find_extrema", "functional_I", "lift_samples", "max_drawdown", "parse_theta", "phi_inverse",
    "std_map", "std_pullback_residual", "straightening_residual", "synthesize_certificate",
]
