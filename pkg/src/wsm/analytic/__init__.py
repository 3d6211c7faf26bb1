"""Closed-form reference displacement fields used as oracles and boundary
data: a 2D plane-strain dislocation with piecewise quadratic slip and a
rectangular uniform-slip source in a traction-free half-space."""

from .planestrain import PlaneStrainDislocation, eval_planestrain, grad_planestrain
from .halfspace import HalfspaceSource, eval_halfspace, grad_halfspace

__all__ = [
    "PlaneStrainDislocation",
    "eval_planestrain",
    "grad_planestrain",
    "HalfspaceSource",
    "eval_halfspace",
    "grad_halfspace",
]
