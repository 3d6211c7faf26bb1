"""Isotropic linear-elastic constitutive model.

Plane strain (dim=2) is realized by restricting the 3D Hooke law to in-plane
components: tensors are dim x dim, the trace runs over the dim in-plane
components, and lambda multiplies that in-plane trace.  This matches the
conventional plane-strain parameterization in terms of the 3D Lame constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IsotropicElasticity:
    """Lame parameters of a homogeneous isotropic material."""

    lam: float
    mu: float
    dim: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if not (self.mu > 0.0 and self.lam + 2.0 * self.mu / self.dim > 0.0):
            raise ValueError(
                f"material not positive definite: lam={self.lam}, mu={self.mu}"
            )


def strain(grad_u: np.ndarray) -> np.ndarray:
    """Symmetric gradient 0.5*(grad_u + grad_u^T)."""
    grad_u = np.asarray(grad_u, dtype=float)
    return 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2))


def stress(e: np.ndarray, mat: IsotropicElasticity) -> np.ndarray:
    """Isotropic Hooke law lam*tr(e)*I + 2*mu*e for a symmetric tensor e."""
    e = np.asarray(e, dtype=float)
    tr = np.trace(e, axis1=-2, axis2=-1)
    return mat.lam * tr[..., None, None] * np.eye(mat.dim) + 2.0 * mat.mu * e


def traction(e: np.ndarray, mat: IsotropicElasticity, n: np.ndarray) -> np.ndarray:
    """Traction stress(e) . n for a unit vector n."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"normal must be a unit vector, |n|={np.linalg.norm(n)}")
    return stress(e, mat) @ n


def positivity_constants(mat: IsotropicElasticity) -> tuple[float, float]:
    """Extremal eigenvalues (c_lower, c_upper) of the Hooke map on symmetric
    tensors: 2*mu on the deviatoric subspace, 2*mu + dim*lam on multiples of
    the identity."""
    c_lower = 2.0 * mat.mu
    c_upper = 2.0 * mat.mu + mat.dim * mat.lam
    if mat.lam < 0.0:
        c_lower, c_upper = c_upper, c_lower
    return c_lower, c_upper
