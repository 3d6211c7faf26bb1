"""Plane-strain displacement field of a straight dislocation with the
piecewise quadratic slip profile.

The field is a four-term superposition of a kernel U obtained by integrating
the classical edge-dislocation displacement field twice along the slip
direction (the slip profile is piecewise quadratic, so its second derivative
is piecewise constant with jumps at the four breakpoints).  The kernel was
derived symbolically (tools/derive_edge_kernel.py) and is frozen here; it is
validated behaviorally by the jump, equilibrium and decay tests rather than
against any printed form.

Fault-plane coordinates: xi along the slip direction, eta perpendicular.
The displacement jump across eta = 0 is u(xi, 0+) - u(xi, 0-) =
slip(xi) * e_xi, so the plus side of the fault is eta > 0 and the fault
normal pointing into the minus side is -e_eta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# breakpoints of the piecewise quadratic slip and the superposition weights
_OFFSETS = np.array([0.5, 1.0 / 6.0, -1.0 / 6.0, -0.5])
_WEIGHTS = np.array([6.0, -18.0, 18.0, -6.0])

_ON_FAULT_TOL = 1e-13


@dataclass(frozen=True)
class PlaneStrainDislocation:
    """Unit-length dislocation at the origin of the (e_xi, e_eta) frame."""

    lam: float
    mu: float
    b0: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    e_xi: np.ndarray = field(default_factory=lambda: np.array([0.8, 0.6]))

    @property
    def e_eta(self) -> np.ndarray:
        return np.array([-self.e_xi[1], self.e_xi[0]])


def _kernel(lam, mu, x, y):
    """Doubled second x-antiderivative of the unit edge-dislocation field.

    Uses the branch atan(x/y), smooth on each half-plane y != 0; the branch
    and polynomial ambiguities cancel in the four-term superposition because
    the weights have zero sum and zero first moment.
    """
    L = np.log(x * x + y * y)
    T = np.arctan(x / y)
    P = 2.0 * np.pi * (lam + 2.0 * mu)
    ux = ((2 * lam + 3 * mu) * x * y * L
          + ((3 * lam + 4 * mu) * y * y - (lam + 2 * mu) * x * x) * T
          - (3 * lam + 4 * mu) * x * y) / P
    uy = (-(mu * x * x + (2 * lam + mu) * y * y) * L / 2.0
          + 2.0 * lam * x * y * T
          + (2 * mu - lam) * x * x / 2.0) / P
    return ux, uy


def _kernel_grad(lam, mu, x, y):
    """Derivatives of the kernel with respect to (x, y)."""
    L = np.log(x * x + y * y)
    T = np.arctan(x / y)
    P = np.pi * (lam + 2.0 * mu)
    dux_dx = (-(lam + 2 * mu) * x * T + (lam + 1.5 * mu) * y * L) / P
    dux_dy = ((lam + 1.5 * mu) * x * L - (lam + mu) * x
              + (3 * lam + 4 * mu) * y * T) / P
    duy_dx = (-lam * x + 2 * lam * y * T - mu * x * L + mu * x) / (2.0 * P)
    duy_dy = (lam * x * T - (lam + 0.5 * mu) * y * L - (lam + 0.5 * mu) * y) / P
    return dux_dx, dux_dy, duy_dx, duy_dy


def _fault_coords(model: PlaneStrainDislocation, x, side):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rel = x - model.origin
    xi = rel @ model.e_xi
    eta = rel @ model.e_eta
    on_plane = np.abs(eta) < _ON_FAULT_TOL
    on_segment = on_plane & (np.abs(xi) <= 0.5 + _ON_FAULT_TOL)
    if np.any(on_segment) and side is None:
        raise ValueError("evaluation on the dislocation requires a side flag")
    if np.any(on_plane):
        s = float(side) if side is not None else 1.0
        eta = np.where(on_plane, s * _ON_FAULT_TOL, eta)
    return xi, eta


def eval_planestrain(model: PlaneStrainDislocation, x, side=None) -> np.ndarray:
    """Displacement at global points x, shape (n, 2) (or (2,) for one point).

    Points within 1e-13 of the dislocation segment require side=+1 (the
    eta > 0 side) or side=-1.
    """
    single = np.asarray(x).ndim == 1
    xi, eta = _fault_coords(model, x, side)
    ux = np.zeros_like(xi)
    uy = np.zeros_like(xi)
    for off, w in zip(_OFFSETS, _WEIGHTS):
        kx, ky = _kernel(model.lam, model.mu, xi - off, eta)
        ux += w * kx
        uy += w * ky
    u = model.b0 * (ux[..., None] * model.e_xi + uy[..., None] * model.e_eta)
    return u[0] if single else u


def grad_planestrain(model: PlaneStrainDislocation, x, side=None) -> np.ndarray:
    """Displacement gradient du_i/dx_j at global points, shape (n, 2, 2)."""
    single = np.asarray(x).ndim == 1
    xi, eta = _fault_coords(model, x, side)
    g = np.zeros(xi.shape + (2, 2))
    for off, w in zip(_OFFSETS, _WEIGHTS):
        a, b, c, d = _kernel_grad(model.lam, model.mu, xi - off, eta)
        g[..., 0, 0] += w * a
        g[..., 0, 1] += w * b
        g[..., 1, 0] += w * c
        g[..., 1, 1] += w * d
    rot = np.stack([model.e_xi, model.e_eta], axis=-1)  # columns are the frame
    g = model.b0 * np.einsum("ia,...ab,jb->...ij", rot, g, rot)
    return g[0] if single else g
