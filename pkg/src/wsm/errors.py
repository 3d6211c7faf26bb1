"""Error norms against side-aware exact solutions, and rate fitting.

Volume norms integrate |u - u_h|^2 and |grad u - grad u_h|^2 with a Gauss
rule of order + 2 points per axis.  "Local" variants skip quadrature points
within the exclusion radius of the dislocation (closed ball: points at
exactly the radius are excluded).

Surface norms integrate |u - u_h|^2 over FREE_SURFACE facets; their local
variant excludes the same 0.1-neighborhood of the dislocation patch.

Quadrature points that fall within 1e-13 of the fault plane are perturbed by
1e-10 * h along the fault normal before the exact solution is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fault import FaultModel
from .femspace import FeSpace, gauss_rule, shape_eval
from .linsys import SolveReport
from .mesh import FREE_SURFACE, mesh_size

_PLANE_TOL = 1e-13


@dataclass
class ErrorReport:
    case: str
    order: int
    counts: tuple
    h: float
    l2_global: float
    h1_global: float
    l2_local: float
    h1_local: float
    l2_surf_global: float | None
    l2_surf_local: float | None
    slip_norm: float
    solve: SolveReport
    assembly_reused: bool
    assemble_time: float = 0.0


@dataclass
class RateFit:
    metric: str
    pairs: list
    slope: float
    r2: float


def fit_rate(pairs, metric: str = "") -> RateFit:
    """Least-squares slope of log(e) against log(h) over the final 3 pairs."""
    pairs = [(float(h), float(e)) for h, e in pairs]
    if len(pairs) < 3:
        raise ValueError("rate fit requires at least 3 (h, error) pairs")
    hs = np.array([p[0] for p in pairs])
    es = np.array([p[1] for p in pairs])
    if np.any(np.diff(hs) >= 0):
        raise ValueError("h values must be strictly decreasing")
    if np.any(es <= 0):
        raise ValueError("error values must be positive for a log-log fit")
    lh = np.log(hs[-3:])
    le = np.log(es[-3:])
    A = np.stack([lh, np.ones_like(lh)], axis=-1)
    coef, *_ = np.linalg.lstsq(A, le, rcond=None)
    fitted = A @ coef
    ss_res = float(np.sum((le - fitted) ** 2))
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(metric=metric, pairs=pairs, slope=float(coef[0]), r2=r2)


def perturb_off_plane(fault: FaultModel, points: np.ndarray, h: float
                      ) -> np.ndarray:
    """Push points lying on the fault plane a distance 1e-10*h along the
    fault normal so that side-aware evaluation is well defined."""
    d = fault.plane_distance(points)
    mask = np.abs(d) < _PLANE_TOL
    if not np.any(mask):
        return points
    out = points.copy()
    out[mask] += 1e-10 * h * fault.normal
    return out


def _all_element_ijk(mesh) -> np.ndarray:
    e = np.arange(mesh.n_elements)
    out = np.empty((mesh.n_elements, mesh.dim), dtype=np.int64)
    for d in range(mesh.dim):
        out[:, d] = e % mesh.counts[d]
        e = e // mesh.counts[d]
    return out


def volume_error_quadrature(space: FeSpace, u_h: np.ndarray, exact, exact_grad,
                            fault: FaultModel, quad_per_axis: int | None = None):
    """Per-quadrature-point error data over the whole mesh.

    Returns (weights, err2_u, err2_grad, dist) where err2_u and err2_grad are
    the squared pointwise displacement and gradient errors and dist is the
    distance to the dislocation patch.
    """
    mesh = space.mesh
    dim = space.dim
    n = quad_per_axis if quad_per_axis is not None else space.order + 2
    rule = gauss_rule(dim, n)
    vals, grads = shape_eval(space.order, dim, rule.points)
    grads = grads * (2.0 / mesh.h_axis)
    detj = float(np.prod(mesh.h_axis / 2.0))

    coeffs = u_h.reshape(space.n_scalar, dim)
    ec = coeffs[space.elem_dofs]                      # (n_el, n_loc, dim)
    uh = np.einsum("qa,ead->eqd", vals, ec)           # (n_el, n_qp, dim)
    gh = np.einsum("qaj,ead->eqdj", grads, ec)        # (n_el, n_qp, dim, dim)

    # global coordinates of all quadrature points
    lo = mesh.box_lo + _all_element_ijk(mesh) * mesh.h_axis
    pts = lo[:, None, :] + (rule.points[None, :, :] + 1.0) / 2.0 * mesh.h_axis
    flat = pts.reshape(-1, dim)
    h = mesh_size(mesh)
    flat_eval = perturb_off_plane(fault, flat, h)

    ue = np.asarray(exact(flat_eval)).reshape(pts.shape)
    ge = np.asarray(exact_grad(flat_eval)).reshape(pts.shape + (dim,))
    dist = fault.distance_to_patch(flat)

    err2_u = np.sum((ue - uh) ** 2, axis=-1).reshape(-1)
    err2_g = np.sum((ge - gh) ** 2, axis=(-2, -1)).reshape(-1)
    w = np.broadcast_to(rule.weights * detj, pts.shape[:2]).reshape(-1)
    return w, err2_u, err2_g, dist


def surface_error_quadrature(space: FeSpace, u_h: np.ndarray, exact,
                             fault: FaultModel,
                             quad_per_axis: int | None = None):
    """Per-point error data on FREE_SURFACE facets: (weights, err2_u, dist to
    the dislocation patch).  Returns None when the mesh has no FREE_SURFACE
    facets."""
    mesh = space.mesh
    dim = space.dim
    facets = [(e, lf) for e, lf, tag in mesh.boundary_facets if tag == FREE_SURFACE]
    if not facets:
        return None
    n = quad_per_axis if quad_per_axis is not None else space.order + 2
    rule = gauss_rule(dim - 1, n)

    axis = facets[0][1] // 2
    side = facets[0][1] % 2
    tangents = [d for d in range(dim) if d != axis]
    n_qp = rule.points.shape[0]
    local = np.empty((n_qp, dim))
    local[:, axis] = 1.0 if side == 1 else -1.0
    for k, d in enumerate(tangents):
        local[:, d] = rule.points[:, k]
    vals, _ = shape_eval(space.order, dim, local)
    detj = float(np.prod(mesh.h_axis[tangents] / 2.0))

    coeffs = u_h.reshape(space.n_scalar, dim)
    elems = np.array([e for e, _ in facets])
    ec = coeffs[space.elem_dofs[elems]]
    uh = np.einsum("qa,ead->eqd", vals, ec)

    lo = mesh.box_lo + np.stack([np.array(mesh.element_ijk(e))
                                 for e in elems]) * mesh.h_axis
    pts = lo[:, None, :] + (local[None, :, :] + 1.0) / 2.0 * mesh.h_axis
    flat = pts.reshape(-1, dim)
    h = mesh_size(mesh)
    flat_eval = perturb_off_plane(fault, flat, h)
    ue = np.asarray(exact(flat_eval)).reshape(pts.shape)

    err2_u = np.sum((ue - uh) ** 2, axis=-1).reshape(-1)
    w = np.broadcast_to(rule.weights * detj, pts.shape[:2]).reshape(-1)
    dist = fault.distance_to_patch(flat)
    return w, err2_u, dist


def error_norms(space: FeSpace, u_h: np.ndarray, exact, exact_grad,
                exclusion_radius: float, fault: FaultModel,
                with_surface: bool = False,
                quad_per_axis: int | None = None) -> dict:
    """Global and local L2 / H1-seminorm errors; surface L2 errors when
    requested and the mesh carries FREE_SURFACE facets."""
    if exclusion_radius < 0:
        raise ValueError("exclusion_radius must be >= 0")
    w, e2u, e2g, dist = volume_error_quadrature(space, u_h, exact, exact_grad,
                                                fault, quad_per_axis)
    local = dist > exclusion_radius
    out = {
        "l2_global": float(np.sqrt(np.sum(w * e2u))),
        "h1_global": float(np.sqrt(np.sum(w * e2g))),
        "l2_local": float(np.sqrt(np.sum(w[local] * e2u[local]))),
        "h1_local": float(np.sqrt(np.sum(w[local] * e2g[local]))),
        "l2_surf_global": None,
        "l2_surf_local": None,
    }
    if with_surface:
        surf = surface_error_quadrature(space, u_h, exact, fault, quad_per_axis)
        if surf is not None:
            ws, e2s, dist_s = surf
            loc = dist_s > exclusion_radius
            out["l2_surf_global"] = float(np.sqrt(np.sum(ws * e2s)))
            out["l2_surf_local"] = float(np.sqrt(np.sum(ws[loc] * e2s[loc])))
    return out
