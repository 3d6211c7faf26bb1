"""Tensor-product Lagrange finite elements of order 1 or 2 on box meshes.

Scalar nodes form a (p*nx+1) x (p*ny+1) [x (p*nz+1)] grid ordered
lexicographically with x fastest.  Vector DOFs are scalar-node-major,
component-minor: dof = node * dim + component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import DIRICHLET, StructuredMesh


def _shape_1d(order: int, x):
    """Values and derivatives of the 1D Lagrange basis on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    if order == 1:
        vals = np.stack([(1.0 - x) / 2.0, (1.0 + x) / 2.0], axis=-1)
        grads = np.stack([np.full_like(x, -0.5), np.full_like(x, 0.5)], axis=-1)
    elif order == 2:
        vals = np.stack([x * (x - 1.0) / 2.0, 1.0 - x * x, x * (x + 1.0) / 2.0],
                        axis=-1)
        grads = np.stack([x - 0.5, -2.0 * x, x + 0.5], axis=-1)
    else:
        raise ValueError(f"unsupported order {order}")
    return vals, grads


def shape_eval(order: int, dim: int, local) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product Lagrange basis at local points in [-1,1]^dim.

    Returns (values, gradients) with shapes (..., n_loc) and (..., n_loc, dim),
    gradients in local coordinates.  Local basis index runs x fastest.
    """
    local = np.atleast_2d(np.asarray(local, dtype=float))
    if local.shape[-1] != dim:
        raise ValueError(f"local points must have {dim} components")
    v1 = []
    g1 = []
    for d in range(dim):
        v, g = _shape_1d(order, local[..., d])
        v1.append(v)
        g1.append(g)
    n1 = order + 1
    n_loc = n1 ** dim
    vals = np.ones(local.shape[:-1] + (n_loc,))
    grads = np.ones(local.shape[:-1] + (n_loc, dim))
    for loc in range(n_loc):
        idx = [(loc // n1 ** d) % n1 for d in range(dim)]
        for d in range(dim):
            vals[..., loc] = vals[..., loc] * v1[d][..., idx[d]]
            for gd in range(dim):
                f = g1[d][..., idx[d]] if gd == d else v1[d][..., idx[d]]
                grads[..., loc, gd] = grads[..., loc, gd] * f
    return vals, grads


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (n_qp, dim) local coordinates
    weights: np.ndarray  # (n_qp,)


def gauss_rule(dim: int, points_per_axis: int) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule on [-1,1]^dim, exact for
    polynomial degree <= 2*points_per_axis - 1 per axis."""
    if not 1 <= points_per_axis <= 6:
        raise ValueError(f"points_per_axis must be in 1..6, got {points_per_axis}")
    x, w = np.polynomial.legendre.leggauss(points_per_axis)
    pts = [x] * dim
    wts = [w] * dim
    grids = np.meshgrid(*pts, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.ones(points_per_axis ** dim)
    wg = np.meshgrid(*wts, indexing="ij")
    for g in wg:
        weights = weights * g.ravel()
    return QuadratureRule(points=points, weights=weights)


@dataclass(frozen=True)
class FeSpace:
    mesh: StructuredMesh
    order: int
    dof_coords: np.ndarray       # (n_scalar_nodes, dim)
    elem_dofs: np.ndarray        # (n_elem, n_loc) scalar node indices
    dirichlet_nodes: np.ndarray  # sorted scalar node indices on DIRICHLET facets

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def n_scalar(self) -> int:
        return self.dof_coords.shape[0]

    @property
    def n_dofs(self) -> int:
        return self.n_scalar * self.dim

    @property
    def dirichlet_dofs(self) -> np.ndarray:
        """Vector DOF indices (node-major, component-minor) on Dirichlet facets."""
        nodes = self.dirichlet_nodes
        return np.sort((nodes[:, None] * self.dim
                        + np.arange(self.dim)[None, :]).ravel())


def build_space(mesh: StructuredMesh, order: int) -> FeSpace:
    if order not in (1, 2):
        raise ValueError(f"unsupported order {order}")
    dim = mesh.dim
    counts = mesh.counts
    nn = order * counts + 1
    axes = [np.array([mesh.box_lo[d] + i * (mesh.box_hi[d] - mesh.box_lo[d])
                      / (order * counts[d]) for i in range(nn[d])])
            for d in range(dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    perm = (1, 0) if dim == 2 else (2, 1, 0)
    coords = np.stack([np.transpose(g, perm).ravel() for g in grids], axis=-1)

    def node_index(ijk):
        idx = 0
        for d in reversed(range(dim)):
            idx = idx * nn[d] + ijk[d]
        return idx

    n1 = order + 1
    n_loc = n1 ** dim
    elem_dofs = np.empty((mesh.n_elements, n_loc), dtype=np.int64)
    for e in range(mesh.n_elements):
        ijk = mesh.element_ijk(e)
        base = np.array(ijk) * order
        for loc in range(n_loc):
            off = [(loc // n1 ** d) % n1 for d in range(dim)]
            elem_dofs[e, loc] = node_index(base + np.array(off))

    # Dirichlet scalar nodes: nodes on any DIRICHLET-tagged facet
    mask = np.zeros(int(np.prod(nn)), dtype=bool)
    for axis in range(dim):
        for side in (0, 1):
            tagged = any(tag == DIRICHLET and lf == 2 * axis + side
                         for _, lf, tag in mesh.boundary_facets)
            if not tagged:
                continue
            fixed = 0 if side == 0 else nn[axis] - 1
            idx = [np.arange(nn[d]) for d in range(dim)]
            idx[axis] = np.array([fixed])
            mesh_idx = np.meshgrid(*idx, indexing="ij")
            flat = np.zeros_like(mesh_idx[0])
            for d in reversed(range(dim)):
                flat = flat * nn[d] + mesh_idx[d]
            mask[flat.ravel()] = True
    dirichlet_nodes = np.flatnonzero(mask)

    return FeSpace(mesh=mesh, order=order, dof_coords=coords,
                   elem_dofs=elem_dofs, dirichlet_nodes=dirichlet_nodes)


def interpolate(space: FeSpace, f) -> np.ndarray:
    """Nodal interpolant: f maps (n, dim) coordinates to (n, dim) values.
    Returns a flat coefficient vector (node-major, component-minor)."""
    vals = np.asarray(f(space.dof_coords), dtype=float)
    if vals.shape != (space.n_scalar, space.dim):
        raise ValueError(f"interpolated values have shape {vals.shape}, "
                         f"expected {(space.n_scalar, space.dim)}")
    return vals.ravel()


def eval_field(space: FeSpace, coeffs: np.ndarray, points: np.ndarray
               ) -> np.ndarray:
    """Evaluate the FE field at arbitrary global points (point location per
    point; intended for diagnostics, not bulk quadrature)."""
    from .mesh import element_containing

    points = np.atleast_2d(points)
    out = np.empty((points.shape[0], space.dim))
    c = coeffs.reshape(space.n_scalar, space.dim)
    for i, x in enumerate(points):
        e, loc = element_containing(space.mesh, x)
        vals, _ = shape_eval(space.order, space.dim, loc[None, :])
        out[i] = vals[0] @ c[space.elem_dofs[e]]
    return out
