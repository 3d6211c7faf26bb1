"""Fault geometry, fault-mesh segmentation, and the weak slip load.

A fault is a planar patch carrying a slip distribution.  The mesh never
conforms to it: the patch is clipped against every element box into a cover
of segments (2D) or convex polygons (3D) that are interior to elements or
lie on shared element faces.  Each piece carries a Gauss rule, and the load
functional evaluates

    rhs[i] = - sum over pieces of  w * b(x) . <sigma_nu(phi_i)>(x)

with the single-element traction on interior pieces and the mean of the two
one-sided tractions on face pieces.  The unit normal nu points into the
"minus" subdomain: a point x is on the plus side when (x - origin) . nu < 0,
and the slip is the jump of the displacement, plus trace minus minus trace.

The stiffness matrix is never touched here; faults enter through load
vectors only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .elasticity import IsotropicElasticity
from .femspace import shape_eval
from .linsys import FeSystem
from .mesh import SNAP_REL, StructuredMesh, element_containing, mesh_size

INTERIOR = "INTERIOR"
FACE = "FACE"


@dataclass(frozen=True)
class FaultModel:
    """Planar fault patch with a slip distribution.

    ``axes`` holds the in-plane orthonormal directions (one in 2D, strike
    and dip in 3D); ``bounds`` the in-plane parameter interval(s) delimiting
    the dislocation; ``slip`` maps (n, dim-1) in-plane coordinates to (n, dim)
    global jump vectors.  Slip should vanish on the patch boundary for
    non-rupturing faults; rupturing patches may reach the free surface.
    """

    dim: int
    origin: np.ndarray
    axes: tuple            # (e_xi,) in 2D, (e_strike, e_dip) in 3D
    normal: np.ndarray     # unit, orthogonal to axes, points into the minus side
    bounds: tuple          # ((lo, hi),) or ((s_lo, s_hi), (t_lo, t_hi))
    slip: Callable[[np.ndarray], np.ndarray]
    # parameter values along the first in-plane axis where the slip loses
    # smoothness; segmentation splits there so Gauss rules see smooth pieces
    slip_breakpoints: tuple = ()

    def __post_init__(self):
        nu = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
            raise ValueError("fault normal must be a unit vector")
        for ax in self.axes:
            if abs(np.dot(ax, nu)) > 1e-12:
                raise ValueError("fault normal must be orthogonal to in-plane axes")

    def plane_distance(self, x: np.ndarray) -> np.ndarray:
        """Signed distance to the fault plane; negative on the plus side."""
        return (np.asarray(x) - self.origin) @ self.normal

    def to_plane(self, x: np.ndarray) -> np.ndarray:
        """In-plane coordinates of (projected) global points, shape (n, dim-1)."""
        rel = np.atleast_2d(x) - self.origin
        return np.stack([rel @ ax for ax in self.axes], axis=-1)

    def from_plane(self, s: np.ndarray) -> np.ndarray:
        """Global coordinates of in-plane parameter points, shape (n, dim)."""
        s = np.atleast_2d(s)
        x = np.broadcast_to(self.origin, s.shape[:-1] + (self.dim,)).copy()
        for k, ax in enumerate(self.axes):
            x = x + s[..., k, None] * ax
        return x

    def patch_corners(self) -> np.ndarray:
        """Global corner points of the dislocation patch."""
        if self.dim == 2:
            (a, b), = self.bounds
            return self.from_plane(np.array([[a], [b]]))
        (s0, s1), (t0, t1) = self.bounds
        return self.from_plane(np.array([[s0, t0], [s1, t0], [s1, t1], [s0, t1]]))

    def distance_to_patch(self, x: np.ndarray) -> np.ndarray:
        """Euclidean distance from global points to the dislocation patch."""
        x = np.atleast_2d(x)
        s = self.to_plane(x)
        clamped = s.copy()
        for k, (lo, hi) in enumerate(self.bounds):
            clamped[:, k] = np.clip(s[:, k], lo, hi)
        closest = self.from_plane(clamped)
        return np.linalg.norm(x - closest, axis=-1)


def smooth_slip_2d(xi, b0: float):
    """Piecewise quadratic tangential slip magnitude supported on
    [-1/2, 1/2]: quadratic ramps on the outer thirds, a downward parabola on
    the middle third, continuously differentiable at the joins."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros_like(xi)
    m = (xi > -0.5) & (xi < -1.0 / 6.0)
    out = np.where(m, 1.5 + 6.0 * xi + 6.0 * xi * xi, out)
    m = (xi >= -1.0 / 6.0) & (xi <= 1.0 / 6.0)
    out = np.where(m, 1.0 - 12.0 * xi * xi, out)
    m = (xi > 1.0 / 6.0) & (xi < 0.5)
    out = np.where(m, 1.5 - 6.0 * xi + 6.0 * xi * xi, out)
    return b0 * out


@dataclass
class FaultSegment:
    """One piece of the fault cover, clipped to a single element (INTERIOR)
    or lying on the shared face of two elements (FACE)."""

    kind: str
    elem_plus: int
    elem_minus: int
    points: np.ndarray        # (n_qp, dim) global quadrature points
    weights: np.ndarray       # (n_qp,) length/area measure weights
    plane_coords: np.ndarray  # (n_qp, dim-1) in-plane coordinates
    measure: float
    diam_plus: float
    diam_minus: float
    mesh_key: tuple = field(default=())


def _mesh_key(mesh: StructuredMesh) -> tuple:
    return (mesh.dim, tuple(int(c) for c in mesh.counts),
            tuple(mesh.box_lo), tuple(mesh.box_hi))


def _gauss_1d(n: int):
    return np.polynomial.legendre.leggauss(n)


def _triangle_rule(n: int):
    """Conical-product Gauss rule on the reference triangle
    {(u,v): u,v >= 0, u+v <= 1}, exact for total degree 2n-1."""
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xl, wl = np.polynomial.legendre.leggauss(n)
    u = (1.0 + xj) / 2.0
    s = (1.0 + xl) / 2.0
    uu, ss = np.meshgrid(u, s, indexing="ij")
    ww = np.outer(wj / 4.0, wl / 2.0)
    pts = np.stack([uu.ravel(), (ss * (1.0 - uu)).ravel()], axis=-1)
    return pts, ww.ravel()


_TRI_PTS, _TRI_WTS = _triangle_rule(4)


def _clip_halfplane(poly, alpha, beta, c, tol):
    """Sutherland-Hodgman step: keep {(s,t): alpha*s + beta*t <= c} of a
    convex polygon in fault-plane coordinates."""
    if abs(alpha) < tol and abs(beta) < tol:
        return poly if 0.0 <= c + tol else []
    out = []
    n = len(poly)
    vals = [alpha * p[0] + beta * p[1] - c for p in poly]
    for i in range(n):
        p, vp = poly[i], vals[i]
        q, vq = poly[(i + 1) % n], vals[(i + 1) % n]
        if vp <= tol:
            out.append(p)
            if vq > tol and vp < -tol:
                lam = vp / (vp - vq)
                out.append((p[0] + lam * (q[0] - p[0]), p[1] + lam * (q[1] - p[1])))
        elif vq < -tol:
            lam = vp / (vp - vq)
            out.append((p[0] + lam * (q[0] - p[0]), p[1] + lam * (q[1] - p[1])))
    return out


def _poly_area(poly) -> float:
    a = 0.0
    n = len(poly)
    for i in range(n):
        s0, t0 = poly[i]
        s1, t1 = poly[(i + 1) % n]
        a += s0 * t1 - s1 * t0
    return 0.5 * abs(a)


def segment_fault(mesh: StructuredMesh, fault: FaultModel, quad_order: int = 4
                  ) -> list[FaultSegment]:
    """Cover of the dislocation patch (intersected with the mesh box) by
    element-wise pieces, each carrying a Gauss rule in global coordinates.

    Pieces lying within SNAP_REL*h of a shared element face are classified
    FACE with both neighbors recorded, everything else INTERIOR.  Pieces
    whose measure is below the clip tolerance are dropped.
    """
    if mesh.dim != fault.dim:
        raise ValueError("mesh and fault dimension mismatch")
    if mesh.dim == 2:
        return _segment_fault_2d(mesh, fault, quad_order)
    return _segment_fault_3d(mesh, fault, quad_order)


def _aligned_axis(fault: FaultModel, mesh: StructuredMesh):
    """Axis index d if the fault plane is an x_d = const grid plane, else None."""
    nu = fault.normal
    for d in range(mesh.dim):
        if abs(abs(nu[d]) - 1.0) <= 1e-12:
            coord = fault.origin[d]
            h = mesh.h_axis[d]
            j = round((coord - mesh.box_lo[d]) / h)
            if abs(coord - (mesh.box_lo[d] + j * h)) <= SNAP_REL * h:
                return d, int(j)
    return None


def _segment_fault_2d(mesh, fault, quad_order):
    (t0, t1), = fault.bounds
    e = fault.axes[0]
    o = fault.origin
    h = mesh.h_axis
    diam = mesh_size(mesh)
    gx, gw = _gauss_1d(quad_order)

    # clip the parameter interval to the mesh box
    lo_t, hi_t = t0, t1
    for d in range(2):
        if abs(e[d]) < 1e-14:
            if not (mesh.box_lo[d] - SNAP_REL * h[d] <= o[d]
                    <= mesh.box_hi[d] + SNAP_REL * h[d]):
                return []
            continue
        ta = (mesh.box_lo[d] - o[d]) / e[d]
        tb = (mesh.box_hi[d] - o[d]) / e[d]
        lo_t = max(lo_t, min(ta, tb))
        hi_t = min(hi_t, max(ta, tb))
    if hi_t - lo_t <= SNAP_REL * diam:
        return []

    aligned = _aligned_axis(fault, mesh)
    key = _mesh_key(mesh)
    segments = []

    # breakpoints where the line crosses grid planes or the slip loses
    # smoothness
    ts = [lo_t, hi_t]
    for d in range(2):
        if abs(e[d]) < 1e-14:
            continue
        for j in range(int(mesh.counts[d]) + 1):
            g = mesh.box_lo[d] + j * h[d]
            t = (g - o[d]) / e[d]
            if lo_t < t < hi_t:
                ts.append(t)
    for t in fault.slip_breakpoints:
        if lo_t < t < hi_t:
            ts.append(float(t))
    ts = np.array(sorted(ts))
    keep = np.concatenate([[True], np.diff(ts) > SNAP_REL * diam])
    ts = ts[keep]
    if ts[-1] < hi_t - SNAP_REL * diam:
        ts = np.append(ts, hi_t)

    for ta, tb in zip(ts[:-1], ts[1:]):
        if tb - ta <= SNAP_REL * diam:
            continue
        tq = 0.5 * (ta + tb) + 0.5 * (tb - ta) * gx
        wq = 0.5 * (tb - ta) * gw
        plane = tq[:, None]
        pts = fault.from_plane(plane)
        tm = 0.5 * (ta + tb)
        xm = o + tm * e
        if aligned is not None:
            d, j = aligned
            ijk_lo = [0, 0]
            other = 1 - d
            ijk_lo[other] = int(np.floor((xm[other] - mesh.box_lo[other]) / h[other]))
            ijk_lo[other] = min(max(ijk_lo[other], 0), int(mesh.counts[other]) - 1)
            ij_below = list(ijk_lo)
            ij_below[d] = j - 1
            ij_above = list(ijk_lo)
            ij_above[d] = j
            has_below = 0 <= j - 1
            has_above = j <= int(mesh.counts[d]) - 1
            if has_below and has_above:
                e_below = mesh.element_index(ij_below)
                e_above = mesh.element_index(ij_above)
                # plus side is where (x - o) . nu < 0
                if fault.normal[d] > 0:
                    ep, em = e_below, e_above
                else:
                    ep, em = e_above, e_below
                segments.append(FaultSegment(FACE, ep, em, pts, wq, plane,
                                             float(tb - ta), diam, diam, key))
            else:
                ij = ij_below if has_below else ij_above
                ei = mesh.element_index(ij)
                segments.append(FaultSegment(INTERIOR, ei, ei, pts, wq, plane,
                                             float(tb - ta), diam, diam, key))
        else:
            ei, _ = element_containing(mesh, xm)
            segments.append(FaultSegment(INTERIOR, ei, ei, pts, wq, plane,
                                         float(tb - ta), diam, diam, key))
    return segments


def _segment_fault_3d(mesh, fault, quad_order):
    del quad_order  # 3D pieces use the fixed degree-7 triangle rule
    (s0, s1), (t0, t1) = fault.bounds
    es, ed = fault.axes
    o = fault.origin
    h = mesh.h_axis
    diam = mesh_size(mesh)
    key = _mesh_key(mesh)
    base_poly = [(s0, t0), (s1, t0), (s1, t1), (s0, t1)]
    area_tol = 1e-12 * diam * diam

    aligned = _aligned_axis(fault, mesh)
    segments = []

    def make_segment(poly, kind, ep, em):
        verts = np.array(poly)
        centroid = verts.mean(axis=0)
        pts_list, wts_list, plane_list = [], [], []
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            tri_area = 0.5 * abs((a[0] - centroid[0]) * (b[1] - centroid[1])
                                 - (b[0] - centroid[0]) * (a[1] - centroid[1]))
            if tri_area <= area_tol:
                continue
            uv = _TRI_PTS
            plane = (centroid[None, :]
                     + uv[:, 0:1] * (a - centroid)[None, :]
                     + uv[:, 1:2] * (b - centroid)[None, :])
            pts_list.append(fault.from_plane(plane))
            wts_list.append(_TRI_WTS * 2.0 * tri_area)
            plane_list.append(plane)
        if not pts_list:
            return
        pts = np.concatenate(pts_list)
        wts = np.concatenate(wts_list)
        plane = np.concatenate(plane_list)
        segments.append(FaultSegment(kind, ep, em, pts, wts, plane,
                                     float(wts.sum()), diam, diam, key))

    def clip_to_cell(poly, ijk, skip_axis=None):
        lo = mesh.box_lo + np.array(ijk) * h
        hi = lo + h
        tol = SNAP_REL * float(np.max(h))
        for d in range(3):
            if d == skip_axis:
                continue
            # x_d(s,t) = o_d + s*es_d + t*ed_d within [lo_d, hi_d]
            poly = _clip_halfplane(poly, -es[d], -ed[d], o[d] - lo[d], tol)
            if not poly:
                return []
            poly = _clip_halfplane(poly, es[d], ed[d], hi[d] - o[d], tol)
            if not poly:
                return []
        return poly

    if aligned is not None:
        d, j = aligned
        others = [dd for dd in range(3) if dd != d]
        has_below = j - 1 >= 0
        has_above = j <= int(mesh.counts[d]) - 1
        for jb in range(int(mesh.counts[others[1]])):
            for ja in range(int(mesh.counts[others[0]])):
                ijk = [0, 0, 0]
                ijk[others[0]] = ja
                ijk[others[1]] = jb
                ijk[d] = j if has_above else j - 1
                poly = clip_to_cell(list(base_poly), ijk, skip_axis=d)
                if len(poly) < 3 or _poly_area(poly) <= area_tol:
                    continue
                if has_below and has_above:
                    ij_b = list(ijk)
                    ij_b[d] = j - 1
                    ij_a = list(ijk)
                    ij_a[d] = j
                    e_b = mesh.element_index(ij_b)
                    e_a = mesh.element_index(ij_a)
                    if fault.normal[d] > 0:
                        ep, em = e_b, e_a
                    else:
                        ep, em = e_a, e_b
                    make_segment(poly, FACE, ep, em)
                else:
                    ei = mesh.element_index(ijk)
                    make_segment(poly, INTERIOR, ei, ei)
        return segments

    # generic plane: candidate elements from the patch bounding box,
    # prefiltered by distance of the element center to the plane
    corners = fault.patch_corners()
    bb_lo = np.maximum(corners.min(axis=0), mesh.box_lo)
    bb_hi = np.minimum(corners.max(axis=0), mesh.box_hi)
    if np.any(bb_hi < bb_lo - SNAP_REL * h):
        return []
    i_lo = np.maximum(np.floor((bb_lo - mesh.box_lo) / h - SNAP_REL).astype(int), 0)
    i_hi = np.minimum(np.ceil((bb_hi - mesh.box_lo) / h + SNAP_REL).astype(int),
                      mesh.counts)
    half_diag = 0.5 * diam
    for k in range(i_lo[2], i_hi[2]):
        for jj in range(i_lo[1], i_hi[1]):
            for i in range(i_lo[0], i_hi[0]):
                ijk = (i, jj, k)
                center = mesh.box_lo + (np.array(ijk) + 0.5) * h
                if abs(fault.plane_distance(center)) > half_diag + SNAP_REL * diam:
                    continue
                poly = clip_to_cell(list(base_poly), ijk)
                if len(poly) < 3 or _poly_area(poly) <= area_tol:
                    continue
                ei = mesh.element_index(ijk)
                make_segment(poly, INTERIOR, ei, ei)
    return segments


def wsm_rhs(system: FeSystem, fault: FaultModel, segments: list[FaultSegment],
            mat: IsotropicElasticity) -> np.ndarray:
    """Load vector of the weak slip term, -integral of b . <sigma_nu(phi_i)>
    over the fault cover.  Entries vanish for shape functions whose support
    misses all segments.  The system is read only; its stiffness never
    changes."""
    space = system.space
    mesh = space.mesh
    key = _mesh_key(mesh)
    dim = space.dim
    nu = fault.normal
    lam, mu = mat.lam, mat.mu
    h = mesh.h_axis
    rhs = np.zeros(space.n_dofs)
    for seg in segments:
        if seg.mesh_key != key:
            raise ValueError("fault segments were built for a different mesh")
        b = np.asarray(fault.slip(seg.plane_coords), dtype=float)
        if b.shape != seg.points.shape:
            raise ValueError("slip function must return one global vector "
                             "per quadrature point")
        sides = (seg.elem_plus,) if seg.elem_plus == seg.elem_minus \
            else (seg.elem_plus, seg.elem_minus)
        w = seg.weights / len(sides)
        b_nu = b @ nu
        for e in sides:
            lo, _ = mesh.element_box(e)
            local = 2.0 * (seg.points - lo) / h - 1.0
            _, grads = shape_eval(space.order, dim, np.clip(local, -1.0, 1.0))
            grads = grads * (2.0 / h)
            g_nu = grads @ nu                                   # (n_qp, n_loc)
            g_b = np.einsum("qad,qd->qa", grads, b)             # (n_qp, n_loc)
            contrib = (lam * np.einsum("q,qac->ac", w * b_nu, grads)
                       + mu * np.einsum("q,qa,qc->ac", w, g_nu, b)
                       + mu * np.einsum("qa,c->ac", w[:, None] * g_b, nu))
            vd = space.elem_dofs[e][:, None] * dim + np.arange(dim)[None, :]
            np.add.at(rhs, vd.ravel(), -contrib.ravel())
    return rhs


def fault_quality_norm(segments: list[FaultSegment], fault: FaultModel) -> float:
    """Mesh-dependent slip norm (sum over pieces of ||b||^2 / h_s)^(1/2) with
    h_s the harmonic average of the adjacent element diameters.  Diagnostic
    for the size of the weak slip load."""
    total = 0.0
    for seg in segments:
        b = np.asarray(fault.slip(seg.plane_coords), dtype=float)
        norm2 = float(np.sum(seg.weights * np.sum(b * b, axis=-1)))
        inv_hs = 1.0 / seg.diam_plus + 1.0 / seg.diam_minus
        total += inv_hs * norm2
    return float(np.sqrt(total))
