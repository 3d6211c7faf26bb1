"""Structured quadrilateral/hexahedral meshes on axis-aligned boxes.

Elements are identical axis-aligned boxes.  Nodes and elements are ordered
lexicographically with the x index running fastest, which fixes the local
node ordering of every element and makes downstream matrices reproducible
bit for bit.  Boundary facets carry exactly one tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIRICHLET = "DIRICHLET"
FREE_SURFACE = "FREE_SURFACE"

# snap tolerance for point location, relative to the element size; fault
# planes in the test problems pass exactly through grid planes
SNAP_REL = 1e-12


@dataclass(frozen=True)
class StructuredMesh:
    dim: int
    box_lo: np.ndarray
    box_hi: np.ndarray
    counts: np.ndarray          # elements per axis
    nodes: np.ndarray           # (n_nodes, dim), lexicographic, x fastest
    elements: np.ndarray        # (n_elem, 2**dim) node indices, x fastest
    boundary_facets: list = field(default_factory=list)  # (elem, local_face, tag)

    @property
    def h_axis(self) -> np.ndarray:
        return (self.box_hi - self.box_lo) / self.counts

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.counts))

    def element_index(self, ijk) -> int:
        """Flatten per-axis element indices (x fastest)."""
        idx = 0
        for d in reversed(range(self.dim)):
            idx = idx * self.counts[d] + ijk[d]
        return int(idx)

    def element_ijk(self, e: int) -> tuple:
        out = []
        for d in range(self.dim):
            out.append(int(e % self.counts[d]))
            e //= self.counts[d]
        return tuple(out)

    def element_box(self, e: int) -> tuple[np.ndarray, np.ndarray]:
        ijk = np.array(self.element_ijk(e))
        lo = self.box_lo + ijk * self.h_axis
        return lo, lo + self.h_axis


def _grid(lo, hi, n):
    # single expression per axis keeps node coordinates bit-reproducible
    return np.array([lo + i * (hi - lo) / n for i in range(n + 1)])


def build_box_mesh(lo, hi, counts, free_surface: tuple[int, int] | None = None
                   ) -> StructuredMesh:
    """Tensor-product mesh of the box [lo, hi] with counts elements per axis.

    All outer facets are tagged DIRICHLET except those on the side selected
    by ``free_surface = (axis, side)`` with side 0 (low) or 1 (high), which
    are tagged FREE_SURFACE.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    counts = np.asarray(counts, dtype=int)
    dim = len(lo)
    if dim not in (2, 3) or len(hi) != dim or len(counts) != dim:
        raise ValueError("lo, hi, counts must all have length 2 or 3")
    if np.any(hi <= lo):
        raise ValueError(f"degenerate box: lo={lo}, hi={hi}")
    if np.any(counts < 1):
        raise ValueError(f"counts must be >= 1, got {counts}")

    axes = [_grid(lo[d], hi[d], counts[d]) for d in range(dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    # x fastest: transpose so that axis 0 of the flattened array is x
    nodes = np.stack([g.T.ravel() if dim == 2 else np.transpose(g, (2, 1, 0)).ravel()
                      for g in grids], axis=-1)

    nn = counts + 1
    def node_index(ijk):
        idx = 0
        for d in reversed(range(dim)):
            idx = idx * nn[d] + ijk[d]
        return idx

    n_elem = int(np.prod(counts))
    elements = np.empty((n_elem, 2 ** dim), dtype=np.int64)
    local_offsets = [np.array([(k >> d) & 1 for d in range(dim)])
                     for k in range(2 ** dim)]
    e = 0
    ranges = [range(c) for c in counts]
    if dim == 2:
        iters = ((i, j) for j in ranges[1] for i in ranges[0])
    else:
        iters = ((i, j, k) for k in ranges[2] for j in ranges[1] for i in ranges[0])
    for ijk in iters:
        base = np.array(ijk)
        for loc, off in enumerate(local_offsets):
            elements[e, loc] = node_index(base + off)
        e += 1

    mesh = StructuredMesh(dim=dim, box_lo=lo, box_hi=hi, counts=counts,
                          nodes=nodes, elements=elements)

    facets = []
    for axis in range(dim):
        for side in (0, 1):
            tag = FREE_SURFACE if free_surface == (axis, side) else DIRICHLET
            local_face = 2 * axis + side
            fixed = 0 if side == 0 else counts[axis] - 1
            other = [d for d in range(dim) if d != axis]
            if dim == 2:
                for i in range(counts[other[0]]):
                    ijk = [0, 0]
                    ijk[axis] = fixed
                    ijk[other[0]] = i
                    facets.append((mesh.element_index(ijk), local_face, tag))
            else:
                for j in range(counts[other[1]]):
                    for i in range(counts[other[0]]):
                        ijk = [0, 0, 0]
                        ijk[axis] = fixed
                        ijk[other[0]] = i
                        ijk[other[1]] = j
                        facets.append((mesh.element_index(ijk), local_face, tag))
    mesh.boundary_facets.extend(facets)
    return mesh


def mesh_size(mesh: StructuredMesh) -> float:
    """Largest element diameter (box diagonal; all elements are identical)."""
    return float(np.linalg.norm(mesh.h_axis))


def element_containing(mesh: StructuredMesh, x) -> tuple[int, np.ndarray]:
    """Element whose closed box contains x, plus local coordinates in [-1,1]^dim.

    Points within SNAP_REL*h of a shared grid plane are assigned to the
    lower-index neighbor.
    """
    x = np.asarray(x, dtype=float)
    h = mesh.h_axis
    snap = SNAP_REL
    if np.any(x < mesh.box_lo - snap * h) or np.any(x > mesh.box_hi + snap * h):
        raise ValueError(f"point {x} outside mesh box")
    ijk = []
    for d in range(mesh.dim):
        t = (x[d] - mesh.box_lo[d]) / h[d]
        i = int(np.floor(t))
        # tie toward the lower-index element
        if i >= 1 and t - i <= snap:
            i -= 1
        i = min(max(i, 0), int(mesh.counts[d]) - 1)
        ijk.append(i)
    e = mesh.element_index(ijk)
    lo, _ = mesh.element_box(e)
    local = 2.0 * (x - lo) / h - 1.0
    return e, np.clip(local, -1.0, 1.0)


def mesh_sequence(lo, hi, counts0, levels: int,
                  free_surface=None) -> list[StructuredMesh]:
    """Meshes with counts doubling per level."""
    counts0 = np.asarray(counts0, dtype=int)
    return [build_box_mesh(lo, hi, counts0 * 2 ** k, free_surface)
            for k in range(levels)]


def dump_mesh(mesh: StructuredMesh, path: str):
    """Plain-text dump (node count, coordinates, connectivity) for debugging."""
    with open(path, "w") as f:
        f.write(f"{mesh.nodes.shape[0]} {mesh.elements.shape[0]} {mesh.dim}\n")
        for x in mesh.nodes:
            f.write(" ".join(f"{c:.17g}" for c in x) + "\n")
        for conn in mesh.elements:
            f.write(" ".join(str(int(i)) for i in conn) + "\n")
