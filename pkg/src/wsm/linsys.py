"""Stiffness assembly, Dirichlet elimination, and preconditioned CG.

The stiffness matrix depends only on (mesh, order, material); faults enter
through load vectors only, so the matrix, its Dirichlet-constrained variant
and the preconditioner are computed once per mesh and reused across fault
configurations.

Because all elements of a structured mesh are identical boxes, one element
matrix is computed and scattered everywhere, in element-index order, which
keeps assembly deterministic and bit-reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elasticity import IsotropicElasticity
from .femspace import FeSpace, gauss_rule, shape_eval


def element_stiffness(space: FeSpace, mat: IsotropicElasticity) -> np.ndarray:
    """Dense stiffness matrix of one (any) element, DOFs node-major,
    component-minor.  Quadrature with order+1 points per axis is exact for
    the polynomial integrand on axis-aligned boxes."""
    dim = space.dim
    h = space.mesh.h_axis
    rule = gauss_rule(dim, space.order + 1)
    _, grads = shape_eval(space.order, dim, rule.points)   # (n_qp, n_loc, dim)
    grads = grads * (2.0 / h)                              # local -> physical
    detj = float(np.prod(h / 2.0))
    w = rule.weights * detj

    lam, mu = mat.lam, mat.mu
    div = np.einsum("q,qac,qbd->acbd", w, grads, grads)
    lap = np.einsum("q,qae,qbe->ab", w, grads, grads)
    cross = np.einsum("q,qad,qbc->acbd", w, grads, grads)
    n_loc = grads.shape[1]
    ke = lam * div + mu * cross
    ke += mu * np.einsum("ab,cd->acbd", lap, np.eye(dim))
    return ke.reshape(n_loc * dim, n_loc * dim)


def assemble_stiffness(space: FeSpace, mat: IsotropicElasticity) -> sp.csr_matrix:
    """Global sparse stiffness K[i,j] = integral of sigma(phi_j) : grad(phi_i)."""
    dim = space.dim
    ke = element_stiffness(space, mat)
    vdofs = (space.elem_dofs[:, :, None] * dim
             + np.arange(dim)[None, None, :]).reshape(space.elem_dofs.shape[0], -1)
    n_el, n_ed = vdofs.shape
    rows = np.repeat(vdofs, n_ed, axis=1).ravel()
    cols = np.tile(vdofs, (1, n_ed)).ravel()
    data = np.tile(ke.ravel(), n_el)
    n = space.n_dofs
    K = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    K.sort_indices()
    return K


def apply_dirichlet(K: sp.csr_matrix, rhs: np.ndarray, g: np.ndarray,
                    dofs: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray]:
    """Symmetric elimination of Dirichlet DOFs.

    Constrained rows and columns are zeroed with a unit diagonal, the free
    right-hand side gets -K[:,c] g[c], and rhs[c] = g[c], so the constrained
    system is SPD and its solution carries the boundary values directly.
    """
    n = K.shape[0]
    dofs = np.asarray(dofs, dtype=np.int64)
    if dofs.size and (dofs.min() < 0 or dofs.max() >= n):
        raise IndexError(f"dirichlet dof out of range 0..{n - 1}")
    K_c = constrain_matrix(K, dofs)
    rhs_c = constrain_rhs(K, rhs, g, dofs)
    return K_c, rhs_c


def constrain_matrix(K: sp.csr_matrix, dofs: np.ndarray) -> sp.csr_matrix:
    n = K.shape[0]
    free = np.ones(n)
    free[dofs] = 0.0
    P = sp.diags(free)
    C = sp.diags(1.0 - free)
    K_c = (P @ K @ P + C).tocsr()
    K_c.sort_indices()
    return K_c


def constrain_rhs(K: sp.csr_matrix, rhs: np.ndarray, g: np.ndarray,
                  dofs: np.ndarray) -> np.ndarray:
    g_ext = np.zeros(K.shape[0])
    g_ext[dofs] = np.asarray(g)[dofs]
    rhs_c = rhs - K @ g_ext
    rhs_c[dofs] = g_ext[dofs]
    return rhs_c


class JacobiPreconditioner:
    """Point-Jacobi: division by the matrix diagonal."""

    def __init__(self, K: sp.csr_matrix):
        d = K.diagonal()
        if np.any(d == 0.0):
            raise ValueError("zero diagonal entry; cannot build Jacobi preconditioner")
        self.inv_diag = 1.0 / d

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self.inv_diag * r

    def state_bytes(self) -> bytes:
        return self.inv_diag.tobytes()


class SymmetricGaussSeidelPreconditioner:
    """Symmetric Gauss-Seidel M = (D+L) D^-1 (D+U), applied by two
    triangular solves."""

    def __init__(self, K: sp.csr_matrix):
        d = K.diagonal()
        if np.any(d == 0.0):
            raise ValueError("zero diagonal entry; cannot build SGS preconditioner")
        self.diag = d
        self.lower = sp.tril(K, format="csr")
        self.upper = sp.triu(K, format="csr")

    def apply(self, r: np.ndarray) -> np.ndarray:
        y = spla.spsolve_triangular(self.lower, r, lower=True)
        return spla.spsolve_triangular(self.upper, self.diag * y, lower=False)

    def state_bytes(self) -> bytes:
        return (self.diag.tobytes() + self.lower.indptr.tobytes()
                + self.lower.indices.tobytes() + self.lower.data.tobytes())


def build_preconditioner(K_c: sp.csr_matrix, kind: str = "jacobi"):
    if kind == "jacobi":
        return JacobiPreconditioner(K_c)
    if kind == "sgs":
        return SymmetricGaussSeidelPreconditioner(K_c)
    raise ValueError(f"unknown preconditioner kind {kind!r}")


@dataclass
class SolveReport:
    iterations: int
    final_relative_residual: float
    solve_time: float
    residual_history: list = field(default_factory=list)


class CgError(RuntimeError):
    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


def cg_solve(K_c: sp.csr_matrix, preconditioner, rhs: np.ndarray,
             rel_tol: float = 1e-10, max_iter: int = 20000
             ) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate gradients for the SPD constrained system.

    Stops when ||rhs - K x|| / ||rhs|| <= rel_tol (2-norm, recurrence
    residual verified explicitly at exit).  Deterministic for identical
    inputs: fixed zero initial guess and serial arithmetic.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must be in (0,1), got {rel_tol}")
    t0 = time.perf_counter()
    rhs = np.asarray(rhs, dtype=float)
    b_norm = np.linalg.norm(rhs)
    if b_norm == 0.0:
        return np.zeros_like(rhs), SolveReport(0, 0.0, time.perf_counter() - t0)

    apply_m = preconditioner.apply if preconditioner is not None else (lambda r: r)
    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = apply_m(r)
    p = z.copy()
    rz = float(r @ z)
    history = [float(np.sqrt(rz)) if rz > 0 else 0.0]
    it = 0
    while it < max_iter:
        res = np.linalg.norm(r) / b_norm
        if res <= rel_tol:
            break
        Kp = K_c @ p
        alpha = rz / float(p @ Kp)
        x += alpha * p
        r -= alpha * Kp
        z = apply_m(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        history.append(float(np.sqrt(max(rz, 0.0))))
        it += 1
    final = float(np.linalg.norm(rhs - K_c @ x) / b_norm)
    report = SolveReport(it, final, time.perf_counter() - t0, history)
    if final > rel_tol and it >= max_iter:
        raise CgError(f"CG did not converge in {max_iter} iterations "
                      f"(residual {final:.3e})", report)
    return x, report


@dataclass
class FeSystem:
    """Reusable finite-element system: stiffness, constraints, preconditioner.

    Everything here depends only on (mesh, order, material); no fault data
    enters, which is what makes reuse across fault geometries possible.
    """

    space: FeSpace
    mat: IsotropicElasticity
    stiffness: sp.csr_matrix
    stiffness_constrained: sp.csr_matrix
    dirichlet_dofs: np.ndarray
    preconditioner: object
    assembly_time: float
    factor_time: float


def build_system(space: FeSpace, mat: IsotropicElasticity,
                 precond_kind: str = "jacobi") -> FeSystem:
    t0 = time.perf_counter()
    K = assemble_stiffness(space, mat)
    t1 = time.perf_counter()
    dofs = space.dirichlet_dofs
    K_c = constrain_matrix(K, dofs)
    precond = build_preconditioner(K_c, precond_kind)
    t2 = time.perf_counter()
    return FeSystem(space=space, mat=mat, stiffness=K,
                    stiffness_constrained=K_c, dirichlet_dofs=dofs,
                    preconditioner=precond, assembly_time=t1 - t0,
                    factor_time=t2 - t1)


def solve_system(system: FeSystem, rhs: np.ndarray, g: np.ndarray,
                 rel_tol: float = 1e-10, max_iter: int = 20000
                 ) -> tuple[np.ndarray, SolveReport]:
    """Solve K u = rhs with Dirichlet data g, reusing the constrained matrix
    and preconditioner held by the system."""
    rhs_c = constrain_rhs(system.stiffness, rhs, g, system.dirichlet_dofs)
    return cg_solve(system.stiffness_constrained, system.preconditioner,
                    rhs_c, rel_tol=rel_tol, max_iter=max_iter)
