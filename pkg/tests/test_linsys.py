"""Assembly, constraints, preconditioners, conjugate gradients."""

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from wsm.elasticity import IsotropicElasticity
from wsm.femspace import build_space, interpolate
from wsm.linsys import (CgError, apply_dirichlet, assemble_stiffness,
                        build_preconditioner, build_system, cg_solve,
                        constrain_rhs, solve_system)
from wsm.mesh import build_box_mesh

from _oracles import dense_stiffness

MAT2 = IsotropicElasticity(1.0, 1.0, 2)
MAT3 = IsotropicElasticity(1.0, 1.0, 3)


def small_space(order=1, counts=(2, 2), dim=2):
    if dim == 2:
        mesh = build_box_mesh((-1, -1), (1, 1), counts)
    else:
        mesh = build_box_mesh((-1, -1, -1), (1, 1, 0), counts)
    return build_space(mesh, order)


class TestAssembly:
    @pytest.mark.parametrize("order", [1, 2])
    def test_rigid_translation_in_null_space(self, order):
        space = small_space(order, (3, 2))
        K = assemble_stiffness(space, MAT2)
        for c in range(2):
            v = np.zeros(space.n_dofs)
            v[c::2] = 1.0
            assert np.abs(K @ v).max() < 1e-10 * np.abs(K.data).max()

    def test_rigid_rotation_in_null_space(self):
        space = small_space(1, (3, 3))
        K = assemble_stiffness(space, MAT2)
        v = interpolate(space, lambda x: np.stack([-x[:, 1], x[:, 0]], axis=-1))
        assert np.abs(K @ v).max() < 1e-10 * np.abs(K.data).max()

    @pytest.mark.parametrize("order,dim,counts", [
        (1, 2, (2, 2)), (2, 2, (2, 2)), (1, 3, (2, 2, 1)), (2, 3, (1, 1, 1)),
    ])
    def test_matches_dense_reference(self, order, dim, counts):
        space = small_space(order, counts, dim)
        K = assemble_stiffness(space, MAT2 if dim == 2 else MAT3).toarray()
        mat = MAT2 if dim == 2 else MAT3
        K_ref = dense_stiffness(space.mesh, order, mat.lam, mat.mu)
        assert_allclose(K, K_ref, atol=1e-12 * np.abs(K_ref).max())

    def test_symmetry(self):
        space = small_space(2, (3, 2))
        K = assemble_stiffness(space, MAT2)
        diff = (K - K.T).toarray()
        assert np.abs(diff).max() < 1e-12 * np.abs(K.data).max()

    def test_reassembly_is_bit_identical(self):
        space = small_space(1, (4, 4))
        K1 = assemble_stiffness(space, MAT2)
        K2 = assemble_stiffness(space, MAT2)
        assert K1.data.tobytes() == K2.data.tobytes()
        assert K1.indices.tobytes() == K2.indices.tobytes()
        assert K1.indptr.tobytes() == K2.indptr.tobytes()

    def test_coercivity_on_constrained_vectors(self):
        space = small_space(1, (4, 4))
        K = assemble_stiffness(space, MAT2)
        free = np.setdiff1d(np.arange(space.n_dofs), space.dirichlet_dofs)
        rng = np.random.default_rng(9)
        for _ in range(100):
            v = np.zeros(space.n_dofs)
            v[free] = rng.standard_normal(free.size)
            assert v @ (K @ v) > 0.0


class TestApplyDirichlet:
    def test_zero_data(self):
        space = small_space(1, (3, 3))
        K = assemble_stiffness(space, MAT2)
        rhs = np.arange(space.n_dofs, dtype=float)
        K_c, rhs_c = apply_dirichlet(K, rhs, np.zeros(space.n_dofs),
                                     space.dirichlet_dofs)
        free = np.setdiff1d(np.arange(space.n_dofs), space.dirichlet_dofs)
        assert_allclose(rhs_c[free], rhs[free])
        assert_allclose(rhs_c[space.dirichlet_dofs], 0.0)

    def test_identity_matrix(self):
        n = 10
        K = sp.identity(n, format="csr")
        g = np.linspace(0, 1, n)
        dofs = np.array([0, 3, 7])
        K_c, rhs_c = apply_dirichlet(K, np.ones(n), g, dofs)
        x = np.array(sp.linalg.spsolve(K_c.tocsc(), rhs_c))
        assert_allclose(x[dofs], g[dofs])

    def test_out_of_range_index(self):
        K = sp.identity(4, format="csr")
        with pytest.raises(IndexError):
            apply_dirichlet(K, np.zeros(4), np.zeros(4), np.array([5]))

    def test_preserves_symmetry_and_spd(self):
        space = small_space(1, (3, 3))
        K = assemble_stiffness(space, MAT2)
        K_c, _ = apply_dirichlet(K, np.zeros(space.n_dofs),
                                 np.zeros(space.n_dofs), space.dirichlet_dofs)
        d = (K_c - K_c.T).toarray()
        assert np.abs(d).max() < 1e-14 * np.abs(K_c.data).max()
        eig = np.linalg.eigvalsh(K_c.toarray())
        assert eig.min() > 0.0

    @pytest.mark.parametrize("order", [1, 2])
    def test_patch_test_linear_field(self, order):
        # zero volume load, zero fault, linear boundary data: the FE solution
        # is that linear field everywhere
        space = small_space(order, (4, 4))
        system = build_system(space, MAT2)

        def field(x):
            return np.stack([0.3 * x[:, 0] - 0.7 * x[:, 1] + 0.1,
                             1.1 * x[:, 0] + 0.4 * x[:, 1]], axis=-1)

        g = interpolate(space, field)
        u, _ = solve_system(system, np.zeros(space.n_dofs), g, rel_tol=1e-13)
        assert_allclose(u, g, atol=1e-10)


class TestPreconditioner:
    def test_jacobi_on_scaled_identity(self):
        K = (2.0 * sp.identity(6)).tocsr()
        M = build_preconditioner(K, "jacobi")
        r = np.arange(6.0)
        assert_allclose(M.apply(r), r / 2.0)

    def test_zero_diagonal_rejected(self):
        K = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):
            build_preconditioner(K, "jacobi")

    def test_rebuild_gives_identical_state(self):
        space = small_space(1, (4, 4))
        K = assemble_stiffness(space, MAT2)
        m1 = build_preconditioner(K, "jacobi")
        m2 = build_preconditioner(K, "jacobi")
        assert m1.state_bytes() == m2.state_bytes()

    def test_sgs_reduces_iterations(self):
        space = small_space(1, (8, 8))
        system = build_system(space, MAT2)
        rhs = np.zeros(space.n_dofs)
        rng = np.random.default_rng(2)
        free = np.setdiff1d(np.arange(space.n_dofs), space.dirichlet_dofs)
        rhs[free] = rng.standard_normal(free.size)
        sgs = build_preconditioner(system.stiffness_constrained, "sgs")
        _, rep_j = cg_solve(system.stiffness_constrained, system.preconditioner, rhs)
        _, rep_s = cg_solve(system.stiffness_constrained, sgs, rhs)
        assert rep_s.iterations <= rep_j.iterations

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_preconditioner(sp.identity(2).tocsr(), "ilu")


class TestCgSolve:
    def test_zero_rhs(self):
        K = sp.identity(5).tocsr()
        x, rep = cg_solve(K, build_preconditioner(K), np.zeros(5))
        assert_allclose(x, 0.0)
        assert rep.iterations == 0

    def test_diagonal_system(self):
        d = np.arange(1.0, 33.0)
        K = sp.diags(d).tocsr()
        rng = np.random.default_rng(0)
        b = rng.standard_normal(32)
        x, rep = cg_solve(K, build_preconditioner(K), b)
        assert_allclose(x, b / d, atol=1e-10)
        assert rep.final_relative_residual <= 1e-10

    def test_matches_dense_direct_solve(self):
        # a fault-loaded system small enough for a dense factorization
        from wsm.fault import segment_fault, wsm_rhs
        from wsm.harness import boundary_values, case_setup

        setup = case_setup("I")
        mesh = build_box_mesh(*setup.box, (16, 16))
        space = build_space(mesh, 1)
        system = build_system(space, setup.mat)
        segments = segment_fault(mesh, setup.fault)
        rhs = wsm_rhs(system, setup.fault, segments, setup.mat)
        g = boundary_values(space, setup.exact)
        rhs_c = constrain_rhs(system.stiffness, rhs, g, system.dirichlet_dofs)
        u_cg, _ = cg_solve(system.stiffness_constrained, system.preconditioner,
                           rhs_c, rel_tol=1e-12)
        u_dense = np.linalg.solve(system.stiffness_constrained.toarray(), rhs_c)
        assert np.abs(u_cg - u_dense).max() < 1e-8

    def test_monotone_residuals_in_preconditioner_norm(self):
        space = small_space(1, (8, 8))
        system = build_system(space, MAT2)
        rng = np.random.default_rng(5)
        rhs = np.zeros(space.n_dofs)
        free = np.setdiff1d(np.arange(space.n_dofs), space.dirichlet_dofs)
        rhs[free] = rng.standard_normal(free.size)
        _, rep = cg_solve(system.stiffness_constrained, system.preconditioner, rhs)
        hist = np.array(rep.residual_history)
        assert np.all(hist[1:] <= hist[:-1] * (1.0 + 1e-10))

    def test_max_iter_error_carries_report(self):
        space = small_space(1, (8, 8))
        system = build_system(space, MAT2)
        rhs = np.zeros(space.n_dofs)
        rhs[2 * int(space.n_scalar // 2)] = 1.0
        with pytest.raises(CgError) as exc:
            cg_solve(system.stiffness_constrained, system.preconditioner, rhs,
                     rel_tol=1e-12, max_iter=3)
        assert exc.value.report.iterations == 3

    def test_bad_tolerance(self):
        K = sp.identity(3).tocsr()
        with pytest.raises(ValueError):
            cg_solve(K, None, np.ones(3), rel_tol=0.0)

    def test_preconditioned_no_worse_than_plain(self):
        # on the homogeneous material and uniform mesh the stiffness diagonal
        # is nearly constant, so Jacobi is iteration-neutral; the comparison
        # is made with the symmetric Gauss-Seidel option
        from wsm.fault import segment_fault, wsm_rhs
        from wsm.harness import boundary_values, case_setup

        setup = case_setup("I")
        mesh = build_box_mesh(*setup.box, (32, 32))
        space = build_space(mesh, 1)
        system = build_system(space, setup.mat)
        segs = segment_fault(mesh, setup.fault)
        rhs = wsm_rhs(system, setup.fault, segs, setup.mat)
        g = boundary_values(space, setup.exact)
        rhs_c = constrain_rhs(system.stiffness, rhs, g, system.dirichlet_dofs)
        sgs = build_preconditioner(system.stiffness_constrained, "sgs")
        _, rep_pc = cg_solve(system.stiffness_constrained, sgs, rhs_c)
        _, rep_plain = cg_solve(system.stiffness_constrained, None, rhs_c)
        assert rep_pc.iterations <= rep_plain.iterations
