"""Test-case drivers: mesh sweeps, CSV reporting, and the reuse demo.

Case I is the 2D plane-strain dislocation on (-1,1)^2 with the piecewise
quadratic slip; cases II and III are the 3D half-space problems with a
rectangular constant-slip patch (buried and surface-rupturing).  The exact
solution supplies Dirichlet data on the lateral/bottom boundaries and the
error reference; the top face of the 3D domains is traction free.

The 3D patch is 1 wide along dip and 3^(-1/2) long along strike: at the
30 degree dip this is the only reading of the patch dimensions for which
the dip width spans exactly the 0.25-0.75 depth range.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .analytic import (HalfspaceSource, PlaneStrainDislocation, eval_halfspace,
                       eval_planestrain, grad_halfspace, grad_planestrain)
from .elasticity import IsotropicElasticity
from .errors import ErrorReport, error_norms, fit_rate
from .fault import FaultModel, fault_quality_norm, segment_fault, smooth_slip_2d, wsm_rhs
from .femspace import build_space, eval_field
from .linsys import CgError, build_system, solve_system
from .mesh import build_box_mesh, mesh_size

LAMBDA = 1.0
MU = 1.0
B0 = 0.1

CSV_COLUMNS = ["case", "p", "nx", "ny", "nz", "h",
               "l2_global", "h1_global", "l2_local", "h1_local",
               "l2_surf_global", "l2_surf_local", "slip_norm",
               "cg_iters", "cg_residual", "assemble_ms", "solve_ms",
               "assembly_reused"]


@dataclass
class CaseSetup:
    name: str
    dim: int
    mat: IsotropicElasticity
    fault: FaultModel
    exact: object
    exact_grad: object
    counts_of: object         # level count N -> per-axis counts tuple
    box: tuple                # (lo, hi)
    free_surface: tuple | None


def planestrain_fault(b0: float = B0, origin=(0.0, 0.0),
                      e_xi=(0.8, 0.6)) -> FaultModel:
    """Unit-length 2D fault with the smooth piecewise quadratic slip.  The
    default direction (4/5, 3/5) realizes the arctan(3/4) inclination
    exactly.  The plus side is eta > 0, so the normal is -e_eta."""
    e_xi = np.asarray(e_xi, dtype=float)
    e_xi = e_xi / np.linalg.norm(e_xi)
    e_eta = np.array([-e_xi[1], e_xi[0]])

    def slip(s):
        return smooth_slip_2d(s[..., 0], b0)[..., None] * e_xi

    return FaultModel(dim=2, origin=np.asarray(origin, dtype=float),
                      axes=(e_xi,), normal=-e_eta,
                      bounds=((-0.5, 0.5),), slip=slip,
                      slip_breakpoints=(-1.0 / 6.0, 1.0 / 6.0))


def halfspace_fault(src: HalfspaceSource) -> FaultModel:
    """FaultModel matching a rectangular half-space source: the plus side is
    the hanging wall, so the fault normal (into the minus side) is the
    negated hanging-wall normal and the slip is the hanging-minus-foot jump."""
    jump = src.jump_vector()

    def slip(s):
        return np.broadcast_to(jump, s.shape[:-1] + (3,)).copy()

    (s_half, t_lo, t_hi) = (src.length / 2.0, -src.width / 2.0, src.width / 2.0)
    return FaultModel(dim=3, origin=np.asarray(src.center, dtype=float),
                      axes=(src.e_strike, src.e_updip),
                      normal=-src.unit_normal,
                      bounds=((-s_half, s_half), (t_lo, t_hi)), slip=slip)


def case_setup(case: str) -> CaseSetup:
    mat2 = IsotropicElasticity(LAMBDA, MU, 2)
    mat3 = IsotropicElasticity(LAMBDA, MU, 3)
    if case == "I":
        model = PlaneStrainDislocation(LAMBDA, MU, B0)
        return CaseSetup(
            name="I", dim=2, mat=mat2, fault=planestrain_fault(),
            exact=lambda x: eval_planestrain(model, x),
            exact_grad=lambda x: grad_planestrain(model, x),
            counts_of=lambda n: (n, n),
            box=((-1.0, -1.0), (1.0, 1.0)),
            free_surface=None)
    if case in ("II", "III"):
        # strike 15 degrees, dip 30 degrees; dip width 1 spans depths
        # 0.25..0.75 (II); extended to 1.5 the patch ruptures the surface
        # and spans 0..0.75 with the dip slip sense reversed (III)
        if case == "II":
            width = 1.0
            center_z = -0.5
            dip_slip = 0.1
        else:
            width = 1.5
            center_z = -0.375
            dip_slip = -0.1
        src = HalfspaceSource(LAMBDA, MU, (0.0, 0.0, center_z),
                              strike_deg=15.0, dip_deg=30.0,
                              length=3.0 ** -0.5, width=width,
                              strike_slip=0.2, dip_slip=dip_slip)
        return CaseSetup(
            name=case, dim=3, mat=mat3, fault=halfspace_fault(src),
            exact=lambda x: eval_halfspace(src, x),
            exact_grad=lambda x: grad_halfspace(src, x),
            counts_of=lambda n: (n, n, max(n // 2, 1)),
            box=((-1.0, -1.0, -1.0), (1.0, 1.0, 0.0)),
            free_surface=(2, 1))
    raise ValueError(f"unknown case {case!r}; expected I, II or III")


def boundary_values(space, exact) -> np.ndarray:
    """Coefficient vector holding the exact solution at Dirichlet nodes."""
    g = np.zeros(space.n_dofs)
    nodes = space.dirichlet_nodes
    if nodes.size:
        vals = np.asarray(exact(space.dof_coords[nodes]))
        for c in range(space.dim):
            g[nodes * space.dim + c] = vals[:, c]
    return g


def run_level(setup: CaseSetup, p: int, n: int, exclusion: float = 0.1,
              rel_tol: float = 1e-10, system=None,
              max_iter: int = 20000) -> tuple[ErrorReport, object]:
    """Solve one mesh level; returns the report and the FeSystem (which can
    be passed back in to reuse the assembled stiffness)."""
    counts = setup.counts_of(n)
    if system is None:
        mesh = build_box_mesh(*setup.box, counts, setup.free_surface)
        space = build_space(mesh, p)
        system = build_system(space, setup.mat)
        reused = False
    else:
        space = system.space
        if tuple(space.mesh.counts) != tuple(counts) or space.order != p:
            raise ValueError("provided system does not match requested level")
        reused = True

    g = boundary_values(space, setup.exact)
    segments = segment_fault(space.mesh, setup.fault)
    rhs = wsm_rhs(system, setup.fault, segments, setup.mat)
    u, solve_rep = solve_system(system, rhs, g, rel_tol=rel_tol,
                                max_iter=max_iter)

    norms = error_norms(space, u, setup.exact, setup.exact_grad,
                        exclusion, setup.fault,
                        with_surface=setup.free_surface is not None)
    report = ErrorReport(
        case=setup.name, order=p, counts=tuple(counts),
        h=mesh_size(space.mesh),
        slip_norm=fault_quality_norm(segments, setup.fault),
        solve=solve_rep, assembly_reused=reused,
        assemble_time=system.assembly_time, **norms)
    return report, system


def run_case(case: str, p: int, counts: list[int], exclusion: float = 0.1,
             out: str | None = None, rel_tol: float = 1e-10,
             append: bool = False, max_iter: int = 20000) -> list[ErrorReport]:
    """Run a mesh sequence for one test case; optionally write CSV rows.

    A solver failure aborts its level: the failure is still recorded as a
    CSV row (norm columns empty, solver statistics filled in) and the error
    is re-raised once the rows are written.
    """
    setup = case_setup(case)
    reports = []
    failure = None
    for n in counts:
        try:
            report, _ = run_level(setup, p, n, exclusion, rel_tol,
                                  max_iter=max_iter)
        except CgError as exc:
            cts = tuple(setup.counts_of(n))
            h = float(np.linalg.norm(
                (np.asarray(setup.box[1]) - np.asarray(setup.box[0]))
                / np.asarray(cts)))
            reports.append(ErrorReport(
                case=setup.name, order=p, counts=cts, h=h,
                l2_global=None, h1_global=None, l2_local=None, h1_local=None,
                l2_surf_global=None, l2_surf_local=None, slip_norm=None,
                solve=exc.report, assembly_reused=False))
            failure = exc
            break
        reports.append(report)
    if out is not None:
        write_csv(out, reports, append=append)
    if failure is not None:
        raise failure
    return reports


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12e}"
    return str(v)


def csv_rows(reports: list[ErrorReport]) -> list[str]:
    rows = []
    for r in reports:
        counts = list(r.counts) + [None] * (3 - len(r.counts))
        vals = [r.case, r.order, counts[0], counts[1], counts[2], r.h,
                r.l2_global, r.h1_global, r.l2_local, r.h1_local,
                r.l2_surf_global, r.l2_surf_local, r.slip_norm,
                r.solve.iterations, r.solve.final_relative_residual,
                r.assemble_time * 1e3, r.solve.solve_time * 1e3,
                r.assembly_reused]
        rows.append(",".join(_fmt(v) for v in vals))
    return rows


def write_csv(path: str, reports: list[ErrorReport], append: bool = False):
    mode = "a" if append else "w"
    with open(path, mode) as f:
        if not append:
            f.write(",".join(CSV_COLUMNS) + "\n")
        for row in csv_rows(reports):
            f.write(row + "\n")


def read_csv(path: str) -> list[dict]:
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    header = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if parts[0] == "case":
            continue  # repeated header from appended files
        out.append(dict(zip(header, parts)))
    return out


def rates_from_csv(path: str, metric: str) -> list[tuple[str, int, object]]:
    """RateFit per (case, order) group for one CSV metric column."""
    rows = read_csv(path)
    if rows and metric not in rows[0]:
        raise KeyError(f"metric {metric!r} not in CSV columns")
    groups = {}
    for row in rows:
        key = (row["case"], int(row["p"]))
        val = row[metric]
        if val == "":
            continue
        groups.setdefault(key, []).append((float(row["h"]), float(val)))
    out = []
    for key in sorted(groups):
        pairs = sorted(groups[key], key=lambda p: -p[0])
        out.append((key[0], key[1], fit_rate(pairs, metric)))
    return out


def midpoint_error(setup: CaseSetup, space, u_h: np.ndarray,
                   offset: float = 1e-6) -> float:
    """Pointwise error magnitude at the dislocation midpoint, evaluated just
    off the fault on the plus side (the FE field is continuous there)."""
    mid_plane = np.array([[0.5 * (lo + hi) for lo, hi in setup.fault.bounds]])
    x = setup.fault.from_plane(mid_plane)[0] - offset * setup.fault.normal
    ue = np.asarray(setup.exact(x[None, :]))[0]
    uh = eval_field(space, u_h, x[None, :])[0]
    return float(np.linalg.norm(ue - uh))


@dataclass
class ReuseDemoResult:
    assembly_time: float
    factor_time: float
    cold_time: float           # assembly + preconditioner + first-fault work
    fault_times: list          # per-fault (segments+rhs+solve) wall times
    iterations: list
    checksums: list            # solution checksums, for determinism checks


def random_fault_2d(rng: np.random.Generator) -> FaultModel:
    angle = rng.uniform(0.0, np.pi)
    e_xi = np.array([np.cos(angle), np.sin(angle)])
    origin = rng.uniform(-0.2, 0.2, size=2)
    return planestrain_fault(origin=origin, e_xi=e_xi)


def reuse_demo(counts: int = 32, p: int = 1, n_faults: int = 10,
               seed: int = 42, rel_tol: float = 1e-10) -> ReuseDemoResult:
    """Assemble once, then segment + load + solve for each fault.  The
    stiffness, constrained matrix and preconditioner are shared across all
    faults; only the loads change."""
    mesh = build_box_mesh((-1.0, -1.0), (1.0, 1.0), (counts, counts))
    space = build_space(mesh, p)
    mat = IsotropicElasticity(LAMBDA, MU, 2)
    system = build_system(space, mat)
    g = np.zeros(space.n_dofs)

    rng = np.random.default_rng(seed)
    faults = [random_fault_2d(rng) for _ in range(n_faults)]

    times, iters, sums = [], [], []
    stiffness_id = id(system.stiffness)
    for fault in faults:
        t0 = time.perf_counter()
        segments = segment_fault(mesh, fault)
        rhs = wsm_rhs(system, fault, segments, mat)
        assert id(system.stiffness) == stiffness_id
        u, rep = solve_system(system, rhs, g, rel_tol=rel_tol)
        times.append(time.perf_counter() - t0)
        iters.append(rep.iterations)
        sums.append(float(np.sum(u * u)))
    cold = system.assembly_time + system.factor_time + times[0]
    return ReuseDemoResult(system.assembly_time, system.factor_time, cold,
                           times, iters, sums)
