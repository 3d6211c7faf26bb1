"""Displacement of a rectangular uniform-slip dislocation in a homogeneous
isotropic half-space with a traction-free surface at z = 0.

Internal-point formulas follow the standard rectangular-source solution
composed of an infinite-medium part evaluated for the real and image sources,
a surface-correction part, and a depth-multiplied part, each summed over the
four patch corners with alternating signs.  Evaluation is vectorized over
points.  Validity: z <= 0; points on the patch itself must be perturbed to
one side by the caller.

The geometry is given by the patch centroid, strike angle (direction of the
strike axis measured from +x in the horizontal plane), dip angle from the
horizontal, and the along-strike/along-dip side lengths.  Slip is the motion
of the hanging wall relative to the foot wall, decomposed into strike and
(up-)dip components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EDGE_TOL = 1e-14


@dataclass(frozen=True)
class HalfspaceSource:
    lam: float
    mu: float
    center: tuple          # patch centroid (x, y, z), z < 0 or == 0 top edge
    strike_deg: float
    dip_deg: float
    length: float          # along strike
    width: float           # along dip
    strike_slip: float
    dip_slip: float

    @property
    def alpha(self) -> float:
        return (self.lam + self.mu) / (self.lam + 2.0 * self.mu)

    @property
    def e_strike(self) -> np.ndarray:
        phi = np.deg2rad(self.strike_deg)
        return np.array([np.cos(phi), np.sin(phi), 0.0])

    @property
    def e_updip(self) -> np.ndarray:
        phi = np.deg2rad(self.strike_deg)
        delta = np.deg2rad(self.dip_deg)
        horiz = np.array([-np.sin(phi), np.cos(phi), 0.0])
        return np.cos(delta) * horiz + np.sin(delta) * np.array([0.0, 0.0, 1.0])

    @property
    def unit_normal(self) -> np.ndarray:
        """Unit normal pointing toward the hanging-wall side."""
        return np.cross(self.e_strike, self.e_updip)

    @property
    def corner(self) -> np.ndarray:
        """Bottom-edge corner where the internal frame originates."""
        c = np.asarray(self.center, dtype=float)
        return c - 0.5 * self.length * self.e_strike - 0.5 * self.width * self.e_updip

    @property
    def depth_bottom(self) -> float:
        return -float(self.corner[2])

    def jump_vector(self) -> np.ndarray:
        """Displacement jump, hanging wall minus foot wall, as a global vector."""
        return (self.strike_slip * self.e_strike
                + self.dip_slip * self.e_updip)

    def distance_to_patch(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        rel = x - self.corner
        s = np.clip(rel @ self.e_strike, 0.0, self.length)
        t = np.clip(rel @ self.e_updip, 0.0, self.width)
        closest = self.corner + s[:, None] * self.e_strike + t[:, None] * self.e_updip
        return np.linalg.norm(x - closest, axis=-1)


def _safe_div(num, den):
    return np.where(np.abs(den) < _EDGE_TOL, 0.0,
                    num / np.where(np.abs(den) < _EDGE_TOL, 1.0, den))


def _geom(xi, eta, q, zeta, cd, sd):
    """Shared geometric factors for one corner configuration."""
    R = np.sqrt(xi * xi + eta * eta + q * q)
    X = np.sqrt(xi * xi + q * q)
    ybar = eta * cd + q * sd
    dbar = eta * sd - q * cd
    cbar = dbar + zeta
    h = q * cd - zeta

    theta = np.where(np.abs(q) < _EDGE_TOL, 0.0,
                     np.arctan(_safe_div(xi * eta, q * R)))

    Reps = R + xi
    meps = np.abs(Reps) < _EDGE_TOL
    X11 = np.where(meps, 0.0, _safe_div(1.0, R * Reps))
    X32 = np.where(meps, 0.0, _safe_div(2.0 * R + xi, R ** 3 * Reps ** 2))
    ln_Reps = np.where(meps, -np.log(np.maximum(R - xi, _EDGE_TOL)),
                       np.log(np.maximum(Reps, _EDGE_TOL)))

    Reta = R + eta
    meta = np.abs(Reta) < _EDGE_TOL
    Y11 = np.where(meta, 0.0, _safe_div(1.0, R * Reta))
    Y32 = np.where(meta, 0.0, _safe_div(2.0 * R + eta, R ** 3 * Reta ** 2))
    ln_Reta = np.where(meta, -np.log(np.maximum(R - eta, _EDGE_TOL)),
                       np.log(np.maximum(Reta, _EDGE_TOL)))

    Z32 = sd / R ** 3 - h * Y32

    Rd = R + dbar
    if np.abs(cd) > 1e-12:
        I3 = ybar / (cd * Rd) - (ln_Reta - sd * np.log(Rd)) / cd ** 2
        num = eta * (X + q * cd) + X * (R + X) * sd
        den = xi * (R + X) * cd
        atan_term = np.where(np.abs(xi) < _EDGE_TOL, 0.0,
                             np.arctan(_safe_div(num, den)))
        I4 = sd * xi / (cd * Rd) + 2.0 / cd ** 2 * atan_term
    else:
        I3 = 0.5 * (eta / Rd + ybar * q / Rd ** 2 - ln_Reta)
        I4 = 0.5 * xi * ybar / Rd ** 2
    I2 = np.log(Rd) + I3 * sd
    I1 = -xi / Rd * cd - I4 * sd

    return dict(R=R, ybar=ybar, dbar=dbar, cbar=cbar, theta=theta,
                X11=X11, X32=X32, ln_Reps=ln_Reps,
                Y11=Y11, Y32=Y32, ln_Reta=ln_Reta, Z32=Z32,
                Rd=Rd, I1=I1, I2=I2, I3=I3, I4=I4)


def _f_strike(term, xi, eta, q, zeta, alpha, cd, sd):
    g = _geom(xi, eta, q, zeta, cd, sd)
    R, Y11, X11 = g["R"], g["Y11"], g["X11"]
    if term == "A":
        f1 = g["theta"] / 2.0 + alpha / 2.0 * xi * q * Y11
        f2 = alpha / 2.0 * q / R
        f3 = (1 - alpha) / 2.0 * g["ln_Reta"] - alpha / 2.0 * q * q * Y11
    elif term == "B":
        f1 = -xi * q * Y11 - g["theta"] - (1 - alpha) / alpha * g["I1"] * sd
        f2 = -q / R + (1 - alpha) / alpha * g["ybar"] / g["Rd"] * sd
        f3 = q * q * Y11 - (1 - alpha) / alpha * g["I2"] * sd
    else:  # C
        f1 = (1 - alpha) * xi * Y11 * cd - alpha * xi * q * g["Z32"]
        f2 = ((1 - alpha) * (cd / R + 2.0 * q * Y11 * sd)
              - alpha * g["cbar"] * q / R ** 3)
        f3 = ((1 - alpha) * q * Y11 * cd
              - alpha * (g["cbar"] * eta / R ** 3 - zeta * Y11
                         + xi * xi * g["Z32"]))
    return np.stack([f1, f2, f3])


def _f_dip(term, xi, eta, q, zeta, alpha, cd, sd):
    g = _geom(xi, eta, q, zeta, cd, sd)
    R, Y11, X11 = g["R"], g["Y11"], g["X11"]
    if term == "A":
        f1 = alpha / 2.0 * q / R
        f2 = g["theta"] / 2.0 + alpha / 2.0 * eta * q * X11
        f3 = (1 - alpha) / 2.0 * g["ln_Reps"] - alpha / 2.0 * q * q * X11
    elif term == "B":
        f1 = -q / R + (1 - alpha) / alpha * g["I3"] * sd * cd
        f2 = (-eta * q * X11 - g["theta"]
              - (1 - alpha) / alpha * xi / g["Rd"] * sd * cd)
        f3 = q * q * X11 + (1 - alpha) / alpha * g["I4"] * sd * cd
    else:  # C
        f1 = ((1 - alpha) * cd / R - q * Y11 * sd
              - alpha * g["cbar"] * q / R ** 3)
        f2 = (1 - alpha) * g["ybar"] * X11 - alpha * g["cbar"] * eta * q * g["X32"]
        f3 = (-g["dbar"] * X11 - xi * Y11 * sd
              - alpha * g["cbar"] * (X11 - q * q * g["X32"]))
    return np.stack([f1, f2, f3])


def _chinnery(f, term, x, p, q, zeta, L, W, alpha, cd, sd):
    return (f(term, x, p, q, zeta, alpha, cd, sd)
            - f(term, x, p - W, q, zeta, alpha, cd, sd)
            - f(term, x - L, p, q, zeta, alpha, cd, sd)
            + f(term, x - L, p - W, q, zeta, alpha, cd, sd))


def eval_halfspace(src: HalfspaceSource, x, allow_surface: bool = True
                   ) -> np.ndarray:
    """Displacement at global points x (n, 3) with x_z <= 0."""
    single = np.asarray(x).ndim == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(x[:, 2] > 1e-12):
        raise ValueError("evaluation point above the free surface z = 0")

    phi = np.deg2rad(src.strike_deg)
    delta = np.deg2rad(src.dip_deg)
    cd, sd = np.cos(delta), np.sin(delta)
    alpha = src.alpha
    L, W = src.length, src.width
    c = src.depth_bottom
    corner = src.corner

    rel = x - np.array([corner[0], corner[1], 0.0])
    xs = rel[:, 0] * np.cos(phi) + rel[:, 1] * np.sin(phi)
    ys = -rel[:, 0] * np.sin(phi) + rel[:, 1] * np.cos(phi)
    z = x[:, 2]

    d_real = c - z
    p_real = ys * cd + d_real * sd
    q_real = ys * sd - d_real * cd
    d_imag = c + z
    p_imag = ys * cd + d_imag * sd
    q_imag = ys * sd - d_imag * cd

    out = np.zeros((x.shape[0], 3))
    for f, U in ((_f_strike, src.strike_slip), (_f_dip, src.dip_slip)):
        if U == 0.0:
            continue
        uA = _chinnery(f, "A", xs, p_real, q_real, z, L, W, alpha, cd, sd)
        uAh = _chinnery(f, "A", xs, p_imag, q_imag, -z, L, W, alpha, cd, sd)
        uB = _chinnery(f, "B", xs, p_real, q_real, z, L, W, alpha, cd, sd)
        uC = _chinnery(f, "C", xs, p_real, q_real, z, L, W, alpha, cd, sd)
        k = U / (2.0 * np.pi)
        u1 = k * (uA[0] - uAh[0] + uB[0] + z * uC[0])
        u2 = k * ((uA[1] - uAh[1] + uB[1] + z * uC[1]) * cd
                  - (uA[2] - uAh[2] + uB[2] + z * uC[2]) * sd)
        u3 = k * ((uA[1] - uAh[1] + uB[1] - z * uC[1]) * sd
                  + (uA[2] - uAh[2] + uB[2] - z * uC[2]) * cd)
        out[:, 0] += u1 * np.cos(phi) - u2 * np.sin(phi)
        out[:, 1] += u1 * np.sin(phi) + u2 * np.cos(phi)
        out[:, 2] += u3
    return out[0] if single else out


def grad_halfspace(src: HalfspaceSource, x, step: float = 1e-5) -> np.ndarray:
    """Displacement gradient du_i/dx_j by central differences, shape (n, 3, 3).

    The z difference switches to one-sided near the free surface so that no
    evaluation point leaves the half-space; the step shrinks near the fault
    plane to keep the stencil on one side.
    """
    single = np.asarray(x).ndim == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    dist = src.distance_to_patch(x)
    hstep = np.minimum(step, np.maximum(0.2 * dist, 1e-9))
    g = np.empty((x.shape[0], 3, 3))
    for j in range(3):
        xp = x.copy()
        xm = x.copy()
        xp[:, j] += hstep
        xm[:, j] -= hstep
        if j == 2:
            over = xp[:, 2] > 0.0
            xp[over, 2] = 0.0
        up = eval_halfspace(src, xp)
        um = eval_halfspace(src, xm)
        denom = (xp[:, j] - xm[:, j])[:, None]
        g[:, :, j] = (up - um) / denom
    return g[0] if single else g
