"""Effective-index mode solver for a rectangular dielectric wire.

The 2D cross-section (width x thickness) is reduced to two 1D slab
problems.  The thickness direction is solved first with the in-plane
polarized slab equation, collapsing the membrane to a slab index.  The
width direction is then solved for the fundamental even mode of the
dominant transverse field, which is polarized normal to the sidewalls,
so the reduced 1D problem carries the 1/n^2 flux continuity of that
polarization.  Both steps reduce to the same transcendental equation

    u * tan(u) = R * sqrt(V^2 - u^2)

with R = 1 for the thickness step and R = (n_slab/n_clad)^2 for the
width step.

Internally the width problem is solved for the auxiliary field H(y)
(continuous across the sidewalls, equal to n^2 * e_y up to a constant).
The transverse profile returned is

    e_y(y) = H(y) / n(y)^2       (dominant transverse component)
    e_x(y) = H'(y) / (k n(y)^2)  (longitudinal component, from the
                                  divergence condition k e_x = d e_y/dy
                                  applied in flux form; central
                                  differences on the grid)

Lengths are nm, wavenumbers rad/nm.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


class ModeSolverError(Exception):
    """Base class for mode-solver failures."""


class NoBoundMode(ModeSolverError):
    """The reduced slab supports no guided solution on the window."""


class GridTooCoarse(ModeSolverError):
    """The requested grid cannot represent the mode consistently."""


class OutOfRange(ModeSolverError, ValueError):
    """A queried position lies outside the computed grid."""


# Lateral window extends this far beyond each sidewall (nm).
WINDOW_MARGIN_NM = 300.0
# The evanescent tail must decay by at least e^-2 inside the margin.
MIN_DECAY_LENGTHS = 2.0
DEFAULT_GRID_POINTS = 513


@dataclass(frozen=True)
class WaveguideGeometry:
    """Rectangular wire cross-section and the operating wavelength."""

    width_nm: float = 300.0
    thickness_nm: float = 160.0
    core_index: float = 3.48
    clad_index: float = 1.0
    wavelength_nm: float = 930.0

    def __post_init__(self) -> None:
        if self.width_nm <= 0 or self.thickness_nm <= 0:
            raise ValueError("waveguide dimensions must be positive")
        if self.clad_index < 1.0:
            raise ValueError("clad_index must be >= 1")
        if self.core_index <= self.clad_index:
            raise ValueError("core_index must exceed clad_index")
        if self.wavelength_nm <= 0:
            raise ValueError("wavelength_nm must be positive")

    @property
    def k0(self) -> float:
        return 2.0 * np.pi / self.wavelength_nm


@dataclass
class ModeProfile:
    """Sampled fundamental mode of one geometry.

    grid : lateral positions y (nm), symmetric about 0
    e_x, e_y : real field amplitudes; the physical mode field is
        (i*e_x(y), e_y(y), 0) with max |e_y| = 1
    n_eff : effective index of the guided mode
    k : propagation constant (rad/nm)
    group_index : n_eff - lambda * d n_eff / d lambda at fixed material
        indices; carried for the group-velocity prefactor of
        absolute-rate conversions
    norm_N : normalization integral of eps_r |E|^2 over the window
        (per unit thickness)
    core_half_width : half the wire width (nm), the physical range for
        emitter offsets
    """

    grid: np.ndarray
    e_x: np.ndarray
    e_y: np.ndarray
    n_eff: float
    k: float
    group_index: float
    norm_N: float
    core_half_width: float


def _solve_even_slab(V: float, R: float) -> float:
    """Root u of u*tan(u) = R*sqrt(V^2 - u^2) on (0, min(V, pi/2)).

    The left side grows monotonically from 0, the right side falls to 0
    at u = V, so the fundamental even mode always has exactly one root.
    """
    if V <= 0:
        raise NoBoundMode("slab V-number is not positive")

    def g(u: float) -> float:
        return u * np.tan(u) - R * np.sqrt(max(V * V - u * u, 0.0))

    lo = 1e-12
    hi = min(V, np.pi / 2.0) - 1e-12
    if hi <= lo:
        raise NoBoundMode("slab V-number too small to bracket a mode")
    try:
        return brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    except ValueError as exc:  # no sign change on the bracket
        raise NoBoundMode("no guided slab solution in bracket") from exc
    except RuntimeError as exc:  # iteration limit
        raise GridTooCoarse("slab eigenvalue did not converge to 1e-9") from exc


@dataclass(frozen=True)
class _WidthSolution:
    n_slab: float
    n_eff: float
    beta: float
    h_t: float  # transverse wavenumber in the core
    q: float  # evanescent decay rate in the cladding
    u: float  # h_t * width/2


def _solve_width(geom: WaveguideGeometry, wavelength_nm: float) -> _WidthSolution:
    k0 = 2.0 * np.pi / wavelength_nm
    half_t = geom.thickness_nm / 2.0
    V_t = k0 * half_t * np.sqrt(geom.core_index**2 - geom.clad_index**2)
    u_t = _solve_even_slab(V_t, 1.0)
    kappa_t = u_t / half_t
    n_slab = float(np.sqrt(geom.core_index**2 - (kappa_t / k0) ** 2))
    if n_slab <= geom.clad_index:
        raise NoBoundMode("membrane too thin to confine the mode")

    half_w = geom.width_nm / 2.0
    V_w = k0 * half_w * np.sqrt(n_slab**2 - geom.clad_index**2)
    R = (n_slab / geom.clad_index) ** 2
    u_w = _solve_even_slab(V_w, R)
    h_t = u_w / half_w
    n_eff = float(np.sqrt(n_slab**2 - (h_t / k0) ** 2))
    beta = k0 * n_eff
    q = float(np.sqrt(max(beta**2 - (k0 * geom.clad_index) ** 2, 0.0)))
    if q * WINDOW_MARGIN_NM < MIN_DECAY_LENGTHS:
        raise NoBoundMode(
            "mode too weakly confined: evanescent tail does not decay "
            "within the lateral window"
        )
    return _WidthSolution(n_slab=n_slab, n_eff=n_eff, beta=beta, h_t=h_t, q=q, u=u_w)


def _sample_auxiliary(sol: _WidthSolution, half_w: float, y: np.ndarray) -> np.ndarray:
    """Continuous auxiliary field H(y): cosine core, exponential tails."""
    inside = np.abs(y) <= half_w
    H = np.empty_like(y)
    H[inside] = np.cos(sol.h_t * y[inside])
    edge = np.cos(sol.u)
    H[~inside] = edge * np.exp(-sol.q * (np.abs(y[~inside]) - half_w))
    return H


def solve_te0(geom: WaveguideGeometry, n_points: int = DEFAULT_GRID_POINTS) -> ModeProfile:
    """Solve the fundamental even quasi-TE mode of the wire.

    Raises NoBoundMode if the geometry cannot confine the mode within
    the lateral window and GridTooCoarse if the grid undersamples the
    transverse oscillation or the evanescent decay.
    """
    if n_points < 64:
        raise ValueError("n_points must be at least 64")
    sol = _solve_width(geom, geom.wavelength_nm)

    half_w = geom.width_nm / 2.0
    y_max = half_w + WINDOW_MARGIN_NM
    y = np.linspace(-y_max, y_max, n_points)
    h = y[1] - y[0]
    if sol.h_t * h > np.pi / 4.0 or sol.q * h > 2.0:
        raise GridTooCoarse(
            "grid spacing too coarse to sample the transverse profile"
        )

    n_sq = np.where(np.abs(y) <= half_w, sol.n_slab**2, geom.clad_index**2)
    H = _sample_auxiliary(sol, half_w, y)
    e_y = H / n_sq
    e_x = np.gradient(H, h, edge_order=2) / (sol.beta * n_sq)
    scale = np.max(np.abs(e_y))
    e_y = e_y / scale
    e_x = e_x / scale
    norm_N = float(np.trapezoid(n_sq * (e_x**2 + e_y**2), y))

    # group index from the dispersion of the two-step solve at fixed
    # material indices
    dlam = 0.5
    n_hi = _solve_width(geom, geom.wavelength_nm + dlam).n_eff
    n_lo = _solve_width(geom, geom.wavelength_nm - dlam).n_eff
    dn_dlam = (n_hi - n_lo) / (2.0 * dlam)
    group_index = sol.n_eff - geom.wavelength_nm * dn_dlam

    return ModeProfile(
        grid=y,
        e_x=e_x,
        e_y=e_y,
        n_eff=sol.n_eff,
        k=sol.beta,
        group_index=float(group_index),
        norm_N=norm_N,
        core_half_width=half_w,
    )


def mode_weights(profile: ModeProfile, y0_nm: float) -> tuple[float, float]:
    """(wx, wy) = (|e_x(y0)|^2, |e_y(y0)|^2), linearly interpolated."""
    if abs(y0_nm) > profile.grid[-1]:
        raise OutOfRange(
            f"y0 = {y0_nm} nm lies outside the solved window "
            f"(+-{profile.grid[-1]:.1f} nm)"
        )
    ex = float(np.interp(y0_nm, profile.grid, profile.e_x))
    ey = float(np.interp(y0_nm, profile.grid, profile.e_y))
    return ex * ex, ey * ey


def helmholtz_residual(profile: ModeProfile, geom: WaveguideGeometry) -> float:
    """Relative residual of the discrete Helmholtz operator on the mode.

    The solver's discretization is exact for piecewise-constant index:
    within each homogeneous run the auxiliary field obeys the
    three-point relation H[i-1] + H[i+1] = 2 cos(kappa h) H[i] (cosh for
    evanescent segments).  The residual of that operator, normalized by
    the eigenvalue term beta^2 h^2 H, measures how well the returned
    profile solves the discrete problem.  Nodes whose stencil straddles
    a sidewall are excluded because the interface matching belongs to
    the jump conditions, not the bulk operator.
    """
    y = profile.grid
    h = y[1] - y[0]
    half_w = profile.core_half_width
    k0 = geom.k0
    beta = profile.k

    inside = np.abs(y) <= half_w
    n_slab = _solve_width(geom, geom.wavelength_nm).n_slab
    n_sq = np.where(inside, n_slab**2, geom.clad_index**2)
    H = n_sq * profile.e_y

    kappa_sq = (k0**2) * n_sq - beta**2
    c = np.where(
        kappa_sq >= 0,
        np.cos(np.sqrt(np.abs(kappa_sq)) * h),
        np.cosh(np.sqrt(np.abs(kappa_sq)) * h),
    )

    same_region = inside[:-2] == inside[2:]
    same_region &= inside[:-2] == inside[1:-1]
    idx = np.where(same_region)[0] + 1
    r = H[idx - 1] + H[idx + 1] - 2.0 * c[idx] * H[idx]
    eig_term = (beta * h) ** 2 * H[idx]
    return float(np.linalg.norm(r) / np.linalg.norm(eig_term))


def write_profile_csv(profile: ModeProfile, path: str) -> None:
    """Write the transverse profile as y_nm,e_x,e_y."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y_nm", "e_x", "e_y"])
        for yy, ex, ey in zip(profile.grid, profile.e_x, profile.e_y):
            writer.writerow([repr(float(yy)), repr(float(ex)), repr(float(ey))])
