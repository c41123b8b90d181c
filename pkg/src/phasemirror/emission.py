"""Phase-controlled spontaneous emission in a one-sided waveguide.

The emitter at distance L from a mirror of lumped reflectivity
r_T = |r_T| e^{i 2 phi} sees its own field reflected back, which is
equivalent to an image dipole at distance 2L.  The 1D scalar Green's
function G0(x, x') = (i/2k) e^{ik|x-x'|} gives the decay-rate
modulation

    Gamma(phi) = gamma_d0 (1 +/- |r_T| Im{e^{i 2 phi} G0(0, 2L)}
                                   / Im G0(0, 0)) + gamma_b
               = gamma_d0 (1 +/- |r_T| cos(2 phi + theta)) + gamma_b

with theta = 2kL, sign + for a dipole along the waveguide axis (X)
and - for the transverse dipole (Y).  Collected intensity, the
matching fringe visibilities, and the offset-dependent two-dipole
averages are all derived from this one modulation factor.

Units are fixed: rates in 1/ns, lengths in nm, phases in rad.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0, hbar

from .modesolver import ModeProfile, mode_weights


class ReflectivityOutOfRange(ValueError):
    """|r_T| outside [0, 1]."""


class ZeroField(ValueError):
    """Both mode weights vanish; no guided field at the emitter."""


class DegenerateRates(ValueError):
    """Rate-weighted average undefined because both rates are zero."""


class DipoleOrientation(enum.Enum):
    """Dipole axis; X couples with + sign, Y with - in every formula."""

    X = "x"
    Y = "y"
    AVERAGED_BOTH = "averaged_both"


_SIGN = {DipoleOrientation.X: +1.0, DipoleOrientation.Y: -1.0}


@dataclass(frozen=True)
class EmitterScene:
    """Emitter position, intrinsic rates, and mirror distance.

    gamma_x0 / gamma_y0 are the one-dimensional guided-mode decay
    rates of the two dipoles without a mirror, gamma_b the leaky-mode
    rate shared by both, gamma_nrad the non-radiative rate (excluded
    from rate visibilities, optional in total rates).  theta = 2 k L
    is always derived, never stored.
    """

    y0: float = 0.0
    L: float = 30_000.0
    k: float = 2.0 * math.pi / 930.0 * 2.56
    gamma_x0: float = 0.0
    gamma_y0: float = 1.0
    gamma_b: float = 0.1
    gamma_nrad: float = 0.1
    dipole_moment: float | None = None

    def __post_init__(self) -> None:
        if self.L < 0:
            raise ValueError("mirror distance must be non-negative")
        if self.k <= 0:
            raise ValueError("propagation constant must be positive")
        for name in ("gamma_x0", "gamma_y0", "gamma_b", "gamma_nrad"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def theta(self) -> float:
        return 2.0 * self.k * self.L

    @property
    def beta_x0(self) -> float:
        if self.gamma_x0 == 0.0:
            return 0.0
        return self.gamma_x0 / (self.gamma_x0 + self.gamma_b)

    @property
    def beta_y0(self) -> float:
        if self.gamma_y0 == 0.0:
            return 0.0
        return self.gamma_y0 / (self.gamma_y0 + self.gamma_b)


def scalar_green(x: float, x_src: float, k: float) -> complex:
    """1D scalar Green's function (i/2k) e^{ik|x - x_src|}."""
    if k <= 0:
        raise ValueError("propagation constant must be positive")
    return 1j / (2.0 * k) * np.exp(1j * k * abs(x - x_src))


def _check_reflectivity(r_T_mag: float) -> None:
    if not 0.0 <= r_T_mag <= 1.0:
        raise ReflectivityOutOfRange(f"|r_T| must lie in [0, 1], got {r_T_mag}")


def rate_modulation(
    r_T_mag: float, phi: float, theta: float, dip: DipoleOrientation
) -> float:
    """Closed-form rate factor 1 +/- |r_T| cos(2 phi + theta)."""
    _check_reflectivity(r_T_mag)
    if dip is DipoleOrientation.AVERAGED_BOTH:
        raise ValueError("modulation factor is defined per dipole axis")
    return 1.0 + _SIGN[dip] * r_T_mag * math.cos(2.0 * phi + theta)


def rate_modulation_green(
    r_T_mag: float, phi: float, k: float, L: float, dip: DipoleOrientation
) -> float:
    """Rate factor via the image-dipole Green's-function ratio.

    Evaluates 1 +/- |r_T| Im{e^{i 2 phi} G0(0, 2L)} / Im G0(0, 0);
    algebraically identical to rate_modulation with theta = 2kL.
    """
    _check_reflectivity(r_T_mag)
    if dip is DipoleOrientation.AVERAGED_BOTH:
        raise ValueError("modulation factor is defined per dipole axis")
    g_image = scalar_green(0.0, 2.0 * L, k)
    g_self = scalar_green(0.0, 0.0, k)
    ratio = (np.exp(2j * phi) * g_image).imag / g_self.imag
    return 1.0 + _SIGN[dip] * r_T_mag * ratio


def decay_rate(
    scene: EmitterScene,
    r_T_mag: float,
    phi: float,
    dip: DipoleOrientation,
    include_nonradiative: bool = False,
) -> float:
    """Total decay rate Gamma(phi) in 1/ns.

    Single dipoles follow gamma_d0 * (1 +/- |r_T| cos(2 phi + theta))
    + gamma_b, computed through the Green's-function ratio.  The
    averaged orientation returns the mean of the two single-dipole
    rates, the effective rate under non-resonant excitation that
    populates both transitions equally.
    """
    _check_reflectivity(r_T_mag)
    extra = scene.gamma_nrad if include_nonradiative else 0.0
    if dip is DipoleOrientation.AVERAGED_BOTH:
        gx = decay_rate(scene, r_T_mag, phi, DipoleOrientation.X)
        gy = decay_rate(scene, r_T_mag, phi, DipoleOrientation.Y)
        return 0.5 * (gx + gy) + extra
    gamma_d0 = scene.gamma_x0 if dip is DipoleOrientation.X else scene.gamma_y0
    factor = rate_modulation_green(r_T_mag, phi, scene.k, scene.L, dip)
    return gamma_d0 * factor + scene.gamma_b + extra


def intensity(
    scene: EmitterScene,
    weights: tuple[float, float],
    r_T_mag: float,
    phi: float,
    dip: DipoleOrientation,
) -> float:
    """Collected intensity relative to the no-mirror emitter.

    Single dipole: I/I0 = (1 + r^2 +/- 2 r cos(2 phi + theta)) / 2.
    Averaged: the mode weights (wx, wy) at the emitter offset mix the
    two single-dipole fringes, which carry opposite signs.
    """
    _check_reflectivity(r_T_mag)
    if dip is DipoleOrientation.AVERAGED_BOTH:
        wx, wy = weights
        ix = intensity(scene, weights, r_T_mag, phi, DipoleOrientation.X)
        iy = intensity(scene, weights, r_T_mag, phi, DipoleOrientation.Y)
        return wx * ix + wy * iy
    c = math.cos(2.0 * phi + scene.theta)
    return 0.5 * (1.0 + r_T_mag**2 + _SIGN[dip] * 2.0 * r_T_mag * c)


def visibility_intensity(r_T_mag: float) -> float:
    """Single-dipole intensity fringe visibility 2r / (1 + r^2)."""
    _check_reflectivity(r_T_mag)
    return 2.0 * r_T_mag / (1.0 + r_T_mag**2)


def visibility_intensity_mixed(r_T_mag: float, weights: tuple[float, float]) -> float:
    """Two-dipole intensity visibility reduced by the mode-weight factor.

    Multiplies 2r/(1+r^2) by |wy - wx| / (wy + wx) where (wx, wy) are
    the squared mode amplitudes at the emitter offset.
    """
    wx, wy = weights
    if wx < 0 or wy < 0:
        raise ValueError("mode weights must be non-negative")
    if wx == 0.0 and wy == 0.0:
        raise ZeroField("both mode weights vanish at the emitter position")
    return visibility_intensity(r_T_mag) * abs(wy - wx) / (wy + wx)


def visibility_rate(
    beta_x0: float,
    beta_y0: float,
    Gamma_x0: float,
    Gamma_y0: float,
    r_T_mag: float,
    dip: DipoleOrientation,
) -> float:
    """Decay-rate fringe visibility.

    Single dipole: beta_0 * r.  Averaged orientation: the
    rate-weighted beta difference
    |beta_x0 Gamma_x0 - beta_y0 Gamma_y0| / (Gamma_x0 + Gamma_y0) * r,
    which reduces to |beta_x0 - beta_y0| r / 2 for equal rates.
    """
    _check_reflectivity(r_T_mag)
    for name, val in (("beta_x0", beta_x0), ("beta_y0", beta_y0)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {val}")
    if dip is DipoleOrientation.X:
        return beta_x0 * r_T_mag
    if dip is DipoleOrientation.Y:
        return beta_y0 * r_T_mag
    if Gamma_x0 + Gamma_y0 <= 0.0:
        raise DegenerateRates("rate-weighted average needs Gamma_x0 + Gamma_y0 > 0")
    num = abs(beta_x0 * Gamma_x0 - beta_y0 * Gamma_y0)
    return num / (Gamma_x0 + Gamma_y0) * r_T_mag


def visibility_rate_centered(beta_y0: float, r_T_mag: float) -> float:
    """Centered-emitter approximation nu_gamma ~= beta_y0 r / 2."""
    _check_reflectivity(r_T_mag)
    if not 0.0 <= beta_y0 <= 1.0:
        raise ValueError(f"beta_y0 must lie in [0, 1], got {beta_y0}")
    return 0.5 * beta_y0 * r_T_mag


def ldos_to_rate(ldos: float, dipole_moment: float, omega: float) -> float:
    """Spontaneous emission rate from a relative local density of states.

    gamma_0 = pi omega |d|^2 rho / (3 hbar eps_0).  Only ratios of
    this quantity are observable downstream; absolute prefactors
    carry SI constants for completeness.
    """
    if ldos < 0 or omega <= 0:
        raise ValueError("LDOS must be non-negative and omega positive")
    return math.pi * omega * dipole_moment**2 * ldos / (3.0 * hbar * epsilon_0)


def _extremal_phases(theta: float) -> tuple[float, float]:
    # cos(2 phi + theta) = +1 at phi = -theta/2 (mod pi), = -1 half a
    # fringe later; wrapped into [0, pi).
    phi_plus = (-theta / 2.0) % math.pi
    phi_minus = (phi_plus + math.pi / 2.0) % math.pi
    return phi_plus, phi_minus


def figure1c_curves(
    scene: EmitterScene,
    weights: tuple[float, float],
    r_T_mag: float,
    dip: DipoleOrientation = DipoleOrientation.Y,
    n_phi: int = 201,
) -> list[tuple[float, float, float]]:
    """Phase sweep of (phi, total rate, relative intensity).

    The grid covers one fringe period [0, pi) and always includes the
    two phases where cos(2 phi + theta) = +/-1, so the tabulated curve
    attains the analytic extrema exactly.
    """
    if n_phi < 2:
        raise ValueError("need at least two phase points")
    phis = set(np.linspace(0.0, math.pi, n_phi, endpoint=False))
    phis.update(_extremal_phases(scene.theta))
    rows = []
    for phi in sorted(phis):
        gamma = decay_rate(scene, r_T_mag, phi, dip)
        inten = intensity(scene, weights, r_T_mag, phi, dip)
        rows.append((float(phi), float(gamma), float(inten)))
    return rows


def offset_scaled_rates(
    profile: ModeProfile, scene: EmitterScene, y0: float
) -> tuple[float, float]:
    """(gamma_x0, gamma_y0) at a lateral offset.

    Both dipole rates follow the local mode weights with a single
    proportionality constant anchored so the y-dipole rate at the
    waveguide center equals scene.gamma_y0.
    """
    wx, wy = mode_weights(profile, y0)
    _, wy_center = mode_weights(profile, 0.0)
    if wy_center <= 0.0:
        raise ZeroField("no transverse field at the waveguide center")
    scale = scene.gamma_y0 / wy_center
    return scale * wx, scale * wy


def figure1d_curves(
    profile: ModeProfile,
    scene: EmitterScene,
    r_T_mag: float,
    n_offsets: int = 201,
) -> list[tuple[float, float, float]]:
    """Offset sweep of (y0, nu_I, nu_gamma) across the waveguide width.

    Intensity visibility uses the mode-weight reduction; rate
    visibility uses the averaged-dipole formula with equal rate
    weights (the two total rates differ only slightly with offset),
    with beta factors built from offset-scaled rates and the shared
    gamma_b.  At the center this reduces to beta_y0 r / 2.
    """
    _check_reflectivity(r_T_mag)
    half = profile.core_half_width
    rows = []
    for y0 in np.linspace(-half, half, n_offsets):
        weights = mode_weights(profile, float(y0))
        nu_i = visibility_intensity_mixed(r_T_mag, weights)
        gx, gy = offset_scaled_rates(profile, scene, float(y0))
        beta_x = gx / (gx + scene.gamma_b)
        beta_y = gy / (gy + scene.gamma_b)
        nu_g = visibility_rate(
            beta_x, beta_y, 1.0, 1.0, r_T_mag, DipoleOrientation.AVERAGED_BOTH
        )
        rows.append((float(y0), float(nu_i), float(nu_g)))
    return rows


def write_phase_curve_csv(rows: list[tuple[float, float, float]], path: str) -> None:
    """Write a phase sweep as phi_rad,gamma_total,intensity_rel."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["phi_rad", "gamma_total", "intensity_rel"])
        for phi, gamma, inten in rows:
            writer.writerow([repr(float(phi)), repr(float(gamma)), repr(float(inten))])


def write_offset_curve_csv(rows: list[tuple[float, float, float]], path: str) -> None:
    """Write an offset sweep as y0_nm,nu_I,nu_gamma."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y0_nm", "nu_I", "nu_gamma"])
        for y0, nu_i, nu_g in rows:
            writer.writerow([repr(float(y0)), repr(float(nu_i)), repr(float(nu_g))])
