"""Mirror reflectivity: lumped loss chain and 1D transfer-matrix stack.

The emitter sees a single lumped complex reflection

    r_T = |t_phi|^2 |t_wg|^2 |r_M| exp(i 2 phi)

where |t_phi|^2 is the phase-shifter power transmittivity, |t_wg|^2 the
waveguide power transmittivity over the emitter-mirror-emitter path,
|r_M| the mirror modal reflectivity magnitude, and phi the one-way
tunable phase.  The photonic-crystal mirror itself is modeled at normal
incidence with 2x2 characteristic matrices, one period being
[unetched/2, hole, unetched/2] so the default stack is symmetric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MirrorChain:
    """Lumped one-sided termination seen by the emitter.

    t_phi_sq and t_wg_sq are power transmittivities in [0, 1]; r_M_mag
    is the mirror reflectivity magnitude in [0, 1]; phi is the one-way
    phase (rad) added by the shifter.
    """

    t_phi_sq: float = 0.55
    t_wg_sq: float = 0.9
    r_M_mag: float = 1.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        for name in ("t_phi_sq", "t_wg_sq", "r_M_mag"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")

    @property
    def magnitude(self) -> float:
        """|r_T|, independent of phi."""
        return self.t_phi_sq * self.t_wg_sq * self.r_M_mag

    def reflectivity(self) -> complex:
        """Complex lumped reflection r_T = |r_T| exp(i 2 phi)."""
        return self.magnitude * np.exp(2j * self.phi)


def lumped_reflectivity(chain: MirrorChain) -> complex:
    """Complex lumped reflection r_T = |r_T| exp(i 2 phi)."""
    return chain.reflectivity()


@dataclass(frozen=True)
class PhotonicCrystalSpec:
    """Periodically etched waveguide section acting as the mirror.

    Default segment indices are calibrated so the first-order Bragg
    center 2 n_avg pitch sits near 950 nm (n_avg ~ 1.79 at 265 nm
    pitch) and the stopband covers 900-1000 nm.
    """

    n_holes: int = 12
    pitch_nm: float = 265.0
    hole_radius_nm: float = 70.0
    n_unetched: float = 2.56
    n_hole: float = 1.107
    termination_index: float = 2.56

    def __post_init__(self) -> None:
        if self.n_holes < 0:
            raise ValueError("n_holes must be non-negative")
        if self.pitch_nm <= 0 or self.hole_radius_nm < 0:
            raise ValueError("pitch and hole radius must be positive")
        if 2.0 * self.hole_radius_nm >= self.pitch_nm:
            raise ValueError("hole diameter must be smaller than the pitch")
        for name in ("n_unetched", "n_hole", "termination_index"):
            if getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be >= 1")

    @property
    def bragg_wavelength_nm(self) -> float:
        """First-order Bragg center 2 * n_avg * pitch."""
        return 2.0 * self.average_index * self.pitch_nm

    @property
    def average_index(self) -> float:
        hole = 2.0 * self.hole_radius_nm
        return (hole * self.n_hole + (self.pitch_nm - hole) * self.n_unetched) / self.pitch_nm


def segment_layout(spec: PhotonicCrystalSpec) -> tuple[np.ndarray, np.ndarray]:
    """(indices, lengths) of the stack, one period = [u/2, hole, u/2]."""
    hole_len = 2.0 * spec.hole_radius_nm
    u_half = (spec.pitch_nm - hole_len) / 2.0
    indices, lengths = [], []
    for _ in range(spec.n_holes):
        indices += [spec.n_unetched, spec.n_hole, spec.n_unetched]
        lengths += [u_half, hole_len, u_half]
    return np.asarray(indices, dtype=float), np.asarray(lengths, dtype=float)


def layer_matrix(n: float, d_nm: float, wavelength_nm: float) -> np.ndarray:
    """Characteristic matrix of one homogeneous layer (normal incidence)."""
    delta = 2.0 * np.pi / wavelength_nm * n * d_nm
    return np.array(
        [
            [np.cos(delta), 1j * np.sin(delta) / n],
            [1j * n * np.sin(delta), np.cos(delta)],
        ]
    )


def stack_matrix(indices: np.ndarray, lengths: np.ndarray, wavelength_nm: float) -> np.ndarray:
    M = np.eye(2, dtype=complex)
    for n, d in zip(indices, lengths):
        M = M @ layer_matrix(float(n), float(d), wavelength_nm)
    return M


def stack_coefficients(
    indices: np.ndarray,
    lengths: np.ndarray,
    n_in: float,
    n_out: float,
    wavelength_nm: float,
) -> tuple[complex, complex]:
    """Amplitude (r, t) of an arbitrary lossless layer sequence.

    Power conservation reads |r|^2 + (n_out/n_in) |t|^2 = 1.
    """
    M = stack_matrix(indices, lengths, wavelength_nm)
    m11, m12 = M[0, 0], M[0, 1]
    m21, m22 = M[1, 0], M[1, 1]
    denom = (m11 + m12 * n_out) * n_in + (m21 + m22 * n_out)
    r = ((m11 + m12 * n_out) * n_in - (m21 + m22 * n_out)) / denom
    t = 2.0 * n_in / denom
    return complex(r), complex(t)


def tmm_reflectivity(spec: PhotonicCrystalSpec, wavelength_nm: float) -> complex:
    """Complex modal reflection r_M of the etched mirror section."""
    if wavelength_nm <= 0:
        raise ValueError("wavelength must be positive")
    indices, lengths = segment_layout(spec)
    r, _ = stack_coefficients(
        indices, lengths, spec.termination_index, spec.termination_index, wavelength_nm
    )
    return r


def reflectivity_sweep(
    spec: PhotonicCrystalSpec, wavelengths_nm: np.ndarray
) -> list[tuple[float, complex, float]]:
    """[(lambda, r, |r|^2)] over a wavelength grid."""
    rows = []
    for lam in np.asarray(wavelengths_nm, dtype=float):
        r = complex(tmm_reflectivity(spec, float(lam)))
        rows.append((float(lam), r, float(abs(r) ** 2)))
    return rows


def waveguide_transmission(loss_db_per_mm: float, length_nm: float) -> float:
    """One-way power transmittivity of a lossy waveguide stretch."""
    if loss_db_per_mm < 0 or length_nm < 0:
        raise ValueError("loss and length must be non-negative")
    loss_db = loss_db_per_mm * length_nm * 1e-6
    return 10.0 ** (-loss_db / 10.0)


def write_sweep_csv(rows: list[tuple[float, complex, float]], path: str) -> None:
    """Write a reflectivity sweep as lambda_nm,r_re,r_im,R_power."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda_nm", "r_re", "r_im", "R_power"])
        for lam, r, rp in rows:
            writer.writerow(
                [repr(float(lam)), repr(float(r.real)), repr(float(r.imag)),
                 repr(float(rp))]
            )
