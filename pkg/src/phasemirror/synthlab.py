"""Synthetic measurement generator for phase-sweep experiments.

Reproduces the lab pipeline: a voltage-to-phase calibration, per-point
collected-intensity samples with shot noise, and time-resolved decay
histograms drawn from a bright/dark bi-exponential model whose fast
rate follows the phase-dependent radiative rate.

Randomness uses counter-based Philox streams keyed by (seed, point
index), so sweep points can be generated in any order or in parallel
while producing bit-identical results.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import emission
from .emission import DipoleOrientation, EmitterScene


class OutOfCalibration(ValueError):
    """Requested voltage outside the calibrated range."""


class CalibrationModel(enum.Enum):
    TABLE = "table"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class PhaseCalibration:
    """Voltage-to-phase map of the actuated shifter.

    Table form interpolates linearly between strictly increasing
    voltage knots; quadratic form models electrostatic actuation as
    phi = quad_coeff * v^2 + quad_offset.  gauge_note documents the
    sign/offset gauge when the map was reconstructed from fringes.
    """

    model: CalibrationModel = CalibrationModel.QUADRATIC
    table: tuple[tuple[float, float], ...] | None = None
    quad_coeff: float | None = 0.05
    quad_offset: float = 0.0
    v_range: tuple[float, float] | None = None
    gauge_note: str = ""

    def __post_init__(self) -> None:
        if self.model is CalibrationModel.TABLE:
            if not self.table or len(self.table) < 2:
                raise ValueError("table calibration needs at least two knots")
            volts = [v for v, _ in self.table]
            phases = [p for _, p in self.table]
            if any(b <= a for a, b in zip(volts, volts[1:])):
                raise ValueError("table voltages must be strictly increasing")
            diffs = [b - a for a, b in zip(phases, phases[1:])]
            if not (all(d >= 0 for d in diffs) or all(d <= 0 for d in diffs)):
                raise ValueError("table phase must be monotone in voltage")
        elif self.quad_coeff is None:
            raise ValueError("quadratic calibration needs quad_coeff")

    def span(self) -> tuple[float, float]:
        if self.model is CalibrationModel.TABLE:
            return self.table[0][0], self.table[-1][0]
        if self.v_range is not None:
            return self.v_range
        return -math.inf, math.inf


def phase_of_voltage(cal: PhaseCalibration, v: float) -> float:
    """Phase (rad) at a drive voltage; raises OutOfCalibration outside."""
    lo, hi = cal.span()
    if not lo <= v <= hi:
        raise OutOfCalibration(f"voltage {v} outside calibrated range [{lo}, {hi}]")
    if cal.model is CalibrationModel.TABLE:
        volts = np.array([p[0] for p in cal.table])
        phases = np.array([p[1] for p in cal.table])
        return float(np.interp(v, volts, phases))
    return cal.quad_coeff * v**2 + cal.quad_offset


@dataclass(frozen=True)
class ExcitonModel:
    """Bi-exponential decay: fast bright transition plus slow dark tail.

    amp_ratio is A_s/A_f in density units; background is a flat
    counts-per-bin floor.  gamma_f == gamma_s is allowed at the type
    level (a degenerate single exponential); identifiability is the
    fitter's concern.
    """

    gamma_f: float
    gamma_s: float
    amp_ratio: float = 0.05
    background: float = 0.0

    def __post_init__(self) -> None:
        if not self.gamma_f >= self.gamma_s >= 0.0:
            raise ValueError("rates must satisfy gamma_f >= gamma_s >= 0")
        if self.amp_ratio < 0 or self.background < 0:
            raise ValueError("amp_ratio and background must be non-negative")


@dataclass(frozen=True)
class DecayHistogram:
    """Binned time-resolved counts over a fixed acquisition window.

    counts are integers after Poisson sampling but may be floats for
    noiseless expectation curves; total_counts always equals the
    realized sum.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    total_counts: float
    irf_sigma: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if edges.ndim != 1 or counts.ndim != 1 or len(edges) != len(counts) + 1:
            raise ValueError("need len(bin_edges) == len(counts) + 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if not math.isclose(float(counts.sum()), float(self.total_counts), rel_tol=1e-12, abs_tol=1e-9):
            raise ValueError("total_counts must equal sum(counts)")

    @property
    def midpoints(self) -> np.ndarray:
        edges = np.asarray(self.bin_edges, dtype=float)
        return 0.5 * (edges[:-1] + edges[1:])


def default_bin_edges(t_max_ns: float = 25.0, n_bins: int = 500) -> np.ndarray:
    """Uniform acquisition window, 0 to t_max in n_bins bins."""
    if t_max_ns <= 0 or n_bins < 1:
        raise ValueError("need positive window and at least one bin")
    return np.linspace(0.0, t_max_ns, n_bins + 1)


def _rng(entropy) -> np.random.Generator:
    if not isinstance(entropy, np.random.SeedSequence):
        entropy = np.random.SeedSequence(entropy)
    return np.random.Generator(np.random.Philox(entropy))


def _exp_bin_integrals(gamma: float, edges: np.ndarray) -> np.ndarray:
    # integral of e^{-gamma t} over each bin; gamma -> 0 limit is the width
    if gamma < 1e-12:
        return np.diff(edges)
    e = np.exp(-gamma * edges)
    return (e[:-1] - e[1:]) / gamma


def _exgauss_density(t: np.ndarray, gamma: float, sigma: float) -> np.ndarray:
    # exponential decay starting at t=0 convolved with a zero-mean Gaussian
    arg = (sigma**2 * gamma - t) / (math.sqrt(2.0) * sigma)
    return 0.5 * np.exp(sigma**2 * gamma**2 / 2.0 - gamma * t) * erfc(arg)


def expected_bin_counts(
    model: ExcitonModel,
    total_counts: float,
    bin_edges: np.ndarray | None = None,
    irf_sigma: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(bin_edges, expected counts) scaled so the expectation sums to total_counts.

    Without an IRF the exponentials are integrated exactly over each
    bin; with an IRF the blurred density is sampled at bin midpoints
    (adequate for sigma well below the window length).
    """
    edges = default_bin_edges() if bin_edges is None else np.asarray(bin_edges, dtype=float)
    widths = np.diff(edges)
    if irf_sigma is None:
        shape = _exp_bin_integrals(model.gamma_f, edges) + model.amp_ratio * _exp_bin_integrals(
            model.gamma_s, edges
        )
    else:
        if irf_sigma <= 0:
            raise ValueError("irf_sigma must be positive when given")
        mids = 0.5 * (edges[:-1] + edges[1:])
        shape = (
            _exgauss_density(mids, model.gamma_f, irf_sigma)
            + model.amp_ratio * _exgauss_density(mids, model.gamma_s, irf_sigma)
        ) * widths
    bg_total = model.background * len(widths)
    signal_total = total_counts - bg_total
    if signal_total <= 0:
        raise ValueError("total_counts must exceed the background budget")
    mu = shape * (signal_total / shape.sum()) + model.background
    return edges, mu


def generate_decay_histogram(
    model: ExcitonModel,
    total_counts: float,
    bin_edges: np.ndarray | None = None,
    irf_sigma: float | None = None,
    seed: int | np.random.SeedSequence = 0,
) -> DecayHistogram:
    """Poisson-sampled decay histogram; same seed gives identical bits."""
    if total_counts <= 0:
        raise ValueError("total_counts must be positive")
    edges, mu = expected_bin_counts(model, total_counts, bin_edges, irf_sigma)
    counts = _rng(seed).poisson(mu)
    seed_out = seed if isinstance(seed, int) else None
    return DecayHistogram(
        bin_edges=edges,
        counts=counts,
        total_counts=float(counts.sum()),
        irf_sigma=irf_sigma,
        seed=seed_out,
    )


def expected_histogram(
    model: ExcitonModel,
    total_counts: float,
    bin_edges: np.ndarray | None = None,
    irf_sigma: float | None = None,
) -> DecayHistogram:
    """Noiseless expectation curve packaged as a histogram (float counts)."""
    edges, mu = expected_bin_counts(model, total_counts, bin_edges, irf_sigma)
    return DecayHistogram(
        bin_edges=edges, counts=mu, total_counts=float(mu.sum()), irf_sigma=irf_sigma
    )


@dataclass(frozen=True)
class SweepRecord:
    """One voltage point: phase, sampled intensity, decay histogram."""

    index: int
    voltage: float
    phi: float
    expected_intensity: float
    intensity_counts: float
    histogram: DecayHistogram


def generate_sweep(
    scene: EmitterScene,
    weights: tuple[float, float],
    r_T_mag: float,
    cal: PhaseCalibration,
    voltages: list[float],
    counts_scale: float,
    seed: int,
    exciton: ExcitonModel | None = None,
    hist_counts: float = 100_000.0,
    bin_edges: np.ndarray | None = None,
    irf_sigma: float | None = None,
    threads: int = 1,
) -> list[SweepRecord]:
    """Simulate a full voltage sweep of intensity and lifetime data.

    Per point: the calibration gives phi, the collected intensity is
    Poisson-sampled at counts_scale times the relative intensity, and
    the histogram's fast rate is the phase-dependent radiative rate
    plus the slow rate (gamma_f = Gamma_rad(phi) + gamma_s, so the
    bright-line radiative rate is recoverable as gamma_f - gamma_s).
    counts_scale=inf switches to noiseless expectation values for both
    intensity and histograms. Each point draws from its own
    counter-based stream keyed by (seed, index), so the output does
    not depend on threads.
    """
    if exciton is None:
        exciton = ExcitonModel(gamma_f=1.0, gamma_s=scene.gamma_nrad)
    noiseless = math.isinf(counts_scale)

    def one(args: tuple[int, float]) -> SweepRecord:
        index, v = args
        return _generate_point(
            scene, weights, r_T_mag, cal, index, v, counts_scale,
            seed, exciton, hist_counts, bin_edges, irf_sigma, noiseless,
        )

    jobs = [(index, float(v)) for index, v in enumerate(voltages)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, jobs))
    return [one(job) for job in jobs]


def _generate_point(
    scene: EmitterScene,
    weights: tuple[float, float],
    r_T_mag: float,
    cal: PhaseCalibration,
    index: int,
    voltage: float,
    counts_scale: float,
    seed: int,
    exciton: ExcitonModel,
    hist_counts: float,
    bin_edges: np.ndarray | None,
    irf_sigma: float | None,
    noiseless: bool,
) -> SweepRecord:
    """Single sweep point; pure given (seed, index), safe to run in parallel."""
    phi = phase_of_voltage(cal, voltage)
    expected = emission.intensity(
        scene, weights, r_T_mag, phi, DipoleOrientation.AVERAGED_BOTH
    )
    gamma_rad = emission.decay_rate(
        scene, r_T_mag, phi, DipoleOrientation.AVERAGED_BOTH
    )
    point_model = ExcitonModel(
        gamma_f=gamma_rad + exciton.gamma_s,
        gamma_s=exciton.gamma_s,
        amp_ratio=exciton.amp_ratio,
        background=exciton.background,
    )
    ss_intensity, ss_hist = np.random.SeedSequence([seed, index]).spawn(2)
    if noiseless:
        intensity_counts = expected
        hist = expected_histogram(point_model, hist_counts, bin_edges, irf_sigma)
    else:
        intensity_counts = float(_rng(ss_intensity).poisson(counts_scale * expected))
        hist = generate_decay_histogram(
            point_model, hist_counts, bin_edges, irf_sigma, seed=ss_hist
        )
    return SweepRecord(
        index=index,
        voltage=voltage,
        phi=phi,
        expected_intensity=expected,
        intensity_counts=intensity_counts,
        histogram=hist,
    )


def write_sweep_csv(records: list[SweepRecord], path: str) -> None:
    """Write sweep points as voltage,phi_rad,intensity_counts."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["voltage", "phi_rad", "intensity_counts"])
        for rec in records:
            writer.writerow(
                [repr(float(rec.voltage)), repr(float(rec.phi)),
                 repr(float(rec.intensity_counts))]
            )


def write_histogram_csv(hist: DecayHistogram, path: str) -> None:
    """Write one histogram as t_ns,counts with t at bin midpoints."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_ns", "counts"])
        for t, c in zip(hist.midpoints, np.asarray(hist.counts, dtype=float)):
            writer.writerow([repr(float(t)), repr(float(c))])


def read_sweep_csv(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read (voltages, phases, intensity counts) from a sweep CSV."""
    volts, phis, counts = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["voltage", "phi_rad", "intensity_counts"]:
            raise ValueError(f"{path} line 1: expected sweep header, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ValueError(f"{path} line {lineno}: expected 3 columns")
            try:
                volts.append(float(row[0]))
                phis.append(float(row[1]))
                counts.append(float(row[2]))
            except ValueError as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
    return np.array(volts), np.array(phis), np.array(counts)


def read_histogram_csv(path: str) -> DecayHistogram:
    """Read a midpoint-sampled histogram CSV back into a DecayHistogram."""
    times, counts = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t_ns", "counts"]:
            raise ValueError(f"{path} line 1: expected histogram header, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path} line {lineno}: expected 2 columns")
            try:
                times.append(float(row[0]))
                counts.append(float(row[1]))
            except ValueError as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
    if len(times) < 2:
        raise ValueError(f"{path}: need at least two bins")
    mids = np.array(times)
    widths = np.diff(mids)
    if np.any(np.abs(widths - widths[0]) > 1e-9 * widths[0]):
        raise ValueError(f"{path}: bins must be uniform")
    w = float(widths[0])
    edges = np.concatenate([mids - w / 2.0, [mids[-1] + w / 2.0]])
    arr = np.array(counts)
    return DecayHistogram(bin_edges=edges, counts=arr, total_counts=float(arr.sum()))
