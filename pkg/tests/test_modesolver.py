import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasemirror.modesolver import (
    GridTooCoarse,
    ModeProfile,
    NoBoundMode,
    OutOfRange,
    WaveguideGeometry,
    helmholtz_residual,
    mode_weights,
    solve_te0,
    write_profile_csv,
)

DEFAULT_GEOM = WaveguideGeometry()


def test_default_mode_basic_properties(default_profile):
    p = default_profile
    assert 1.0 < p.n_eff < 3.48
    assert p.norm_N > 0
    assert p.k == pytest.approx(2 * np.pi / 930.0 * p.n_eff)
    # center symmetry forces a vanishing longitudinal component
    i0 = np.argmin(np.abs(p.grid))
    assert abs(p.e_x[i0]) < 1e-10
    assert np.max(np.abs(p.e_y)) == pytest.approx(1.0)


def test_geometry_validation():
    with pytest.raises(ValueError):
        WaveguideGeometry(width_nm=-1)
    with pytest.raises(ValueError):
        WaveguideGeometry(core_index=1.0, clad_index=1.0)
    with pytest.raises(ValueError):
        WaveguideGeometry(clad_index=0.5)
    with pytest.raises(ValueError):
        WaveguideGeometry(wavelength_nm=0)


def test_grid_refinement_converges():
    n_coarse = solve_te0(DEFAULT_GEOM, n_points=257).n_eff
    n_fine = solve_te0(DEFAULT_GEOM, n_points=513).n_eff
    assert abs(n_fine - n_coarse) / n_fine < 1e-6


def test_longitudinal_component_is_minor(default_profile):
    # well-guided TE mode: |e_x| < |e_y| through the central core region
    p = default_profile
    inner = np.abs(p.grid) <= 0.6 * p.core_half_width
    assert np.all(np.abs(p.e_x[inner]) < np.abs(p.e_y[inner]))


def test_helmholtz_residual_small(default_profile):
    assert helmholtz_residual(default_profile, DEFAULT_GEOM) < 1e-8


def test_parity(default_profile):
    p = default_profile
    tol = 1e-10 * np.max(np.abs(p.e_y))
    assert np.max(np.abs(p.e_y - p.e_y[::-1])) < tol
    assert np.max(np.abs(p.e_x + p.e_x[::-1])) < tol


def test_scale_invariance(default_profile):
    p = default_profile
    scaled = ModeProfile(
        grid=p.grid,
        e_x=7.3 * p.e_x,
        e_y=7.3 * p.e_y,
        n_eff=p.n_eff,
        k=p.k,
        group_index=p.group_index,
        norm_N=7.3**2 * p.norm_N,
        core_half_width=p.core_half_width,
    )
    for y0 in (0.0, 35.0, 75.0, 140.0):
        wx1, wy1 = mode_weights(p, y0)
        wx2, wy2 = mode_weights(scaled, y0)
        if wx1 > 0:
            assert wx2 / wx1 == pytest.approx(7.3**2, rel=1e-12)
        assert wy2 / wy1 == pytest.approx(7.3**2, rel=1e-12)
        f1 = (wy1 - wx1) / (wy1 + wx1)
        f2 = (wy2 - wx2) / (wy2 + wx2)
        assert f1 == pytest.approx(f2, abs=1e-12)


def test_n_eff_monotone_in_width():
    n_effs = [
        solve_te0(WaveguideGeometry(width_nm=w)).n_eff for w in (250.0, 300.0, 350.0)
    ]
    assert n_effs[0] < n_effs[1] < n_effs[2]


def test_weights_center(default_profile):
    wx, wy = mode_weights(default_profile, 0.0)
    assert wx == pytest.approx(0.0, abs=1e-20)
    ys = np.linspace(-150, 150, 301)
    wys = [mode_weights(default_profile, float(y))[1] for y in ys]
    assert wy == pytest.approx(max(wys))


def test_weights_near_60nm_offset(default_profile):
    # imbalance factor around the narrative offset; consistency target
    wx, wy = mode_weights(default_profile, 60.0)
    f = (wy - wx) / (wy + wx)
    assert 0.45 < f < 0.8


def test_weights_mirror_symmetric(default_profile):
    for y0 in (10.0, 60.0, 120.0, 200.0):
        assert mode_weights(default_profile, y0) == pytest.approx(
            mode_weights(default_profile, -y0), rel=1e-12
        )


def test_weights_out_of_range(default_profile):
    with pytest.raises(OutOfRange):
        mode_weights(default_profile, default_profile.grid[-1] + 1.0)


def test_no_bound_mode_for_narrow_wire():
    with pytest.raises(NoBoundMode):
        solve_te0(WaveguideGeometry(width_nm=50.0))


def test_grid_too_coarse():
    # a very wide wire at the minimum point count undersamples the tails
    with pytest.raises(GridTooCoarse):
        solve_te0(WaveguideGeometry(width_nm=10_000.0), n_points=64)


def test_n_points_precondition():
    with pytest.raises(ValueError):
        solve_te0(DEFAULT_GEOM, n_points=32)


def test_profile_csv_round_trip(default_profile, tmp_path):
    path = tmp_path / "profile.csv"
    write_profile_csv(default_profile, str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["y_nm", "e_x", "e_y"]
    assert len(rows) - 1 == len(default_profile.grid)
    y = np.array([float(r[0]) for r in rows[1:]])
    ey = np.array([float(r[2]) for r in rows[1:]])
    assert np.array_equal(y, default_profile.grid)
    assert np.array_equal(ey, default_profile.e_y)


@given(
    width=st.floats(min_value=200.0, max_value=500.0),
    thickness=st.floats(min_value=120.0, max_value=300.0),
    wavelength=st.floats(min_value=850.0, max_value=1050.0),
)
def test_solved_modes_are_physical(width, thickness, wavelength):
    geom = WaveguideGeometry(
        width_nm=width, thickness_nm=thickness, wavelength_nm=wavelength
    )
    try:
        p = solve_te0(geom, n_points=257)
    except NoBoundMode:
        return
    assert geom.clad_index < p.n_eff < geom.core_index
    assert p.norm_N > 0
    i0 = np.argmin(np.abs(p.grid))
    assert abs(p.e_x[i0]) < 1e-9
