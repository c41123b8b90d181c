import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasemirror.inference import (
    BranchAmbiguity,
    EmptyFeasibleSet,
    InsufficientFringes,
    InsufficientPhaseSpan,
    MalformedRow,
    NonIdentifiable,
    analyze_sweep,
    biexp_model,
    estimate_parameters,
    fit_biexponential,
    fit_sinusoid,
    poisson_nll,
    poisson_nll_gradient,
    r_lower_bound,
    read_table1_csv,
    reconstruct_phase_map,
    table1_report,
)
from phasemirror.config import builtin_table1_path
from phasemirror.modesolver import mode_weights, solve_te0
from phasemirror.synthlab import (
    ExcitonModel,
    expected_histogram,
    generate_decay_histogram,
    generate_sweep,
    phase_of_voltage,
)

EDGES = np.linspace(0.0, 25.0, 501)
PLAIN = ExcitonModel(gamma_f=1.1, gamma_s=0.1, amp_ratio=0.05)


def quad_fringe():
    # quadratic phase map crossing three interior turning points
    v = np.linspace(0.0, 10.0, 201)
    phi = 0.05 * v**2
    inten = 120.0 * (1.0 + 0.8 * np.cos(2.0 * phi + 0.3))
    return v, phi, inten


def recovered_phases(cal, voltages):
    return np.array([phase_of_voltage(cal, vi) for vi in voltages])


@pytest.fixture(scope="module")
def qd1_profile(qd1_cfg):
    return solve_te0(qd1_cfg.geometry(), n_points=qd1_cfg.grid_points)


@pytest.fixture(scope="module")
def qd1_sweep(qd1_cfg, qd1_profile):
    cfg = qd1_cfg
    scene = cfg.scene(qd1_profile.k)
    weights = mode_weights(qd1_profile, scene.y0)
    return generate_sweep(
        scene,
        weights,
        cfg.r_T_magnitude(),
        cfg.calibration(),
        list(cfg.voltages()),
        cfg.counts_scale,
        seed=cfg.seed,
        exciton=cfg.exciton(),
        hist_counts=cfg.hist_counts,
        bin_edges=cfg.bin_edges(),
        irf_sigma=cfg.irf_sigma,
    )


@pytest.fixture(scope="module")
def qd1_analysis(qd1_cfg, qd1_profile, qd1_sweep):
    return analyze_sweep(
        list(qd1_cfg.voltages()),
        [r.phi for r in qd1_sweep],
        [r.intensity_counts for r in qd1_sweep],
        [r.histogram for r in qd1_sweep],
        profile=qd1_profile,
    )


class TestPoissonGradient:
    def test_analytic_gradient_matches_finite_differences(self):
        """Central differences of the NLL agree with the closed form."""
        rng = np.random.default_rng(5)
        edges = np.linspace(0.0, 25.0, 201)
        counts = rng.poisson(50.0, size=200).astype(float)
        h = 1e-5
        for _ in range(10):
            x = np.array(
                [
                    rng.uniform(2.0, 6.0),
                    rng.uniform(-0.5, 0.8),
                    rng.uniform(0.0, 4.0),
                    rng.uniform(-3.0, -1.0),
                ]
            )
            ga = poisson_nll_gradient(x, edges, counts, False)
            gn = np.zeros(4)
            for j in range(4):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                mup, _ = biexp_model(xp, edges, False)
                mum, _ = biexp_model(xm, edges, False)
                gn[j] = (poisson_nll(mup, counts) - poisson_nll(mum, counts)) / (2 * h)
            rel = np.abs(gn - ga) / np.maximum(np.abs(ga), 1.0)
            assert float(rel.max()) < 1e-6


class TestBiexponentialFit:
    def test_noiseless_histogram_recovered_exactly(self):
        # the model integrates bins exactly, so noiseless data is a fixed point
        hist = expected_histogram(PLAIN, 1e5, bin_edges=EDGES)
        res = fit_biexponential(hist)
        assert res.converged
        assert res.params["gamma_f"] == pytest.approx(1.1, rel=1e-8)
        assert res.params["gamma_s"] == pytest.approx(0.1, rel=1e-8)
        assert res.derived["gamma_rad"] == pytest.approx(1.0, rel=1e-7)
        assert res.n_iter <= 10
        assert res.flags == []

    def test_noisy_fit_within_tolerance_and_errors_honest(self):
        hist = generate_decay_histogram(PLAIN, 1e5, bin_edges=EDGES, seed=7)
        res = fit_biexponential(hist)
        gf, sgf = res.params["gamma_f"], res.uncertainties["gamma_f"]
        gs, sgs = res.params["gamma_s"], res.uncertainties["gamma_s"]
        assert abs(gf - 1.1) / 1.1 < 0.05
        assert abs(gs - 0.1) / 0.1 < 0.05
        assert abs(gf - 1.1) < 2.0 * sgf
        assert abs(gs - 0.1) < 2.0 * sgs
        grad = res.derived["gamma_rad"]
        assert abs(grad - 1.0) < 2.0 * res.derived["gamma_rad_sigma"]
        assert res.goodness < 2.0

    def test_degenerate_rates_raise(self):
        model = ExcitonModel(gamma_f=1.0, gamma_s=0.8, amp_ratio=1.0)
        hist = generate_decay_histogram(model, 1e5, bin_edges=EDGES, seed=3)
        with pytest.raises(NonIdentifiable, match="degenerate"):
            fit_biexponential(hist)

    def test_background_noiseless_exact(self):
        model = ExcitonModel(gamma_f=1.1, gamma_s=0.1, amp_ratio=0.05, background=2.0)
        hist = expected_histogram(model, 2e5, bin_edges=EDGES)
        res = fit_biexponential(hist, init=model)
        assert res.params["gamma_f"] == pytest.approx(1.1, rel=1e-6)
        assert res.params["background"] == pytest.approx(2.0, abs=1e-6)

    def test_background_noisy_covered_by_errors(self):
        model = ExcitonModel(gamma_f=1.1, gamma_s=0.1, amp_ratio=0.05, background=2.0)
        hist = generate_decay_histogram(model, 2e5, bin_edges=EDGES, seed=11)
        res = fit_biexponential(hist, init=model)
        assert "background" in res.params
        bg, sbg = res.params["background"], res.uncertainties["background"]
        assert abs(bg - 2.0) < 2.0 * sbg
        assert abs(res.params["gamma_s"] - 0.1) / 0.1 < 0.05

    def test_low_statistics_flag(self):
        hist = generate_decay_histogram(PLAIN, 500, bin_edges=EDGES, seed=2)
        assert hist.total_counts < 1000
        res = fit_biexponential(hist)
        assert "low_statistics" in res.flags

    def test_too_few_bins_rejected(self):
        edges = np.linspace(0.0, 1.0, 6)
        hist = expected_histogram(PLAIN, 1e4, bin_edges=edges)
        with pytest.raises(ValueError, match="too few bins"):
            fit_biexponential(hist)


class TestSinusoidFit:
    def test_exact_recovery(self):
        phi = np.linspace(0.0, 2.2, 17)
        vals = 3.0 * (1.0 + 0.6 * np.cos(2.0 * phi + 0.9))
        res = fit_sinusoid(phi, vals)
        assert res.params["mean"] == pytest.approx(3.0, abs=1e-10)
        assert res.derived["visibility"] == pytest.approx(0.6, abs=1e-10)
        assert res.params["theta"] == pytest.approx(0.9, abs=1e-10)
        assert res.flags == []

    def test_negative_amplitude_absorbed_into_theta(self):
        phi = np.linspace(0.0, 2.2, 17)
        vals = 3.0 * (1.0 - 0.6 * np.cos(2.0 * phi + 0.9))
        res = fit_sinusoid(phi, vals)
        assert res.derived["visibility"] == pytest.approx(0.6, abs=1e-10)
        assert res.params["theta"] == pytest.approx(
            (0.9 + math.pi) % (2.0 * math.pi), abs=1e-10
        )

    def test_constant_data_flags_theta(self):
        phi = np.linspace(0.0, 2.2, 17)
        res = fit_sinusoid(phi, np.full_like(phi, 4.0))
        assert "theta_undefined" in res.flags
        assert res.params["theta"] == 0.0
        assert res.derived["visibility"] == pytest.approx(0.0, abs=1e-12)

    def test_weights_do_not_bias_an_exact_model(self):
        phi = np.linspace(0.0, 3.0, 25)
        vals = 5.0 * (1.0 + 0.3 * np.cos(2.0 * phi + 2.1))
        sig = np.linspace(0.2, 2.0, 25)
        res = fit_sinusoid(phi, vals, sig)
        assert res.derived["visibility"] == pytest.approx(0.3, abs=1e-10)
        assert res.goodness == pytest.approx(0.0, abs=1e-16)

    def test_too_few_points_rejected(self):
        phi = np.linspace(0.0, 3.0, 5)
        with pytest.raises(InsufficientPhaseSpan, match="6 phase points"):
            fit_sinusoid(phi, np.ones(5))

    def test_short_span_rejected(self):
        phi = np.linspace(0.0, 0.4, 10)
        with pytest.raises(InsufficientPhaseSpan, match="span"):
            fit_sinusoid(phi, np.ones(10))

    def test_nonpositive_sigma_rejected(self):
        phi = np.linspace(0.0, 2.2, 10)
        with pytest.raises(ValueError, match="sigmas"):
            fit_sinusoid(phi, np.ones(10), np.zeros(10))

    @given(
        mean=st.floats(0.5, 50.0),
        nu=st.floats(0.01, 0.95),
        theta=st.floats(0.0, 2.0 * math.pi - 1e-6),
    )
    def test_round_trip_property(self, mean, nu, theta):
        phi = np.linspace(0.0, math.pi, 13)
        vals = mean * (1.0 + nu * np.cos(2.0 * phi + theta))
        res = fit_sinusoid(phi, vals)
        assert res.params["mean"] == pytest.approx(mean, rel=1e-8)
        assert res.derived["visibility"] == pytest.approx(nu, rel=1e-6, abs=1e-8)
        dtheta = (res.params["theta"] - theta + math.pi) % (2.0 * math.pi) - math.pi
        assert abs(dtheta) < 1e-6


class TestPhaseMapReconstruction:
    def test_quadratic_map_recovered(self):
        v, phi, inten = quad_fringe()
        cal = reconstruct_phase_map(v, inten)
        rec = recovered_phases(cal, v)
        err = (rec - rec[0]) - (phi - phi[0])
        assert float(np.max(np.abs(err))) < 0.02
        assert "3 interior turning point(s)" in cal.gauge_note
        assert "sign and offset unresolved" in cal.gauge_note

    def test_linear_map_recovered(self):
        v = np.linspace(0.0, 5.0, 64)
        phi = 1.1 * math.pi * v / 5.0
        inten = 80.0 * (1.0 + 0.5 * np.cos(2.0 * phi + 1.2))
        cal = reconstruct_phase_map(v, inten)
        rec = recovered_phases(cal, v)
        err = (rec - rec[0]) - (phi - phi[0])
        assert float(np.max(np.abs(err))) < 0.02
        assert "2 interior turning point(s)" in cal.gauge_note

    def test_output_is_monotone_from_zero(self):
        v, _, inten = quad_fringe()
        cal = reconstruct_phase_map(v, inten)
        rec = recovered_phases(cal, v)
        assert rec[0] == 0.0
        assert np.all(np.diff(rec) >= 0.0)

    def test_noisy_reference_fails_loudly(self):
        # at desk-scale counts the turn locations are not resolvable
        v, phi, _ = quad_fringe()
        rng = np.random.default_rng(9)
        lam = 2000.0 * (1.0 + 0.8 * np.cos(2.0 * phi + 0.3)) / 2.0 + 50.0
        noisy = rng.poisson(lam).astype(float)
        with pytest.raises(BranchAmbiguity):
            reconstruct_phase_map(v, noisy)

    def test_too_few_samples_rejected(self):
        v, _, inten = quad_fringe()
        with pytest.raises(InsufficientFringes, match="8 samples"):
            reconstruct_phase_map(v[:6], inten[:6])

    def test_flat_line_rejected(self):
        v, _, _ = quad_fringe()
        with pytest.raises(InsufficientFringes, match="modulation"):
            reconstruct_phase_map(v, np.full_like(v, 7.0))

    def test_partial_fringe_rejected(self):
        v, _, inten = quad_fringe()
        with pytest.raises(InsufficientFringes, match="fringes"):
            reconstruct_phase_map(v[:40], inten[:40])

    def test_nonmonotone_voltages_rejected(self):
        v, _, inten = quad_fringe()
        v = v.copy()
        v[5] = v[4]
        with pytest.raises(ValueError, match="strictly increasing"):
            reconstruct_phase_map(v, inten)

    def test_visibility_is_gauge_invariant(self):
        # a sign flip plus offset on the map must not move the visibility
        v, _, inten = quad_fringe()
        cal = reconstruct_phase_map(v, inten)
        rec = recovered_phases(cal, v)
        f1 = fit_sinusoid(rec, inten)
        f2 = fit_sinusoid(-rec + 0.7, inten)
        assert abs(f1.derived["visibility"] - f2.derived["visibility"]) < 1e-9

    def test_recovered_map_transfers_to_another_line(self):
        # a second noisy fringe analyzed with the recovered map fits well
        v, phi, inten = quad_fringe()
        cal = reconstruct_phase_map(v, inten)
        rec = recovered_phases(cal, v)
        rng = np.random.default_rng(21)
        lam = 5e4 * (1.0 + 0.55 * np.cos(2.0 * phi + 1.9)) / 2.0 + 1e3
        counts = rng.poisson(lam).astype(float)
        res = fit_sinusoid(rec, counts, np.sqrt(counts))
        assert res.goodness < 2.0
        assert res.derived["visibility"] == pytest.approx(0.55 * 5e4 / (5e4 + 2e3), abs=0.02)


class TestRLowerBound:
    def test_frozen_values(self):
        assert r_lower_bound(0.67) == pytest.approx(0.38453567444970366, rel=1e-14)
        assert r_lower_bound(0.83) == pytest.approx(0.5328151919332849, rel=1e-14)
        assert r_lower_bound(0.48) == pytest.approx(0.25569065004489094, rel=1e-14)
        assert r_lower_bound(0.42) == pytest.approx(0.22018070389744243, rel=1e-14)

    def test_endpoints(self):
        assert r_lower_bound(0.0) == 0.0
        assert r_lower_bound(1.0) == pytest.approx(1.0)

    def test_inverts_centered_visibility(self):
        for r in [0.05, 0.2, 0.5, 0.77, 0.99]:
            nu = 2.0 * r / (1.0 + r**2)
            assert r_lower_bound(nu) == pytest.approx(r, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            r_lower_bound(-0.1)
        with pytest.raises(ValueError):
            r_lower_bound(1.1)

    @given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
    def test_strictly_increasing(self, a, b):
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        assert r_lower_bound(lo) < r_lower_bound(hi)


class TestEstimateParameters:
    def test_frozen_feasible_summary(self, default_profile):
        est = estimate_parameters(0.48, 0.27, default_profile)
        assert est.n_feasible == 43628
        assert len(est.feasible_set) == 1984
        assert est.r_T_range == pytest.approx((0.23, 1.0))
        assert est.beta_y0_range == pytest.approx((0.59, 1.0))
        assert est.y0_range == pytest.approx((0.0, 150.0))
        assert est.r_T_lower_bound == pytest.approx(0.22018070389744243, rel=1e-12)
        assert est.r_T_lower_bound_point == pytest.approx(0.25569065004489094, rel=1e-12)

    def test_feasible_set_satisfies_both_visibilities(self, default_profile):
        """Stored triples reproduce the measurements when pushed forward."""
        est = estimate_parameters(0.48, 0.27, default_profile)
        prof = default_profile
        wy0 = float(np.interp(0.0, prof.grid, prof.e_y)) ** 2
        for r, b, y in est.feasible_set[::97]:
            wx = float(np.interp(y, prof.grid, prof.e_x)) ** 2
            wy = float(np.interp(y, prof.grid, prof.e_y)) ** 2
            nu_i = 2.0 * r / (1.0 + r**2) * abs(wy - wx) / (wy + wx)
            nu_g = r * b * abs(wy - wx) / (b * (wy + wx) + 2.0 * wy0 * (1.0 - b))
            assert abs(nu_i - 0.48) <= 2.0 * 0.03 + 1e-12
            assert abs(nu_g - 0.27) <= 2.0 * 0.05 + 1e-12

    def test_bound_below_every_feasible_r(self, default_profile):
        est = estimate_parameters(0.48, 0.27, default_profile)
        assert est.r_T_lower_bound <= min(t[0] for t in est.feasible_set)

    def test_moderate_reflectivity_offset_region_reachable(self, default_profile):
        est = estimate_parameters(0.48, 0.27, default_profile)
        box = [
            t
            for t in est.feasible_set
            if 0.55 <= t[0] <= 0.65 and 40.0 <= t[2] <= 80.0
        ]
        assert len(box) == 155

    def test_incompatible_pair_raises(self, default_profile):
        # high rate visibility cannot coexist with a tiny intensity one
        with pytest.raises(EmptyFeasibleSet):
            estimate_parameters(
                0.05, 0.9, default_profile, sigma_I=0.01, sigma_gamma=0.01
            )

    def test_input_validation(self, default_profile):
        with pytest.raises(ValueError, match="nu_I"):
            estimate_parameters(1.2, 0.3, default_profile)
        with pytest.raises(ValueError, match="nu_gamma"):
            estimate_parameters(0.3, -0.1, default_profile)
        with pytest.raises(ValueError, match="sigma_I"):
            estimate_parameters(0.3, 0.3, default_profile, sigma_I=0.0)

    def test_max_stored_subsamples_without_changing_count(self, default_profile):
        est = estimate_parameters(0.48, 0.27, default_profile, max_stored=100)
        assert est.n_feasible == 43628
        assert len(est.feasible_set) <= 100

    def test_to_dict_round_trip_keys(self, default_profile):
        d = estimate_parameters(0.48, 0.27, default_profile).to_dict()
        for key in (
            "nu_I",
            "nu_gamma",
            "r_T_lower_bound",
            "r_T_lower_bound_point",
            "r_T_range",
            "beta_y0_range",
            "y0_range",
            "n_feasible",
            "feasible_set",
        ):
            assert key in d


class TestAnalyzeSweep:
    def test_recovers_generator_truth(self, qd1_analysis):
        out = qd1_analysis
        assert out["nu_I"] == pytest.approx(0.48, abs=0.02)
        assert out["nu_gamma"] == pytest.approx(0.25, abs=0.02)
        assert out["gamma_max"] == pytest.approx(1.05, abs=0.03)
        assert out["gamma_min"] == pytest.approx(0.63, abs=0.03)
        assert out["estimate"] is not None
        assert out["estimate"]["n_feasible"] > 0

    def test_result_structure(self, qd1_analysis, qd1_sweep):
        out = qd1_analysis
        assert len(out["rate_fits"]) == len(qd1_sweep)
        for key in ("intensity_fit", "rate_fit", "theta_offset", "notes"):
            assert key in out
        assert out["gamma_max"] > out["gamma_min"]

    def test_thread_count_does_not_change_results(self, qd1_cfg, qd1_profile, qd1_sweep):
        import json

        args = (
            list(qd1_cfg.voltages()),
            [r.phi for r in qd1_sweep],
            [r.intensity_counts for r in qd1_sweep],
            [r.histogram for r in qd1_sweep],
        )
        r1 = analyze_sweep(*args, profile=qd1_profile, threads=1)
        r3 = analyze_sweep(*args, profile=qd1_profile, threads=3)
        assert json.dumps(r1, sort_keys=True) == json.dumps(r3, sort_keys=True)

    def test_estimator_is_consistent_across_seeds(self, qd1_cfg, qd1_profile):
        """The ensemble mean of the rate visibility sits on the truth."""
        cfg = qd1_cfg
        scene = cfg.scene(qd1_profile.k)
        weights = mode_weights(qd1_profile, scene.y0)
        volts = list(cfg.voltages())
        ests = []
        for seed in range(100):
            recs = generate_sweep(
                scene,
                weights,
                cfg.r_T_magnitude(),
                cfg.calibration(),
                volts,
                cfg.counts_scale,
                seed=seed,
                exciton=cfg.exciton(),
                hist_counts=cfg.hist_counts,
                bin_edges=cfg.bin_edges(),
                irf_sigma=cfg.irf_sigma,
            )
            out = analyze_sweep(
                volts,
                [r.phi for r in recs],
                [r.intensity_counts for r in recs],
                [r.histogram for r in recs],
            )
            ests.append(out["nu_gamma"])
        ests = np.asarray(ests)
        sem = float(ests.std(ddof=1)) / math.sqrt(len(ests))
        assert abs(float(ests.mean()) - 0.25) < 3.0 * sem


class TestTable1:
    def test_builtin_table_parses(self):
        rows = read_table1_csv(builtin_table1_path())
        assert [r["qd"] for r in rows] == [1, 2, 3, 4, 5, 6]
        assert all(r["gamma_max"] > r["gamma_min"] for r in rows)

    def test_missing_column_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("qd,lambda_nm,gamma_max\n1,920.0,1.0\n")
        with pytest.raises(MalformedRow, match="line 1: missing"):
            read_table1_csv(str(p))

    def test_unknown_column_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text(
            "qd,lambda_nm,gamma_max,gamma_min,nu_gamma,nu_I,bogus\n"
            "1,920.0,1.0,0.6,0.2,0.4,9\n"
        )
        with pytest.raises(MalformedRow, match="unknown columns"):
            read_table1_csv(str(p))

    def test_bad_cell_reports_line(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text(
            "qd,lambda_nm,gamma_max,gamma_min,nu_gamma,nu_I\n"
            "1,920.0,1.0,0.6,0.2,0.4\n"
            "2,921.0,oops,0.6,0.2,0.4\n"
        )
        with pytest.raises(MalformedRow, match="line 3"):
            read_table1_csv(str(p))

    def test_empty_cell_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text(
            "qd,lambda_nm,gamma_max,gamma_min,nu_gamma,nu_I\n1,920.0,,0.6,0.2,0.4\n"
        )
        with pytest.raises(MalformedRow, match="empty cell"):
            read_table1_csv(str(p))

    def test_no_rows_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("qd,lambda_nm,gamma_max,gamma_min,nu_gamma,nu_I\n")
        with pytest.raises(MalformedRow, match="no data rows"):
            read_table1_csv(str(p))

    def test_report_contrasts_and_flags(self):
        rows = read_table1_csv(builtin_table1_path())
        rep = table1_report(rows)
        out = rep["rows"]
        assert out[0]["rate_contrast"] == pytest.approx(0.37 / 1.63, rel=1e-12)
        assert out[3]["rate_contrast"] == pytest.approx(0.23 / 1.43, rel=1e-12)
        assert [r["contrast_within_1_sigma"] for r in out] == [
            False,
            False,
            False,
            True,
            False,
            True,
        ]
        assert out[5]["r_T_lower_bound_point"] == pytest.approx(
            0.5328151919332849, rel=1e-12
        )

    def test_first_emitter_crosscheck_note(self):
        rows = read_table1_csv(builtin_table1_path())
        rep = table1_report(rows)
        notes = rep["rows"][0]["notes"]
        assert any("923.25" in n and "discrepancy" in n for n in notes)
        for row in rep["rows"][1:]:
            assert not any("923.25" in n for n in row["notes"])

    def test_crosscheck_suppressed_when_disabled(self):
        rows = read_table1_csv(builtin_table1_path())
        rep = table1_report(rows, crosscheck=None)
        assert not any("923.25" in n for n in rep["rows"][0]["notes"])

    def test_equal_rates_give_zero_contrast(self):
        rows = [
            {
                "qd": 9,
                "lambda_nm": 920.0,
                "gamma_max": 0.8,
                "gamma_min": 0.8,
                "nu_gamma": 0.0,
                "nu_I": 0.3,
            }
        ]
        rep = table1_report(rows, crosscheck=None)
        assert rep["rows"][0]["rate_contrast"] == 0.0
        assert rep["rows"][0]["contrast_within_1_sigma"]

    def test_inverted_rates_rejected(self):
        rows = [
            {
                "qd": 9,
                "lambda_nm": 920.0,
                "gamma_max": 0.5,
                "gamma_min": 0.8,
                "nu_gamma": 0.1,
                "nu_I": 0.3,
            }
        ]
        with pytest.raises(MalformedRow):
            table1_report(rows, crosscheck=None)

    def test_feasibility_with_profile(self, default_profile):
        rows = read_table1_csv(builtin_table1_path())
        rep = table1_report(rows, profile=default_profile)
        for row in rep["rows"]:
            assert row["feasible"] is True
            assert row["r_T_range"][0] <= row["r_T_range"][1]
            assert row["r_T_lower_bound"] <= row["r_T_range"][0] + 1e-12
