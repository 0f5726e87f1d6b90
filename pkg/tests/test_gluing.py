import math

import numpy as np
import pytest

from cylcc.errors import DomainError, ValidationError
from cylcc.gluing import (
    CokernelBasisModel,
    NeckField,
    NeckParams,
    estimate_sweep,
    make_cutoffs,
    momo_check,
    obstruction_pairing,
    preglue,
    solve_neck,
    theta_residuals,
    two_sided_pairing,
    two_sided_pairing_quadrature,
)
from cylcc.spectral import OperatorKind, closed_form_spectrum

KIND = OperatorKind.pos_hyperbolic(0.5)


def setup(T=60.0, max_index=3, **kw):
    params = NeckParams(T=T, **kw)
    spectrum = closed_form_spectrum(KIND, max_index)
    return params, spectrum


class TestNeckParams:
    def test_invariants(self):
        with pytest.raises(DomainError):
            NeckParams(h=1.5)
        with pytest.raises(DomainError):
            NeckParams(h=0.5, r=1.0)  # r <= 1/h
        with pytest.raises(DomainError):
            NeckParams(T0=10.0, r=4.0)  # T0 <= 5r
        with pytest.raises(DomainError):
            NeckParams(T0=21.0, T=40.0)  # T <= 2 T0

    def test_defaults_satisfy_paper_constraints(self):
        p = NeckParams()
        assert p.r > 1.0 / p.h
        assert p.T0 > 5.0 * p.r
        assert p.T > 2.0 * p.T0


class TestCutoffs:
    def test_endpoint_values(self):
        params, _ = setup()
        cut = make_cutoffs(params)
        w = params.ramp_width
        assert cut.beta_minus(params.T) == 0.0
        assert cut.beta_minus(params.T - w) == 1.0
        assert cut.beta_plus(params.T0) == 0.0
        assert cut.beta_plus(params.T0 + w) == 1.0

    def test_ramp_rate_integrates_to_one(self):
        params, _ = setup()
        cut = make_cutoffs(params)
        w = params.ramp_width
        for rate, (lo, hi) in (
            (cut.rho_plus, cut.plus_support),
            (cut.rho_minus, cut.minus_support),
        ):
            s = np.linspace(lo - 0.5, hi + 0.5, 2_000_001)
            val = np.trapezoid(rate(s), s)
            assert abs(val - 1.0) < 1e-12

    def test_profiles_monotone(self):
        params, _ = setup()
        cut = make_cutoffs(params)
        s = np.linspace(0.0, params.s_max, 4001)
        assert np.all(np.diff(cut.beta_plus(s)) >= 0.0)
        assert np.all(np.diff(cut.beta_minus(s)) <= 0.0)


class TestPreglue:
    def test_zero_ends_trivial_cylinder(self):
        params, spectrum = setup()
        zero = NeckField.zero(spectrum, params)
        glued = preglue(zero, zero, params)
        assert glued.mode_indices == []

    def test_plateau_is_plain_sum(self):
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 2.0})
        eta_m = NeckField.end_from_below(spectrum, params, {-1: 1.5})
        glued = preglue(eta_p, eta_m, params)
        w = params.ramp_width
        s = np.linspace(params.T0 + w, params.T - w, 17)
        for i, src in ((1, eta_p), (-1, eta_m)):
            assert np.allclose(glued.mode_value(i, s), src.mode_value(i, s), rtol=0.0)

    def test_bottom_branch_matches_eta_minus(self):
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 2.0})
        eta_m = NeckField.end_from_below(spectrum, params, {-1: 1.5})
        glued = preglue(eta_p, eta_m, params)
        s = np.array([params.T0])
        assert glued.mode_value(1, s)[0] == 0.0  # beta_plus vanishes there
        assert glued.mode_value(-1, s)[0] == eta_m.mode_value(-1, s)[0]

    def test_support_violation(self):
        params, spectrum = setup()
        bad = NeckField.end_from_below(spectrum, params, {-1: 1.0})
        with pytest.raises(ValidationError):
            preglue(bad, bad, params)
        with pytest.raises(ValidationError):
            NeckField.end_from_above(spectrum, params, {-1: 1.0})


class TestSolveNeck:
    def test_zero_bottom_forcing_gives_zero_psi_plus(self):
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 1.0})
        zero = NeckField.zero(spectrum, params)
        psi_plus, _ = solve_neck(eta_p, zero, params)
        grid = params.grid()
        assert all(
            np.allclose(psi_plus.mode_value(i, grid), 0.0)
            for i in spectrum.indices
        )

    def test_negative_mode_endpoint(self):
        params, spectrum = setup()
        eta_m = NeckField.end_from_below(spectrum, params, {-1: 1.0})
        psi_plus, _ = solve_neck(NeckField.zero(spectrum, params), eta_m, params)
        top = np.array([params.s_max])
        assert abs(psi_plus.b(-1, top)[0] + 1.0) < 1e-15

    def test_positive_modes_constant(self):
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 3.0})
        eta_m = NeckField.end_from_below(spectrum, params, {-1: -2.0, -2: 0.7})
        checks = momo_check(eta_p, eta_m, params)
        assert checks["positive_mode_drift"] < 1e-9
        assert checks["endpoint_deviation"] < 1e-9

    def test_residuals_tiny(self):
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 2.0, 3: -1.0})
        eta_m = NeckField.end_from_below(spectrum, params, {-1: 1.5, -2: 0.5})
        psi_plus, psi_minus = solve_neck(eta_p, eta_m, params)
        res_plus, res_minus = theta_residuals(
            eta_p, eta_m, psi_plus, psi_minus, params
        )
        assert res_plus < 1e-9
        assert res_minus < 1e-9

    def test_peach_one_analogue(self):
        # After solving, eta_- + psi_- has no positive-mode content above
        # the bottom cutoff ramp.
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 2.0})
        eta_m = NeckField.end_from_below(spectrum, params, {-1: 1.0})
        _, psi_minus = solve_neck(eta_p, eta_m, params)
        grid = params.grid()
        above = grid[grid >= params.T0 + params.ramp_width]
        content = max(
            float(np.max(np.abs(
                eta_m.mode_value(i, above) + psi_minus.mode_value(i, above)
            )))
            for i in spectrum.indices
            if i > 0
        )
        assert content < 1e-10

    def test_mode_collision_rejected(self):
        params, spectrum = setup()
        eta_p = NeckField.end_from_above(spectrum, params, {1: 1.0})
        eta_m = NeckField.end_from_below(spectrum, params, {-1: 1.0})
        collide = NeckField(spectrum, params, dict(eta_p.modes))
        bad = NeckField(spectrum, params, {**eta_m.modes, **eta_p.modes})
        with pytest.raises(ValidationError):
            solve_neck(collide, bad, params)


class TestObstructionPairing:
    @pytest.mark.parametrize("T", [45.0, 60.0, 120.0])
    @pytest.mark.parametrize("k", [2, 3])
    def test_single_mode_matches_closed_form(self, T, k):
        params, spectrum = setup(T=T)
        cok = CokernelBasisModel.exact(k, spectrum)
        for i in range(1, k):
            lam = spectrum.eigenvalue(i)
            c_i = 2.0
            eta_p = NeckField.end_from_above(spectrum, params, {i: c_i})
            value = obstruction_pairing(cok.sigma(i), eta_p, params)
            closed = c_i * math.exp(-2.0 * lam * T)
            assert abs(value - closed) < 1e-8
            if closed > 1e-300:
                assert abs(value - closed) < 1e-8 * abs(closed)

    def test_zero_field(self):
        params, spectrum = setup()
        cok = CokernelBasisModel.exact(2, spectrum)
        assert obstruction_pairing(cok.sigma(1), NeckField.zero(spectrum, params), params) == 0.0

    def test_mixed_modes_only_matching_contributes(self):
        params, spectrum = setup(T=45.0)
        cok = CokernelBasisModel.exact(3, spectrum)
        eta_p = NeckField.end_from_above(spectrum, params, {1: 1.0, 2: 5.0, 3: -7.0})
        only_1 = NeckField.end_from_above(spectrum, params, {1: 1.0})
        a = obstruction_pairing(cok.sigma(1), eta_p, params)
        b = obstruction_pairing(cok.sigma(1), only_1, params)
        assert abs(a - b) < 1e-10

    def test_translation_covariance(self):
        params, spectrum = setup(T=45.0)
        cok = CokernelBasisModel.exact(2, spectrum)
        lam = spectrum.eigenvalue(1)
        base = obstruction_pairing(
            cok.sigma(1), NeckField.end_from_above(spectrum, params, {1: 2.0}), params
        )
        for s0 in (0.3, 1.0, -0.8):
            shifted = obstruction_pairing(
                cok.sigma(1),
                NeckField.end_from_above(
                    spectrum, params, {1: 2.0 * math.exp(-lam * s0)}
                ),
                params,
            )
            assert np.isclose(shifted, base * math.exp(-lam * s0), rtol=1e-12)

    def test_spectrum_mismatch_rejected(self):
        params, spectrum = setup()
        other = closed_form_spectrum(OperatorKind.neg_hyperbolic(0.5), 3)
        cok = CokernelBasisModel.exact(2, other)
        field = NeckField.end_from_above(spectrum, params, {1: 1.0})
        with pytest.raises(ValidationError):
            obstruction_pairing(cok.sigma(1), field, params)


class TestTwoSidedPairing:
    def test_degenerate_case_reduces_to_one_sided(self):
        params, spectrum = setup()
        cok = CokernelBasisModel(k=3, spectrum_plus=spectrum)
        T_plus = 2.0
        out = two_sided_pairing(1.0, T_plus, cok, [1.5, -2.0, 0.3], [0.0, 0.0, 0.0])
        expected = np.array(
            [
                1.5 * math.exp(-2.0 * spectrum.eigenvalue(1) * T_plus),
                -2.0 * math.exp(-2.0 * spectrum.eigenvalue(2) * T_plus),
            ]
        )
        assert np.allclose(out, expected, rtol=1e-14)

    def test_sample_value(self):
        # k = 2, c = (1, 0), lambda_1 = 0.5, T_+ = 2: single entry e^{-2}.
        params, _ = setup()
        spectrum = closed_form_spectrum(KIND, 2)
        cok = CokernelBasisModel(k=2, spectrum_plus=spectrum)
        out = two_sided_pairing(1.0, 2.0, cok, [1.0, 0.0], [0.0, 0.0])
        assert out.shape == (1,)
        assert np.isclose(out[0], math.exp(-2.0), rtol=1e-14)

    def test_closed_form_vs_quadrature(self):
        params, spectrum = setup()
        spec_minus = closed_form_spectrum(OperatorKind.neg_hyperbolic(0.4), 3)
        cok = CokernelBasisModel(
            k=3,
            spectrum_plus=spectrum,
            c=((1.0, 0.3, -0.2), (0.0, 1.0, 0.5), (0.0, 0.0, 1.0)),
            spectrum_minus=spec_minus,
            d=((0.7, 0.0, 0.0), (0.4, -0.6, 0.0), (0.0, 0.0, 1.1)),
        )
        c_co = [1.2, -0.4, 0.8]
        d_co = [0.5, -1.0, 0.3]
        closed = two_sided_pairing(3.0, 2.5, cok, c_co, d_co)
        quad = two_sided_pairing_quadrature(3.0, 2.5, cok, c_co, d_co, params)
        assert np.max(np.abs(closed - quad)) < 1e-8

    def test_support_pattern_enforced(self):
        _, spectrum = setup()
        spec_minus = closed_form_spectrum(OperatorKind.neg_hyperbolic(0.4), 2)
        with pytest.raises(ValidationError):
            CokernelBasisModel(
                k=2,
                spectrum_plus=spectrum,
                spectrum_minus=spec_minus,
                d=((0.0, 1.0), (0.0, 1.0)),  # row 0 may touch col 0 only
            )

    def test_shape_mismatch(self):
        _, spectrum = setup()
        cok = CokernelBasisModel(k=2, spectrum_plus=spectrum)
        with pytest.raises(ValidationError):
            two_sided_pairing(1.0, 1.0, cok, [1.0], [0.0, 0.0])


class TestSweep:
    def _grids(self):
        return [NeckParams(T0=21, T=T, h=0.5, r=4) for T in (45, 60, 90)] + [
            NeckParams(T0=41, T=T, h=0.5, r=8) for T in (90, 110, 130)
        ]

    def test_zero_forcing_zero_ratio(self):
        report = estimate_sweep([NeckParams(T=60.0)], [0.0])
        assert report.rows[0].ratio == 0.0
        assert report.rows[0].psi_plus_norm == 0.0

    def test_ratio_bounded_and_nonincreasing_in_T(self):
        report = estimate_sweep(self._grids(), [0.5, 1.0])
        assert report.max_ratio < 50.0
        assert report.ratios_nonincreasing_in_T()

    def test_r_doubling_norm_factor(self):
        # Frozen from the exact per-mode solve at T = 90, h = 0.5,
        # lambda = 0.5: doubling r multiplies ||psi_+||_* by ~1.366 (the
        # ramp-tail exponential), not the 1/(hr) forcing heuristic.
        rows = estimate_sweep(
            [
                NeckParams(T0=21, T=90.0, h=0.5, r=4),
                NeckParams(T0=41, T=90.0, h=0.5, r=8),
            ],
            [1.0],
        ).rows
        factor = rows[1].psi_plus_norm / rows[0].psi_plus_norm
        assert 1.30 < factor < 1.45
