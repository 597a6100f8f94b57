import math

import numpy as np
import pytest

from qgeo import (
    HermitianGenerator,
    ParameterGrid,
    ParameterRangeError,
    averaged_uncertainty,
    evaluate_pbur,
    evolve_ode,
    horesh_mann_family,
    nonorthogonal_family,
    parameter_uncertainty,
    random_hermitian,
    random_state,
    sample_path,
    uncertainty,
)
from qgeo.intelligent import SplitGeneratorSpec


class TestAveragedUncertainty:
    def test_constant(self, rng):
        A = random_hermitian(3, rng)
        psi = random_state(3, rng)
        path = sample_path(A, psi, ParameterGrid(0, 2, 11))
        assert averaged_uncertainty(path) == pytest.approx(uncertainty(A, psi), rel=1e-13)

    def test_nonorthogonal_family_is_a1(self):
        fam = nonorthogonal_family(SplitGeneratorSpec(4, 0, 1, a0=-1.0, a1=0.35))
        assert averaged_uncertainty(fam.path(n_samples=101)) == pytest.approx(0.35, abs=1e-13)

    def test_horesh_mann_is_half_gap(self):
        fam = horesh_mann_family(HermitianGenerator(np.diag([0.2, 1.0, 4.5])), 0, 2)
        assert averaged_uncertainty(fam.path(n_samples=101)) == pytest.approx(2.15, abs=1e-13)


class TestParameterUncertainty:
    def test_orthogonal_endpoints_give_plain_difference(self):
        assert parameter_uncertainty(math.pi, 0.3, 1.8) == pytest.approx(1.5)

    @pytest.mark.parametrize("lam2", [0.1, 0.5, 1.2])
    def test_nonorthogonal_family_independent_of_endpoint(self, lam2):
        a1, hbar = 1.25, 1.0
        S0 = 2 * a1 * lam2 / hbar
        assert parameter_uncertainty(S0, 0.0, lam2) == pytest.approx(math.pi * hbar / (2 * a1))

    def test_same_ray_rejected(self):
        with pytest.raises(ParameterRangeError):
            parameter_uncertainty(0.0, 0.0, 1.0)
        with pytest.raises(ParameterRangeError):
            parameter_uncertainty(1e-9, 0.0, 1.0)


class TestEvaluate:
    def test_nonorthogonal_saturates(self):
        fam = nonorthogonal_family(SplitGeneratorSpec(3, 2, 0, a0=0.4, a1=2.0), hbar=0.7)
        rep = evaluate_pbur(fam.path(0.3 * fam.threshold, 201))
        assert rep.bound == pytest.approx(math.pi * 0.7 / 2)
        assert abs(rep.ratio - 1) < 1e-9
        assert rep.saturated and not rep.violation

    def test_horesh_mann_saturates_at_orthogonality(self):
        fam = horesh_mann_family(HermitianGenerator(np.diag([-1.0, 0.5])), 0, 1)
        rep = evaluate_pbur(fam.path(n_samples=201))
        assert abs(rep.ratio - 1) < 1e-9
        assert rep.S0 == pytest.approx(math.pi)

    def test_three_level_exceeds_bound(self):
        # first fidelity minimum of (1 + e^{-i lam} + e^{-3 i lam})/sqrt(3), from a
        # 40-digit root of dF/dlam; the ratio there is 1.1797044012...
        lam_min = 1.2929430585054267
        A = HermitianGenerator(np.diag([0.0, 1.0, 3.0]))
        rep = evaluate_pbur(sample_path(A, np.ones(3) / math.sqrt(3), ParameterGrid(0, lam_min, 201)))
        assert rep.ratio == pytest.approx(1.1797044012503801, rel=1e-12)
        assert rep.ratio > 1 + 1e-3 and not rep.saturated

    def test_ode_uses_looser_tolerance(self):
        fam = nonorthogonal_family(SplitGeneratorSpec(2, 0, 1, a0=1.0, a1=1.0))
        path = evolve_ode(fam.generator, fam.psi0, fam.grid(1.0, 1001))
        rep = evaluate_pbur(path)
        assert rep.method == "ode" and rep.tolerance == 1e-6
        assert rep.saturated

    def test_violation_is_flagged_not_raised(self):
        A = HermitianGenerator(np.diag([0.0, 1.0, 3.0]))
        path = sample_path(A, np.ones(3) / math.sqrt(3), ParameterGrid(0, 1.2, 5))
        fake = path.with_states(path.states, generator=A.scaled(0.5))
        rep = evaluate_pbur(fake)
        assert rep.violation and rep.diagnostics

    def test_scale_covariance(self, rng):
        A = random_hermitian(4, rng)
        psi = random_state(4, rng)
        base = evaluate_pbur(sample_path(A, psi, ParameterGrid(0, 1.0, 101)))
        c = 3.7
        scaled = evaluate_pbur(sample_path(A.scaled(c), psi, ParameterGrid(0, 1.0 / c, 101)))
        assert scaled.ratio == pytest.approx(base.ratio, rel=1e-12)
        assert scaled.product == pytest.approx(base.product, rel=1e-12)

    def test_hbar_covariance(self, rng):
        A = random_hermitian(3, rng)
        psi = random_state(3, rng)
        base = evaluate_pbur(sample_path(A, psi, ParameterGrid(0, 0.8, 101)))
        hbar = 2.5
        other = evaluate_pbur(sample_path(A, psi, ParameterGrid(0, 0.8 * hbar, 101), hbar=hbar))
        assert other.ratio == pytest.approx(base.ratio, rel=1e-12)

    def test_nonorthogonal_report_independent_of_endpoint(self):
        fam = nonorthogonal_family(SplitGeneratorSpec(2, 0, 1, a0=0.0, a1=1.0))
        reports = [evaluate_pbur(fam.path(f * fam.threshold, 101)) for f in (0.05, 0.3, 0.6, 0.95)]
        for rep in reports:
            assert rep.avg_uncertainty == pytest.approx(reports[0].avg_uncertainty, abs=1e-9)
            assert rep.delta_lambda == pytest.approx(reports[0].delta_lambda, abs=1e-9)
