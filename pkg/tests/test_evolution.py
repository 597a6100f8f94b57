import math

import numpy as np
import pytest

from qgeo import (
    HermitianGenerator,
    ParameterGrid,
    ParameterRangeError,
    QuantumState,
    StepSizeError,
    evolve_exact,
    evolve_ode,
    horesh_mann_family,
    inner_product,
    random_hermitian,
    random_state,
    sample_path,
    uncertainty,
)
from qgeo.intelligent import SplitGeneratorSpec, build_split_generator


def test_zero_parameter_is_identity(rng):
    A = random_hermitian(4, rng)
    psi = random_state(4, rng)
    np.testing.assert_array_equal(evolve_exact(A, psi, 0.0).amplitudes, psi.amplitudes)


@pytest.mark.parametrize("hbar", [1.0, 0.5])
def test_split_generator_amplitudes_closed_form(hbar):
    a0, a1 = 0.7, 1.3
    A = build_split_generator(SplitGeneratorSpec(2, 0, 1, a0, a1))
    for lam in np.linspace(0.0, 2.0, 9):
        out = evolve_exact(A, [1, 0], lam, hbar=hbar).amplitudes
        env = np.exp(-1j * a0 * lam / hbar)
        expected = [env * math.cos(a1 * lam / hbar), -1j * env * math.sin(a1 * lam / hbar)]
        np.testing.assert_allclose(out, expected, atol=1e-14)


def test_horesh_mann_state_reaches_orthogonality():
    fam = horesh_mann_family(HermitianGenerator(np.diag([0.4, 2.9, 5.0])), 0, 1)
    end = evolve_exact(fam.generator, fam.psi0, fam.threshold)
    assert abs(inner_product(fam.psi0, end)) < 1e-10


def test_composition(rng):
    A = random_hermitian(5, rng)
    psi = random_state(5, rng)
    l1, l2 = 0.37, 1.21
    twice = evolve_exact(A, evolve_exact(A, psi, l1), l2)
    np.testing.assert_allclose(twice.amplitudes, evolve_exact(A, psi, l1 + l2).amplitudes, atol=1e-10)


def test_overlap_depends_only_on_separation(rng):
    A = random_hermitian(4, rng)
    path = sample_path(A, random_state(4, rng), ParameterGrid(0, 3, 31))
    s = path.states
    for _ in range(20):
        k, m = rng.integers(0, 21, size=2)
        d = int(rng.integers(1, 10))
        assert abs(abs(np.vdot(s[k], s[k + d])) - abs(np.vdot(s[m], s[m + d]))) < 1e-10


class TestSamplePath:
    def test_three_samples(self, rng):
        A = random_hermitian(3, rng)
        psi = random_state(3, rng)
        path = sample_path(A, psi, ParameterGrid(0, 1, 3))
        np.testing.assert_allclose(path.parameters, [0, 0.5, 1])
        np.testing.assert_allclose(path.states[0], psi.amplitudes, atol=1e-15)
        np.testing.assert_allclose(np.linalg.norm(path.states, axis=1), 1, atol=1e-14)
        assert path.method == "spectral"

    def test_split_family_stays_in_block(self):
        spec = SplitGeneratorSpec(5, 1, 3, a0=-0.5, a1=0.8)
        path = sample_path(build_split_generator(spec), QuantumState.basis(5, 1), ParameterGrid(0, 1.5, 50))
        weight = np.abs(path.states[:, 1]) ** 2 + np.abs(path.states[:, 3]) ** 2
        np.testing.assert_allclose(weight, 1.0, atol=1e-14)

    def test_reversed_grid_rejected(self):
        with pytest.raises(ParameterRangeError):
            ParameterGrid(1.0, 0.0, 5)

    def test_uncertainty_constant_along_path(self, rng):
        A = random_hermitian(6, rng)
        path = sample_path(A, random_state(6, rng), ParameterGrid(0, 4, 41))
        spreads = [uncertainty(A, s) for s in path.states]
        assert np.ptp(spreads) < 1e-12


class TestODE:
    def test_matches_exact_at_quarter_period(self):
        a1 = 1.0
        A = build_split_generator(SplitGeneratorSpec(2, 0, 1, a0=0.3, a1=a1))
        lam2 = math.pi / (2 * a1)
        path = evolve_ode(A, [1, 0], ParameterGrid(0, lam2, 1001))
        exact = evolve_exact(A, [1, 0], lam2).amplitudes
        assert np.linalg.norm(path.states[-1] - exact) < 1e-8
        assert path.method == "ode"
        assert 0 <= path.max_norm_drift < 1e-12

    def test_zero_generator_is_stationary(self, rng):
        psi = random_state(3, rng)
        path = evolve_ode(lambda lam: np.zeros((3, 3)), psi, ParameterGrid(0, 2, 11))
        np.testing.assert_allclose(path.states, np.tile(psi.amplitudes, (11, 1)), atol=1e-15)

    def test_commuting_family_uses_integrated_parameter(self, rng):
        Ac = random_hermitian(3, rng)
        psi = random_state(3, rng)
        f = lambda lam: 1.0 + 0.5 * math.sin(lam)
        integral = lambda lam: lam + 0.5 * (1.0 - math.cos(lam))
        lam2 = 2.0
        path = evolve_ode(lambda lam: Ac.scaled(f(lam)), psi, ParameterGrid(0, lam2, 2001))
        exact = evolve_exact(Ac, psi, integral(lam2)).amplitudes
        assert np.linalg.norm(path.states[-1] - exact) < 1e-8

    def test_coarse_grid_rejected_with_suggestion(self):
        A = HermitianGenerator(np.diag([0.0, 50.0]))
        psi = np.array([1, 1]) / math.sqrt(2)
        with pytest.raises(StepSizeError) as info:
            evolve_ode(A, psi, ParameterGrid(0, 1, 11))
        required = info.value.required_samples
        assert required > 11
        evolve_ode(A, psi, ParameterGrid(0, 1, required))
