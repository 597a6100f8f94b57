"""Invariants checked over generated inputs."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeo import (
    ParameterGrid,
    analyze_path,
    bargmann_angle,
    evaluate_pbur,
    evolve_exact,
    fubini_study_length,
    horesh_mann_family,
    inner_product,
    nonorthogonal_family,
    random_hermitian,
    random_state,
    random_unitary,
    sample_path,
    subspace_rank,
)
from qgeo.geometry import endpoint_angle
from qgeo.intelligent import SplitGeneratorSpec

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=8)


@given(seeds, dims)
def test_inner_product_conjugate_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    a, b = random_state(n, rng), random_state(n, rng)
    assert abs(inner_product(a, b) - inner_product(b, a).conjugate()) < 1e-15


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(4, 8), st.floats(0.1, 4.0))
def test_length_bounds_geodesic_distance(seed, n, lam2):
    rng = np.random.default_rng(seed)
    path = sample_path(random_hermitian(n, rng), random_state(n, rng), ParameterGrid(0, lam2, 101))
    assert fubini_study_length(path) >= endpoint_angle(path) - 1e-6


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 6))
def test_gauge_invariance(seed, n):
    rng = np.random.default_rng(seed)
    path = sample_path(random_hermitian(n, rng), random_state(n, rng), ParameterGrid(0, 1.5, 41))
    phases = np.exp(1j * rng.uniform(0, 2 * math.pi, 41))
    regauged = path.with_states(path.states * phases[:, None])
    assert abs(fubini_study_length(regauged) - fubini_study_length(path)) < 1e-12
    assert abs(endpoint_angle(regauged) - endpoint_angle(path)) < 1e-12
    assert subspace_rank(regauged) == subspace_rank(path)


@settings(max_examples=100)
@given(seeds, dims)
def test_bargmann_triangle_inequality(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = (random_state(n, rng) for _ in range(3))
    assert bargmann_angle(a, c) <= bargmann_angle(a, b) + bargmann_angle(b, c) + 1e-9


split_specs = st.builds(
    lambda seed, n, a0, a1: _spec(seed, n, a0, a1),
    seeds,
    st.integers(2, 6),
    st.floats(-3, 3),
    st.floats(0.05, 3),
)


def _spec(seed, n, a0, a1):
    rng = np.random.default_rng(seed)
    i, j = rng.choice(n, size=2, replace=False)
    return SplitGeneratorSpec(n, int(i), int(j), a0, a1, basis=random_unitary(n, rng))


@settings(max_examples=40, deadline=None)
@given(split_specs, st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10))
def test_nonorthogonal_amplitudes(spec, fractions):
    fam = nonorthogonal_family(spec)
    lam = np.array(fractions) * fam.threshold
    ci, cj = fam.amplitudes(lam)
    np.testing.assert_allclose(np.abs(ci) ** 2 + np.abs(cj) ** 2, 1, atol=1e-12)
    assert np.max(np.abs((ci.conj() * cj).real)) < 1e-12
    for x in lam:
        np.testing.assert_allclose(evolve_exact(fam.generator, fam.psi0, x).amplitudes, fam.state(x), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(split_specs, st.floats(0.01, 0.99), st.floats(0, 2 * math.pi))
def test_nonorthogonal_family_saturates_under_any_phase(spec, frac, theta):
    fam = nonorthogonal_family(spec).rephased(np.exp(1j * theta))
    rep = evaluate_pbur(fam.path(frac * fam.threshold, 101))
    assert rep.saturated


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 6))
def test_horesh_mann_amplitudes_normalized(seed, n):
    rng = np.random.default_rng(seed)
    i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
    fam = horesh_mann_family(random_hermitian(n, rng), i, j)
    ci, cj = fam.amplitudes(np.linspace(0, fam.threshold, 17))
    np.testing.assert_allclose(np.abs(ci) ** 2 + np.abs(cj) ** 2, 1, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(3, 6), st.floats(0.2, 2.0))
def test_saturation_implies_small_residual(seed, n, lam2):
    rng = np.random.default_rng(seed)
    path = sample_path(random_hermitian(n, rng), random_state(n, rng), ParameterGrid(0, lam2, 201))
    rep = evaluate_pbur(path)
    if rep.saturated:
        geo = analyze_path(path)
        v = geo.S / (2 * lam2)
        assert geo.residual_max < 1e-4 * v**2
