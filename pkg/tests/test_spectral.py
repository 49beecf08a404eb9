"""Linearized operator: classification, closed-form eigenvalues, semigroup."""

import numpy as np
import pytest

from adiaflow.errors import ClassificationError
from adiaflow.grid import GridField
from adiaflow.spectral import (
    assemble_operator,
    decompose,
    measure_propagator_constant,
    operator_norm_diagnostic,
    project_stable,
    propagate_stable,
    propagate_stable_batch,
    verify_operator_lipschitz,
)


def _stable_noise(spectrum, grid, seed):
    rng = np.random.default_rng(seed)
    return project_stable(spectrum, GridField(rng.standard_normal(grid.n), grid))


def test_classification_counts(spectrum, grid):
    assert len(spectrum.unstable_indices) == 1
    assert len(spectrum.zero_indices) == 1
    assert len(spectrum.stable_indices) == grid.n - 2
    assert spectrum.zero_mode_analytic


def test_closed_form_eigenvalues(spectrum):
    ev = spectrum.eigenvalues
    assert ev[0] == pytest.approx(-1.25, abs=1e-10)
    assert abs(ev[1]) <= 1e-10
    assert ev[2] == pytest.approx(0.75, abs=1e-6)
    assert spectrum.unstable_eigenvalue == pytest.approx(-1.25, abs=1e-10)
    assert spectrum.spectral_gap == pytest.approx(0.75, abs=1e-6)
    assert np.all(ev[2:] >= 0.745)


def test_near_edge_eigenvalues_pair_up(spectrum):
    ev = spectrum.eigenvalues
    assert ev[3] == pytest.approx(1.0092172, abs=1e-5)
    assert abs(ev[4] - ev[3]) <= 1e-6


def test_unstable_mode_is_the_cubed_secant(spectrum, grid):
    mode = 1.0 / np.cosh(grid.x / 2.0) ** 3
    mode /= grid.weak_norm_values(mode)
    assert abs(grid.inner_values(mode, spectrum.unstable_mode)) >= 1.0 - 1e-8


def test_zero_mode_is_the_family_tangent(spectrum, grid, model):
    tangent = model.family_tangent(model.origin)
    zero_mode = spectrum.eigenvectors[:, spectrum.zero_indices[0]]
    assert abs(grid.inner_values(zero_mode, tangent.values)) >= 1.0 - 1e-10


def test_eigenvectors_weak_orthonormal(spectrum, grid):
    vectors = spectrum.eigenvectors
    gram = grid.spacing * (vectors.T @ vectors)
    assert np.max(np.abs(gram - np.eye(vectors.shape[1]))) <= 1e-10


def test_eigen_residual(spectrum, model, grid):
    matrix = assemble_operator(model, model.origin)
    residual = (
        matrix @ spectrum.eigenvectors
        - spectrum.eigenvectors * spectrum.eigenvalues[None, :]
    )
    assert np.max(grid.weak_norm_values(residual.T)) <= 1e-8


def test_assembled_operator_symmetric(model):
    matrix = assemble_operator(model, model.origin)
    assert np.array_equal(matrix, matrix.T)


def test_operator_applied_to_constants(model, grid):
    matrix = assemble_operator(model, model.origin)
    image = matrix @ np.ones(grid.n)
    assert np.max(np.abs(image - (1.0 - 2.0 * model.profile.values))) <= 1e-10


def test_dense_and_spectral_application_agree(model, grid):
    matrix = assemble_operator(model, model.origin)
    rng = np.random.default_rng(3)
    rough = rng.standard_normal(grid.n)
    via_fft = model.linearized_apply(model.origin, GridField(rough.copy(), grid))
    assert np.max(np.abs(matrix @ rough - via_fft.values)) <= 1e-10


def test_eigenvalues_do_not_depend_on_the_base_point(spectrum, model):
    shifted = np.linalg.eigvalsh(assemble_operator(model, model.symmetry_point(0.9)))
    assert np.max(np.abs(shifted - spectrum.eigenvalues)) <= 1e-10


def test_decomposition_is_deterministic(spectrum, model):
    again = decompose(model, model.origin)
    assert np.array_equal(again.eigenvalues, spectrum.eigenvalues)
    assert np.array_equal(again.eigenvectors, spectrum.eigenvectors)


def test_classification_rejects_misconfigured_bands(model):
    with pytest.raises(ClassificationError):
        decompose(model, model.origin, zero_tol=1e-16)
    with pytest.raises(ClassificationError):
        decompose(model, model.origin, gap_threshold=2.0)


def test_project_stable_annihilates_the_other_channels(spectrum, grid):
    projected = _stable_noise(spectrum, grid, 8)
    again = project_stable(spectrum, projected)
    assert np.max(np.abs(again.values - projected.values)) <= 1e-12
    assert abs(grid.inner_values(projected.values, spectrum.unstable_mode)) <= 1e-12
    # The projector removes the analytic tangent channel exactly; the
    # numerical kernel eigenvector differs from it at the eigensolver's
    # accuracy for a ~1e-13 eigenvalue, so it only vanishes to ~1e-8.
    assert abs(projected.inner(spectrum.zero_mode_analytic)) <= 1e-12
    zero_mode = spectrum.eigenvectors[:, spectrum.zero_indices[0]]
    assert abs(grid.inner_values(projected.values, zero_mode)) <= 1e-8


def test_propagate_stable_identity_decay_and_domain(spectrum, grid):
    # A pure combination of stable eigenvectors reproduces exactly at t = 0;
    # projected noise would differ at the zero-channel mismatch (~1e-9).
    coeffs = np.zeros(len(spectrum.eigenvalues))
    coeffs[spectrum.stable_indices[:40]] = np.random.default_rng(9).standard_normal(40)
    v = GridField(spectrum.eigenvectors @ coeffs, grid)
    at_zero = propagate_stable(spectrum, v, 0.0)
    assert np.max(np.abs(at_zero.values - v.values)) <= 1e-10
    for t in (1.0, 5.0, 10.0):
        decayed = propagate_stable(spectrum, v, t)
        assert decayed.weak_norm() <= np.exp(-0.745 * t) * v.weak_norm()
    with pytest.raises(ValueError):
        propagate_stable(spectrum, v, -0.5)


def test_propagate_batch_matches_single_steps(spectrum, grid):
    v = _stable_noise(spectrum, grid, 10)
    times = np.array([0.0, 0.5, 2.0])
    block = propagate_stable_batch(spectrum, v, times)
    assert block.shape == (3, grid.n)
    for j, t in enumerate(times):
        single = propagate_stable(spectrum, v, float(t))
        assert np.max(np.abs(block[j] - single.values)) <= 1e-12


def test_operator_norm_diagnostic_frozen(spectrum):
    assert operator_norm_diagnostic(spectrum) == pytest.approx(
        3706.4246396488834, rel=1e-9
    )


def test_propagator_constant_frozen(spectrum):
    c2, rate = measure_propagator_constant(spectrum, seed=11)
    assert c2 == pytest.approx(2.6048199748083665, rel=1e-9)
    assert rate == pytest.approx(-0.9319620783474747, abs=1e-9)
    assert rate <= -0.7


def test_rough_probes_cost_a_larger_constant(spectrum):
    c2, _ = measure_propagator_constant(spectrum, seed=11)
    c_rough, rate_rough = measure_propagator_constant(spectrum, seed=11, smooth=False)
    assert c_rough >= c2
    assert rate_rough <= -0.7


def test_operator_lipschitz_vanishes_at_zero_separation(model):
    ratio = verify_operator_lipschitz(model, model.origin, model.origin, seed=7)
    assert ratio == 0.0


def test_operator_lipschitz_ratio_saturates_toward_zero_separation(model):
    ratios = np.array([
        verify_operator_lipschitz(model, model.origin, model.symmetry_point(d), seed=7)
        for d in (0.4, 0.2, 0.1, 0.05)
    ])
    assert ratios[0] == pytest.approx(0.4690392166, abs=1e-8)
    gaps = np.diff(ratios)
    assert np.all(gaps > 0)
    assert np.all(np.diff(gaps) < 0)
    assert np.max(ratios) <= 2.0 * model.max_profile_slope()
