"""Modulation system: exact vanishing, formulas, Lipschitz bounds, decomposition."""

import numpy as np
import pytest

from adiaflow.errors import ConvergenceError
from adiaflow.grid import GridField, zero_field
from adiaflow.model import PulseModel
from adiaflow.modulation import (
    coupling_matrix,
    decompose_state,
    drive_term,
    effective_rhs,
    solve_modulation,
)


def _smooth_noise(grid, rng, width=3.0):
    raw = rng.standard_normal(grid.n)
    window = np.exp(-((grid.wavenumbers / width) ** 2))
    return np.fft.irfft(np.fft.rfft(raw) * window, grid.n)


def test_coefficients_vanish_exactly_at_zero_remainder(model, grid):
    for scalar in (-1.5, 0.0, 0.4, 2.0):
        coeffs = solve_modulation(model, model.symmetry_point(scalar), zero_field(grid))
        assert coeffs.a[0] == 0.0
        assert coeffs.residual == 0.0
        assert coeffs.iterations == 0


def test_coupling_and_drive_formulas(model, grid):
    rng = np.random.default_rng(6)
    sm = _smooth_noise(grid, rng)
    w_vals = 0.05 * sm / grid.strong_norm_values(sm)
    w = GridField(w_vals, grid)
    pt = model.symmetry_point(0.8)
    coupling = coupling_matrix(model, pt, w)
    assert coupling.shape == (1, 1)
    expected = grid.inner_values(w_vals, model.family_second(pt).values)
    assert coupling[0, 0] == pytest.approx(expected, rel=1e-13)
    drive = drive_term(model, pt, w)
    tangent = model.family_tangent(pt).values
    assert drive[0] == pytest.approx(grid.inner_values(w_vals**2, tangent), abs=1e-15)


def test_solve_satisfies_the_affine_system(model, grid):
    rng = np.random.default_rng(7)
    sm = _smooth_noise(grid, rng)
    w = GridField(0.08 * sm / grid.strong_norm_values(sm), grid)
    pt = model.symmetry_point(-0.6)
    coeffs = solve_modulation(model, pt, w)
    coupling = coupling_matrix(model, pt, w)[0, 0]
    drive = drive_term(model, pt, w)[0]
    assert (1.0 - coupling) * coeffs.a[0] - drive == pytest.approx(0.0, abs=1e-14)
    assert coeffs.residual <= 1e-14


def test_near_singular_coupling_raises(grid):
    loose = PulseModel(grid, 5.0, 10.0)
    second = loose.family_second(loose.origin)
    scale = 0.95 / grid.inner_values(second.values, second.values)
    with pytest.raises(ConvergenceError):
        solve_modulation(loose, loose.origin, GridField(scale * second.values, grid))


def test_coefficient_is_small_on_the_remainder_ball(model, grid):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        sm = _smooth_noise(grid, rng)
        size = rng.uniform(0.05, 0.4)
        w_vals = size * sm / grid.strong_norm_values(sm)
        coeffs = solve_modulation(model, model.origin, GridField(w_vals, grid))
        worst = max(worst, abs(coeffs.a[0]) / grid.strong_norm_values(w_vals))
    assert worst <= 0.01


def test_nonlinearity_difference_is_lipschitz_on_the_ball(model, grid):
    rng = np.random.default_rng(9)
    delta = 0.05
    worst = 0.0
    for _ in range(20):
        s_a, s_b = rng.uniform(-0.5, 0.5, 2)
        pair = []
        for _ in range(2):
            sm = _smooth_noise(grid, rng)
            size = rng.uniform(0.2, 1.0) * delta
            pair.append(size * sm / grid.strong_norm_values(sm))
        n_a = model.nonlinearity(model.symmetry_point(s_a), GridField(pair[0], grid))
        n_b = model.nonlinearity(model.symmetry_point(s_b), GridField(pair[1], grid))
        gap = grid.weak_norm_values(n_a.values - n_b.values)
        budget = delta * (abs(s_a - s_b) + grid.strong_norm_values(pair[0] - pair[1]))
        worst = max(worst, gap / budget)
    assert worst <= 0.5


def test_effective_rhs_is_the_trivialized_coefficient(model, grid):
    rng = np.random.default_rng(11)
    sm = _smooth_noise(grid, rng)
    w = GridField(0.06 * sm / grid.strong_norm_values(sm), grid)
    pt = model.symmetry_point(0.2)
    coeffs = solve_modulation(model, pt, w)
    velocity = effective_rhs(model, pt, w)
    assert velocity[0] == pytest.approx(coeffs.a[0] * model.xi, rel=1e-12)


def test_decompose_recovers_a_family_point(model, grid):
    state = GridField(model.family(model.symmetry_point(0.3)).values.copy(), grid)
    pt, w = decompose_state(model, state, model.symmetry_point(0.1))
    assert pt.scalar == pytest.approx(0.3, abs=1e-9)
    assert w.weak_norm() <= 1e-9


def test_decompose_output_is_orthogonal_and_exact(model, grid):
    rng = np.random.default_rng(12)
    sm = _smooth_noise(grid, rng)
    state_vals = (
        model.family(model.symmetry_point(0.42)).values
        + 0.03 * sm / grid.strong_norm_values(sm)
    )
    pt, w = decompose_state(model, GridField(state_vals.copy(), grid),
                            model.symmetry_point(0.3))
    tangent = model.family_tangent(pt)
    assert abs(w.inner(tangent)) <= 1e-12
    # Reassembly is exact to one rounding of the subtraction that defined w.
    assert np.max(np.abs(
        state_vals - (model.family(pt).values + w.values)
    )) <= 1e-15
    assert abs(pt.scalar - 0.42) <= 0.05


def test_decompose_of_an_even_perturbation_keeps_the_chart_point(model, grid,
                                                                 spectrum):
    e_s = spectrum.eigenvectors[:, spectrum.stable_indices[0]]
    state = GridField(model.profile.values + 1e-3 * e_s, grid)
    pt, w = decompose_state(model, state, model.origin)
    assert pt.scalar == 0.0
    tangent = model.family_tangent(pt)
    assert abs(w.inner(tangent)) <= 1e-12


def test_decompose_without_budget_raises(model, grid):
    state = GridField(model.family(model.symmetry_point(2.0)).values.copy(), grid)
    with pytest.raises(ConvergenceError):
        decompose_state(model, state, model.origin, max_iter=0)
