"""Modulation: frame coefficients, effective dynamics, state decomposition.

Writing a state near the equilibrium family as u = f(sigma) + w with w
orthogonal to the family tangent turns the flow into a coupled system: the
chart point sigma(t) moves with velocity determined algebraically by w, and
the remainder w evolves under the linearized operator plus the quadratic
remainder.  Differentiating the orthogonality constraint in time gives an
affine equation for the frame coefficients a:

    (I - R) a = d,

where R collects the overlap of w with the second derivative of the family
(plus a frame-curvature term that vanishes in the flat chart) and d is the
overlap of the quadratic remainder with the tangent.  Because the equation
is affine in a, a direct linear solve replaces any fixed-point argument; a
damped Newton iteration is only needed to *find* sigma when decomposing an
arbitrary state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .grid import GridField
from .model import PulseModel, SymmetryPoint


@dataclass
class ModulationCoefficients:
    """Solution of the modulation system at one (sigma, w).

    ``residual`` is the max-norm defect |a - R a - d| of the affine system;
    ``iterations`` is 0 for the direct solve used here.
    """

    a: np.ndarray
    residual: float
    iterations: int


def coupling_matrix(model: PulseModel, sigma: SymmetryPoint,
                    w: GridField) -> np.ndarray:
    """R: overlap of w with the family's second derivative along the frame.

    R_ij = <w, (d^2 f xi_j) xi_i> + <w, (d xi_i) xi_j>; the second term is
    the frame-curvature contribution and is identically zero in the flat
    chart (the code path is kept for curved charts).
    """
    second = model.family_second(sigma)
    curvature = model.frame_derivative(sigma)
    value = w.inner(second) + w.inner(curvature)
    return np.array([[value]])


def drive_term(model: PulseModel, sigma: SymmetryPoint,
               w: GridField) -> np.ndarray:
    """d: minus the overlap of the quadratic remainder with the unit tangent.

    d_i = -<N(sigma, w), df(sigma) xi_i>.  For the pulse model N = -w^2, so
    d = +<w^2, tangent>.
    """
    remainder = model.nonlinearity(sigma, w)
    tangent = model.family_tangent(sigma)
    return np.array([-remainder.inner(tangent)])


def solve_modulation(model: PulseModel, sigma: SymmetryPoint,
                     w: GridField) -> ModulationCoefficients:
    """Solve (I - R) a = d directly.

    Raises
    ------
    ConvergenceError
        If I - R is near-singular, which signals leaving the perturbative
        regime (the coupling matrix is small-norm for admissible w).
    """
    matrix = np.eye(model.dim_sigma) - coupling_matrix(model, sigma, w)
    rhs = drive_term(model, sigma, w)
    if abs(np.linalg.det(matrix)) < 0.1:
        raise ConvergenceError(
            "modulation system near-singular: the state left the "
            "perturbative regime"
        )
    a = np.linalg.solve(matrix, rhs)
    residual = float(np.max(np.abs(matrix @ a - rhs)))
    return ModulationCoefficients(a=a, residual=residual, iterations=0)


def effective_rhs(model: PulseModel, sigma: SymmetryPoint,
                  w: GridField) -> np.ndarray:
    """Chart velocity of the effective dynamics: sigma_dot = h(a, sigma)."""
    coeffs = solve_modulation(model, sigma, w)
    return model.trivialized_velocity(coeffs.a, sigma)


def _constraint(model: PulseModel, u_values: np.ndarray, s: float) -> float:
    """g(s) = <u - f(s), tangent(s)> for scalar chart coordinate s."""
    pt = model.symmetry_point(s)
    fvals = model.family(pt).values
    tvals = model.family_tangent(pt).values
    return float(model.grid.inner_values(u_values - fvals, tvals))


def decompose_state(model: PulseModel, u: GridField,
                    sigma_guess: SymmetryPoint, tol: float = 1e-12,
                    max_iter: int = 50) -> tuple[SymmetryPoint, GridField]:
    """Split u into f(sigma) + w with w orthogonal to the family tangent.

    Finds the chart point by a damped Newton iteration on the scalar
    constraint g(sigma) = <u - f(sigma), tangent(sigma)>; the derivative is
    g'(sigma) = (R(sigma, w) - 1) / xi with w the current remainder.  Steps
    that increase |g| are halved.

    Raises
    ------
    ConvergenceError
        After max_iter iterations without reaching tol, which signals that u
        left the tubular neighborhood of the family.
    """
    grid = model.grid
    s = sigma_guess.scalar
    g = _constraint(model, u.values, s)
    for _ in range(max_iter):
        if abs(g) <= tol:
            break
        pt = model.symmetry_point(s)
        w_vals = u.values - model.family(pt).values
        overlap = grid.inner_values(w_vals, model.family_second(pt).values)
        slope = (overlap - 1.0) / model.xi
        if slope == 0.0:
            raise ConvergenceError("degenerate constraint slope in decomposition")
        step = -g / slope
        # damping: halve the step while the residual grows
        for _ in range(40):
            g_new = _constraint(model, u.values, s + step)
            if abs(g_new) < abs(g):
                break
            step *= 0.5
        else:
            raise ConvergenceError(
                "damped Newton stalled while decomposing the state"
            )
        s += step
        g = g_new
    else:
        raise ConvergenceError(
            f"state decomposition did not reach |g| <= {tol:.1e} in "
            f"{max_iter} iterations (last residual {abs(g):.3e}); the state "
            "may have left the tubular neighborhood"
        )
    sigma = model.symmetry_point(s)
    w = GridField(u.values - model.family(sigma).values, grid)
    return sigma, w
