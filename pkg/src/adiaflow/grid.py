"""Uniform periodic grid, spectral derivative operators, and grid fields.

The computational domain is [-L, L) sampled at n equispaced points.  All
derivatives are Fourier-spectral: the first- and second-derivative operators
are diagonal in the discrete Fourier basis, and their dense matrix
representations are circulants assembled so that D2 is exactly symmetric and
D exactly antisymmetric entrywise.  Spectral differentiation keeps the
stationarity and zero-mode residuals of smooth profiles at the level required
by the acceptance tolerances, which low-order finite differences cannot reach
at n = 1024.

Norm conventions: ``weak_norm`` is the discrete L2 norm sqrt(h * sum v^2)
(the ambient-space norm), ``strong_norm`` is the discrete H1 norm
sqrt(weak^2 + weak(Dv)^2) (the stronger norm on the smoother subspace).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class PeriodicGrid:
    """Equispaced periodic grid on [-half_length, half_length).

    Parameters
    ----------
    n : int
        Number of samples; must be even and at least 16.
    half_length : float
        Half-width of the periodic domain.
    """

    def __init__(self, n: int = 1024, half_length: float = 20.0):
        if n < 16 or n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 16, got {n}")
        if half_length <= 0:
            raise ValueError("half_length must be positive")
        self.n = int(n)
        self.half_length = float(half_length)
        self.spacing = 2.0 * self.half_length / self.n
        self.x = -self.half_length + self.spacing * np.arange(self.n)
        # rfft wavenumbers; the last entry is the Nyquist mode.
        self.wavenumbers = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.spacing)
        self._dense_cache: dict[str, np.ndarray] = {}

    # -- identity -----------------------------------------------------------
    def __eq__(self, other):
        return (
            isinstance(other, PeriodicGrid)
            and other.n == self.n
            and other.half_length == self.half_length
        )

    def __hash__(self):
        return hash((self.n, self.half_length))

    def __repr__(self):
        return f"PeriodicGrid(n={self.n}, half_length={self.half_length})"

    # -- spectral operators on raw arrays ------------------------------------
    def first_derivative_values(self, values: np.ndarray) -> np.ndarray:
        """Spectral first derivative; Nyquist mode is zeroed (odd operator)."""
        vhat = np.fft.rfft(values, axis=-1)
        vhat *= 1j * self.wavenumbers
        vhat[..., -1] = 0.0
        return np.fft.irfft(vhat, self.n, axis=-1)

    def second_derivative_values(self, values: np.ndarray) -> np.ndarray:
        """Spectral second derivative."""
        vhat = np.fft.rfft(values, axis=-1)
        vhat *= -self.wavenumbers**2
        return np.fft.irfft(vhat, self.n, axis=-1)

    def shift_values(self, values: np.ndarray, s) -> np.ndarray:
        """Translate by s via Fourier phases, exact for band-limited fields.

        ``s`` may be a scalar (values is one field) or an array of shifts
        (one output row per shift of a single input field).  The Nyquist mode
        is multiplied by cos(k_nyq * s) so the output stays real.  A zero
        scalar shift is the exact identity, not an FFT round-trip.
        """
        s_arr = np.asarray(s, dtype=float)
        if s_arr.ndim == 0 and s_arr == 0.0:
            return np.array(values, dtype=float, copy=True)
        vhat = np.fft.rfft(values, axis=-1)
        if s_arr.ndim == 0:
            phase = np.exp(-1j * self.wavenumbers * s_arr)
            phase[-1] = np.cos(self.wavenumbers[-1] * s_arr)
            return np.fft.irfft(vhat * phase, self.n, axis=-1)
        phase = np.exp(-1j * self.wavenumbers[None, :] * s_arr[:, None])
        phase[:, -1] = np.cos(self.wavenumbers[-1] * s_arr)
        return np.fft.irfft(vhat[None, :] * phase, self.n, axis=-1)

    # -- norms on raw arrays --------------------------------------------------
    def inner_values(self, u: np.ndarray, v: np.ndarray):
        """Weak (discrete L2) inner product h * sum(u v) along the last axis."""
        return self.spacing * np.sum(u * v, axis=-1)

    def weak_norm_values(self, values: np.ndarray):
        return np.sqrt(self.spacing * np.sum(values**2, axis=-1))

    def strong_norm_values(self, values: np.ndarray):
        dv = self.first_derivative_values(values)
        return np.sqrt(
            self.spacing * (np.sum(values**2, axis=-1) + np.sum(dv**2, axis=-1))
        )

    # -- dense operators ------------------------------------------------------
    def dense_second_derivative(self) -> np.ndarray:
        """Dense spectral second-derivative matrix, symmetric entrywise.

        The circulant column is symmetrized explicitly so that round-off in
        the inverse FFT cannot break entrywise symmetry of the assembled
        operator (orthogonal eigenvectors require an exactly symmetric
        matrix).
        """
        if "d2" not in self._dense_cache:
            e0 = np.zeros(self.n)
            e0[0] = 1.0
            col = self.second_derivative_values(e0)
            col = 0.5 * (col + col[(self.n - np.arange(self.n)) % self.n])
            self._dense_cache["d2"] = scipy.linalg.circulant(col)
        return self._dense_cache["d2"]


@dataclass
class GridField:
    """A real scalar field sampled on a periodic grid.

    ``values`` plays the state u; the weak norm is the ambient-space norm and
    the strong norm the smoother-subspace norm (see module docstring).
    """

    values: np.ndarray
    grid: PeriodicGrid = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite samples")

    # -- descriptive properties ----------------------------------------------
    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def domain_half_length(self) -> float:
        return self.grid.half_length

    @property
    def grid_spacing(self) -> float:
        return self.grid.spacing

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    # -- norms and calculus ----------------------------------------------------
    def weak_norm(self) -> float:
        return float(self.grid.weak_norm_values(self.values))

    def strong_norm(self) -> float:
        return float(self.grid.strong_norm_values(self.values))

    def inner(self, other: "GridField | np.ndarray") -> float:
        other_values = other.values if isinstance(other, GridField) else other
        return float(self.grid.inner_values(self.values, other_values))

    def derivative(self) -> "GridField":
        return GridField(self.grid.first_derivative_values(self.values), self.grid)

    def shift(self, s: float) -> "GridField":
        """Translate the field by s (periodic, spectral accuracy)."""
        return GridField(self.grid.shift_values(self.values, float(s)), self.grid)

    def copy(self) -> "GridField":
        return GridField(self.values.copy(), self.grid)


def zero_field(grid: PeriodicGrid) -> GridField:
    return GridField(np.zeros(grid.n), grid)
