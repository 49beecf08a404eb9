"""Named input fields for constructions, scans, and pipelines.

A preset is a deterministic recipe for an input direction ``eta`` living in
the stable range of the linearized operator, so the same name always denotes
the identical grid field for a given grid and spectrum.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import GridField, zero_field
from .spectral import SpectralData, project_stable

#: Canonical off-center Gaussian: its asymmetry makes the chart coordinate
#: move, so downstream drift diagnostics see a nontrivial signal.
_BUMP_CENTER = 2.0
_BUMP_WIDTH = 1.0
_BUMP_AMPLITUDE = 0.04

PRESET_NAMES = ("stable-bump", "zero")


def preset_field(name: str, spectrum: SpectralData,
                 amplitude: float | None = None) -> GridField:
    """Build the named preset on the spectrum's grid.

    ``stable-bump`` is an off-center Gaussian projected onto the stable
    range and normalized to strong norm ``amplitude`` (default 0.04);
    ``zero`` is the zero field.
    """
    grid = spectrum.grid
    if name == "zero":
        return zero_field(grid)
    if name == "stable-bump":
        size = _BUMP_AMPLITUDE if amplitude is None else float(amplitude)
        raw = np.exp(-0.5 * ((grid.x - _BUMP_CENTER) / _BUMP_WIDTH) ** 2)
        projected = project_stable(spectrum, GridField(raw, grid))
        scale = size / projected.strong_norm()
        return GridField(scale * projected.values, grid)
    raise ConfigError(
        f"unknown preset {name!r}; available presets: {', '.join(PRESET_NAMES)}"
    )
