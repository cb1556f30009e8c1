"""Emergent electromagnetic fields derived from the magnetization.

The space-time vorticity of a unit field m pulls back the area form of the
sphere; its spatial part is the emergent magnetic field and its mixed part
the emergent electric field:

    b_i = 1/2 eps_ijk  m . (d_j m x d_k m),      e_i = m . (d_i m x dt m).

Both are gauge-free and satisfy div b = 0 and dt b + curl e = 0 identically
for smooth evolutions.  Spatial derivatives are spectral; dt m is the
discrete two-level difference, with m evaluated at the renormalized midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError, ContractViolation
from .grid import VectorField3, _fft, _ifft_real
from .magnetization import MagnetizationField, _check_norm


def _partials(grid, values: np.ndarray) -> list[np.ndarray]:
    """All three spectral partial derivatives of a (3, ...) field."""
    spec = _fft(values)
    return [_ifft_real(grid._ik[axis] * spec) for axis in range(3)]


def compute_b(mf: MagnetizationField) -> VectorField3:
    """Emergent magnetic field, node-collocated."""
    _check_norm(mf)
    g = mf.grid
    dm = _partials(g, mf.m)
    out = np.empty((3, *g.shape))
    for i, (j, k) in enumerate(((1, 2), (2, 0), (0, 1))):
        out[i] = np.sum(mf.m * np.cross(dm[j], dm[k], axis=0), axis=0)
    return VectorField3(g, out)


def compute_e(mf_prev: MagnetizationField, mf_next: MagnetizationField, dt: float) -> VectorField3:
    """Emergent electric field at the midpoint time between two magnetization states."""
    if mf_prev.grid != mf_next.grid:
        raise ContractViolation("magnetization states live on different grids")
    if dt <= 0.0:
        raise ContractViolation("dt must be positive")
    g = mf_prev.grid
    total = mf_prev.m + mf_next.m
    norms = np.sqrt(np.sum(total**2, axis=0))
    low = float(norms.min())
    if low < 0.5:
        raise BlowUpError(
            f"antipodal magnetization motion (|m_prev + m_next| = {low:.3e} < 0.5);"
            " the time step is too large for the field motion"
        )
    m_mid = total / norms
    dm_dt = (mf_next.m - mf_prev.m) / dt
    dm = _partials(g, m_mid)
    out = np.empty((3, *g.shape))
    for i in range(3):
        out[i] = np.sum(m_mid * np.cross(dm[i], dm_dt, axis=0), axis=0)
    return VectorField3(g, out)


@dataclass(frozen=True, eq=False)
class EmergentFieldPair:
    """e at half-step times and b at node points, recomputed from m each step."""

    e: VectorField3
    b: VectorField3

    @classmethod
    def at_rest(cls, mf: MagnetizationField) -> "EmergentFieldPair":
        return cls(VectorField3.zeros(mf.grid), compute_b(mf))
