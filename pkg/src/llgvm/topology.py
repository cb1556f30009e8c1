"""Topological diagnostics: lattice degree, vector potential, helicity, Hopf index.

The per-slice skyrmion number is the lattice Brouwer degree computed from
signed spherical-triangle areas (two triangles per plaquette), which returns
integers up to rounding and reports degenerate plaquettes explicitly.  The
vector potential inverts the curl in the Coulomb gauge,
a_hat(k) = i k x b_hat(k) / |k|^2, after removing the k = 0 mode of b; the
helicity integral <a, b> divided by (4 pi)^2 is the Hopf invariant of a
localized texture.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegenerateSliceError
from .grid import VectorField3, _fft, _ifft_real, curl, div, l2_inner, l2_norm
from .magnetization import MagnetizationField, _check_norm
from .emergent import compute_b

log = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi


def _signed_triangle_areas(n1, n2, n3):
    """Signed spherical areas of triangles given by unit vectors (..., 3).

    Uses the half-angle form: Omega = 2 * atan2(n1.(n2 x n3),
    1 + n1.n2 + n2.n3 + n3.n1).  Returns (areas, degenerate_mask).
    """
    s12 = np.sum(n1 * n2, axis=-1)
    s23 = np.sum(n2 * n3, axis=-1)
    s31 = np.sum(n3 * n1, axis=-1)
    chi = np.sum(n1 * np.cross(n2, n3), axis=-1)
    re = 1.0 + s12 + s23 + s31
    degenerate = (np.hypot(re, chi) < 1e-9) | ((re < 0.0) & (np.abs(chi) < 1e-12))
    return 2.0 * np.arctan2(chi, re), degenerate


def skyrmion_number(mf: MagnetizationField, z_index: int) -> float:
    """Lattice degree of the z-slice map into the sphere.

    The value is a sum of plaquette solid angles divided by 4 pi; for a
    non-degenerate slice it is an integer up to rounding.
    """
    _check_norm(mf)
    nz = mf.grid.n_cells[2]
    if not -nz <= z_index < nz:
        raise ContractViolation(f"z index {z_index} out of range for {nz} slices")
    m = np.moveaxis(mf.m[:, :, :, z_index], 0, -1)  # (Nx, Ny, 3)
    n1 = m
    n2 = np.roll(m, -1, axis=0)
    n3 = np.roll(np.roll(m, -1, axis=0), -1, axis=1)
    n4 = np.roll(m, -1, axis=1)
    omega_a, bad_a = _signed_triangle_areas(n1, n2, n3)
    omega_b, bad_b = _signed_triangle_areas(n1, n3, n4)
    bad = bad_a | bad_b
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise DegenerateSliceError(
            f"degenerate plaquette at (i={i}, j={j}, z={z_index}): solid angle undefined"
        )
    return float((omega_a.sum() + omega_b.sum()) / FOUR_PI)


def vector_potential(b: VectorField3) -> VectorField3:
    """Coulomb-gauge potential with curl a = b minus its k = 0 mode."""
    g = b.grid
    norm_b = l2_norm(b)
    if norm_b == 0.0:
        return VectorField3.zeros(g)
    rel_div = l2_norm(div(b)) / norm_b
    if rel_div > 1e-6:
        raise ContractViolation(
            f"input is not solenoidal (relative spectral divergence {rel_div:.3e} > 1e-6)"
        )
    spec = _fft(b.values)
    mean_mag = float(np.sqrt(np.sum(np.abs(spec[:, 0, 0, 0]) ** 2)) / g.n_nodes)
    if mean_mag > 0.0:
        log.debug("removing k=0 mode of b with magnitude %.3e before curl inversion", mean_mag)
    spec[:, 0, 0, 0] = 0.0
    ik = g._ik
    k2 = g.k_squared.copy()
    k2[0, 0, 0] = 1.0
    ax = (ik[1] * spec[2] - ik[2] * spec[1]) / k2
    ay = (ik[2] * spec[0] - ik[0] * spec[2]) / k2
    az = (ik[0] * spec[1] - ik[1] * spec[0]) / k2
    return VectorField3(g, np.stack([_ifft_real(ax), _ifft_real(ay), _ifft_real(az)]))


def _check_localized(mf: MagnetizationField, tol: float = 1e-6):
    """The texture must equal e3 on the periodic seam planes."""
    dev = 0.0
    target = np.array([0.0, 0.0, 1.0]).reshape(3, 1, 1)
    for axis in range(3):
        face = np.take(mf.m, 0, axis=1 + axis)
        dev = max(dev, float(np.abs(face - target).max()))
    if dev > tol:
        raise ContractViolation(
            f"texture is not localized: |m - e3| = {dev:.3e} on the box faces (> {tol})"
        )


def helicity(mf: MagnetizationField) -> float:
    """Emergent magnetic helicity <a, b> with b = curl a in the Coulomb gauge."""
    b = compute_b(mf)
    a = vector_potential(b)
    return l2_inner(a, b)


def hopf_invariant(mf: MagnetizationField) -> float:
    """Helicity divided by (4 pi)^2; integer-valued for smooth localized textures."""
    _check_localized(mf)
    return helicity(mf) / FOUR_PI**2


@dataclass(frozen=True)
class TopologyReport:
    skyrmion_number_per_slice: tuple[tuple[int, float], ...]
    helicity: float
    hopf_invariant: float
    gauge_residual: float  # l2 norm of div a

    def lines(self) -> list[str]:
        out = [
            f"helicity = {self.helicity!r}",
            f"hopf_invariant = {self.hopf_invariant!r}",
            f"gauge_residual = {self.gauge_residual!r}",
        ]
        for z, q in self.skyrmion_number_per_slice:
            out.append(f"skyrmion_number[z={z}] = {q!r}")
        return out


def topology_report(mf: MagnetizationField) -> TopologyReport:
    """Full diagnostic bundle; degenerate slices are reported as NaN."""
    slices = []
    for z in range(mf.grid.n_cells[2]):
        try:
            slices.append((z, skyrmion_number(mf, z)))
        except DegenerateSliceError:
            slices.append((z, float("nan")))
    b = compute_b(mf)
    a = vector_potential(b)
    hel = l2_inner(a, b)
    return TopologyReport(
        skyrmion_number_per_slice=tuple(slices),
        helicity=hel,
        hopf_invariant=hel / FOUR_PI**2,
        gauge_residual=l2_norm(div(a)),
    )
