"""Staggered-grid leapfrog solver for the conventional Maxwell fields.

E components live on cell edges, B components on cell faces (Yee layout,
array index i holding the value at the half-shifted location).  The discrete
edge->face curl (forward differences) and face->edge curl (backward
differences) are adjoint under the plain lattice inner product, which makes
div B invariant to rounding and gives an exactly conserved source-free
energy 1/2 (eps_r ||E^n||^2 + <B^{n-1/2}, B^{n+1/2}>/mu_r).

Units: wave speed is 1/sqrt(eps_r mu_r), i.e. c = 1 in vacuum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation, TimeStepError
from .grid import PeriodicGrid, ScalarField, VectorField3, _fft, _ifft_real

log = logging.getLogger(__name__)


def _fwd_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(values, -1, axis=axis) - values) / h


def _bwd_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (values - np.roll(values, 1, axis=axis)) / h


def curl_edge_to_face(values: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    hx, hy, hz = grid.spacing
    ex, ey, ez = values
    return np.stack(
        [
            _fwd_diff(ez, 1, hy) - _fwd_diff(ey, 2, hz),
            _fwd_diff(ex, 2, hz) - _fwd_diff(ez, 0, hx),
            _fwd_diff(ey, 0, hx) - _fwd_diff(ex, 1, hy),
        ]
    )


def curl_face_to_edge(values: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    hx, hy, hz = grid.spacing
    bx, by, bz = values
    return np.stack(
        [
            _bwd_diff(bz, 1, hy) - _bwd_diff(by, 2, hz),
            _bwd_diff(bx, 2, hz) - _bwd_diff(bz, 0, hx),
            _bwd_diff(by, 0, hx) - _bwd_diff(bx, 1, hy),
        ]
    )


def div_face(values: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Face-based divergence at cell centers (forward differences)."""
    return sum(_fwd_diff(values[a], a, grid.spacing[a]) for a in range(3))


def div_edge(values: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Edge-based divergence at nodes (backward differences)."""
    return sum(_bwd_diff(values[a], a, grid.spacing[a]) for a in range(3))


@dataclass(frozen=True, eq=False)
class EMFieldPair:
    """E on edges and B on faces with constitutive constants eps_r, mu_r >= 1."""

    E: VectorField3
    B: VectorField3
    eps_r: float
    mu_r: float

    def __post_init__(self):
        if self.E.grid != self.B.grid:
            raise ContractViolation("E and B live on different grids")
        if self.eps_r < 1.0 or self.mu_r < 1.0:
            raise ContractViolation("relative permittivity and permeability must be >= 1")

    @property
    def grid(self) -> PeriodicGrid:
        return self.E.grid

    @classmethod
    def zeros(cls, grid: PeriodicGrid, eps_r: float = 1.0, mu_r: float = 1.0) -> "EMFieldPair":
        return cls(VectorField3.zeros(grid), VectorField3.zeros(grid), eps_r, mu_r)


@dataclass(frozen=True)
class EMMode:
    """A single transverse standing mode added to E at initialization."""

    n: tuple[int, int, int]  # integer mode numbers
    amplitude: float
    polarization: int = 0  # picks one of the two transverse directions


def cfl_limit(grid: PeriodicGrid, eps_r: float, mu_r: float) -> float:
    """Stability bound dt < sqrt(eps_r mu_r) / sqrt(sum 1/h_i^2)."""
    inv = sum(1.0 / h**2 for h in grid.spacing)
    return float(np.sqrt(eps_r * mu_r) / np.sqrt(inv))


def _seven_point_symbol(grid: PeriodicGrid) -> np.ndarray:
    """Positive symbol of -div_edge(grad_fwd .): sum (2 - 2 cos(k h)) / h^2."""
    parts = []
    for axis in range(3):
        k = grid.wavenumbers[axis]
        h = grid.spacing[axis]
        shape = [1, 1, 1]
        shape[axis] = grid.n_cells[axis]
        parts.append(((2.0 - 2.0 * np.cos(k * h)) / h**2).reshape(shape))
    return parts[0] + parts[1] + parts[2]


def _discrete_wavevector(grid: PeriodicGrid, n_mode) -> np.ndarray:
    """Staggered-difference wavevector k~_i = 2 sin(k_i h_i / 2)/h_i for mode n."""
    k = np.array([2.0 * np.pi * n_mode[a] / grid.box_length[a] for a in range(3)])
    h = np.asarray(grid.spacing)
    return 2.0 * np.sin(0.5 * k * h) / h


def init_compatible(
    rho0: ScalarField,
    modes: tuple[EMMode, ...] = (),
    eps_r: float = 1.0,
    mu_r: float = 1.0,
    potential: VectorField3 | None = None,
) -> EMFieldPair:
    """Fields satisfying div(eps_r E0) = rho0 and div B0 = 0 discretely.

    E0 is the lattice-Poisson gradient part plus discretely divergence-free
    transverse modes; B0 is the staggered curl of the given edge potential.
    Any mean of rho0 is unsupported on the periodic box; it is logged and
    removed.
    """
    grid = rho0.grid
    spec = _fft(rho0.values)
    mean = spec.flat[0] / grid.n_nodes
    if abs(mean) > 0.0:
        log.info("removing mean %.3e from initial charge density", abs(mean))
    spec.flat[0] = 0.0
    symbol = _seven_point_symbol(grid)
    symbol_safe = symbol.copy()
    symbol_safe.flat[0] = 1.0
    phi = _ifft_real(spec / (eps_r * symbol_safe))
    evals = np.stack(
        [-_fwd_diff(phi, a, grid.spacing[a]) for a in range(3)]
    )
    for mode in modes:
        ktil = _discrete_wavevector(grid, mode.n)
        kt2 = float(np.dot(ktil, ktil))
        if kt2 == 0.0:
            raise ContractViolation(f"mode {mode.n} has zero wavevector")
        trial = np.zeros(3)
        trial[(np.argmax(np.abs(ktil)) + 1 + mode.polarization) % 3] = 1.0
        pol = trial - np.dot(trial, ktil) / kt2 * ktil
        norm = np.linalg.norm(pol)
        if norm < 1e-12:
            raise ContractViolation(f"cannot build a transverse polarization for mode {mode.n}")
        pol = pol / norm * mode.amplitude
        k = np.array([2.0 * np.pi * mode.n[a] / grid.box_length[a] for a in range(3)])
        for a in range(3):
            offsets = [0.0, 0.0, 0.0]
            offsets[a] = 0.5
            xs = grid.staggered_mesh(offsets)
            phase = k[0] * xs[0] + k[1] * xs[1] + k[2] * xs[2]
            evals[a] += pol[a] * np.cos(phase)
    bvals = (
        curl_edge_to_face(potential.values, grid)
        if potential is not None
        else np.zeros((3, *grid.shape))
    )
    return EMFieldPair(VectorField3(grid, evals), VectorField3(grid, bvals), eps_r, mu_r)


def step_fields(em: EMFieldPair, j_mollified: VectorField3 | None, dt: float) -> EMFieldPair:
    """One leapfrog step: B to the next half level, then E with the current source.

    The stored B is interpreted at t - dt/2.  The source is the mollified
    node-collocated current; it is averaged onto edges here.
    """
    if dt <= 0.0:
        raise ContractViolation("dt must be positive")
    limit = cfl_limit(em.grid, em.eps_r, em.mu_r)
    if dt >= limit:
        raise TimeStepError(f"dt = {dt:.3e} violates the staggered CFL bound {limit:.3e}")
    grid = em.grid
    b_new = em.B.values - dt * curl_edge_to_face(em.E.values, grid)
    e_new = em.E.values + (dt / em.eps_r) * curl_face_to_edge(b_new, grid) / em.mu_r
    if j_mollified is not None:
        if j_mollified.grid != grid:
            raise ContractViolation("current grid mismatch")
        j_edge = np.stack(
            [
                0.5 * (j_mollified.values[a] + np.roll(j_mollified.values[a], -1, axis=a))
                for a in range(3)
            ]
        )
        e_new = e_new - (dt / em.eps_r) * j_edge
    return replace(em, E=VectorField3(grid, e_new), B=VectorField3(grid, b_new))


def avg_E_to_nodes(em: EMFieldPair) -> VectorField3:
    vals = np.stack(
        [0.5 * (em.E.values[a] + np.roll(em.E.values[a], 1, axis=a)) for a in range(3)]
    )
    return VectorField3(em.grid, vals)


def avg_B_to_nodes(em: EMFieldPair) -> VectorField3:
    out = np.empty((3, *em.grid.shape))
    for a in range(3):
        o1, o2 = [ax for ax in range(3) if ax != a]
        v = em.B.values[a]
        out[a] = 0.25 * (
            v + np.roll(v, 1, axis=o1) + np.roll(v, 1, axis=o2)
            + np.roll(np.roll(v, 1, axis=o1), 1, axis=o2)
        )
    return VectorField3(em.grid, out)


def em_energy(em: EMFieldPair) -> float:
    """Plain energy functional 1/2 (eps_r ||E||^2 + ||B||^2 / mu_r)."""
    cv = em.grid.cell_volume
    return float(
        0.5 * (em.eps_r * np.sum(em.E.values**2) + np.sum(em.B.values**2) / em.mu_r) * cv
    )


def em_energy_leapfrog(
    e_values: np.ndarray, b_prev: np.ndarray, b_next: np.ndarray,
    eps_r: float, mu_r: float, grid: PeriodicGrid,
) -> float:
    """The exactly conserved staggered-in-time energy of the source-free scheme."""
    cv = grid.cell_volume
    return float(0.5 * (eps_r * np.sum(e_values**2) + np.sum(b_prev * b_next) / mu_r) * cv)


def gauss_residual(em: EMFieldPair, rho: ScalarField) -> float:
    """l2 norm of div(eps_r E) - (rho - mean rho), edge-based divergence.

    A net charge cannot source a periodic field, so the constraint is stated
    for the background-neutralized density, matching init_compatible.
    """
    res = em.eps_r * div_edge(em.E.values, em.grid) - (rho.values - rho.values.mean())
    return float(np.sqrt(np.sum(res**2) * em.grid.cell_volume))


def div_b_norm(em: EMFieldPair) -> float:
    return float(np.sqrt(np.sum(div_face(em.B.values, em.grid) ** 2) * em.grid.cell_volume))
