"""Staggered-grid Maxwell solver: constraints, conservation, dispersion."""

import numpy as np
import pytest

from llgvm import (
    EMFieldPair,
    EMMode,
    PeriodicGrid,
    ScalarField,
    VectorField3,
    cfl_limit,
    gauss_residual,
    init_compatible,
    step_fields,
)
from llgvm.errors import ContractViolation, TimeStepError
from llgvm.maxwell import (
    avg_B_to_nodes,
    avg_E_to_nodes,
    div_b_norm,
    div_edge,
    em_energy,
    em_energy_leapfrog,
)

from conftest import BOX, band_limited_vector

EPS_KEYS = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0)]


class TestInitCompatible:
    def test_zero_charge_gives_zero_fields(self, grid16):
        em = init_compatible(ScalarField.zeros(grid16))
        assert np.abs(em.E.values).max() == 0.0
        assert np.abs(em.B.values).max() == 0.0

    @pytest.mark.parametrize("eps_r", [1.0, 2.0])
    def test_single_mode_poisson(self, grid32, eps_r):
        x = grid32.node_mesh[0]
        k = 2.0 * np.pi * 2 / BOX
        rho = ScalarField(grid32, 0.8 * np.cos(k * x))
        em = init_compatible(rho, eps_r=eps_r)
        res = eps_r * div_edge(em.E.values, grid32) - rho.values
        assert np.sqrt(np.sum(res**2) * grid32.cell_volume) < 1e-10

    def test_gauss_residual_for_random_charge(self, grid16):
        rho_vals = band_limited_vector(grid16, 60).values[0]
        rho = ScalarField(grid16, rho_vals - rho_vals.mean())
        em = init_compatible(rho, eps_r=1.5)
        assert gauss_residual(em, rho) < 1e-10

    def test_solenoidal_b_from_potential(self, grid16):
        pot = band_limited_vector(grid16, 61)
        em = init_compatible(ScalarField.zeros(grid16), potential=pot)
        assert div_b_norm(em) < 1e-12 * np.abs(em.B.values).max()

    def test_transverse_modes_are_divergence_free(self, grid16):
        em = init_compatible(
            ScalarField.zeros(grid16),
            modes=(EMMode((1, 2, 0), 0.5), EMMode((0, 1, 1), 0.25, polarization=1)),
        )
        res = div_edge(em.E.values, grid16)
        assert np.abs(res).max() < 1e-12

    def test_constitutive_constants_validated(self, grid16):
        with pytest.raises(ContractViolation):
            EMFieldPair.zeros(grid16, eps_r=0.5)


class TestStepFields:
    def test_zero_state_stays_zero(self, grid16):
        em = EMFieldPair.zeros(grid16)
        em = step_fields(em, None, 0.5 * cfl_limit(grid16, 1.0, 1.0))
        assert np.abs(em.E.values).max() == 0.0
        assert np.abs(em.B.values).max() == 0.0

    def test_uniform_current_drives_linear_e(self, grid16):
        # with B = 0 and spatially uniform j the curl terms vanish identically
        eps_r = 2.0
        em = EMFieldPair.zeros(grid16, eps_r=eps_r)
        j = VectorField3.constant(grid16, (0.3, 0.0, -0.1))
        dt = 0.1 * cfl_limit(grid16, eps_r, 1.0)
        for _ in range(25):
            em = step_fields(em, j, dt)
        expected = -np.array([0.3, 0.0, -0.1]) * 25 * dt / eps_r
        for c in range(3):
            assert np.abs(em.E.values[c] - expected[c]).max() < 1e-13

    def test_div_b_invariant(self, grid16):
        rng = np.random.default_rng(3)
        pot = band_limited_vector(grid16, 62)
        em = init_compatible(ScalarField.zeros(grid16), potential=pot)
        em = EMFieldPair(
            band_limited_vector(grid16, 63), em.B, 1.0, 1.0
        )  # arbitrary E, solenoidal B
        dt = 0.4 * cfl_limit(grid16, 1.0, 1.0)
        scale = np.abs(em.B.values).max()
        for _ in range(50):
            em = step_fields(em, None, dt)
        assert div_b_norm(em) < 1e-12 * max(scale, np.abs(em.B.values).max())

    @pytest.mark.parametrize("eps_r,mu_r", EPS_KEYS)
    def test_source_free_energy_conservation(self, grid16, eps_r, mu_r):
        # the staggered-in-time functional is conserved to 1e-10 over 1000 steps
        em = EMFieldPair(
            band_limited_vector(grid16, 64),
            VectorField3.zeros(grid16),
            eps_r,
            mu_r,
        )
        dt = 0.3 * cfl_limit(grid16, eps_r, mu_r)
        reference = None
        worst = 0.0
        for _ in range(1000):
            e_mid = em.E.values
            b_prev = em.B.values
            em = step_fields(em, None, dt)
            # E^n sits between the two half-level B fields in the functional
            u = em_energy_leapfrog(e_mid, b_prev, em.B.values, eps_r, mu_r, grid16)
            if reference is None:
                reference = u
            worst = max(worst, abs(u - reference))
        assert worst < 1e-10 * reference

    @pytest.mark.parametrize("eps_r,mu_r", EPS_KEYS)
    def test_plane_wave_dispersion(self, eps_r, mu_r):
        # measured phase speed within the second-order bound (k h)^2 / 24
        grid = PeriodicGrid.cubic(64, BOX)
        n_mode = 4
        k = 2.0 * np.pi * n_mode / BOX
        c = 1.0 / np.sqrt(eps_r * mu_r)
        dt = 0.2 * cfl_limit(grid, eps_r, mu_r)
        xe = grid.staggered_mesh((0.0, 0.5, 0.0))[0]
        xb = grid.staggered_mesh((0.5, 0.5, 0.0))[0]
        evals = np.zeros((3, *grid.shape))
        bvals = np.zeros((3, *grid.shape))
        evals[1] = np.cos(k * xe)
        bvals[2] = np.sqrt(eps_r * mu_r) * np.cos(k * xb + c * k * dt / 2)
        em = EMFieldPair(VectorField3(grid, evals), VectorField3(grid, bvals), eps_r, mu_r)
        phases = []
        for _ in range(240):
            em = step_fields(em, None, dt)
            phases.append(np.angle(np.fft.fft(em.E.values[1][:, 0, 0])[n_mode]))
        times = dt * (1.0 + np.arange(len(phases)))
        omega = abs(np.polyfit(times, np.unwrap(phases), 1)[0])
        speed_error = abs(1.0 - (omega / k) / c)
        bound = (k * grid.spacing[0]) ** 2 / 24.0
        assert speed_error <= 1.05 * bound

    def test_cfl_refusal(self, grid16):
        em = EMFieldPair.zeros(grid16)
        with pytest.raises(TimeStepError):
            step_fields(em, None, 1.01 * cfl_limit(grid16, 1.0, 1.0))


class TestAveraging:
    def test_edge_average_of_linear_mode(self, grid16):
        # node average of Ex recovers cos(k x) * cos(k h / 2)
        k = 2.0 * np.pi / BOX
        xe = grid16.staggered_mesh((0.5, 0.0, 0.0))[0]
        vals = np.zeros((3, *grid16.shape))
        vals[0] = np.cos(k * xe)
        em = EMFieldPair(VectorField3(grid16, vals), VectorField3.zeros(grid16), 1.0, 1.0)
        nodes = avg_E_to_nodes(em)
        x = grid16.node_mesh[0]
        expected = np.cos(k * x) * np.cos(k * grid16.spacing[0] / 2.0)
        assert np.abs(nodes.values[0] - expected).max() < 1e-13

    def test_face_average_constant(self, grid16):
        vals = np.zeros((3, *grid16.shape))
        vals[1] = 4.0
        em = EMFieldPair(VectorField3.zeros(grid16), VectorField3(grid16, vals), 1.0, 1.0)
        nodes = avg_B_to_nodes(em)
        assert np.abs(nodes.values[1] - 4.0).max() < 1e-14

    def test_plain_energy_functional(self, grid16):
        em = EMFieldPair(
            VectorField3.constant(grid16, (2.0, 0.0, 0.0)),
            VectorField3.constant(grid16, (0.0, 3.0, 0.0)),
            2.0,
            1.5,
        )
        expected = 0.5 * (2.0 * 4.0 + 9.0 / 1.5) * BOX**3
        assert em_energy(em) == pytest.approx(expected, rel=1e-13)
