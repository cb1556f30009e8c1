"""One full coupled time step and the energy ledger.

Step ordering: gather the mollified total fields (conventional plus
emergent) at the particles, push, deposit, mollify the current, advance the
magnetization with that same smoothed current, recompute the emergent pair,
advance the Maxwell fields with the same smoothed current, then update the
ledger.  Using one smoothed current for both consumers preserves the
cross-term cancellation of the continuous energy balance; the audit
quantifies what time centering leaves behind.

The emergent electric field entering the particle force lags one step (the
last computed half-step value), which keeps the update explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .emergent import EmergentFieldPair, compute_b, compute_e
from .errors import LLGVMError
from .grid import VectorField3, l2_inner, l2_norm
from .kinetic import ParticleEnsemble, deposit, lorentz_push
from .magnetization import LLCoefficients, MagnetizationField, energy, step
from .maxwell import EMFieldPair, avg_E_to_nodes, avg_B_to_nodes, em_energy, step_fields
from .smoothing import Mollifier, mollify


@dataclass(frozen=True)
class EnergyLedger:
    """Per-step energy record used to assert the dissipation law."""

    kinetic: float
    em_energy: float
    micromagnetic: float
    dissipation_cum: float
    coupling_residual: float

    @property
    def total(self) -> float:
        return self.kinetic + self.em_energy + self.micromagnetic

    def validate(self):
        vals = (self.kinetic, self.em_energy, self.micromagnetic, self.dissipation_cum)
        if not all(np.isfinite(v) for v in vals):
            raise LLGVMError("ledger contains non-finite entries")
        if self.kinetic < 0.0 or self.em_energy < 0.0:
            raise LLGVMError("kinetic and electromagnetic energies must be non-negative")


def kinetic_energy(p: ParticleEnsemble) -> float:
    return float(0.5 * np.sum(p.weights * np.sum(p.velocities**2, axis=1)))


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    step_index: int
    mf: MagnetizationField
    particles: ParticleEnsemble
    em: EMFieldPair
    emergent: EmergentFieldPair
    mollifier: Mollifier
    ll_coeffs: LLCoefficients
    ledger: EnergyLedger


def make_initial_state(
    mf: MagnetizationField,
    particles: ParticleEnsemble,
    em: EMFieldPair,
    mollifier: Mollifier,
    ll_coeffs: LLCoefficients | None = None,
) -> SimState:
    ledger = EnergyLedger(
        kinetic=kinetic_energy(particles),
        em_energy=em_energy(em),
        micromagnetic=energy(mf),
        dissipation_cum=0.0,
        coupling_residual=0.0,
    )
    ledger.validate()
    return SimState(
        t=0.0,
        step_index=0,
        mf=mf,
        particles=particles,
        em=em,
        emergent=EmergentFieldPair.at_rest(mf),
        mollifier=mollifier,
        ll_coeffs=ll_coeffs if ll_coeffs is not None else LLCoefficients.from_alpha(mf.alpha),
        ledger=ledger,
    )


def _phase(state: SimState, name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except LLGVMError as err:
        raise type(err)(f"step {state.step_index + 1} [{name}]: {err}") from err


def total_force_fields(state: SimState) -> tuple[VectorField3, VectorField3]:
    """Mollified node-collocated totals K_eps(E + e) and K_eps(B + b)."""
    grid = state.mf.grid
    e_node = avg_E_to_nodes(state.em).values + state.emergent.e.values
    b_node = avg_B_to_nodes(state.em).values + state.emergent.b.values
    mol = state.mollifier
    return (
        VectorField3(grid, mol.apply_values(e_node)),
        VectorField3(grid, mol.apply_values(b_node)),
    )


def advance(state: SimState, dt: float) -> SimState:
    """Advance the coupled system by one step of size dt."""
    grid = state.mf.grid

    e_tot, b_tot = _phase(state, "gather", total_force_fields, state)
    particles = _phase(state, "push", lorentz_push, state.particles, e_tot, b_tot, dt)
    _, j = _phase(state, "deposit", deposit, particles, grid)
    j_s = _phase(state, "mollify", mollify, j, state.mollifier)
    mf_new = _phase(state, "llg", step, state.mf, j_s, dt, state.ll_coeffs)
    e_half = _phase(state, "emergent", compute_e, state.mf, mf_new, dt)
    b_new = _phase(state, "emergent", compute_b, mf_new)
    em_new = _phase(state, "maxwell", step_fields, state.em, j_s, dt)

    dm_rate_sq = float(np.sum((mf_new.m - state.mf.m) ** 2)) * grid.cell_volume / dt**2
    next_state = SimState(
        t=state.t + dt,
        step_index=state.step_index + 1,
        mf=mf_new,
        particles=particles,
        em=em_new,
        emergent=EmergentFieldPair(e_half, b_new),
        mollifier=state.mollifier,
        ll_coeffs=state.ll_coeffs,
        ledger=state.ledger,  # finalized after the audit below
    )
    residual = _phase(state, "ledger", energy_audit, state, next_state, dt, _current=(j, j_s))
    ledger = EnergyLedger(
        kinetic=kinetic_energy(particles),
        em_energy=em_energy(em_new),
        micromagnetic=_phase(state, "ledger", energy, mf_new),
        dissipation_cum=state.ledger.dissipation_cum + state.mf.alpha * dt * dm_rate_sq,
        coupling_residual=residual,
    )
    ledger.validate()
    return replace(next_state, ledger=ledger)


def energy_audit(state_prev: SimState, state_next: SimState, dt: float, _current=None) -> float:
    """Magnitude of the summed discrete coupling pairings.

    The three pairings are the kinetic gain <j, K(e) + K(E)> (fields as
    gathered: previous E, lagged e), the Maxwell loss -<K j, (E^n + E^{n+1})/2>
    and the magnetization loss -<K j, e^{n+1/2}>.  Smoothing is self-adjoint
    to rounding, so the sum isolates the time-centering error, which is
    first order in dt.

    _current lets advance() reuse its deposited (j, K j) pair; recomputing
    from state_next gives the identical result.
    """
    grid = state_next.mf.grid
    mol = state_prev.mollifier
    if _current is not None:
        j, j_s = _current
    else:
        _, j = deposit(state_next.particles, grid)
        j_s = mollify(j, mol)
    if l2_norm(j) == 0.0:
        return 0.0
    e_lag = state_prev.emergent.e
    e_new = state_next.emergent.e
    e_prev_node = avg_E_to_nodes(state_prev.em)
    e_next_node = avg_E_to_nodes(state_next.em)
    e_mid = VectorField3(grid, 0.5 * (e_prev_node.values + e_next_node.values))
    p_vlasov = l2_inner(j, mollify(e_lag, mol)) + l2_inner(j, mollify(e_prev_node, mol))
    p_maxwell = -l2_inner(j_s, e_mid)
    p_llg = -l2_inner(j_s, e_new)
    return float(abs(p_vlasov + p_maxwell + p_llg))
