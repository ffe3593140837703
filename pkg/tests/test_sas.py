import math

import numpy as np
import pytest

from phasecart.basis import enumerate_basis
from phasecart.coherent import CoherentParams, coherent_energy, coherent_state, \
    minimize_coherent
from phasecart.operators import build_hamiltonian, parity_projector
from phasecart.sas import (
    DegenerateProjectionError,
    SasParams,
    coherent_overlap,
    minimize_sas,
    sas_energy,
    sas_energy_2level,
    sas_overlap,
    sas_state,
)
from phasecart.solver import StateVector, expectation
from phasecart.config import two_level

from test_config import xi_config


def _base(cfg, q=0.6):
    return CoherentParams(q=(q,) * cfg.n_modes, p=(0.0,) * cfg.n_modes,
                          weights=tuple([1.0] + [0.5] * (cfg.n_levels - 1)))


def test_sas_state_is_projected_coherent_state():
    """sas_state must equal the parity projector applied to the coherent
    state (renormalised), for every sector with nonzero weight."""
    cfg = xi_config(mu12=0.4, mu23=0.6, N=2, cutoffs=(14, 14))
    basis = enumerate_basis(cfg)
    base = _base(cfg)
    psi_c = coherent_state(base, cfg, basis)
    for parity in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        P = parity_projector(cfg, basis, parity).matrix
        proj = P @ psi_c.amps
        proj = proj / np.linalg.norm(proj)
        psi_s = sas_state(SasParams(base, parity), cfg, basis)
        assert abs(np.vdot(proj, psi_s.amps)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_closed_form_sas_energy_matches_explicit_state():
    cfg = xi_config(mu12=0.4, mu23=0.6, N=2, cutoffs=(18, 18))
    basis = enumerate_basis(cfg)
    H = build_hamiltonian(cfg, basis)
    base = _base(cfg)
    for parity in ((1, 1), (-1, -1)):
        params = SasParams(base, parity)
        psi = sas_state(params, cfg, basis)
        assert sas_energy(params, cfg) == pytest.approx(
            expectation(psi, H), abs=1e-7)


def test_two_level_closed_form_matches_generic_projection():
    cfg = two_level(1.0, 0.7, 5, cutoff=20)
    for th, q, sigma in ((0.9, 0.8, 1), (1.4, -0.5, -1), (0.3, 0.0, 1)):
        bloch = CoherentParams(q=(q,), theta=th, phi=0.0)
        e_closed = sas_energy_2level(SasParams(bloch, (sigma,)), cfg)
        e_generic = sas_energy(SasParams(bloch, (sigma,)), cfg)
        assert e_closed == pytest.approx(e_generic, abs=1e-10)


def test_projection_never_raises_the_minimum_sector_energy():
    """<H> in the coherent state is a parity-sector average, so the lowest
    sector energy lies at or below the unprojected energy."""
    cfg = xi_config(mu12=0.8, mu23=0.9, N=3)
    base = _base(cfg, q=0.9)
    e_coh = coherent_energy(base, cfg)
    sector_es = []
    for parity in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        try:
            sector_es.append(sas_energy(SasParams(base, parity), cfg))
        except DegenerateProjectionError:
            pass
    assert min(sector_es) <= e_coh + 1e-10


def test_coherent_overlap_matches_explicit_states():
    cfg = two_level(1.0, 0.4, 4, cutoff=26)
    basis = enumerate_basis(cfg)
    p1 = CoherentParams(q=(0.9,), p=(0.2,), weights=(1.0, 0.3 + 0.1j))
    p2 = CoherentParams(q=(-0.4,), p=(0.5,), weights=(1.0, 0.8))
    s1 = coherent_state(p1, cfg, basis)
    s2 = coherent_state(p2, cfg, basis)
    assert coherent_overlap(p1, p2, cfg) == pytest.approx(
        s1.overlap(s2), abs=1e-8)


def test_sas_overlap_unit_norm_and_sector_orthogonality():
    cfg = two_level(1.0, 0.6, 4)
    base = CoherentParams(q=(0.7,), weights=(1.0, 0.4))
    s_even = SasParams(base, (1,))
    s_odd = SasParams(base, (-1,))
    assert sas_overlap(s_even, s_even, cfg) == pytest.approx(1.0)
    assert sas_overlap(s_even, s_odd, cfg) == 0.0


def test_sas_overlap_matches_explicit_states():
    cfg = two_level(1.0, 0.6, 4, cutoff=24)
    basis = enumerate_basis(cfg)
    a = SasParams(CoherentParams(q=(0.8,), weights=(1.0, 0.5)), (1,))
    b = SasParams(CoherentParams(q=(-0.3,), weights=(1.0, 0.9)), (1,))
    ov = sas_state(a, cfg, basis).overlap(sas_state(b, cfg, basis))
    assert sas_overlap(a, b, cfg) == pytest.approx(ov, abs=1e-8)


def test_degenerate_projection_raises():
    cfg = two_level(1.0, 0.1, 4)
    vacuum = CoherentParams(q=(0.0,), weights=(1.0, 0.0))
    with pytest.raises(DegenerateProjectionError):
        sas_energy(SasParams(vacuum, (-1,)), cfg)  # no odd component at all


def test_minimize_sas_beats_coherent_supercritically():
    # just above gamma_c = 0.5 the condensate is small, so the parity
    # projection gain (which decays like exp(-q^2)) is still sizeable
    cfg = two_level(1.0, 0.55, 6)
    res = minimize_sas(cfg)
    coh = minimize_coherent(cfg)
    assert res.ground_sector == (1,)
    assert res.ground.energy < coh.energy - 1e-6
    # the odd-sector minimum exists and lies above the even one at finite N
    assert res.excited().energy >= res.ground.energy
    # deep in the condensate the minimum carries a macroscopic photon field
    assert minimize_sas(two_level(1.0, 1.0, 6)).ground.region == "Collective"


def test_minimize_sas_subcritical_is_normal():
    cfg = two_level(1.0, 0.2, 6)
    res = minimize_sas(cfg)
    assert res.ground.region == "Normal"
    assert res.ground.energy <= -3.0 + 1e-9  # projection can only lower it


def test_number_projected_state_is_masked_coherent_state():
    """The number projection must equal the coherent amplitudes restricted
    to one conserved-excitation block, renormalised (oracle by hand)."""
    from phasecart.operators import sector_blocks
    from phasecart.sas import number_projected_state

    cfg = two_level(0.8, 0.7, 4, rwa=True, cutoff=12)
    basis = enumerate_basis(cfg)
    blocks = sector_blocks(cfg, basis)
    base = CoherentParams(q=(0.9,), weights=(1.0, 0.4))
    chi = coherent_state(base, cfg, basis)
    for sector in ((0,), (1,), (3,)):
        psi = number_projected_state(base, cfg, basis, sector)
        ref = np.zeros_like(chi.amps)
        ref[blocks[sector]] = chi.amps[blocks[sector]]
        ref /= np.linalg.norm(ref)
        # global phase is fixed by the construction itself
        assert np.allclose(psi.amps, ref, atol=1e-12)
        assert np.linalg.norm(psi.amps) == pytest.approx(1.0)


def test_number_projection_guards():
    from phasecart.config import ConfigurationError, InvalidParameterError
    from phasecart.sas import minimize_number_projected, number_projected_state

    full = two_level(0.8, 0.7, 4, cutoff=8)  # no conserved excitation number
    with pytest.raises(ConfigurationError):
        minimize_number_projected(full)
    cfg = two_level(0.8, 0.7, 4, rwa=True, cutoff=8)
    basis = enumerate_basis(cfg)
    with pytest.raises(ConfigurationError):
        number_projected_state(CoherentParams(q=(0.5,)), full,
                               enumerate_basis(full), (0,))
    with pytest.raises(InvalidParameterError):
        number_projected_state(CoherentParams(q=(0.5,)), cfg, basis, (999,))
    # the vacuum carries no weight outside the zero-excitation sector
    with pytest.raises(DegenerateProjectionError):
        number_projected_state(CoherentParams(q=(0.0,), weights=(1.0, 0.0)),
                               cfg, basis, (5,))


def test_minimize_number_projected_brackets_exact_and_coherent():
    """Rayleigh-Ritz both ways: the projected ground lies at or above the
    exact ground of its sector and at or below the unprojected coherent
    minimum (the coherent state is a sector mixture)."""
    from phasecart.operators import sector_blocks
    from phasecart.sas import minimize_number_projected, number_projected_state
    from phasecart.solver import block_ground_state

    cfg = two_level(0.8, 1.2, 8, rwa=True, cutoff=30)
    basis = enumerate_basis(cfg)
    sm = minimize_number_projected(cfg, basis)
    coh = minimize_coherent(cfg)
    assert sm.ground.energy <= coh.energy + 1e-8

    H = build_hamiltonian(cfg, basis)
    blocks = sector_blocks(cfg, basis)
    idx = blocks[sm.ground_sector]
    sub = H.matrix[np.ix_(idx, idx)].toarray()
    e_exact = np.linalg.eigvalsh(sub)[0]
    assert sm.ground.energy >= e_exact - 1e-10
    # the state realises the reported energy
    psi = number_projected_state(sm.ground.params, cfg, basis,
                                 sm.ground_sector, blocks)
    assert expectation(psi, H) == pytest.approx(sm.ground.energy, abs=1e-9)
