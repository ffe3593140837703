import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasecart.basis import enumerate_basis
from phasecart.config import InvalidParameterError, two_level
from phasecart.coherent import (
    CoherentParams,
    CutoffError,
    OptimizationError,
    coherent_energy,
    coherent_state,
    critical_coupling_2level,
    critical_points_2level,
    energy_surface_2level,
    minimize_coherent,
    minimize_surface,
    triple_point,
    xi_separatrix,
)
from phasecart.operators import build_hamiltonian
from phasecart.solver import expectation

from test_config import xi_config
from test_basis import single_mode_xi


def test_closed_form_energy_matches_explicit_state():
    """The closed-form <H> must equal the expectation in the explicitly
    truncated state vector (up to truncation tails)."""
    for cfg in (two_level(1.0, 0.5, 3, cutoff=24),
                xi_config(mu12=0.4, mu23=0.6, N=2, cutoffs=(24, 24)),
                xi_config(mu12=0.4, mu23=0.6, N=2, rwa=True, cutoffs=(24, 24))):
        params = CoherentParams(
            q=(0.7,) * cfg.n_modes, p=(0.3,) * cfg.n_modes,
            weights=tuple([1.0] + [0.5 + 0.2j] * (cfg.n_levels - 1)),
        )
        basis = enumerate_basis(cfg)
        psi = coherent_state(params, cfg, basis)
        H = build_hamiltonian(cfg, basis)
        assert coherent_energy(params, cfg) == pytest.approx(
            expectation(psi, H), abs=1e-8)


def test_bloch_and_weight_parametrizations_agree():
    cfg = two_level(0.9, 0.4, 5, cutoff=10)
    th, ph, q = 1.1, 0.3, 0.8
    p_bloch = CoherentParams(q=(q,), theta=th, phi=ph)
    zeta = math.tan(th / 2) * np.exp(1j * ph)
    p_w = CoherentParams(q=(q,), weights=(1.0, zeta))
    assert energy_surface_2level(p_bloch, cfg) == pytest.approx(
        coherent_energy(p_w, cfg), abs=1e-12)
    assert coherent_energy(p_bloch, cfg) == pytest.approx(
        coherent_energy(p_w, cfg), abs=1e-12)


@given(scale=st.floats(0.2, 5.0))
@settings(deadline=None, max_examples=20)
def test_energy_invariant_under_weight_scaling(scale):
    cfg = xi_config(mu12=0.3, mu23=0.5, N=3)
    w = (1.0, 0.4, 0.7)
    p1 = CoherentParams(q=(0.5, 0.2), p=(0.0, 0.0), weights=w)
    p2 = CoherentParams(q=(0.5, 0.2), p=(0.0, 0.0),
                        weights=tuple(scale * x for x in w))
    assert coherent_energy(p1, cfg) == pytest.approx(coherent_energy(p2, cfg))


def test_critical_coupling_convention():
    assert critical_coupling_2level(two_level(0.8, 0.1, 4, rwa=True)) == \
        pytest.approx(math.sqrt(0.8))
    assert critical_coupling_2level(two_level(0.8, 0.1, 4)) == \
        pytest.approx(math.sqrt(0.8) / 2)


def test_critical_points_subcritical_vs_supercritical():
    sub = critical_points_2level(two_level(1.0, 0.3, 6))
    assert [p.region for p in sub] == ["NormalNorth", "NormalSouth"]
    assert sub[0].energy == pytest.approx(-3.0)  # -N omega_A / 2

    cfg = two_level(1.0, 1.0, 6)  # gamma = 2 gamma_c
    pts = critical_points_2level(cfg)
    assert len(pts) == 3
    col = pts[-1]
    u = (cfg.gamma / critical_coupling_2level(cfg)) ** 2
    assert col.energy == pytest.approx(-6 * 1.0 / 4 * (u + 1 / u))
    # the closed-form point really is a point on the surface at that energy
    assert energy_surface_2level(col.params, cfg) == pytest.approx(
        col.energy, abs=1e-12)
    assert col.energy < pts[0].energy


def test_minimize_coherent_reproduces_closed_form():
    cfg = two_level(1.0, 0.3, 6)  # subcritical
    pt = minimize_coherent(cfg)
    assert pt.region == "Normal"
    assert pt.energy == pytest.approx(-3.0, abs=1e-7)

    cfg = two_level(1.0, 1.0, 6)  # supercritical
    pt = minimize_coherent(cfg)
    assert pt.region == "Collective"
    assert pt.energy == pytest.approx(
        critical_points_2level(cfg)[-1].energy, abs=1e-7)


def test_coherent_state_normalized_and_cutoff_guard():
    cfg = two_level(1.0, 0.2, 3, cutoff=30)
    params = CoherentParams(q=(1.5,), p=(0.5,), theta=0.9)
    psi = coherent_state(params, cfg, enumerate_basis(cfg))
    assert np.linalg.norm(psi.amps) == pytest.approx(1.0)
    small = two_level(1.0, 0.2, 3, cutoff=2)
    with pytest.raises(CutoffError):
        coherent_state(CoherentParams(q=(4.0,), theta=0.9), small,
                       enumerate_basis(small))


def test_xi_separatrix_shape():
    sep = xi_separatrix(single_mode_xi(rwa=True))
    assert sep.mu23_star == pytest.approx(math.sqrt(2.0))
    assert sep.mu12(0.0) == pytest.approx(1.0)
    assert sep.order(1.0) == "second"
    assert sep.order(2.0) == "first"
    # flat until the bend, then decreasing
    assert sep.mu12(1.0) == pytest.approx(sep.mu12(0.5))
    assert sep.mu12(2.0) < sep.mu12(1.0)
    assert sep.mu12(10.0) == 0.0
    # the combined-condensation closed form needs a single shared mode
    from phasecart.config import ConfigurationError
    with pytest.raises(ConfigurationError):
        xi_separatrix(xi_config(rwa=True))


def test_triple_point_conventions():
    cfg = single_mode_xi(N=2, rwa=True)
    assert triple_point(cfg) == pytest.approx((1.0, math.sqrt(2.0)))
    full = single_mode_xi(N=2, rwa=False)
    assert triple_point(full) == pytest.approx((0.5, math.sqrt(2.0) / 2))
    # detuned ladder: the resonance condition fails
    from phasecart.config import Mode, ModelConfig
    detuned = ModelConfig("Xi", omega=(0.0, 0.9, 2.0),
                          modes=(Mode(1.0, ((1, 2), (2, 3))),),
                          mu=((1, 2, 0.1), (2, 3, 0.1)), N=2, rwa=True,
                          cutoffs=(4,))
    with pytest.raises(InvalidParameterError):
        triple_point(detuned)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_minimize_surface_needs_finite_seed():
    with pytest.raises(OptimizationError):
        minimize_surface(lambda x: math.inf, [np.zeros(2)])
