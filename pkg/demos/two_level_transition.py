"""The 2-level transition at finite N: exact vs coherent vs symmetry-adapted.

Sweeps the matter-field coupling through the critical value, comparing the
exact ground energy with the coherent and parity-projected variational upper
bounds, and locates the finite-N transition from the fidelity-susceptibility
peak of the exact ground state.
"""

import numpy as np

from phasecart import (
    build_hamiltonian,
    critical_coupling_2level,
    enumerate_basis,
    ground_state,
    fidelity,
    minimize_coherent,
    minimize_sas,
    susceptibility,
    two_level,
)


def main():
    N, cutoff = 10, 40
    cfg0 = two_level(omega_A=1.0, gamma=0.1, N=N, cutoff=cutoff)
    gc = critical_coupling_2level(cfg0)
    print(f"2-level full model, N = {N}: mean-field gamma_c = {gc}")

    basis = enumerate_basis(cfg0)
    gammas = np.linspace(0.30, 0.80, 26)
    print(f"{'gamma':>6} {'E_exact':>10} {'E_sas':>10} {'E_coherent':>11} "
          f"{'chi':>9}")
    prev = None
    chi_peak = (0.0, None)
    for g in gammas:
        cfg = cfg0.with_couplings(gamma=float(g))
        e, psi = ground_state(build_hamiltonian(cfg, basis))
        sas = minimize_sas(cfg).ground.energy
        coh = minimize_coherent(cfg).energy
        chi = 0.0
        if prev is not None:
            chi = susceptibility(fidelity(prev, psi), gammas[1] - gammas[0])
            if chi > chi_peak[0]:
                chi_peak = (chi, float(g))
        prev = psi
        print(f"{g:6.3f} {e:10.5f} {sas:10.5f} {coh:11.5f} {chi:9.2f}")
        assert e <= sas + 1e-9 <= coh + 1e-8  # Rayleigh-Ritz chain

    print(f"\nfidelity-susceptibility peak at gamma = {chi_peak[1]:.3f} "
          f"(mean-field value {gc}; the finite-N peak sits above it and "
          f"drifts down as N grows)")


if __name__ == "__main__":
    main()
