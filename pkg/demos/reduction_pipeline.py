"""Level reduction of a 4-level chain and composition of its phase diagram.

Every n-level configuration reduces, one eliminated level at a time, to a
set of resonant 2-level subsystems, each with a closed-form critical
coupling. Their individual condensation energies compose into the phase
diagram of the full system.
"""

import numpy as np

from phasecart import (
    GridAxis,
    Mode,
    ModelConfig,
    compose_diagram,
    reduce_tree,
    tree_text,
    two_level_subsystems,
)


def n4_chain(mu13=0.1, mu24=0.1, mu23=0.1, N=4):
    return ModelConfig("N4", omega=(0.0, 0.8, 1.0, 1.9),
                       modes=(Mode(1.0, ((1, 3), (2, 4))), Mode(0.25, ((2, 3),))),
                       mu=((1, 3, mu13), (2, 4, mu24), (2, 3, mu23)),
                       N=N, rwa=False, cutoffs=(3, 3))


def main():
    cfg = n4_chain()
    print("reduction tree:")
    print(tree_text(reduce_tree(cfg)))

    subs = two_level_subsystems(cfg)
    print("\n2-level subsystems and their critical couplings:")
    for s in subs:
        print(f"  levels ({s.j},{s.k}):  Omega = {s.Omega:.3f}, "
              f"omega_kj = {s.omega_kj:.3f}, mu_c = "
              f"{s.critical_coupling(cfg.rwa):.4f}")

    axes = [GridAxis("mu13", 0.0, 1.0, 0.05),
            GridAxis("mu24", 0.0, 1.1, 0.05),
            GridAxis("mu23", 0.0, 0.3, 0.05)]
    pd = compose_diagram(subs, axes, cfg)
    labels, counts = np.unique(pd.labels, return_counts=True)
    print("\ncomposed diagram over "
          + " x ".join(f"{ax.name}[{ax.start},{ax.stop}]" for ax in axes)
          + ":")
    for lab, cnt in zip(labels, counts):
        print(f"  {lab:>7}: {cnt} grid points")
    k = len(axes[2].values) // 6  # a mu23 slice with all regions visible
    print(f"\nslice at mu23 = {axes[2].values[k]:.2f} "
          "(rows mu13, columns mu24):")
    for i in range(0, len(axes[0].values), 4):
        print("  " + " ".join(f"{pd.labels[i, j, k]:>7}"
                              for j in range(0, len(axes[1].values), 4)))


if __name__ == "__main__":
    main()
