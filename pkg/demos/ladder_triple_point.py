"""The 3-level ladder driven by one field mode: separatrix and triple point.

The shared mode couples both rungs, so the two condensation channels
compete: the boundary of the normal region is flat in the lower coupling
until the upper coupling takes over, where the transition turns first
order. At total resonance the normal region, the lower condensate and the
combined condensate meet at a triple point. An exact scan at small N shows
the same three regions.
"""

from phasecart import (
    GridAxis,
    Mode,
    ModelConfig,
    scan,
    triple_point,
    xi_separatrix,
)


def ladder(mu12=0.1, mu23=0.1, N=2, cutoff=10):
    return ModelConfig("Xi", omega=(0.0, 1.0, 2.0),
                       modes=(Mode(1.0, ((1, 2), (2, 3))),),
                       mu=((1, 2, mu12), (2, 3, mu23)),
                       N=N, rwa=True, cutoffs=(cutoff,))


def main():
    cfg = ladder()
    sep = xi_separatrix(cfg)
    print("mean-field boundary of the normal region (mu12 vs mu23):")
    for mu23 in (0.0, 0.5, 1.0, float(sep.mu23_star), 1.8, 2.2):
        print(f"  mu23 = {mu23:5.3f}  mu12* = {sep.mu12(mu23):5.3f}  "
              f"({sep.order(mu23)} order)")
    tp = triple_point(cfg)
    print(f"bend (triple point) at mu12 = {tp[0]:.4f}, mu23 = {tp[1]:.4f}")

    print("\nexact scan at N = 2 around the triple point:")
    axes = [GridAxis("mu12", 0.8, 1.2, 0.1), GridAxis("mu23", 1.2, 1.6, 0.1)]
    pd = scan(cfg, axes, solver="exact")
    print("      " + "  ".join(f"{v:5.2f}" for v in axes[1].values))
    for i, m12 in enumerate(axes[0].values):
        print(f"{m12:5.2f} " +
              "  ".join(f"{pd.labels[i, j]:>5}"
                        for j in range(len(axes[1].values))))
    import numpy as np
    print(f"labels present: {sorted(np.unique(pd.labels))}")


if __name__ == "__main__":
    main()
