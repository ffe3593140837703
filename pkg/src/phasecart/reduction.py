"""Iterative reduction of n-level configurations to 2-level subsystems.

At a variational critical point one level amplitude either vanishes
(rho_k = 0) or dominates (the normalising rho_2 -> infinity, eliminating the
lowest level after the eta substitution).  Applying the branch rules
recursively turns a 4-level configuration into a tree whose leaves are
2-level systems, each with its own critical coupling
mu_c = (1/2) sqrt(Omega_jk omega_kj); composing those critical couplings
reconstructs the phase diagram of the parent configuration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigurationError, InvalidParameterError, Mode, \
    ModelConfig, CONFIG_TRANSITIONS
from .scan import GridAxis, PhaseDiagram, _coupling_pair

__all__ = [
    "ReductionNode",
    "TwoLevelSubsystem",
    "reduce_once",
    "reduce_tree",
    "two_level_subsystems",
    "compose_diagram",
    "tree_text",
    "tree_csv",
]

# Branch table per configuration tag (in local 1-based numbering):
# ("zero", k) drops level k at rho_k = 0; ("inf", 1) drops the lowest level
# via the eta substitution when the normalising amplitude diverges.
_BRANCHES: dict[str, tuple[tuple[str, int], ...]] = {
    "SmallLambda4": (("zero", 4), ("inf", 1)),
    "N4": (("inf", 1), ("zero", 4)),
    "Lambda": (("zero", 2), ("inf", 1)),
    "V": (("zero", 2), ("zero", 3)),
    "Xi": (("zero", 3), ("inf", 1)),
    "TwoLevel": (),
}


@dataclass(frozen=True)
class TwoLevelSubsystem:
    """A 2-level Dicke subsystem inherited from a reduction leaf."""

    j: int
    k: int
    Omega: float
    omega_j: float
    omega_k: float
    mu: float = 0.0

    @property
    def omega_kj(self) -> float:
        return self.omega_k - self.omega_j

    @property
    def gapless(self) -> bool:
        return self.omega_kj <= 0.0

    @property
    def mu_c(self) -> float:
        """Critical coupling (1/2) sqrt(Omega omega_kj); 0 when gapless."""
        if self.gapless:
            return 0.0
        return 0.5 * math.sqrt(self.Omega * self.omega_kj)

    def critical_coupling(self, rwa: bool = False) -> float:
        """mu_c of the subsystem in the requested convention (RWA doubles it)."""
        return 2.0 * self.mu_c if rwa else self.mu_c

    def condensate_energy(self, mu: float, N: int) -> float:
        """Collective ground energy of the subsystem at coupling ``mu``.

        Per the 2-level closed form, E = N(omega_j + omega_k)/2
        - (N omega_kj / 4)(u + 1/u) with u = (mu/mu_c)^2, valid for u >= 1.
        """
        if self.gapless or self.mu_c == 0:
            return N * self.omega_j
        u = (mu / self.mu_c) ** 2
        return N * (self.omega_j + self.omega_k) / 2.0 \
            - N * self.omega_kj / 4.0 * (u + 1.0 / u)


@dataclass
class ReductionNode:
    """One node of a reduction tree.

    ``levels`` keeps the original level labels so that leaves identify their
    (j, k) pair in the parent's numbering.  ``variables`` records the
    substitution taken on the branch into this node.
    """

    cfg: ModelConfig
    levels: tuple[int, ...]
    branch: str = "root"
    var_prefix: str = "rho"
    variables: dict[str, str] = field(default_factory=dict)
    children: list["ReductionNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.cfg.n_levels == 2

    def leaves(self) -> list["ReductionNode"]:
        if self.is_leaf:
            return [self]
        return [lf for ch in self.children for lf in ch.leaves()]


def _tag_of(transitions: frozenset) -> str:
    for tag, allowed in CONFIG_TRANSITIONS.items():
        if frozenset(allowed) == transitions:
            return tag
    raise ConfigurationError(f"no configuration tag for transitions {sorted(transitions)}")


def _child_config(node: ReductionNode, drop_local: int) -> tuple[ModelConfig, tuple[int, ...]]:
    """Config and original-level labels after removing local level ``drop_local``."""
    cfg = node.cfg
    kept = [i for i in range(1, cfg.n_levels + 1) if i != drop_local]
    remap = {old: new for new, old in enumerate(kept, start=1)}

    new_modes, new_cut = [], []
    for m, cut in zip(cfg.modes, cfg.cutoffs):
        trans = tuple(
            (remap[j], remap[k]) for (j, k) in m.transitions
            if j != drop_local and k != drop_local
        )
        if trans:
            new_modes.append(Mode(m.frequency, trans))
            new_cut.append(cut)
    new_trans = frozenset(t for m in new_modes for t in m.transitions)
    tag = _tag_of(new_trans)
    new_mu = tuple(
        (remap[j], remap[k], v) for (j, k, v) in cfg.mu
        if j != drop_local and k != drop_local
    )
    child = ModelConfig(
        configuration=tag,
        omega=tuple(cfg.omega[i - 1] for i in kept),
        modes=tuple(new_modes),
        mu=new_mu,
        N=cfg.N,
        rwa=cfg.rwa,
        cutoffs=tuple(new_cut),
    )
    child_levels = tuple(node.levels[i - 1] for i in kept)
    return child, child_levels


def reduce_once(cfg_or_node) -> list[ReductionNode]:
    """One reduction step: the configured branch table applied once."""
    if isinstance(cfg_or_node, ReductionNode):
        node = cfg_or_node
    else:
        node = ReductionNode(cfg_or_node,
                             tuple(range(1, cfg_or_node.n_levels + 1)))
    tag = node.cfg.configuration
    if tag not in _BRANCHES:
        raise ConfigurationError(f"no reduction rule for configuration {tag!r}")
    children = []
    for kind, local in _BRANCHES[tag]:
        child_cfg, child_levels = _child_config(node, local)
        if kind == "zero":
            name = f"{node.var_prefix}{node.levels[local - 1]}=0"
            prefix = node.var_prefix
            variables = {f"{node.var_prefix}{node.levels[local - 1]}": "0"}
        else:
            second = node.levels[1]
            name = f"{node.var_prefix}{second}->inf"
            prefix = "eta"
            variables = {
                f"eta{node.levels[i - 1]}":
                    f"{node.var_prefix}{node.levels[i - 1]}/{node.var_prefix}{second}"
                for i in range(3, node.cfg.n_levels + 1)
            }
        children.append(ReductionNode(child_cfg, child_levels, name, prefix, variables))
    return children


def reduce_tree(cfg: ModelConfig) -> ReductionNode:
    """Full reduction tree down to 2-level leaves."""
    root = ReductionNode(cfg, tuple(range(1, cfg.n_levels + 1)))

    def grow(node):
        if node.is_leaf:
            return
        node.children = reduce_once(node)
        for ch in node.children:
            grow(ch)

    grow(root)
    return root


def two_level_subsystems(cfg: ModelConfig) -> list[TwoLevelSubsystem]:
    """Distinct 2-level leaves of the reduction tree with inherited data.

    Leaves reached along different paths but describing the same level pair
    are reported once.
    """
    tree = reduce_tree(cfg)
    out, seen = [], set()
    for leaf in tree.leaves():
        j, k = leaf.levels
        if (j, k) in seen:
            continue
        seen.add((j, k))
        out.append(TwoLevelSubsystem(
            j=j, k=k,
            Omega=leaf.cfg.modes[0].frequency,
            omega_j=cfg.omega[j - 1],
            omega_k=cfg.omega[k - 1],
            mu=leaf.cfg.coupling(1, 2),
        ))
    return out


# -- composed phase diagrams ---------------------------------------------------


def compose_diagram(subsystems, axes, cfg: ModelConfig) -> PhaseDiagram:
    """Phase diagram reconstructed from 2-level critical couplings.

    Every axis must drive exactly one subsystem coupling.  A point is
    Normal when each subsystem sits below its mu_c; otherwise it is labeled
    S_jk for the supercritical subsystem with the lowest condensate energy.
    """
    axes = tuple(axes)
    by_pair = {(s.j, s.k): s for s in subsystems}
    axis_pairs = []
    for ax in axes:
        pair = _coupling_pair(cfg, ax.name)
        if pair not in by_pair:
            raise InvalidParameterError(
                f"axis {ax.name} matches no subsystem among {sorted(by_pair)}"
            )
        axis_pairs.append(pair)

    shape = tuple(len(ax) for ax in axes)
    N = cfg.N
    E0 = np.zeros(shape)
    labels = np.full(shape, "", dtype=object)
    exc = {f"mu_c_{j}{k}": np.full(shape, by_pair[(j, k)].mu_c)
           for (j, k) in by_pair}
    e_normal = N * min(s.omega_j for s in subsystems)

    for idx in np.ndindex(shape):
        mu = {pair: by_pair[pair].mu for pair in by_pair}
        for a, pair in enumerate(axis_pairs):
            mu[pair] = axes[a].values[idx[a]]
        super_c = [(by_pair[p].condensate_energy(mu[p], N), p)
                   for p in by_pair if mu[p] >= by_pair[p].mu_c and not by_pair[p].gapless
                   and by_pair[p].mu_c > 0]
        if not super_c:
            labels[idx] = "Normal"
            E0[idx] = e_normal
        else:
            e, (j, k) = min(super_c)
            labels[idx] = f"S{j}{k}"
            E0[idx] = e

    chi = [np.zeros(shape) for _ in axes]
    return PhaseDiagram(cfg, axes, "composed", E0, exc, chi, labels,
                        np.ones(shape, dtype=bool))


# -- exports ---------------------------------------------------------------------


def tree_text(node: ReductionNode, indent: int = 0) -> str:
    pad = "  " * indent
    lv = ",".join(str(x) for x in node.levels)
    line = f"{pad}{node.cfg.configuration}[{lv}] ({node.branch})"
    if node.variables:
        subs = "; ".join(f"{k}={v}" for k, v in sorted(node.variables.items()))
        line += f" {{{subs}}}"
    parts = [line]
    for ch in node.children:
        parts.append(tree_text(ch, indent + 1))
    return "\n".join(parts)


def tree_csv(node: ReductionNode, path) -> None:
    """Adjacency list: node id, parent id, configuration, levels, branch."""
    rows = []

    def walk(n, parent):
        nid = len(rows)
        rows.append([nid, parent, n.cfg.configuration,
                     "+".join(str(x) for x in n.levels), n.branch,
                     ";".join(f"{k}={v}" for k, v in sorted(n.variables.items()))])
        for ch in n.children:
            walk(ch, nid)

    walk(node, -1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "parent", "configuration", "levels", "branch", "variables"])
        w.writerows(rows)
