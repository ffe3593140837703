"""Truncated product bases |nu_1 ... nu_l> x |atomic occupations>.

The atomic sector is the completely symmetric U(n) representation,
realised on occupation tuples (n_1, ..., n_n) summing to N.  Ordering is
lexicographic in (photon numbers, occupations), so identical configurations
always enumerate identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .config import ConfigurationError, InvalidParameterError, ModelConfig

__all__ = ["BasisIndex", "enumerate_basis", "excitation_weights", "occupations"]


def occupations(n_levels: int, N: int) -> list[tuple[int, ...]]:
    """All occupation tuples of N atoms over n levels, lexicographic order."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for v in range(remaining + 1):
            rec(prefix + (v,), remaining - v, slots - 1)

    rec((), N, n_levels)
    return out


@dataclass(frozen=True)
class BasisIndex:
    """Ordered basis of (photon tuple, occupation tuple) states."""

    n_levels: int
    N: int
    cutoffs: tuple[int, ...]
    states: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "_lookup", {s: i for i, s in enumerate(self.states)}
        )

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, nus: tuple[int, ...], occ: tuple[int, ...]) -> int:
        return self._lookup[(tuple(nus), tuple(occ))]

    def get(self, nus, occ, default=None):
        return self._lookup.get((tuple(nus), tuple(occ)), default)

    def __contains__(self, state) -> bool:
        return tuple(state) in self._lookup


def excitation_weights(cfg: ModelConfig) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Integer weight vectors defining one excitation operator K_m per mode.

    Each entry is (mode_weights, level_weights) with K_m = sum_m w_m nu_m +
    sum_i c_i A_ii, chosen so that every co-rotating interaction term leaves
    K_m unchanged: c_k - c_j = 1 for transitions promoted by mode m and 0 for
    transitions on other modes.  In the RWA the K_m are constants of motion;
    in the full model only their parities survive.
    """
    n = cfg.n_levels
    out = []
    for mi, _mode in enumerate(cfg.modes):
        c = [None] * (n + 1)  # 1-based
        c[1] = 0
        # propagate along the transition tree until fixed
        changed = True
        while changed:
            changed = False
            for mj, mode in enumerate(cfg.modes):
                step = 1 if mj == mi else 0
                for (j, k) in mode.transitions:
                    if c[j] is not None and c[k] is None:
                        c[k] = c[j] + step
                        changed = True
                    elif c[k] is not None and c[j] is None:
                        c[j] = c[k] - step
                        changed = True
        if any(v is None for v in c[1:]):
            # level untouched by any transition: weight 0
            c = [0 if v is None else v for v in c]
        shift = min(c[1:])
        levels = tuple(v - shift for v in c[1:])
        mode_w = tuple(1 if i == mi else 0 for i in range(cfg.n_modes))
        out.append((mode_w, levels))
    return out


def state_excitation(weights, nus, occ) -> int:
    mode_w, level_w = weights
    return sum(w * v for w, v in zip(mode_w, nus)) + sum(
        c * o for c, o in zip(level_w, occ)
    )


def enumerate_basis(
    cfg: ModelConfig,
    sector: dict[int, int] | None = None,
    parity: tuple[int, ...] | None = None,
    field_states: list[tuple[int, ...]] | None = None,
    matter_states: list[tuple[int, ...]] | None = None,
) -> BasisIndex:
    """Enumerate the truncated product basis for ``cfg``.

    ``sector`` maps excitation-operator index -> required integer eigenvalue
    (meaningful for RWA models).  ``parity`` gives one +-1 per mode,
    restricting to the corresponding parity eigenspace.  ``field_states`` /
    ``matter_states`` override the default boxes (used by reduced bases).
    """
    if any(c < 0 for c in cfg.cutoffs):
        raise InvalidParameterError("cutoff must be >= 0")
    if parity is not None and len(parity) != cfg.n_modes:
        raise InvalidParameterError("one parity per mode required")

    if field_states is None:
        field_states = [
            tuple(t) for t in itertools.product(*(range(c + 1) for c in cfg.cutoffs))
        ]
    if matter_states is None:
        matter_states = occupations(cfg.n_levels, cfg.N)

    weights = excitation_weights(cfg) if (sector or parity) else []

    states = []
    for nus in field_states:
        for occ in matter_states:
            if sector:
                ok = all(
                    state_excitation(weights[i], nus, occ) == val
                    for i, val in sector.items()
                )
                if not ok:
                    continue
            if parity is not None:
                ok = all(
                    (-1) ** state_excitation(weights[i], nus, occ) == parity[i]
                    for i in range(cfg.n_modes)
                )
                if not ok:
                    continue
            states.append((nus, occ))

    return BasisIndex(cfg.n_levels, cfg.N, cfg.cutoffs, tuple(states))
