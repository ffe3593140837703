"""Fidelity-controlled reduced bases and their ground-energy error surfaces.

Each 2-level subsystem of a configuration fixes a maximal photon number
m_jk at its working coupling; the order-O reduced basis keeps, for every
coupled transition, a photon box where that transition's mode runs to its
full m while every other mode is capped at min{2O+1, m}.  The field part is
the deduplicated union of these boxes, the matter part caps the population
of excited levels, and the reference (exact) basis is the saturated box.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import itertools

import numpy as np

from .basis import BasisIndex, enumerate_basis, occupations
from .config import InvalidParameterError, Mode, ModelConfig
from .operators import SparseOperator, build_hamiltonian, hamiltonian_terms, \
    sector_blocks
from .reduction import TwoLevelSubsystem, two_level_subsystems
from .scan import GridAxis
from .solver import TruncationError, block_ground_energy, fidelity, ground_state

__all__ = [
    "ReducedBasis",
    "ErrorSurface",
    "OrderRangeError",
    "E10",
    "E15",
    "photon_cutoffs",
    "build_reduced_basis",
    "max_order",
    "error_surface",
    "dimension_report",
]

E10 = math.exp(-10.0)
E15 = math.exp(-15.0)
_MAX_FOCK = 256


class OrderRangeError(ValueError):
    """Requested order lies outside [0, max_jk floor(m_jk / 2)]."""


@dataclass(frozen=True)
class ReducedBasis:
    """Order-O reduced product basis."""

    order: int
    field_states: tuple[tuple[int, ...], ...]
    matter_states: tuple[tuple[int, ...], ...]
    cutoffs: dict[tuple[int, int], int]
    basis: BasisIndex

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def field_dim(self) -> int:
        return len(self.field_states)

    @property
    def matter_dim(self) -> int:
        return len(self.matter_states)


def _subsystem_2level_cfg(sub: TwoLevelSubsystem, mu: float, N: int,
                          rwa: bool, cutoff: int) -> ModelConfig:
    return ModelConfig(
        configuration="TwoLevel",
        omega=(sub.omega_j, sub.omega_k),
        modes=(Mode(sub.Omega, ((1, 2),)),),
        mu=((1, 2, mu),),
        N=N,
        rwa=rwa,
        cutoffs=(cutoff,),
    )


def _pairs(cfg: ModelConfig) -> list[TwoLevelSubsystem]:
    if cfg.n_levels == 2:
        return [TwoLevelSubsystem(1, 2, cfg.modes[0].frequency,
                                  cfg.omega[0], cfg.omega[1], cfg.coupling(1, 2))]
    return two_level_subsystems(cfg)


def photon_cutoffs(cfg: ModelConfig, x: dict[tuple[int, int], float] | None = None,
                   eps: float = E10) -> dict[tuple[int, int], int]:
    """Smallest per-transition Fock cutoffs m_jk with converged ground states.

    For each 2-level subsystem at coupling x_jk mu_c_jk, m_jk is the first
    cutoff whose exact ground state has fidelity >= 1 - eps against the
    next-larger cutoff.  x defaults to the ratios of the stored couplings.
    """
    if eps <= 0:
        raise InvalidParameterError("eps must be > 0")
    out = {}
    for sub in _pairs(cfg):
        if x is not None:
            xv = x[(sub.j, sub.k)]
            if xv < 0:
                raise InvalidParameterError("coupling ratios must be >= 0")
            mu = xv * sub.critical_coupling(cfg.rwa)
        else:
            mu = cfg.coupling(sub.j, sub.k)
        if mu == 0.0:
            out[(sub.j, sub.k)] = 0
            continue
        m = 0
        while True:
            if m + 1 > _MAX_FOCK:
                raise TruncationError(f"Fock ladder cap {_MAX_FOCK} reached")
            c1 = _subsystem_2level_cfg(sub, mu, cfg.N, cfg.rwa, m)
            c2 = _subsystem_2level_cfg(sub, mu, cfg.N, cfg.rwa, m + 1)
            _, g1 = ground_state(build_hamiltonian(c1, enumerate_basis(c1)))
            _, g2 = ground_state(build_hamiltonian(c2, enumerate_basis(c2)))
            if fidelity(g1, g2) >= 1.0 - eps:
                out[(sub.j, sub.k)] = m
                break
            m += 1
    return out


def max_order(cutoffs: dict[tuple[int, int], int]) -> int:
    return max(m // 2 for m in cutoffs.values())


def _mode_caps(cfg: ModelConfig, cutoffs) -> list[int]:
    """Per-mode saturated photon caps: the largest m among a mode's transitions."""
    caps = []
    for mode in cfg.modes:
        caps.append(max(cutoffs.get(t, 0) for t in mode.transitions))
    return caps


def build_reduced_basis(cfg: ModelConfig, order: int,
                        cutoffs: dict[tuple[int, int], int],
                        matter_cap: int | None = None) -> ReducedBasis:
    """Order-O reduced basis from per-transition photon cutoffs.

    The matter rule caps the total excited-level population at
    min{N, 2O+1} by default (the cap is configurable; the field rule is the
    union-of-boxes construction).
    """
    if not 0 <= order <= max_order(cutoffs):
        raise OrderRangeError(
            f"order {order} outside [0, {max_order(cutoffs)}]"
        )
    caps = _mode_caps(cfg, cutoffs)
    boxes = set()
    coupled = [(j, k) for (j, k, _v) in cfg.mu] or \
        [t for m in cfg.modes for t in m.transitions]
    for (j, k) in coupled:
        lead = cfg.mode_index(j, k)
        lims = []
        for m in range(cfg.n_modes):
            if m == lead:
                lims.append(cutoffs.get((j, k), 0))
            else:
                lims.append(min(2 * order + 1, caps[m]))
        boxes.update(itertools.product(*(range(v + 1) for v in lims)))
    field_states = tuple(sorted(boxes))

    cap = min(cfg.N, 2 * order + 1) if matter_cap is None else matter_cap
    matter_states = tuple(
        occ for occ in occupations(cfg.n_levels, cfg.N) if sum(occ[1:]) <= cap
    )
    basis = enumerate_basis(cfg, field_states=list(field_states),
                            matter_states=list(matter_states))
    return ReducedBasis(order, field_states, matter_states, dict(cutoffs), basis)


def exact_box_basis(cfg: ModelConfig, cutoffs) -> BasisIndex:
    """Saturated reference basis: every mode at its full photon cap."""
    caps = _mode_caps(cfg, cutoffs)
    field_states = list(itertools.product(*(range(c + 1) for c in caps)))
    return enumerate_basis(cfg, field_states=field_states)


# -- error surfaces -------------------------------------------------------------


@dataclass
class ErrorSurface:
    """Relative ground-energy error Delta(O) over a coupling grid."""

    cfg: ModelConfig
    order: int
    axes: tuple[GridAxis, ...]
    delta: np.ndarray
    E_exact: np.ndarray
    E_reduced: np.ndarray
    valid: np.ndarray

    def max_delta(self) -> tuple[float, tuple[int, ...]]:
        masked = np.where(self.valid, self.delta, -np.inf)
        idx = np.unravel_index(int(np.argmax(masked)), self.delta.shape)
        return float(self.delta[idx]), tuple(int(i) for i in idx)


def error_surface(cfg: ModelConfig, order: int, axes, eps: float = E10,
                  cutoffs: dict[tuple[int, int], int] | None = None,
                  zero_tol: float = 1e-10) -> ErrorSurface:
    """Delta(O) = |(E_g - E_O)/E_g| over the grid, with Delta = 0 when E_g = 0.

    With ``cutoffs`` given, one fixed pair of reduced/reference bases serves
    the whole grid (the protocol behind a single dimension table); without
    it, per-transition cutoffs are recomputed at every point's couplings.
    """
    from .scan import _coupling_pair

    axes = tuple(axes)
    keys = [_coupling_pair(cfg, ax.name) for ax in axes]
    shape = tuple(len(ax) for ax in axes)
    delta = np.zeros(shape)
    e_ex = np.full(shape, np.nan)
    e_red = np.full(shape, np.nan)
    valid = np.zeros(shape, dtype=bool)

    fixed = None
    if cutoffs is not None:
        rb = build_reduced_basis(cfg, min(order, max_order(cutoffs)), cutoffs)
        fixed = [_fixed_solver(cfg, rb.basis), _fixed_solver(cfg, exact_box_basis(cfg, cutoffs))]

    for idx in np.ndindex(shape):
        mu_pt = {pair: axes[a].values[idx[a]] for a, pair in enumerate(keys)}
        over = {f"mu{j}{k}": v for (j, k), v in mu_pt.items()}
        pt = cfg.with_couplings(**over)
        try:
            if fixed is None:
                cut = photon_cutoffs(pt, eps=eps)
                o = min(order, max_order(cut))
                b_red = build_reduced_basis(pt, o, cut).basis
                b_ex = exact_box_basis(pt, cut)
                eg, _ = ground_state(build_hamiltonian(pt, b_ex))
                eo, _ = ground_state(build_hamiltonian(pt, b_red))
            else:
                mu_full = dict(pt.mu_dict())
                eo = fixed[0](mu_full)
                eg = fixed[1](mu_full)
        except (TruncationError, OrderRangeError):
            continue
        e_ex[idx], e_red[idx] = eg, eo
        valid[idx] = True
        delta[idx] = 0.0 if abs(eg) < zero_tol else abs((eg - eo) / eg)
    return ErrorSurface(cfg, order, axes, delta, e_ex, e_red, valid)


def _fixed_solver(cfg: ModelConfig, basis: BasisIndex):
    """Ground-energy function mu_dict -> E over one fixed basis.

    Hamiltonian terms are assembled once; RWA models additionally solve per
    excitation sector (the Hamiltonian is block diagonal there), which keeps
    saturated reference boxes tractable over a whole grid.
    """
    h0, terms = hamiltonian_terms(cfg, basis)
    blocks = sector_blocks(cfg, basis) if cfg.rwa else None

    def solve(mu: dict[tuple[int, int], float]) -> float:
        h = h0.matrix.copy()
        for key, v in mu.items():
            h = h + v * terms[key].matrix
        h = h.tocsr()
        if blocks is not None:
            return block_ground_energy(h, blocks)
        e, _ = ground_state(SparseOperator(basis, h))
        return e

    return solve


def dimension_report(cfg: ModelConfig, cutoffs, orders, path=None):
    """Rows (order, field dim, matter dim, total dim, exact dim, ratio)."""
    bex = exact_box_basis(cfg, cutoffs)
    rows = []
    for o in orders:
        rb = build_reduced_basis(cfg, o, cutoffs)
        rows.append((o, rb.field_dim, rb.matter_dim, rb.dim, bex.dim,
                     rb.dim / bex.dim))
    if path is not None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["order", "field_dim", "matter_dim", "total_dim",
                        "exact_dim", "ratio"])
            for r in rows:
                w.writerow([r[0], r[1], r[2], r[3], r[4], "%.17g" % r[5]])
    return rows
