"""Sparse Hermitian operators over a BasisIndex.

Collective atomic operators act on the symmetric representation through the
bosonic realisation A_jk -> b_j^dag b_k, so A_jk moves one atom from level k
to level j with amplitude sqrt((n_j + 1) n_k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import BasisIndex, enumerate_basis, excitation_weights, state_excitation
from .config import ConfigurationError, InvalidParameterError, ModelConfig

__all__ = [
    "SparseOperator",
    "build_hamiltonian",
    "hamiltonian_terms",
    "constants_of_motion",
    "sector_blocks",
    "parity_operator",
    "parity_projector",
    "number_operator",
    "transition_operator",
]


@dataclass
class SparseOperator:
    """A Hermitian sparse matrix tied to the basis it was built over."""

    basis: BasisIndex
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.basis.dim

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.conjugate().transpose()
        return 0.0 if d.nnz == 0 else float(abs(d).max())

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        _check_same_basis(self, other)
        return SparseOperator(self.basis, (self.matrix + other.matrix).tocsr())

    def __mul__(self, scalar: float) -> "SparseOperator":
        return SparseOperator(self.basis, (self.matrix * scalar).tocsr())

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        _check_same_basis(self, other)
        return SparseOperator(self.basis, (self.matrix @ other.matrix).tocsr())

    def commutator_norm(self, other: "SparseOperator") -> float:
        _check_same_basis(self, other)
        c = self.matrix @ other.matrix - other.matrix @ self.matrix
        return 0.0 if c.nnz == 0 else float(abs(c).max())


class BasisMismatchError(ValueError):
    pass


def _check_same_basis(a, b):
    if a.basis is not b.basis and a.basis != b.basis:
        raise BasisMismatchError("operators/states live on different bases")


def _from_entries(basis: BasisIndex, rows, cols, vals) -> SparseOperator:
    m = sp.coo_matrix(
        (np.asarray(vals), (rows, cols)), shape=(basis.dim, basis.dim)
    ).tocsr()
    m.sum_duplicates()
    return SparseOperator(basis, m)


def number_operator(cfg: ModelConfig, basis: BasisIndex, mode: int) -> SparseOperator:
    """Photon number a_m^dag a_m."""
    vals = np.array([s[0][mode] for s in basis.states], dtype=float)
    idx = np.arange(basis.dim)
    return _from_entries(basis, idx, idx, vals)


def population_operator(cfg: ModelConfig, basis: BasisIndex, level: int) -> SparseOperator:
    """Atomic population A_ii (1-based level index)."""
    vals = np.array([s[1][level - 1] for s in basis.states], dtype=float)
    idx = np.arange(basis.dim)
    return _from_entries(basis, idx, idx, vals)


def transition_operator(cfg: ModelConfig, basis: BasisIndex, j: int, k: int) -> SparseOperator:
    """Hermitian A_jk + A_kj for j < k."""
    rows, cols, vals = [], [], []
    for col, (nus, occ) in enumerate(basis.states):
        nj, nk = occ[j - 1], occ[k - 1]
        if nk > 0:  # A_jk: k -> j
            new = list(occ)
            new[j - 1] += 1
            new[k - 1] -= 1
            row = basis.get(nus, tuple(new))
            if row is not None:
                amp = np.sqrt((nj + 1) * nk)
                rows.append(row)
                cols.append(col)
                vals.append(amp)
                rows.append(col)
                cols.append(row)
                vals.append(amp)
    return _from_entries(basis, rows, cols, vals)


def _interaction_entries(cfg: ModelConfig, basis: BasisIndex, j: int, k: int):
    """Entries of the unit-strength interaction for transition (j, k).

    RWA: a_m^dag A_jk + a_m A_kj.  Full: (a_m + a_m^dag)(A_jk + A_kj).
    Photon states above the cutoff are dropped symmetrically.
    """
    mode = cfg.mode_index(j, k)
    cutoff = cfg.cutoffs[mode]
    rows, cols, vals = [], [], []

    def add(row, col, v):
        rows.append(row)
        cols.append(col)
        vals.append(v)
        rows.append(col)
        cols.append(row)
        vals.append(v)

    for col, (nus, occ) in enumerate(basis.states):
        nu = nus[mode]
        nj, nk = occ[j - 1], occ[k - 1]
        # A_jk lowers the atomic excitation (k -> j)
        if nk > 0:
            occ_lo = list(occ)
            occ_lo[j - 1] += 1
            occ_lo[k - 1] -= 1
            occ_lo = tuple(occ_lo)
            amp_at = np.sqrt((nj + 1) * nk)
            # a^dag A_jk (co-rotating)
            if nu < cutoff:
                nus_up = nus[:mode] + (nu + 1,) + nus[mode + 1:]
                row = basis.get(nus_up, occ_lo)
                if row is not None:
                    add(row, col, amp_at * np.sqrt(nu + 1))
            # a A_jk (counter-rotating)
            if not cfg.rwa and nu > 0:
                nus_dn = nus[:mode] + (nu - 1,) + nus[mode + 1:]
                row = basis.get(nus_dn, occ_lo)
                if row is not None:
                    add(row, col, amp_at * np.sqrt(nu))
    return rows, cols, vals


def hamiltonian_terms(cfg: ModelConfig, basis: BasisIndex):
    """(H0, {(j, k): V_jk}) with H = H0 + sum mu_jk V_jk.

    H0 is the free field + atom part; V_jk is the unit-coupling interaction
    including the sign and 1/sqrt(N) scaling.
    """
    diag = np.zeros(basis.dim)
    for i, (nus, occ) in enumerate(basis.states):
        diag[i] = sum(m.frequency * v for m, v in zip(cfg.modes, nus)) + sum(
            w * o for w, o in zip(cfg.omega, occ)
        )
    idx = np.arange(basis.dim)
    h0 = _from_entries(basis, idx, idx, diag)

    scale = cfg.interaction_sign / np.sqrt(cfg.N)
    terms = {}
    for (j, k) in _coupled_transitions(cfg):
        rows, cols, vals = _interaction_entries(cfg, basis, j, k)
        terms[(j, k)] = _from_entries(
            basis, rows, cols, scale * np.asarray(vals, dtype=float)
        )
    return h0, terms


def _coupled_transitions(cfg: ModelConfig):
    return [(j, k) for (j, k, _v) in cfg.mu]


def build_hamiltonian(cfg: ModelConfig, basis: BasisIndex) -> SparseOperator:
    """Total-energy Hamiltonian of ``cfg`` over ``basis``."""
    h0, terms = hamiltonian_terms(cfg, basis)
    h = h0
    for (j, k, v) in cfg.mu:
        h = h + v * terms[(j, k)]
    return h


def _diagonal_from_weights(basis: BasisIndex, weights) -> np.ndarray:
    return np.array(
        [state_excitation(weights, nus, occ) for (nus, occ) in basis.states],
        dtype=float,
    )


def constants_of_motion(cfg: ModelConfig, basis: BasisIndex) -> dict[str, SparseOperator]:
    """Conserved (or parity-conserved) diagonal operators for ``cfg``.

    2-level: the excitation number Lambda = a^dag a + J_z + N/2.
    3-level single mode: atom number N_op and M = a^dag a + A22 + 2 A33.
    Multi-mode: one K_m per mode (exact constants in the RWA, parity
    symmetries of the full model).
    """
    idx = np.arange(basis.dim)
    out = {}
    n_atoms = np.array([sum(s[1]) for s in basis.states], dtype=float)
    out["N"] = _from_entries(basis, idx, idx, n_atoms)

    weights = excitation_weights(cfg)
    if cfg.n_modes == 1:
        name = "Lambda" if cfg.n_levels == 2 else "M"
        out[name] = _from_entries(
            basis, idx, idx, _diagonal_from_weights(basis, weights[0])
        )
    else:
        for i, w in enumerate(weights, start=1):
            out[f"K{i}"] = _from_entries(
                basis, idx, idx, _diagonal_from_weights(basis, w)
            )
    return out


def parity_operator(cfg: ModelConfig, basis: BasisIndex, which: int = 0) -> SparseOperator:
    """exp(i pi K) for the ``which``-th excitation operator (diagonal +-1)."""
    weights = excitation_weights(cfg)[which]
    vals = np.array(
        [(-1.0) ** state_excitation(weights, nus, occ) for nus, occ in basis.states]
    )
    idx = np.arange(basis.dim)
    return _from_entries(basis, idx, idx, vals)


def parity_projector(cfg: ModelConfig, basis: BasisIndex, parities) -> SparseOperator:
    """Product of (I + s exp(i pi K_m))/2 over the model's parity symmetries."""
    parities = tuple(parities)
    if len(parities) != cfg.n_modes:
        raise InvalidParameterError("one parity per symmetry required")
    if any(s not in (-1, 1) for s in parities):
        raise InvalidParameterError("parities must be +-1")
    weights = excitation_weights(cfg)
    diag = np.ones(basis.dim)
    for s, w in zip(parities, weights):
        signs = np.array(
            [(-1.0) ** state_excitation(w, nus, occ) for nus, occ in basis.states]
        )
        diag *= 0.5 * (1.0 + s * signs)
    idx = np.arange(basis.dim)
    return _from_entries(basis, idx, idx, diag)


def sector_blocks(cfg: ModelConfig, basis: BasisIndex) -> dict[tuple[int, ...], np.ndarray]:
    """Joint eigenspaces of the RWA excitation constants, as index arrays.

    Under the RWA every excitation operator K_m commutes with H at any
    coupling, so H is block diagonal in the grouping returned here; keys are
    the integer K tuples, sorted.  Raises for full (non-RWA) models, whose
    only sharp constants are the parities.
    """
    if not cfg.rwa:
        raise ConfigurationError("sector blocks require an RWA model")
    weights = excitation_weights(cfg)
    groups: dict[tuple[int, ...], list[int]] = {}
    for i, (nus, occ) in enumerate(basis.states):
        key = tuple(state_excitation(w, nus, occ) for w in weights)
        groups.setdefault(key, []).append(i)
    return {k: np.asarray(v) for k, v in sorted(groups.items())}
