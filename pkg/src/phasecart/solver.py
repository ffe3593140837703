"""Lowest eigenpairs, expectations, fluctuations, fidelity, cutoff control.

Dense Hermitian solves below DENSE_LIMIT, shift-free Lanczos (ARPACK) above,
both behind one interface with a deterministic start vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .basis import BasisIndex
from .config import InvalidParameterError, ModelConfig
from .operators import BasisMismatchError, SparseOperator, build_hamiltonian
from . import operators as ops

__all__ = [
    "StateVector",
    "EigenResult",
    "SolverError",
    "TruncationError",
    "lowest_eigenpairs",
    "ground_state",
    "block_ground_energy",
    "block_ground_state",
    "expectation",
    "fluctuation",
    "fidelity",
    "susceptibility",
    "converge_cutoff",
]

DENSE_LIMIT = 2000
_SEED = 20200529


class SolverError(RuntimeError):
    def __init__(self, msg, best_residual=None):
        super().__init__(msg)
        self.best_residual = best_residual


class TruncationError(RuntimeError):
    pass


@dataclass
class StateVector:
    """Normalised complex amplitude vector over a BasisIndex."""

    basis: BasisIndex
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        nrm = np.linalg.norm(self.amps)
        if abs(nrm - 1.0) > 1e-10:
            raise InvalidParameterError(f"state norm {nrm} != 1")

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>, embedding across nested bases when they differ."""
        if self.basis == other.basis:
            return complex(np.vdot(self.amps, other.amps))
        small, large = (self, other) if self.basis.dim <= other.basis.dim else (other, self)
        acc = 0.0 + 0.0j
        for i, s in enumerate(small.basis.states):
            j = large.basis.get(*s)
            if j is not None:
                if small is self:
                    acc += np.conj(self.amps[i]) * other.amps[j]
                else:
                    acc += np.conj(self.amps[j]) * other.amps[i]
        return complex(acc)


@dataclass
class EigenResult:
    energies: list[float]
    vectors: list[StateVector]
    residuals: list[float]


def _tie_break(energies, vectors):
    """Stable ordering: ascending energy, degenerate pairs by descending
    |amplitude| on the lowest basis index where they differ."""
    order = sorted(
        range(len(energies)),
        key=lambda i: (energies[i], [-abs(a) for a in vectors[:, i]]),
    )
    return order


def lowest_eigenpairs(H: SparseOperator, k: int = 1, tol: float = 1e-10) -> EigenResult:
    dim = H.dim
    if not 1 <= k <= dim:
        raise InvalidParameterError(f"k={k} out of range for dim={dim}")
    m = H.matrix
    if dim <= DENSE_LIMIT or k > dim - 2:
        w, v = sla.eigh(m.toarray())
        w, v = w[: k + 8], v[:, : k + 8]
    else:
        rng = np.random.default_rng(_SEED)
        v0 = rng.standard_normal(dim)
        try:
            w, v = spla.eigsh(m, k=min(k + 2, dim - 1), which="SA", v0=v0,
                              tol=max(tol, 1e-14))
        except spla.ArpackNoConvergence as exc:
            best = None
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                ww, vv = exc.eigenvalues, exc.eigenvectors
                r = spla.norm(m @ vv[:, :1] - ww[0] * vv[:, :1]) if vv is not None else None
                best = float(r) if r is not None else None
            raise SolverError("eigensolver did not converge", best_residual=best) from exc
        idx = np.argsort(w)
        w, v = w[idx], v[:, idx]

    order = _tie_break(list(w), v)[:k]
    energies, vectors, residuals = [], [], []
    for i in order:
        vec = v[:, i].astype(complex)
        vec /= np.linalg.norm(vec)
        # fix global phase: largest-magnitude amplitude real positive
        pivot = np.argmax(np.abs(vec))
        vec *= np.exp(-1j * np.angle(vec[pivot]))
        res = float(np.linalg.norm(m @ vec - w[i] * vec))
        energies.append(float(w[i]))
        vectors.append(StateVector(H.basis, vec))
        residuals.append(res)
    return EigenResult(energies, vectors, residuals)


def ground_state(H: SparseOperator, tol: float = 1e-10):
    r = lowest_eigenpairs(H, 1, tol)
    return r.energies[0], r.vectors[0]


def _block_eigh(sub, want_vector):
    """Lowest eigenpair of one dense Hermitian block."""
    if sub.shape[0] == 1:
        e = float(sub[0, 0].real)
        return (e, np.ones(1, dtype=complex)) if want_vector else (e, None)
    a = np.asarray(sub)
    if want_vector:
        w, v = sla.eigh(a, subset_by_index=[0, 0])
        return float(w[0]), v[:, 0].astype(complex)
    w = sla.eigh(a, eigvals_only=True, subset_by_index=[0, 0])
    return float(w[0]), None


def block_ground_energy(matrix, blocks) -> float:
    """Ground energy of a matrix block diagonal over ``blocks`` index sets.

    Each block is solved densely for its lowest eigenvalue only; for the
    sharp-sector structure of RWA models this is much faster than a full
    solve because blocks are small.
    """
    best = None
    for idx in blocks.values():
        e, _ = _block_eigh(matrix[np.ix_(idx, idx)].toarray()
                           if hasattr(matrix, "toarray")
                           else matrix[np.ix_(idx, idx)], False)
        if best is None or e < best:
            best = e
    if best is None:
        raise InvalidParameterError("no blocks given")
    return best


def block_ground_state(H: SparseOperator, blocks):
    """(energy, StateVector) ground pair via the block decomposition.

    The winning sector's eigenvector is embedded in the full basis; ties
    between sectors resolve to the first block in ``blocks`` iteration order
    (keep the dict sorted for determinism).
    """
    dense = H.matrix.toarray() if H.dim <= DENSE_LIMIT else None
    best = None
    for idx in blocks.values():
        sub = dense[np.ix_(idx, idx)] if dense is not None \
            else H.matrix[np.ix_(idx, idx)].toarray()
        e, vec = _block_eigh(sub, True)
        if best is None or e < best[0] - 1e-14 * max(1.0, abs(e)):
            best = (e, idx, vec)
    if best is None:
        raise InvalidParameterError("no blocks given")
    e, idx, vec = best
    amps = np.zeros(H.dim, dtype=complex)
    amps[idx] = vec / np.linalg.norm(vec)
    pivot = np.argmax(np.abs(amps))
    amps *= np.exp(-1j * np.angle(amps[pivot]))
    return e, StateVector(H.basis, amps)


def expectation(psi: StateVector, A: SparseOperator) -> float:
    if psi.basis != A.basis:
        raise BasisMismatchError("state and operator bases differ")
    val = complex(np.vdot(psi.amps, A.matrix @ psi.amps))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise SolverError(f"non-real expectation {val} of Hermitian operator")
    return val.real


def fluctuation(psi: StateVector, A: SparseOperator) -> float:
    if psi.basis != A.basis:
        raise BasisMismatchError("state and operator bases differ")
    Apsi = A.matrix @ psi.amps
    mean = np.vdot(psi.amps, Apsi).real
    sq = np.vdot(Apsi, Apsi).real
    return max(sq - mean * mean, 0.0)


def fidelity(psi1: StateVector, psi2: StateVector) -> float:
    """Pure-state fidelity |<psi1|psi2>|^2."""
    return min(abs(psi1.overlap(psi2)) ** 2, 1.0)


def susceptibility(F: float, dlam: float) -> float:
    if dlam == 0:
        raise InvalidParameterError("dlam must be nonzero")
    return max(2.0 * (1.0 - F) / dlam**2, 0.0)


def converge_cutoff(cfg: ModelConfig, eps: float, start: int = 4,
                    max_dim: int = 200_000) -> tuple[int, ...]:
    """Smallest cutoffs on a doubling ladder with consecutive ground-state
    fidelity above 1 - eps and energy drift below eps * max(1, |E0|)."""
    if eps <= 0:
        raise InvalidParameterError("eps must be > 0")
    cut = max(start, 1)
    prev = None
    while True:
        trial = cfg.with_cutoffs(cut)
        basis = _basis_of(trial)
        if basis.dim > max_dim:
            raise TruncationError(f"cutoff ladder exhausted at dim {basis.dim}")
        e0, g = ground_state(build_hamiltonian(trial, basis))
        if prev is not None:
            e_prev, g_prev, cut_prev = prev
            if (
                fidelity(g_prev, g) >= 1.0 - eps
                and abs(e0 - e_prev) < eps * max(1.0, abs(e0))
            ):
                return (cut_prev,) * trial.n_modes
        prev = (e0, g, cut)
        cut *= 2


def _basis_of(cfg: ModelConfig) -> BasisIndex:
    from .basis import enumerate_basis

    return enumerate_basis(cfg)
