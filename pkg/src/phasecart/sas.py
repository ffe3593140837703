"""Symmetry-adapted (parity-projected) variational states and energies.

A coherent product state |c> is projected onto a joint parity eigensector of
the model's discrete symmetries, |c>_sigma ~ sum_g chi_sigma(g) g|c>, where g
runs over the group generated by the parity operators exp(i pi K_m) and
chi_sigma are its characters.  Each g maps |c> to another coherent product
state (alpha_m and the level weights pick up signs), so <H>_sigma reduces to
a finite sum of coherent pair matrix elements with closed forms at any N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisIndex, excitation_weights
from .coherent import CoherentParams, CriticalPoint, OptimizationError, \
    _default_seeds, coherent_state, minimize_surface
from .config import ConfigurationError, InvalidParameterError, ModelConfig
from .solver import StateVector

__all__ = [
    "SasParams",
    "SasMinimum",
    "DegenerateProjectionError",
    "sas_state",
    "sas_energy",
    "sas_energy_2level",
    "minimize_sas",
    "number_projected_state",
    "minimize_number_projected",
    "coherent_overlap",
    "sas_overlap",
]

_NORM_FLOOR = 1e-12


class DegenerateProjectionError(RuntimeError):
    """The coherent state has (numerically) no weight in the requested sector."""


@dataclass(frozen=True)
class SasParams:
    """Coherent base parameters plus one parity label per symmetry."""

    base: CoherentParams
    parity: tuple[int, ...] = (1,)

    def __post_init__(self):
        object.__setattr__(self, "parity", tuple(int(s) for s in self.parity))
        if any(s not in (-1, 1) for s in self.parity):
            raise InvalidParameterError("parities must be +-1")


def _base_vectors(params: CoherentParams, cfg: ModelConfig):
    """(alphas, normalised weights) of the unprojected coherent state."""
    alphas = np.asarray(params.alpha, dtype=complex)
    if len(alphas) != cfg.n_modes:
        raise InvalidParameterError("one (q, p) pair per mode required")
    w = params.matter_weights(cfg.n_levels)
    return alphas, w / np.linalg.norm(w)


def _group_elements(cfg: ModelConfig):
    """All symmetry-group elements as (character exponents, flip signs).

    Element eps in {0,1}^l flips alpha_m -> (-1)^{eps_m} alpha_m and
    w_i -> (-1)^{sum_m eps_m c_i^(m)} w_i with c^(m) the level weights of the
    m-th excitation operator.
    """
    weights = excitation_weights(cfg)
    out = []
    for eps in itertools.product((0, 1), repeat=cfg.n_modes):
        field_sign = np.array([(-1.0) ** e for e in eps])
        expo = np.zeros(cfg.n_levels, dtype=int)
        for e, (_mw, lw) in zip(eps, weights):
            if e:
                expo += np.asarray(lw, dtype=int)
        level_sign = (-1.0) ** expo
        out.append((eps, field_sign, level_sign))
    return out


def _pair_elements(cfg: ModelConfig, a1, w1, a2, w2):
    """(<c1|c2>, <c1|H|c2>) for two normalised coherent product states."""
    N = cfg.N
    fov = np.exp(
        np.sum(-(np.abs(a1) ** 2 + np.abs(a2) ** 2) / 2.0 + np.conj(a1) * a2)
    )
    S = np.vdot(w1, w2)
    SN1 = S ** (N - 1)
    ov = fov * SN1 * S

    freqs = np.array([m.frequency for m in cfg.modes])
    h = ov * np.sum(freqs * np.conj(a1) * a2)
    h += fov * SN1 * N * np.sum(np.asarray(cfg.omega) * np.conj(w1) * w2)

    sgn = cfg.interaction_sign / math.sqrt(N)
    for (j, k, mu) in cfg.mu:
        m = cfg.mode_index(j, k)
        cjk = N * np.conj(w1[j - 1]) * w2[k - 1] * SN1
        ckj = N * np.conj(w1[k - 1]) * w2[j - 1] * SN1
        if cfg.rwa:
            term = np.conj(a1[m]) * cjk + a2[m] * ckj
        else:
            term = (np.conj(a1[m]) + a2[m]) * (cjk + ckj)
        h += sgn * mu * fov * term
    return complex(ov), complex(h)


def sas_energy(params: SasParams, cfg: ModelConfig) -> float:
    """Closed-form <H> in the parity-projected coherent state.

    Works for any configuration, full or RWA; the cost is independent of N.
    """
    alphas, wn = _base_vectors(params.base, cfg)
    num = 0.0
    den = 0.0
    for eps, fsign, lsign in _group_elements(cfg):
        chi = math.prod(s**e for s, e in zip(params.parity, eps))
        ov, h = _pair_elements(cfg, alphas, wn, fsign * alphas, lsign * wn)
        num += chi * h.real
        den += chi * ov.real
    if den <= _NORM_FLOOR:
        raise DegenerateProjectionError(
            f"projected norm^2 {den:.3e} below {_NORM_FLOOR} in sector {params.parity}"
        )
    return num / den


def sas_energy_2level(params: SasParams, cfg: ModelConfig) -> float:
    """Stable closed form of the projected 2-level energy surface.

    Written with t = cos(theta)^N exp(-(q^2+p^2)) so the removable
    singularity of the textbook (cos theta)^{-N} arrangement at theta = pi/2
    never appears.  RWA models route through the generic projection algebra,
    whose closed form covers them as well.
    """
    if cfg.n_levels != 2:
        raise ConfigurationError("2-level SAS formula requires a 2-level model")
    if cfg.rwa:
        return sas_energy(params, cfg)
    base = params.base
    if base.theta is None:
        raise InvalidParameterError("Bloch angle theta required")
    sigma = params.parity[0]
    Omega = cfg.modes[0].frequency
    N = cfg.N
    j = N / 2.0
    q, p = base.q[0], base.p[0]
    th, ph = base.theta, base.phi
    c, s = math.cos(th), math.sin(th)
    S2 = q * q + p * p
    emS = math.exp(-S2)
    t = c**N * emS
    den = 1.0 + sigma * t
    if den <= _NORM_FLOOR:
        raise DegenerateProjectionError(f"projected norm^2 {den:.3e} too small")

    mean = (cfg.omega[0] + cfg.omega[1]) / 2.0
    g = cfg.interaction_sign * cfg.gamma
    num = Omega * S2 / 2.0 * (1.0 - sigma * t)
    num += N * mean - j * cfg.omega_A * c
    num += sigma * c ** (N - 1) * emS * N * (mean * c - cfg.omega_A / 2.0)
    num += 2.0 * math.sqrt(j) * g * q * s * math.cos(ph)
    num -= sigma * g * math.sqrt(2.0 * N) * p * s * math.sin(ph) * c ** (N - 1) * emS
    return num / den


def sas_state(params: SasParams, cfg: ModelConfig, basis: BasisIndex,
              min_norm: float = 1.0 - 1e-10) -> StateVector:
    """Normalised parity-projected coherent state over ``basis``."""
    alphas, wn = _base_vectors(params.base, cfg)
    amps = None
    for eps, fsign, lsign in _group_elements(cfg):
        chi = math.prod(s**e for s, e in zip(params.parity, eps))
        a = fsign * alphas
        flipped = CoherentParams(
            q=tuple(np.sqrt(2.0) * a.real),
            p=tuple(np.sqrt(2.0) * a.imag),
            weights=tuple(lsign * wn),
        )
        vec = coherent_state(flipped, cfg, basis, min_norm).amps
        amps = chi * vec if amps is None else amps + chi * vec
    nrm = np.linalg.norm(amps)
    if nrm * nrm <= _NORM_FLOOR * len(_group_elements(cfg)) ** 2:
        raise DegenerateProjectionError(
            f"projected norm^2 {nrm**2:.3e} too small in sector {params.parity}"
        )
    return StateVector(basis, amps / nrm)


def _pair_overlap(cfg, a1, w1, a2, w2) -> complex:
    fov = np.exp(
        np.sum(-(np.abs(a1) ** 2 + np.abs(a2) ** 2) / 2.0 + np.conj(a1) * a2)
    )
    return complex(fov * np.vdot(w1, w2) ** cfg.N)


def coherent_overlap(p1: CoherentParams, p2: CoherentParams,
                     cfg: ModelConfig) -> complex:
    """<c1|c2> of two normalised coherent product states (closed form)."""
    a1, w1 = _base_vectors(p1, cfg)
    a2, w2 = _base_vectors(p2, cfg)
    return _pair_overlap(cfg, a1, w1, a2, w2)


def sas_overlap(s1: SasParams, s2: SasParams, cfg: ModelConfig) -> complex:
    """Overlap of two normalised parity-projected coherent states.

    Zero when the sectors differ (orthogonal parity eigenspaces).
    """
    if s1.parity != s2.parity:
        return 0.0 + 0.0j
    a1, w1 = _base_vectors(s1.base, cfg)
    a2, w2 = _base_vectors(s2.base, cfg)
    cross = 0.0 + 0.0j
    n1 = 0.0
    n2 = 0.0
    for eps, fsign, lsign in _group_elements(cfg):
        chi = math.prod(s**e for s, e in zip(s1.parity, eps))
        cross += chi * _pair_overlap(cfg, a1, w1, fsign * a2, lsign * w2)
        n1 += chi * _pair_overlap(cfg, a1, w1, fsign * a1, lsign * w1).real
        n2 += chi * _pair_overlap(cfg, a2, w2, fsign * a2, lsign * w2).real
    if n1 <= _NORM_FLOOR or n2 <= _NORM_FLOOR:
        raise DegenerateProjectionError("projected norm vanishes in overlap")
    return complex(cross / math.sqrt(n1 * n2))


# -- sector-wise minimisation --------------------------------------------------


@dataclass(frozen=True)
class SasMinimum:
    """Per-sector minima and the global (ground) sector."""

    sectors: dict[tuple[int, ...], CriticalPoint]
    ground_sector: tuple[int, ...]

    @property
    def ground(self) -> CriticalPoint:
        return self.sectors[self.ground_sector]

    def excited(self) -> CriticalPoint:
        """Lowest minimum outside the ground sector (first excited SAS state)."""
        others = {k: v for k, v in self.sectors.items() if k != self.ground_sector}
        key = min(others, key=lambda k: others[k].energy)
        return others[key]


def _params_from_x(x, cfg: ModelConfig) -> CoherentParams:
    l, n = cfg.n_modes, cfg.n_levels
    w = (1.0,) + tuple(x[l:l + n - 1])
    return CoherentParams(q=tuple(x[:l]), p=(0.0,) * l,
                          weights=tuple(complex(v) for v in w))


def minimize_sas(cfg: ModelConfig, seeds=None, tol: float = 1e-10,
                 sectors=None) -> SasMinimum:
    """Minimise the SAS energy in every parity sector (or a chosen subset).

    Real quadratures and level weights suffice (the Hamiltonian is real in
    the product basis).  Sectors whose projection degenerates everywhere
    raise OptimizationError through minimize_surface.
    """
    if seeds is None:
        seeds = _default_seeds(cfg)
    wanted = list(sectors) if sectors is not None else \
        list(itertools.product((1, -1), repeat=cfg.n_modes))
    sectors: dict[tuple[int, ...], CriticalPoint] = {}
    for parity in wanted:

        def fn(x, parity=parity):
            try:
                return sas_energy(SasParams(_params_from_x(x, cfg), parity), cfg)
            except DegenerateProjectionError:
                return math.inf

        x, e = minimize_surface(fn, seeds, tol)
        params = _params_from_x(x, cfg)
        nph = sum(abs(a) ** 2 for a in params.alpha)
        region = "Normal" if nph < 0.5 else "Collective"
        sectors[parity] = CriticalPoint(params, e, float("nan"), region)
    ground = min(sectors, key=lambda k: sectors[k].energy)
    return SasMinimum(sectors, ground)


# -- number projection (RWA models) --------------------------------------------
#
# RWA Hamiltonians conserve the excitation operators K_m exactly, so the
# appropriate symmetry adaptation projects the coherent product state onto a
# joint eigensector of the K_m (a sharp excitation number per mode group)
# rather than onto their parities only.  The projection has no closed form,
# but in the truncated product basis it is a plain restriction of the
# coherent amplitudes to the sector's basis states.


def number_projected_state(params: CoherentParams, cfg: ModelConfig,
                           basis: BasisIndex, sector: tuple[int, ...],
                           blocks=None) -> StateVector:
    """Coherent state projected onto one conserved-excitation sector.

    ``sector`` is a key of ``operators.sector_blocks`` (one integer per
    conserved excitation operator).  Raises DegenerateProjectionError when
    the coherent state has (numerically) no weight there.
    """
    from .operators import sector_blocks
    if not cfg.rwa:
        raise ConfigurationError(
            "number projection requires an RWA model (conserved excitations)")
    if blocks is None:
        blocks = sector_blocks(cfg, basis)
    key = tuple(int(s) for s in sector)
    if key not in blocks:
        raise InvalidParameterError(f"unknown excitation sector {key}")
    chi = coherent_state(params, cfg, basis)
    amps = np.zeros_like(chi.amps)
    idx = blocks[key]
    amps[idx] = chi.amps[idx]
    nrm = np.linalg.norm(amps)
    if nrm * nrm <= _NORM_FLOOR:
        raise DegenerateProjectionError(
            f"projected norm^2 {nrm**2:.3e} too small in sector {key}")
    return StateVector(basis, amps / nrm)


def minimize_number_projected(cfg: ModelConfig, basis: BasisIndex = None,
                              n_candidates: int = 3,
                              tol: float = 1e-10) -> SasMinimum:
    """Variation-after-projection over conserved-excitation sectors.

    Starts from the unprojected coherent minimum, ranks sectors by the
    energy of the projected state, then re-minimises the projected energy
    over the coherent parameters inside each of the ``n_candidates`` best
    sectors.  Returns a SasMinimum whose sector keys are excitation numbers
    (one integer per conserved operator), not parities.
    """
    from scipy.optimize import minimize as _sp_minimize

    from .basis import enumerate_basis
    from .operators import build_hamiltonian, sector_blocks

    if not cfg.rwa:
        raise ConfigurationError(
            "number projection requires an RWA model (conserved excitations)")
    if basis is None:
        basis = enumerate_basis(cfg)
    blocks = sector_blocks(cfg, basis)
    H = build_hamiltonian(cfg, basis)

    from .coherent import minimize_coherent
    pt = minimize_coherent(cfg)
    x0 = np.array(list(pt.params.q) +
                  [w.real for w in pt.params.matter_weights(cfg.n_levels)[1:]])

    chi = coherent_state(pt.params, cfg, basis)
    Hchi = H.matrix @ chi.amps
    ranked = []
    for key, idx in blocks.items():
        a = chi.amps[idx]
        n2 = float(np.vdot(a, a).real)
        if n2 <= _NORM_FLOOR:
            continue
        ranked.append((float(np.vdot(a, Hchi[idx]).real) / n2, key))
    if not ranked:
        raise DegenerateProjectionError(
            "coherent minimum has no weight in any excitation sector")
    ranked.sort()

    sectors: dict[tuple[int, ...], CriticalPoint] = {}
    for _e0, key in ranked[:max(1, int(n_candidates))]:
        idx = blocks[key]
        sub = H.matrix[np.ix_(idx, idx)].toarray()

        def fn(x, idx=idx, sub=sub):
            try:
                c = coherent_state(_params_from_x(x, cfg), cfg, basis)
            except Exception:
                return math.inf
            a = c.amps[idx]
            n2 = float(np.vdot(a, a).real)
            if n2 <= _NORM_FLOOR:
                return math.inf
            return float(np.vdot(a, sub @ a).real) / n2

        res = _sp_minimize(fn, x0, method="Nelder-Mead",
                           options=dict(xatol=1e-8, fatol=tol, maxiter=2000))
        if not np.isfinite(res.fun):
            continue
        params = _params_from_x(res.x, cfg)
        nph = sum(abs(a) ** 2 for a in params.alpha)
        region = "Normal" if nph < 0.5 else "Collective"
        sectors[key] = CriticalPoint(params, float(res.fun), float("nan"),
                                     region)
    if not sectors:
        raise OptimizationError("no excitation sector admitted a minimum")
    ground = min(sectors, key=lambda k: sectors[k].energy)
    return SasMinimum(sectors, ground)
