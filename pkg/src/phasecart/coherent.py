"""Coherent trial states, closed-form energy surfaces and critical points.

Field modes carry Heisenberg-Weyl coherent states |alpha_m>, the atoms a
symmetric-representation U(n) coherent state, which over occupation numbers
is the multinomial condensate (sum_i w_i b_i^dag)^N |0> with w_1 = 1.
Expectation values of the Hamiltonian in these states have exact closed
forms at any finite N, used for fast surface scans; the explicit truncated
state vector is available for cross-checks and fidelities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .basis import BasisIndex
from .config import ConfigurationError, InvalidParameterError, ModelConfig
from .solver import StateVector

__all__ = [
    "CoherentParams",
    "CriticalPoint",
    "CutoffError",
    "OptimizationError",
    "coherent_state",
    "coherent_energy",
    "energy_surface_2level",
    "critical_points_2level",
    "critical_coupling_2level",
    "minimize_surface",
    "minimize_coherent",
    "xi_separatrix",
    "XiSeparatrix",
    "triple_point",
]


class CutoffError(RuntimeError):
    """Photon cutoff too small to hold the requested coherent state."""


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoherentParams:
    """Variational parameters of a product coherent state.

    ``q``/``p`` are per-mode field quadratures, alpha_m = (q_m + i p_m)/sqrt2.
    The matter sector is given either by Bloch angles (2 levels), by the
    gamma vector of the U(n) construction, or directly by complex level
    weights w (w_1 = 1 understood when omitted).
    """

    q: tuple[float, ...] = (0.0,)
    p: tuple[float, ...] = (0.0,)
    theta: float | None = None
    phi: float = 0.0
    gamma_vec: tuple[complex, ...] | None = None
    weights: tuple[complex, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if len(self.q) != len(self.p):
            raise InvalidParameterError("q and p must have one entry per mode")
        if self.theta is not None and not (0.0 <= self.theta <= math.pi):
            raise InvalidParameterError("theta must lie in [0, pi]")

    @property
    def alpha(self) -> tuple[complex, ...]:
        return tuple((qq + 1j * pp) / math.sqrt(2.0) for qq, pp in zip(self.q, self.p))

    def matter_weights(self, n_levels: int) -> np.ndarray:
        """Unnormalised level weights w with w_1 = 1 (except explicit ones)."""
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=complex)
            if len(w) != n_levels:
                raise InvalidParameterError("need one weight per level")
            return w
        if n_levels == 2:
            if self.theta is None:
                raise InvalidParameterError("2-level params need theta")
            zeta = math.tan(self.theta / 2.0) * np.exp(1j * self.phi) \
                if self.theta < math.pi else None
            if zeta is None:
                # south pole: weight entirely on level 2
                return np.array([0.0, 1.0], dtype=complex)
            return np.array([1.0, zeta], dtype=complex)
        if self.gamma_vec is None:
            raise InvalidParameterError(f"{n_levels}-level params need gamma_vec or weights")
        g = tuple(complex(x) for x in self.gamma_vec)
        if len(g) != n_levels * (n_levels - 1) // 2:
            raise InvalidParameterError("gamma_vec must have n(n-1)/2 entries")
        # acting on the highest-weight state only the A_k1 generators survive;
        # the exponential ordering leaves w = (1, g[-1], g[-2], ..., g[-n+1])
        return np.array([1.0] + [g[-i] for i in range(1, n_levels)], dtype=complex)


@dataclass(frozen=True)
class CriticalPoint:
    params: CoherentParams
    energy: float
    lambda_c: float
    region: str


# -- states and energies ----------------------------------------------------


def coherent_state(params: CoherentParams, cfg: ModelConfig, basis: BasisIndex,
                   min_norm: float = 1.0 - 1e-10) -> StateVector:
    """Truncated expansion of the product coherent state over ``basis``."""
    alphas = params.alpha
    if len(alphas) != cfg.n_modes:
        raise InvalidParameterError("one (q, p) pair per mode required")
    w = params.matter_weights(cfg.n_levels)
    wn = w / np.linalg.norm(w)

    # per-mode Fock amplitudes
    field_amp = []
    for m, a in enumerate(alphas):
        nu = np.arange(cfg.cutoffs[m] + 1)
        if abs(a) == 0:
            col = np.zeros(len(nu), dtype=complex)
            col[0] = 1.0
        else:
            log_mod = -abs(a) ** 2 / 2.0 + nu * math.log(abs(a)) - 0.5 * gammaln(nu + 1)
            col = np.exp(log_mod) * np.exp(1j * nu * np.angle(a))
        field_amp.append(col)

    logN = gammaln(cfg.N + 1)
    amps = np.zeros(basis.dim, dtype=complex)
    for i, (nus, occ) in enumerate(basis.states):
        c = 1.0 + 0.0j
        for m, nu in enumerate(nus):
            c *= field_amp[m][nu]
        if c == 0:
            continue
        logm = 0.5 * (logN - sum(gammaln(n + 1) for n in occ))
        mat = np.exp(logm)
        for wi, n in zip(wn, occ):
            if n:
                if wi == 0:
                    mat = 0.0
                    break
                mat *= wi**n
        amps[i] = c * mat

    nrm = np.linalg.norm(amps)
    if nrm < math.sqrt(min_norm):
        raise CutoffError(
            f"truncated norm {nrm**2:.3e} below {min_norm}; raise the cutoff"
        )
    return StateVector(basis, amps / nrm)


def coherent_energy(params: CoherentParams, cfg: ModelConfig) -> float:
    """Exact <H> in the product coherent state (any configuration)."""
    alphas = params.alpha
    if len(alphas) != cfg.n_modes:
        raise InvalidParameterError("one (q, p) pair per mode required")
    w = params.matter_weights(cfg.n_levels)
    wn = w / np.linalg.norm(w)
    N = cfg.N

    e = sum(m.frequency * abs(a) ** 2 for m, a in zip(cfg.modes, alphas))
    e += N * float(np.dot(cfg.omega, np.abs(wn) ** 2))

    s = cfg.interaction_sign / math.sqrt(N)
    for (j, k, mu) in cfg.mu:
        a = alphas[cfg.mode_index(j, k)]
        cross = np.conj(wn[j - 1]) * wn[k - 1]
        if cfg.rwa:
            term = 2.0 * N * (np.conj(a) * cross).real
        else:
            term = 4.0 * N * a.real * cross.real
        e += s * mu * term
    return float(e)


def energy_surface_2level(params: CoherentParams, cfg: ModelConfig) -> float:
    """Closed-form coherent energy surface of the 2-level model.

    Full model: Omega(p^2+q^2)/2 - j omega_A cos(theta)
                + 2 sqrt(j) gamma q sin(theta) cos(phi);
    RWA drops the counter-rotating half of the interaction.
    """
    if cfg.n_levels != 2:
        raise ConfigurationError("2-level surface requires a 2-level model")
    if params.theta is None:
        raise InvalidParameterError("Bloch angle theta required")
    Omega = cfg.modes[0].frequency
    j = cfg.N / 2.0
    q, p = params.q[0], params.p[0]
    th, ph = params.theta, params.phi
    e = Omega * (p * p + q * q) / 2.0
    e += cfg.N * (cfg.omega[0] + cfg.omega[1]) / 2.0
    e -= j * cfg.omega_A * math.cos(th)
    g = cfg.interaction_sign * cfg.gamma
    if cfg.rwa:
        e += math.sqrt(j) * g * math.sin(th) * (q * math.cos(ph) + p * math.sin(ph))
    else:
        e += 2.0 * math.sqrt(j) * g * q * math.sin(th) * math.cos(ph)
    return e


# -- 2-level critical points -------------------------------------------------


def critical_coupling_2level(cfg: ModelConfig) -> float:
    """gamma_c = sqrt(Omega omega_A) in the RWA, half that for the full model."""
    Omega = cfg.modes[0].frequency
    gc = math.sqrt(Omega * cfg.omega_A)
    return gc if cfg.rwa else gc / 2.0


def critical_points_2level(cfg: ModelConfig) -> list[CriticalPoint]:
    """Closed-form critical points of the 2-level coherent surface.

    Writing u = (gamma/gamma_c)^2, the collective minimum sits at
    cos(theta_c) = 1/u with total energy -(N omega_A / 4)(u + 1/u); the two
    normal critical points are the Bloch poles.
    """
    if cfg.n_levels != 2:
        raise ConfigurationError("2-level critical points require a 2-level model")
    N, wA = cfg.N, cfg.omega_A
    Omega = cfg.modes[0].frequency
    off = N * (cfg.omega[0] + cfg.omega[1]) / 2.0
    g = cfg.gamma
    gc = critical_coupling_2level(cfg)

    pts = [
        CriticalPoint(
            CoherentParams(theta=0.0), off - N * wA / 2.0, 0.0,
            "NormalNorth" if g <= gc else "Collective-boundary-north",
        ),
        CriticalPoint(
            CoherentParams(theta=math.pi), off + N * wA / 2.0, float(N),
            "NormalSouth",
        ),
    ]
    if gc > 0 and g > gc:
        u = (g / gc) ** 2
        c = 1.0 / u
        th = math.acos(c)
        s = math.sqrt(1.0 - c * c)
        j = N / 2.0
        factor = 2.0 if not cfg.rwa else 1.0
        qc = -factor * math.sqrt(j) * g * s / Omega * cfg.interaction_sign
        e0 = off - (N * wA / 4.0) * (u + 1.0 / u)
        lam = qc * qc / 2.0 + (N / 2.0) * (1.0 - c)
        pts.append(
            CriticalPoint(CoherentParams(q=(qc,), theta=th, phi=0.0), e0, lam,
                          "Collective")
        )
    return pts


# -- numeric minimisation -----------------------------------------------------


def minimize_surface(energy_fn, seeds, tol: float = 1e-9):
    """Derivative-free multistart local minimisation.

    Runs Nelder-Mead from every seed and returns (x_best, e_best); the
    reported energy is an upper bound on the true surface minimum.
    """
    best = None
    for seed in seeds:
        x0 = np.atleast_1d(np.asarray(seed, dtype=float))
        res = minimize(
            energy_fn, x0, method="Nelder-Mead",
            options={"xatol": tol, "fatol": tol, "maxiter": 4000, "maxfev": 8000},
        )
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best[1] - 0.0:
            best = (np.atleast_1d(res.x), float(res.fun))
    if best is None:
        raise OptimizationError("no seed converged to a finite minimum")
    return best


def _default_seeds(cfg: ModelConfig):
    """Fixed 3^d lattice over the parameter box plus the normal-state point."""
    n, l = cfg.n_levels, cfg.n_modes
    mu_max = max((v for (_j, _k, v) in cfg.mu), default=0.0)
    om_min = min(m.frequency for m in cfg.modes)
    qb = 2.0 * math.sqrt(cfg.N) * (mu_max / om_min + 0.5)
    dims = [(-qb, 0.0, qb)] * l + [(-1.5, 0.0, 1.5)] * (n - 1)
    seeds = [np.zeros(l + n - 1)]
    grid = np.meshgrid(*dims, indexing="ij")
    pts = np.stack([g.ravel() for g in grid], axis=-1)
    seeds.extend(pts)
    return seeds


def _params_from_x(x, cfg: ModelConfig) -> CoherentParams:
    l, n = cfg.n_modes, cfg.n_levels
    q = tuple(x[:l])
    w = (1.0,) + tuple(x[l:l + n - 1])
    return CoherentParams(q=q, p=(0.0,) * l, weights=tuple(complex(v) for v in w))


def minimize_coherent(cfg: ModelConfig, seeds=None, tol: float = 1e-10) -> CriticalPoint:
    """Global coherent-surface minimum via real-parameter multistart search.

    Real quadratures and level weights suffice: the Hamiltonian is real in
    the product basis, so phases can be gauged away along the transition
    tree.
    """

    def fn(x):
        return coherent_energy(_params_from_x(x, cfg), cfg)

    if seeds is None:
        seeds = _default_seeds(cfg)
    x, e = minimize_surface(fn, seeds, tol)
    params = _params_from_x(x, cfg)
    nph = sum(abs(a) ** 2 for a in params.alpha)
    region = "Normal" if nph < 0.5 else "Collective"
    return CriticalPoint(params, e, float("nan"), region)


# -- closed-form separatrices --------------------------------------------------


@dataclass(frozen=True)
class XiSeparatrix:
    """Normal/collective boundary of the single-mode 3-level Xi configuration.

    With one mode driving both rungs the condensate couples the two
    transitions, bending the boundary into the circle
    Omega omega21 = mu12^2 + (|mu23| - sqrt(Omega omega31))^2 once mu23
    passes the bend; with two independent modes no such combined
    condensation occurs and the boundary stays at mu12 = sqrt(Omega omega21).
    """

    Omega12: float
    Omega23: float
    omega21: float
    omega31: float

    @property
    def mu23_star(self) -> float:
        """Coupling where the boundary bends and the transition order flips."""
        return math.sqrt(self.Omega23 * self.omega31)

    def mu12(self, mu23: float) -> float:
        ex = abs(mu23) - self.mu23_star
        val = self.Omega12 * self.omega21 - (ex * ex if ex > 0 else 0.0)
        if val < 0:
            return 0.0
        return math.sqrt(val)

    def order(self, mu23: float) -> str:
        return "second" if abs(mu23) < self.mu23_star else "first"


def xi_separatrix(cfg: ModelConfig) -> XiSeparatrix:
    if cfg.configuration != "Xi":
        raise ConfigurationError("Xi separatrix requires the Xi configuration")
    if cfg.n_modes != 1:
        raise ConfigurationError(
            "the bent-boundary closed form holds for the single-mode Xi model"
        )
    w21 = cfg.omega[1] - cfg.omega[0]
    w31 = cfg.omega[2] - cfg.omega[0]
    if w21 <= 0:
        raise InvalidParameterError("omega21 must be positive")
    O12 = cfg.modes[cfg.mode_index(1, 2)].frequency
    O23 = cfg.modes[cfg.mode_index(2, 3)].frequency
    return XiSeparatrix(O12, O23, w21, w31)


def triple_point(cfg: ModelConfig) -> tuple[float, float]:
    """(mu12, mu23) where the M = 0, 1, 2 regions meet (Xi, total resonance).

    RWA: (sqrt(Omega omega21), sqrt(2 Omega omega32)); full model: half.
    """
    if cfg.configuration != "Xi":
        raise ConfigurationError("triple point requires the Xi configuration")
    w21 = cfg.omega[1] - cfg.omega[0]
    w32 = cfg.omega[2] - cfg.omega[1]
    O12 = cfg.modes[cfg.mode_index(1, 2)].frequency
    O23 = cfg.modes[cfg.mode_index(2, 3)].frequency
    if not (math.isclose(O12, w21) and math.isclose(O23, w32) and math.isclose(O12, O23)):
        raise InvalidParameterError("triple point defined at total resonance")
    k = 1.0 if cfg.rwa else 0.5
    return (k * math.sqrt(O12 * w21), k * math.sqrt(2.0 * O23 * w32))
