"""Critical-coupling series over the atom number and power-law fits.

Near a second-order transition the finite-N critical coupling approaches
its thermodynamic value as mu_c(N) = mu_inf + A N^s; the exponent s is read
off a least-squares line on ln(mu_c - mu_inf) versus ln N with mu_inf fixed
analytically (short series make three-parameter fits ill-conditioned).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .coherent import CoherentParams, coherent_energy, minimize_surface
from .config import InvalidParameterError, ModelConfig
from .basis import enumerate_basis
from .operators import build_hamiltonian, hamiltonian_terms, SparseOperator
from .sas import DegenerateProjectionError, SasParams, sas_energy
from .solver import fidelity, lowest_eigenpairs, susceptibility

__all__ = [
    "ScalingSeries",
    "PowerLawFit",
    "BracketError",
    "mu_critical_vs_N",
    "fit_power_law",
    "write_fit_report",
]

QUANTUM_EXPONENT = -2.0 / 3.0  # reference slope of the exact large-N series


class BracketError(RuntimeError):
    """The search bracket does not contain a transition."""


@dataclass(frozen=True)
class ScalingSeries:
    N_values: tuple[int, ...]
    mu_c: tuple[float, ...]
    method: str
    coupling: str = "mu12"

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.N_values, self.N_values[1:])):
            raise InvalidParameterError("N values must be ascending")
        if len(self.N_values) != len(self.mu_c):
            raise InvalidParameterError("one mu_c per N required")


@dataclass(frozen=True)
class PowerLawFit:
    s: float
    A: float
    r2: float
    mu_inf: float


# -- locating the transition -----------------------------------------------------


def _series_seeds(cfg: ModelConfig):
    """Deterministic seed set: normal point plus condensate guesses at
    several amplitudes (near a branch crossing the collective minimum is
    shallow, so a single large-q guess can miss it at large N)."""
    nvar = cfg.n_modes + cfg.n_levels - 1
    mu_max = max((v for (_j, _k, v) in cfg.mu), default=0.0)
    om_min = min(m.frequency for m in cfg.modes)
    qb = 2.0 * math.sqrt(cfg.N) * (mu_max / om_min + 0.5)
    seeds = [np.zeros(nvar)]
    for frac in (1.0, 0.5, 0.25, 0.1):
        for sgn in (-1.0, 1.0):
            s = np.zeros(nvar)
            s[:cfg.n_modes] = sgn * qb * frac
            s[cfg.n_modes:] = 0.8
            seeds.append(s)
    return seeds


def _params_of(x, cfg):
    w = (1.0,) + tuple(x[cfg.n_modes:])
    return CoherentParams(q=tuple(x[:cfg.n_modes]), p=(0.0,) * cfg.n_modes,
                          weights=tuple(complex(v) for v in w))


def _normal_energy(cfg: ModelConfig, method: str) -> float:
    params = CoherentParams(q=(0.0,) * cfg.n_modes, p=(0.0,) * cfg.n_modes,
                            weights=(1.0,) + (0.0,) * (cfg.n_levels - 1))
    if method == "coherent":
        return coherent_energy(params, cfg)
    return sas_energy(SasParams(params, (1,) * cfg.n_modes), cfg)


def _variational_indicator(cfg: ModelConfig, method: str, tol: float) -> bool:
    """True when the variational ground state is collective.

    The coherent surface becomes degenerate with the normal state exactly at
    mu_c, so the energy deficit marks the transition.  Parity projection
    lowers the energy below the normal state on both sides of the crossing,
    so for SAS the marker is the photon content of the global even-sector
    minimum, which jumps when the collective branch overtakes the normal one.
    """
    seeds = _series_seeds(cfg)
    if method == "coherent":
        def fn(x):
            return coherent_energy(_params_of(x, cfg), cfg)

        _x, e = minimize_surface(fn, seeds, tol)
        e_norm = _normal_energy(cfg, method)
        return e < e_norm - 1e-9 * max(1.0, abs(e_norm))

    even = (1,) * cfg.n_modes

    def fn(x):
        try:
            return sas_energy(SasParams(_params_of(x, cfg), even), cfg)
        except DegenerateProjectionError:
            return math.inf

    x, _e = minimize_surface(fn, seeds, tol)
    nph = sum(q * q / 2.0 for q in x[:cfg.n_modes])
    return nph > 0.8


def _bisect_variational(cfg, coupling, lo, hi, method, tol):
    def collective(mu):
        return _variational_indicator(cfg.with_couplings(**{coupling: mu}),
                                      method, min(tol * 1e-3, 1e-10))

    if collective(lo) or not collective(hi):
        raise BracketError(f"no transition of {coupling} in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if collective(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _chi_peak_exact(cfg, coupling, lo, hi, tol):
    """Golden-section maximisation of the fidelity susceptibility."""
    from .scan import _coupling_pair

    pair = _coupling_pair(cfg, coupling)
    basis = enumerate_basis(cfg)
    h0, terms = hamiltonian_terms(cfg, basis)
    base_mu = cfg.mu_dict()

    def ground(mu):
        cur = dict(base_mu)
        cur[pair] = mu
        h = h0.matrix.copy()
        for key, v in cur.items():
            h = h + v * terms[key].matrix
        r = lowest_eigenpairs(SparseOperator(basis, h.tocsr()), 1)
        return r.vectors[0]

    delta = max(tol, 1e-4)

    def chi(mu):
        return susceptibility(fidelity(ground(mu - delta / 2),
                                       ground(mu + delta / 2)), delta)

    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = chi(c), chi(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = chi(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = chi(d)
    mu_pk = 0.5 * (a + b)
    if min(abs(mu_pk - lo), abs(mu_pk - hi)) < 2 * tol:
        raise BracketError(f"chi peak sits on the bracket edge near {mu_pk}")
    return mu_pk


def mu_critical_vs_N(cfg: ModelConfig, N_list, method: str,
                     coupling: str = "mu12", bracket=(0.4, 1.2),
                     tol: float = 1e-5, pseudospin: bool = False) -> ScalingSeries:
    """Critical coupling per system size, located to ``tol`` by bisection
    (variational methods) or golden-section chi-peak search (exact).

    With ``pseudospin=True`` the entries of ``N_list`` are collective spin
    lengths j and each point is evaluated at atom number 2j; the series keeps
    j as its abscissa.  This is the convention under which the SAS critical
    series follows mu_c(j) = mu_inf + A j^(-11/21).
    """
    if method not in ("coherent", "sas", "exact"):
        raise InvalidParameterError(f"unknown method {method!r}")
    lo, hi = bracket
    out = []
    for N in N_list:
        atoms = 2 * int(N) if pseudospin else int(N)
        cfg_n = replace(cfg, N=atoms)
        if method == "exact":
            out.append(_chi_peak_exact(cfg_n, coupling, lo, hi, tol))
        else:
            out.append(_bisect_variational(cfg_n, coupling, lo, hi, method, tol))
    return ScalingSeries(tuple(int(n) for n in N_list), tuple(out), method, coupling)


# -- fitting --------------------------------------------------------------------


def fit_power_law(series: ScalingSeries, mu_inf: float) -> PowerLawFit:
    """Least-squares line on ln(mu_c - mu_inf) vs ln N."""
    if len(series.N_values) < 3:
        raise InvalidParameterError("need at least 3 points to fit")
    d = np.asarray(series.mu_c) - mu_inf
    if np.any(d <= 0):
        raise InvalidParameterError("all mu_c must exceed the asymptote")
    x = np.log(np.asarray(series.N_values, dtype=float))
    y = np.log(d)
    s, lnA = np.polyfit(x, y, 1)
    resid = y - (s * x + lnA)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(s), float(np.exp(lnA)), r2, mu_inf)


def write_fit_report(series: ScalingSeries, fit: PowerLawFit, path) -> None:
    """CSV rows: N, mu_c, ln N, ln(mu_c - mu_inf), s, A, r2."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "mu_c", "ln_N", "ln_dmu", "s", "A", "r2", "mu_inf",
                    "method"])
        for N, mu in zip(series.N_values, series.mu_c):
            w.writerow([N, "%.17g" % mu, "%.17g" % math.log(N),
                        "%.17g" % math.log(mu - fit.mu_inf),
                        "%.17g" % fit.s, "%.17g" % fit.A, "%.17g" % fit.r2,
                        "%.17g" % fit.mu_inf, series.method])
