"""Parameter-grid scans, fidelity-susceptibility separatrix detection,
region labeling and transition-order classification.

A scan walks a rectangular grid in coupling space, solving for the ground
state at every point with one of three solvers (exact diagonalization,
coherent surface minimum, SAS sector minimum), and records ground energy,
excitation expectations and the fidelity susceptibility between
neighbouring ground states along each axis.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import enumerate_basis
from .coherent import CoherentParams, OptimizationError, coherent_energy, \
    minimize_surface
from .config import InvalidParameterError, ModelConfig
from .operators import constants_of_motion, hamiltonian_terms, sector_blocks
from .sas import DegenerateProjectionError, SasParams, coherent_overlap, \
    sas_energy, sas_overlap
from .solver import SolverError, StateVector, block_ground_state, \
    lowest_eigenpairs, susceptibility

__all__ = [
    "GridAxis",
    "PhaseDiagram",
    "Separatrix",
    "PathError",
    "scan",
    "detect_separatrix",
    "classify_order",
    "label_regions",
    "write_csv",
]

_FMT = "%.17g"
PHOTON_DOMINANCE_CUT = 0.5


class PathError(ValueError):
    """A classification path crosses no boundary or more than one."""


@dataclass(frozen=True)
class GridAxis:
    """One scan axis over a coupling key such as ``mu12`` or ``gamma``."""

    name: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0 or self.stop < self.start:
            raise InvalidParameterError("need step > 0 and stop >= start")

    @property
    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class PhaseDiagram:
    """Grid of per-point ground-state records.

    ``E0``, the expectation arrays in ``exc`` and the per-axis ``chi`` arrays
    all share the grid shape (one dimension per axis, in axis order).
    ``chi[a][idx]`` is the susceptibility between ``idx`` and its successor
    along axis ``a`` (trailing slice zero).
    """

    cfg: ModelConfig
    axes: tuple[GridAxis, ...]
    solver: str
    E0: np.ndarray
    exc: dict[str, np.ndarray]
    chi: list[np.ndarray]
    labels: np.ndarray
    valid: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.E0.shape

    @property
    def invalid_count(self) -> int:
        return int((~self.valid).sum())

    def axis_values(self, a: int) -> np.ndarray:
        return self.axes[a].values

    def line(self, axis: int, index: tuple[int, ...]):
        """Grid indices of the 1D path along ``axis`` through ``index``."""
        idx = list(index)
        out = []
        for i in range(self.shape[axis]):
            idx[axis] = i
            out.append(tuple(idx))
        return out


@dataclass
class Separatrix:
    """Detected boundary as per-segment point lists on grid-cell edges."""

    polylines: list[list[tuple[float, ...]]]
    order_tags: list[str]

    @property
    def points(self) -> list[tuple[float, ...]]:
        return [p for line in self.polylines for p in line]


# -- per-point solvers ---------------------------------------------------------


def _exact_points(cfg, axes, grids, threads):
    basis = enumerate_basis(cfg)
    h0, terms = hamiltonian_terms(cfg, basis)
    keys = [_coupling_pair(cfg, ax.name) for ax in axes]
    base_mu = cfg.mu_dict()
    ops = dict(constants_of_motion(cfg, basis))
    from .operators import number_operator, population_operator

    for m in range(cfg.n_modes):
        ops[f"n{m + 1}"] = number_operator(cfg, basis, m)
    for i in range(1, cfg.n_levels + 1):
        ops[f"A{i}{i}"] = population_operator(cfg, basis, i)

    blocks = sector_blocks(cfg, basis) if cfg.rwa else None

    def solve(point_vals):
        mu = dict(base_mu)
        for key, v in zip(keys, point_vals):
            mu[key] = v
        h = h0.matrix.copy()
        for (j, k), v in mu.items():
            h = h + v * terms[(j, k)].matrix
        from .operators import SparseOperator

        H = SparseOperator(basis, h.tocsr())
        if blocks is not None:
            e0, g = block_ground_state(H, blocks)
        else:
            r = lowest_eigenpairs(H, 1)
            e0, g = r.energies[0], r.vectors[0]
        ex = {name: float(np.vdot(g.amps, op.matrix @ g.amps).real)
              for name, op in ops.items()}
        return e0, ex, g

    return _map_grid(grids, solve, threads), sorted(ops)


def _variational_points(cfg, axes, grids, threads, solver, tol=1e-8):
    keys = [_coupling_pair(cfg, ax.name) for ax in axes]
    nvar = cfg.n_modes + cfg.n_levels - 1

    def params_of(x):
        w = (1.0,) + tuple(x[cfg.n_modes:])
        return CoherentParams(q=tuple(x[:cfg.n_modes]),
                              p=(0.0,) * cfg.n_modes,
                              weights=tuple(complex(v) for v in w))

    def solve_at(cfg_pt, warm):
        qb = 2.0 * math.sqrt(cfg.N) * (
            max((v for (_j, _k, v) in cfg_pt.mu), default=0.0)
            / min(m.frequency for m in cfg_pt.modes) + 0.5
        )
        seeds = [np.zeros(nvar)]
        for sgn in (-1.0, 1.0):
            s = np.full(nvar, sgn)
            s[:cfg.n_modes] *= qb
            seeds.append(s)
        seeds.append(np.concatenate([np.full(cfg.n_modes, -qb),
                                     np.ones(cfg.n_levels - 1)]))
        if warm is not None:
            seeds.insert(0, warm)

        if solver == "coherent":
            def fn(x):
                return coherent_energy(params_of(x), cfg_pt)

            x, e = minimize_surface(fn, seeds, tol)
            return e, params_of(x), None
        # SAS: minimise over every parity sector
        best = None
        for parity in _parity_sectors(cfg):
            def fn(x, parity=parity):
                try:
                    return sas_energy(SasParams(params_of(x), parity), cfg_pt)
                except DegenerateProjectionError:
                    return math.inf
            x, e = minimize_surface(fn, seeds, tol)
            if best is None or e < best[0]:
                best = (e, params_of(x), parity)
        return best

    shape = tuple(len(ax) for ax in axes)
    results = np.empty(shape, dtype=object)
    warm = None
    for idx in np.ndindex(shape):
        vals = [axes[a].values[i] for a, i in enumerate(idx)]
        cfg_pt = cfg.with_couplings(**{f"mu{j}{k}": v
                                       for (j, k), v in zip(keys, vals)})
        try:
            e, params, parity = solve_at(cfg_pt, warm)
            warm = np.concatenate([
                [q for q in params.q],
                np.asarray(params.weights[1:], dtype=complex).real,
            ])
            ex = {f"n{m + 1}": abs(a) ** 2 for m, a in enumerate(params.alpha)}
            w = np.asarray(params.weights, dtype=complex)
            wn2 = np.abs(w) ** 2 / float(np.sum(np.abs(w) ** 2))
            for i in range(cfg.n_levels):
                ex[f"A{i + 1}{i + 1}"] = cfg.N * float(wn2[i])
            results[idx] = (e, ex, (params, parity))
        except (OptimizationError, DegenerateProjectionError) as err:
            results[idx] = err
            warm = None
    names = [f"n{m + 1}" for m in range(cfg.n_modes)] + [
        f"A{i}{i}" for i in range(1, cfg.n_levels + 1)
    ]
    return results, sorted(names)


def _parity_sectors(cfg):
    import itertools

    return list(itertools.product((1, -1), repeat=cfg.n_modes))


def _coupling_pair(cfg: ModelConfig, name: str) -> tuple[int, int]:
    if name == "gamma":
        return (1, 2)
    if name.startswith("mu") and len(name) == 4 and name[2:].isdigit():
        return (int(name[2]), int(name[3]))
    raise InvalidParameterError(f"unknown axis coupling {name!r}")


def _map_grid(grids, solve, threads):
    shape = tuple(len(g) for g in grids)
    idxs = list(np.ndindex(shape))
    pts = [[grids[a][i] for a, i in enumerate(idx)] for idx in idxs]

    def safe(p):
        try:
            return solve(p)
        except SolverError as err:
            return err

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(safe, pts))
    else:
        vals = [safe(p) for p in pts]
    results = np.empty(shape, dtype=object)
    for idx, v in zip(idxs, vals):
        results[idx] = v
    return results


# -- the scan ------------------------------------------------------------------


def scan(cfg: ModelConfig, axes, solver: str = "exact",
         threads: int = 1) -> PhaseDiagram:
    """Ground-state scan over a rectangular coupling grid.

    ``solver`` is one of ``exact``, ``coherent``, ``sas``.  Points where the
    solver fails are marked invalid and skipped by the downstream analysis.
    """
    axes = tuple(axes)
    if not axes or any(len(ax) == 0 for ax in axes):
        raise InvalidParameterError("grid must be nonempty")
    if solver not in ("exact", "coherent", "sas"):
        raise InvalidParameterError(f"unknown solver {solver!r}")
    grids = [ax.values for ax in axes]
    shape = tuple(len(g) for g in grids)

    if solver == "exact":
        results, names = _exact_points(cfg, axes, grids, threads)
    else:
        results, names = _variational_points(cfg, axes, grids, threads, solver)

    E0 = np.full(shape, np.nan)
    valid = np.zeros(shape, dtype=bool)
    exc = {n: np.full(shape, np.nan) for n in names}
    payload = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        r = results[idx]
        if isinstance(r, Exception):
            continue
        e, ex, extra = r
        E0[idx] = e
        valid[idx] = True
        for n in names:
            exc[n][idx] = ex[n]
        payload[idx] = extra

    chi = [np.zeros(shape) for _ in axes]
    for a, ax in enumerate(axes):
        for idx in np.ndindex(shape):
            if idx[a] + 1 >= shape[a]:
                continue
            nxt = idx[:a] + (idx[a] + 1,) + idx[a + 1:]
            if not (valid[idx] and valid[nxt]):
                continue
            F = _pair_fidelity(cfg, solver, payload[idx], payload[nxt])
            if F is not None:
                chi[a][idx] = susceptibility(F, ax.step)

    pd = PhaseDiagram(cfg, axes, solver, E0, exc, chi,
                      np.full(shape, "", dtype=object), valid)
    return label_regions(pd)


def _pair_fidelity(cfg, solver, x1, x2):
    if solver == "exact":
        return min(abs(x1.overlap(x2)) ** 2, 1.0)
    p1, s1 = x1
    p2, s2 = x2
    if solver == "coherent":
        return min(abs(coherent_overlap(p1, p2, cfg)) ** 2, 1.0)
    if s1 != s2:
        return 0.0
    try:
        return min(abs(sas_overlap(SasParams(p1, s1), SasParams(p2, s2), cfg)) ** 2, 1.0)
    except DegenerateProjectionError:
        return None


# -- labels --------------------------------------------------------------------


def label_regions(pd: PhaseDiagram, cut: float = PHOTON_DOMINANCE_CUT) -> PhaseDiagram:
    """Attach region tags to every grid point.

    RWA diagrams are labeled by the (sharp) integer excitation eigenvalues;
    otherwise the point is Normal when every mode holds fewer than ``cut``
    photons, else S_jk for the dominant transition of the busiest mode.
    """
    cfg = pd.cfg
    for idx in np.ndindex(pd.shape):
        if not pd.valid[idx]:
            pd.labels[idx] = "invalid"
            continue
        if cfg.rwa and pd.solver == "exact":
            if cfg.n_modes == 1:
                name = "Lambda" if cfg.n_levels == 2 else "M"
                pd.labels[idx] = f"M={int(round(pd.exc[name][idx]))}"
            else:
                parts = [f"K{m + 1}={int(round(pd.exc[f'K{m + 1}'][idx]))}"
                         for m in range(cfg.n_modes)]
                pd.labels[idx] = ",".join(parts)
            continue
        nph = [pd.exc[f"n{m + 1}"][idx] for m in range(cfg.n_modes)]
        if all(v < cut for v in nph):
            pd.labels[idx] = "Normal"
            continue
        mode = int(np.argmax(nph))
        trans = cfg.modes[mode].transitions
        # among the mode's transitions pick the busiest upper level
        jk = max(trans, key=lambda t: pd.exc[f"A{t[1]}{t[1]}"][idx])
        pd.labels[idx] = f"S{jk[0]}{jk[1]}"
    return pd


# -- separatrix detection and order classification -----------------------------


def detect_separatrix(pd: PhaseDiagram, thresh: float = 10.0) -> Separatrix:
    """Cell edges where chi spikes above ``thresh`` x median or labels change.

    Edge midpoints are grouped into connected polylines by grid adjacency.
    """
    flagged = []  # midpoints in axis coordinates, plus integer edge ids
    pos = np.concatenate([c[c > 0].ravel() for c in pd.chi]) if pd.chi else []
    med = float(np.median(pos)) if len(pos) else 0.0
    for a in range(len(pd.axes)):
        vals = pd.axes[a].values
        for idx in np.ndindex(pd.shape):
            if idx[a] + 1 >= pd.shape[a]:
                continue
            nxt = idx[:a] + (idx[a] + 1,) + idx[a + 1:]
            if not (pd.valid[idx] and pd.valid[nxt]):
                continue
            hit = pd.labels[idx] != pd.labels[nxt]
            if not hit and med > 0:
                hit = pd.chi[a][idx] > thresh * med
            if hit:
                mid = [pd.axes[b].values[i] for b, i in enumerate(idx)]
                mid[a] = 0.5 * (vals[idx[a]] + vals[idx[a] + 1])
                flagged.append((tuple(2 * i for i in idx[:a])
                                + (2 * idx[a] + 1,)
                                + tuple(2 * i for i in idx[a + 1:]),
                                tuple(mid)))
    # group by adjacency on the doubled-index lattice
    polylines = []
    remaining = dict(flagged)
    while remaining:
        seed = next(iter(remaining))
        comp = [seed]
        remaining.pop(seed)
        frontier = [seed]
        while frontier:
            cur = frontier.pop()
            for other in list(remaining):
                if sum(abs(x - y) for x, y in zip(cur, other)) <= 2:
                    comp.append(other)
                    frontier.append(other)
                    remaining.pop(other)
        comp.sort()
        polylines.append([dict(flagged)[k] for k in comp])
    return Separatrix(polylines, ["unknown"] * len(polylines))


def classify_order(pd: PhaseDiagram, axis: int, index: tuple[int, ...],
                   jump_factor: float = 10.0) -> str:
    """Order of the transition crossed by the 1D path along ``axis``.

    A jump of the first finite difference of E0 above ``jump_factor`` times
    the largest off-boundary second difference marks a first-order
    transition, otherwise second order.  (At a second-order point the second
    difference only steps up to the curvature already present on the
    collective side, so the ratio stays of order one; a slope discontinuity
    towers over it.)  The path must cross exactly one detected boundary.
    """
    line = pd.line(axis, index)
    e = np.array([pd.E0[i] for i in line])
    labels = [pd.labels[i] for i in line]
    if np.isnan(e).any():
        raise PathError("path contains invalid points")
    h = pd.axes[axis].step
    d1 = np.diff(e) / h
    d2 = np.abs(np.diff(d1))

    crossings = [i for i in range(len(labels) - 1) if labels[i] != labels[i + 1]]
    if not crossings:
        chi_line = np.array([pd.chi[axis][i] for i in line[:-1]])
        med = float(np.median(chi_line[chi_line > 0])) if (chi_line > 0).any() else 0.0
        crossings = [int(np.argmax(chi_line))] if med > 0 and chi_line.max() > 10 * med else []
    if not crossings:
        raise PathError("path crosses no detected boundary")
    groups = [[crossings[0]]]
    for c in crossings[1:]:
        if c - groups[-1][-1] <= 2:
            groups[-1].append(c)
        else:
            groups.append([c])
    if len(groups) > 1:
        raise PathError(f"path crosses {len(groups)} boundaries")
    lo, hi = groups[0][0], groups[0][-1]

    window = set(range(max(lo - 2, 0), min(hi + 3, len(d2))))
    off = [d2[i] for i in range(len(d2)) if i not in window]
    floor = max(float(np.max(off)) if off else 0.0, 1e-12 * max(1.0, np.abs(e).max()))
    peak = max((d2[i] for i in window if i < len(d2)), default=0.0)
    return "first" if peak > jump_factor * floor else "second"


# -- CSV export ------------------------------------------------------------------


def write_csv(pd: PhaseDiagram, path) -> None:
    """One row per grid point: axes, E0 (total, per particle), expectations,
    chi per axis, label, validity flag."""
    exc_names = sorted(pd.exc)
    header = [ax.name for ax in pd.axes] + ["E0", "E0_per_particle"] + exc_names \
        + [f"chi_{ax.name}" for ax in pd.axes] + ["label", "valid"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for idx in np.ndindex(pd.shape):
            row = [_FMT % pd.axes[a].values[i] for a, i in enumerate(idx)]
            row += [_FMT % pd.E0[idx], _FMT % (pd.E0[idx] / pd.cfg.N)]
            row += [_FMT % pd.exc[n][idx] for n in exc_names]
            row += [_FMT % pd.chi[a][idx] for a in range(len(pd.axes))]
            row += [pd.labels[idx], "1" if pd.valid[idx] else "0"]
            w.writerow(row)
