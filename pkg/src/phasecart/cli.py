"""Command-line front end emitting CSV/text artifacts.

Every run creates ``<outdir>/<command>-<timestamp>/`` holding the command's
CSV outputs plus ``manifest.txt`` with a sha256 checksum per file.  Floats
are written with 17 significant digits so CSVs round-trip losslessly.
Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import BracketError, fit_power_law, mu_critical_vs_N, \
    write_fit_report
from .basis import enumerate_basis
from .coherent import CutoffError, OptimizationError, critical_points_2level, \
    minimize_coherent, triple_point, xi_separatrix
from .config import ConfigurationError, InvalidParameterError, ModelConfig, \
    parse_config_text
from .operators import build_hamiltonian, constants_of_motion, number_operator
from .reduced_basis import E10, E15, OrderRangeError, build_reduced_basis, \
    dimension_report, exact_box_basis, max_order, photon_cutoffs
from .reduction import compose_diagram, reduce_tree, tree_csv, tree_text, \
    two_level_subsystems
from .sas import DegenerateProjectionError, minimize_sas
from .scan import GridAxis, PathError, detect_separatrix, scan, write_csv
from .solver import SolverError, TruncationError, expectation, fluctuation, \
    ground_state, lowest_eigenpairs

_FMT = "%.17g"

_USAGE_ERRORS = (InvalidParameterError, ConfigurationError, OSError,
                 ValueError, KeyError)
_NUMERIC_ERRORS = (SolverError, TruncationError, OptimizationError,
                   CutoffError, DegenerateProjectionError, BracketError,
                   PathError, OrderRangeError, np.linalg.LinAlgError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# -- plumbing ---------------------------------------------------------------


def _load_config(path: str, overrides: list[str]) -> ModelConfig:
    """Config from file with ``key=value`` overrides taking precedence."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for ov in overrides:
        if "=" not in ov:
            raise InvalidParameterError(f"override {ov!r} is not key=value")
        key = ov.split("=", 1)[0].strip()
        lines = [ln for ln in lines
                 if ln.split("#", 1)[0].split("=", 1)[0].strip() != key]
        lines.append(ov)
    return parse_config_text("\n".join(lines))


def _parse_axes(spec: str) -> tuple[GridAxis, ...]:
    """``mu12:0:2:0.02,mu23:0:2.5:0.02`` -> GridAxis tuple."""
    axes = []
    for part in spec.split(","):
        toks = part.split(":")
        if len(toks) != 4:
            raise InvalidParameterError(
                f"axis {part!r} must be name:start:stop:step")
        axes.append(GridAxis(toks[0], float(toks[1]), float(toks[2]),
                             float(toks[3])))
    return tuple(axes)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PHASECART_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_dir(outdir: str, command: str) -> str:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    path = os.path.join(outdir, f"{command}-{stamp}")
    n = 1
    while os.path.exists(path):
        path = os.path.join(outdir, f"{command}-{stamp}-{n}")
        n += 1
    os.makedirs(path)
    return path


def _write_manifest(rundir: str, args, t0: float) -> None:
    names = sorted(f for f in os.listdir(rundir) if f != "manifest.txt")
    lines = [
        f"command = {args.command}",
        f"config = {getattr(args, 'config', '')}",
        f"outdir = {rundir}",
        "overrides = " + ";".join(getattr(args, "set", []) or []),
        f"wall_time_s = {time.time() - t0:.3f}",
        f"version = phasecart {__version__}",
    ]
    for name in names:
        with open(os.path.join(rundir, name), "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        lines.append(f"file {name} sha256 {digest}")
    with open(os.path.join(rundir, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _csv(rundir: str, name: str, header, rows) -> None:
    with open(os.path.join(rundir, name), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    if isinstance(v, float):
        return _FMT % v
    return str(v)


# -- subcommands --------------------------------------------------------------


def _cmd_spectrum(cfg: ModelConfig, args, rundir: str) -> None:
    basis = enumerate_basis(cfg)
    H = build_hamiltonian(cfg, basis)
    r = lowest_eigenpairs(H, args.k)
    consts = dict(constants_of_motion(cfg, basis))
    names = sorted(consts)
    rows = []
    for i, (e, v, res) in enumerate(zip(r.energies, r.vectors, r.residuals)):
        rows.append([i, _FMT % e, _FMT % res]
                    + [_FMT % expectation(v, consts[n]) for n in names])
    _csv(rundir, "spectrum.csv", ["index", "energy", "residual"] + names, rows)


def _cmd_surface(cfg: ModelConfig, args, rundir: str) -> None:
    rows = []
    l, n = cfg.n_modes, cfg.n_levels
    head = ["method", "sector", "region", "energy"] \
        + [f"q{m + 1}" for m in range(l)] + [f"p{m + 1}" for m in range(l)] \
        + [f"w{i + 1}" for i in range(n)]

    def row(method, sector, cp):
        w = np.asarray(cp.params.matter_weights(n), dtype=complex)
        return [method, sector, cp.region, _FMT % cp.energy] \
            + [_FMT % v for v in cp.params.q] + [_FMT % v for v in cp.params.p] \
            + [_FMT % v for v in w.real]

    if args.method in ("coherent", "both"):
        rows.append(row("coherent", "", minimize_coherent(cfg)))
    if args.method in ("sas", "both"):
        sm = minimize_sas(cfg)
        for parity in sorted(sm.sectors, reverse=True):
            sector = "".join("+" if s > 0 else "-" for s in parity)
            rows.append(row("sas", sector, sm.sectors[parity]))
    _csv(rundir, "surface.csv", head, rows)


def _cmd_separatrix(cfg: ModelConfig, args, rundir: str) -> None:
    if cfg.n_levels == 2:
        rows = []
        for cp in critical_points_2level(cfg):
            th = cp.params.theta if cp.params.theta is not None else math.nan
            q = cp.params.q[0] if cp.params.q else 0.0
            rows.append([cp.region, _FMT % cp.energy, _FMT % cp.lambda_c,
                         _FMT % q, _FMT % th])
        _csv(rundir, "separatrix.csv",
             ["region", "energy", "lambda_c", "q", "theta"], rows)
        return
    if cfg.configuration == "Xi" and cfg.n_modes == 1:
        sep = xi_separatrix(cfg)
        lo, hi, step = args.mu23_range
        rows = []
        for mu23 in GridAxis("mu23", lo, hi, step).values:
            rows.append([_FMT % mu23, _FMT % sep.mu12(mu23), sep.order(mu23)])
        _csv(rundir, "separatrix.csv", ["mu23", "mu12_boundary", "order"], rows)
        try:
            mu12, mu23 = triple_point(cfg)
        except InvalidParameterError:
            return  # not at total resonance; no triple point to report
        _csv(rundir, "triple_point.csv", ["mu12_triple", "mu23_triple"],
             [[_FMT % mu12, _FMT % mu23]])
        return
    rows = [[s.j, s.k, _FMT % s.Omega, _FMT % s.omega_kj,
             _FMT % s.critical_coupling(cfg.rwa)]
            for s in two_level_subsystems(cfg)]
    _csv(rundir, "separatrix.csv",
         ["j", "k", "Omega", "omega_kj", "mu_c"], rows)


def _cmd_scan(cfg: ModelConfig, args, rundir: str) -> None:
    axes = _parse_axes(args.axes)
    pd = scan(cfg, axes, solver=args.solver, threads=_threads(args))
    write_csv(pd, os.path.join(rundir, "scan.csv"))
    sep = detect_separatrix(pd)
    rows = []
    for i, (line, tag) in enumerate(zip(sep.polylines, sep.order_tags)):
        for pt in line:
            rows.append([i, tag] + [_FMT % v for v in pt])
    _csv(rundir, "boundary.csv",
         ["polyline", "order"] + [ax.name for ax in axes], rows)


def _cmd_reduce(cfg: ModelConfig, args, rundir: str) -> None:
    tree = reduce_tree(cfg)
    tree_csv(tree, os.path.join(rundir, "tree.csv"))
    with open(os.path.join(rundir, "tree.txt"), "w", encoding="utf-8") as fh:
        fh.write(tree_text(tree) + "\n")
    subs = two_level_subsystems(cfg)
    _csv(rundir, "subsystems.csv",
         ["j", "k", "Omega", "omega_j", "omega_k", "mu", "mu_c"],
         [[s.j, s.k, _FMT % s.Omega, _FMT % s.omega_j, _FMT % s.omega_k,
           _FMT % s.mu, _FMT % s.critical_coupling(cfg.rwa)] for s in subs])
    if args.axes:
        pd = compose_diagram(subs, _parse_axes(args.axes), cfg)
        write_csv(pd, os.path.join(rundir, "compose.csv"))


def _cmd_basis(cfg: ModelConfig, args, rundir: str) -> None:
    eps = {"e10": E10, "e15": E15}.get(args.eps, None)
    if eps is None:
        eps = float(args.eps)
    x = None if args.x is None else \
        {(j, k): args.x for (j, k, _v) in cfg.mu}
    cut = photon_cutoffs(cfg, x=x, eps=eps)
    _csv(rundir, "cutoffs.csv", ["j", "k", "m"],
         [[j, k, m] for (j, k), m in sorted(cut.items())])
    orders = range(max_order(cut) + 1) if args.order is None else [args.order]
    dimension_report(cfg, cut, orders, os.path.join(rundir, "dims.csv"))


def _cmd_exponent(cfg: ModelConfig, args, rundir: str) -> None:
    n_list = [int(s) for s in args.N_list.split(",")]
    lo, hi = (float(s) for s in args.bracket.split(":"))
    series = mu_critical_vs_N(cfg, n_list, args.method, coupling=args.coupling,
                              bracket=(lo, hi), pseudospin=args.pseudospin)
    if args.mu_inf is not None:
        mu_inf = args.mu_inf
    else:
        pair = (1, 2) if args.coupling == "gamma" else \
            (int(args.coupling[2]), int(args.coupling[3]))
        sub = next(s for s in two_level_subsystems(cfg) if (s.j, s.k) == pair)
        mu_inf = sub.critical_coupling(cfg.rwa)
    fit = fit_power_law(series, mu_inf)
    write_fit_report(series, fit, os.path.join(rundir, "fit.csv"))


def _cmd_fluctuation(cfg: ModelConfig, args, rundir: str) -> None:
    if cfg.n_levels != 2:
        raise ConfigurationError("fluctuation sweep requires a 2-level model")
    axes = _parse_axes(args.axis)
    if len(axes) != 1 or axes[0].name != "gamma":
        raise InvalidParameterError("expected a single gamma axis")
    basis = enumerate_basis(cfg)
    nop = number_operator(cfg, basis, 0)
    rows = []
    for g in axes[0].values:
        c = cfg.with_couplings(gamma=float(g))
        _e, psi = ground_state(build_hamiltonian(c, basis))
        cp = minimize_coherent(c)
        nph = sum(abs(a) ** 2 for a in cp.params.alpha)
        rows.append([_FMT % g, _FMT % expectation(psi, nop),
                     _FMT % fluctuation(psi, nop), _FMT % nph, _FMT % nph])
    _csv(rundir, "fluctuation.csv",
         ["gamma", "exact_n", "exact_var_n", "coherent_n", "coherent_var_n"],
         rows)


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "surface": _cmd_surface,
    "separatrix": _cmd_separatrix,
    "scan": _cmd_scan,
    "reduce": _cmd_reduce,
    "basis": _cmd_basis,
    "exponent": _cmd_exponent,
    "fluctuation": _cmd_fluctuation,
}


def _build_parser() -> _Parser:
    p = _Parser(prog="phasecart", description=__doc__)
    p.add_argument("--version", action="version",
                   version=f"phasecart {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="model config file")
        sp.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
        sp.add_argument("--outdir", default="out")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker pool size (default: PHASECART_THREADS "
                             "or available parallelism)")

    sp = sub.add_parser("spectrum", help="lowest eigenpairs")
    common(sp)
    sp.add_argument("--k", type=int, default=6)

    sp = sub.add_parser("surface", help="variational surface minima")
    common(sp)
    sp.add_argument("--method", choices=("coherent", "sas", "both"),
                    default="both")

    sp = sub.add_parser("separatrix", help="closed-form phase boundaries")
    common(sp)
    sp.add_argument("--mu23-range", type=lambda s: tuple(float(t) for t in s.split(":")),
                    default=(0.0, 2.5, 0.01), metavar="LO:HI:STEP")

    sp = sub.add_parser("scan", help="grid scan of ground-state data")
    common(sp)
    sp.add_argument("--axes", required=True,
                    metavar="name:start:stop:step[,...]")
    sp.add_argument("--solver", choices=("exact", "coherent", "sas"),
                    default="exact")

    sp = sub.add_parser("reduce", help="level-reduction tree and composition")
    common(sp)
    sp.add_argument("--axes", default=None,
                    metavar="name:start:stop:step[,...]",
                    help="also write a composed phase diagram over these axes")

    sp = sub.add_parser("basis", help="reduced-basis cutoffs and dimensions")
    common(sp)
    sp.add_argument("--order", type=int, default=None)
    sp.add_argument("--x", type=float, default=None,
                    help="coupling ratio mu/mu_c for the cutoff ladder")
    sp.add_argument("--eps", default="e10", help="e10, e15 or a float")

    sp = sub.add_parser("exponent", help="critical-coupling series and fit")
    common(sp)
    sp.add_argument("--method", choices=("coherent", "sas", "exact"),
                    required=True)
    sp.add_argument("--N-list", default="8,16,32,64,128")
    sp.add_argument("--coupling", default="mu12")
    sp.add_argument("--bracket", default="0.4:1.2", metavar="LO:HI")
    sp.add_argument("--pseudospin", action="store_true",
                    help="N values are collective spin lengths j (atoms=2j)")
    sp.add_argument("--mu-inf", type=float, default=None)

    sp = sub.add_parser("fluctuation", help="exact vs coherent photon statistics")
    common(sp)
    sp.add_argument("--axis", required=True, metavar="gamma:start:stop:step")
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return 1
    t0 = time.time()
    try:
        cfg = _load_config(args.config, args.set)
        rundir = _run_dir(args.outdir, args.command)
        _COMMANDS[args.command](cfg, args, rundir)
        _write_manifest(rundir, args, t0)
    except _NUMERIC_ERRORS as err:
        print(f"phasecart {args.command}: numerical failure: {err}",
              file=sys.stderr)
        return 2
    except _USAGE_ERRORS as err:
        print(f"phasecart {args.command}: {err}", file=sys.stderr)
        return 1
    print(rundir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
