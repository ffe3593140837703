import csv
import math

import numpy as np
import pytest

from phasecart.basis import enumerate_basis
from phasecart.coherent import critical_coupling_2level, critical_points_2level
from phasecart.config import InvalidParameterError, two_level
from phasecart.operators import build_hamiltonian
from phasecart.scan import (
    GridAxis,
    PathError,
    classify_order,
    detect_separatrix,
    scan,
    write_csv,
)
from phasecart.solver import ground_state

from test_config import xi_config


class TestGridAxis:
    def test_values(self):
        ax = GridAxis("gamma", 0.0, 1.0, 0.25)
        assert np.allclose(ax.values, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert len(ax) == 5

    def test_inclusive_endpoint_with_roundoff(self):
        ax = GridAxis("gamma", 0.0, 0.3, 0.1)
        assert len(ax) == 4

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            GridAxis("gamma", 1.0, 0.0, 0.1)
        with pytest.raises(InvalidParameterError):
            GridAxis("gamma", 0.0, 1.0, -0.1)


def test_exact_scan_energies_match_direct_solve():
    cfg = two_level(1.0, 0.0, 4, cutoff=10)
    ax = GridAxis("gamma", 0.0, 0.8, 0.4)
    pd = scan(cfg, [ax], solver="exact")
    assert pd.shape == (3,)
    assert pd.valid.all()
    for i, g in enumerate(ax.values):
        pt = cfg.with_couplings(gamma=float(g))
        e0, _ = ground_state(build_hamiltonian(pt, enumerate_basis(pt)))
        assert pd.E0[i] == pytest.approx(e0, abs=1e-10)


def test_rwa_labels_are_sharp_sectors():
    cfg = two_level(1.0, 0.1, 4, rwa=True, cutoff=10)
    pd = scan(cfg, [GridAxis("gamma", 0.0, 0.5, 0.25)], solver="exact")
    assert pd.labels[0] == "M=0"
    assert all(lbl.startswith("M=") for lbl in pd.labels)


def test_full_model_labels_and_chi_peak():
    """The chi spike and the Normal -> S12 label change both sit at the
    coherent critical coupling for large enough N."""
    cfg = two_level(1.0, 0.0, 14, cutoff=24)
    gc = critical_coupling_2level(cfg)
    ax = GridAxis("gamma", 0.2, 0.8, 0.05)
    pd = scan(cfg, [ax], solver="exact")
    chi = pd.chi[0][:-1]
    peak = ax.values[int(np.argmax(chi))]
    assert abs(peak - gc) < 0.1
    assert pd.labels[0] == "Normal"
    assert pd.labels[-1] == "S12"


def test_coherent_scan_matches_closed_form():
    cfg = two_level(1.0, 0.0, 10, cutoff=8)
    ax = GridAxis("gamma", 0.1, 0.9, 0.2)
    pd = scan(cfg, [ax], solver="coherent")
    assert pd.valid.all()
    for i, g in enumerate(ax.values):
        pts = critical_points_2level(cfg.with_couplings(gamma=float(g)))
        e_min = min(p.energy for p in pts)
        assert pd.E0[i] == pytest.approx(e_min, abs=1e-6)


def test_sas_scan_below_coherent_scan():
    cfg = two_level(1.0, 0.0, 6, cutoff=8)
    ax = GridAxis("gamma", 0.3, 0.7, 0.2)
    coh = scan(cfg, [ax], solver="coherent")
    sas = scan(cfg, [ax], solver="sas")
    assert (sas.E0 <= coh.E0 + 1e-8).all()


def test_detect_separatrix_and_classify_second_order():
    cfg = two_level(1.0, 0.0, 16, cutoff=26)
    ax = GridAxis("gamma", 0.2, 0.8, 0.05)
    pd = scan(cfg, [ax], solver="coherent")
    sep = detect_separatrix(pd)
    assert sep.points, "no boundary detected"
    gc = critical_coupling_2level(cfg)
    assert min(abs(p[0] - gc) for p in sep.points) <= ax.step
    assert classify_order(pd, 0, (0,)) == "second"


def test_classify_order_requires_a_boundary():
    cfg = two_level(1.0, 0.0, 6, cutoff=8)
    pd = scan(cfg, [GridAxis("gamma", 0.0, 0.2, 0.1)], solver="coherent")
    with pytest.raises(PathError):
        classify_order(pd, 0, (0,))


def test_two_axis_scan_shape_and_labels():
    cfg = xi_config(mu12=0.0, mu23=0.0, N=2, rwa=True, cutoffs=(6, 6))
    axes = [GridAxis("mu12", 0.0, 1.6, 0.8), GridAxis("mu23", 0.0, 1.6, 0.8)]
    pd = scan(cfg, axes, solver="exact")
    assert pd.shape == (3, 3)
    assert pd.labels[0, 0] == "K1=0,K2=0"
    # strong mu12 drives the first excitation number up
    assert pd.exc["K1"][2, 0] > 0.5


def test_scan_rejects_bad_arguments():
    cfg = two_level(1.0, 0.1, 2)
    with pytest.raises(InvalidParameterError):
        scan(cfg, [], solver="exact")
    with pytest.raises(InvalidParameterError):
        scan(cfg, [GridAxis("gamma", 0, 1, 0.5)], solver="nope")


def test_write_csv_round_trip(tmp_path):
    cfg = two_level(1.0, 0.1, 4, cutoff=8)
    ax = GridAxis("gamma", 0.0, 0.4, 0.2)
    pd = scan(cfg, [ax], solver="exact")
    path = tmp_path / "scan.csv"
    write_csv(pd, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    for i, row in enumerate(rows):
        assert float(row["gamma"]) == pytest.approx(ax.values[i])
        assert float(row["E0"]) == pytest.approx(pd.E0[i])
        assert float(row["E0_per_particle"]) == pytest.approx(pd.E0[i] / cfg.N)
        assert row["valid"] == "1"
    assert "chi_gamma" in rows[0] and "label" in rows[0]


def test_threads_do_not_change_results():
    cfg = two_level(1.0, 0.3, 4, cutoff=8)
    ax = GridAxis("gamma", 0.0, 0.6, 0.3)
    a = scan(cfg, [ax], solver="exact", threads=1)
    b = scan(cfg, [ax], solver="exact", threads=4)
    assert np.allclose(a.E0, b.E0)
    assert np.allclose(a.chi[0], b.chi[0])
