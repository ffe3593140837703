import csv
import math

import numpy as np
import pytest

from phasecart.config import ConfigurationError, InvalidParameterError, two_level
from phasecart.reduction import (
    TwoLevelSubsystem,
    compose_diagram,
    reduce_once,
    reduce_tree,
    tree_csv,
    tree_text,
    two_level_subsystems,
)
from phasecart.scan import GridAxis

from test_config import xi_config
from test_basis import n4_config


class TestTwoLevelSubsystem:
    def test_critical_coupling_formula(self):
        s = TwoLevelSubsystem(1, 2, Omega=1.0, omega_j=0.0, omega_k=1.0)
        assert s.mu_c == pytest.approx(0.5)
        assert s.critical_coupling(rwa=True) == pytest.approx(1.0)
        assert s.critical_coupling(rwa=False) == pytest.approx(0.5)

    def test_gapless(self):
        s = TwoLevelSubsystem(2, 3, Omega=1.0, omega_j=1.0, omega_k=1.0)
        assert s.gapless and s.mu_c == 0.0

    def test_condensate_energy_continuous_at_threshold(self):
        s = TwoLevelSubsystem(1, 2, Omega=1.0, omega_j=0.0, omega_k=1.0)
        # at u = 1 the condensate energy meets the normal energy N omega_j
        assert s.condensate_energy(s.mu_c, N=6) == pytest.approx(0.0)
        assert s.condensate_energy(2 * s.mu_c, N=6) < 0.0


def test_xi_reduction_yields_both_rungs():
    subs = {(s.j, s.k): s for s in two_level_subsystems(xi_config())}
    assert set(subs) == {(1, 2), (2, 3)}
    assert subs[(1, 2)].mu_c == pytest.approx(0.5 * math.sqrt(1.0 * 1.0))
    assert subs[(2, 3)].mu_c == pytest.approx(0.5 * math.sqrt(1.0 * 1.0))
    assert subs[(2, 3)].omega_j == pytest.approx(1.0)


def test_n4_reduction_matches_known_critical_couplings():
    cfg = n4_config()
    subs = {(s.j, s.k): s for s in two_level_subsystems(cfg)}
    assert set(subs) == {(1, 3), (2, 4), (2, 3)}
    assert subs[(1, 3)].mu_c == pytest.approx(0.5)
    assert subs[(2, 4)].mu_c == pytest.approx(0.5 * math.sqrt(1.1))
    assert subs[(2, 3)].mu_c == pytest.approx(0.5 * math.sqrt(0.25 * 0.2))


def test_reduce_once_branch_rules():
    children = reduce_once(xi_config())
    assert len(children) == 2
    # rho_3 = 0 keeps levels (1, 2); the eta branch keeps (2, 3)
    assert children[0].levels == (1, 2)
    assert children[0].cfg.configuration == "TwoLevel"
    assert children[1].levels == (2, 3)
    assert "rho3" in next(iter(children[0].variables))
    assert any(k.startswith("eta") for k in children[1].variables)


def test_reduce_tree_leaves_are_two_level():
    root = reduce_tree(n4_config())
    assert root.cfg.configuration == "N4"
    leaves = root.leaves()
    assert all(lf.cfg.n_levels == 2 for lf in leaves)
    # 4 -> 3 -> 2: two branchings deep
    assert all(len(lf.levels) == 2 for lf in leaves)
    assert len(leaves) == 4


def test_two_level_has_no_reduction():
    root = reduce_tree(two_level(1.0, 0.2, 4))
    assert root.is_leaf and root.leaves() == [root]


def test_tree_text_and_csv(tmp_path):
    root = reduce_tree(xi_config())
    txt = tree_text(root)
    assert "Xi[1,2,3] (root)" in txt
    assert "rho3=0" in txt
    path = tmp_path / "tree.csv"
    tree_csv(root, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3  # root + 2 leaves
    assert rows[0]["parent"] == "-1"
    assert {r["configuration"] for r in rows} == {"Xi", "TwoLevel"}


def test_compose_diagram_labels_and_energies():
    cfg = xi_config(mu12=0.0, mu23=0.0, N=4)
    subs = two_level_subsystems(cfg)
    axes = [GridAxis("mu12", 0.0, 1.0, 0.25), GridAxis("mu23", 0.0, 1.0, 0.25)]
    pd = compose_diagram(subs, axes, cfg)
    assert pd.labels[0, 0] == "Normal"
    assert pd.labels[4, 0] == "S12"   # mu12 = 1 > 0.5, mu23 = 0
    assert pd.labels[0, 4] == "S23"
    # deep in a single condensate the energy follows the 2-level closed form
    s12 = next(s for s in subs if (s.j, s.k) == (1, 2))
    assert pd.E0[4, 0] == pytest.approx(s12.condensate_energy(1.0, 4))
    # Normal energy is N times the lowest subsystem floor
    assert pd.E0[0, 0] == pytest.approx(4 * min(s.omega_j for s in subs))


def test_compose_diagram_rejects_unmatched_axis():
    cfg = xi_config()
    subs = two_level_subsystems(cfg)
    with pytest.raises(InvalidParameterError):
        compose_diagram(subs, [GridAxis("mu13", 0, 1, 0.5)], cfg)


def test_unknown_configuration_rejected():
    from phasecart.reduction import _tag_of

    with pytest.raises(ConfigurationError):
        _tag_of(frozenset({(1, 4)}))
