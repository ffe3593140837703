import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasecart.analysis import (
    BracketError,
    QUANTUM_EXPONENT,
    PowerLawFit,
    ScalingSeries,
    fit_power_law,
    mu_critical_vs_N,
    write_fit_report,
)
from phasecart.coherent import critical_coupling_2level
from phasecart.config import InvalidParameterError, two_level


def test_quantum_exponent_constant():
    assert QUANTUM_EXPONENT == pytest.approx(-2.0 / 3.0)


class TestScalingSeries:
    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            ScalingSeries((4, 4), (0.5, 0.5), "sas")
        with pytest.raises(InvalidParameterError):
            ScalingSeries((4, 8), (0.5,), "sas")


@given(s=st.floats(-2.0, -0.1), A=st.floats(0.01, 2.0),
       mu_inf=st.floats(0.1, 2.0))
@settings(deadline=None, max_examples=25)
def test_fit_recovers_synthetic_power_law(s, A, mu_inf):
    Ns = (4, 8, 16, 32, 64)
    mu = tuple(mu_inf + A * n**s for n in Ns)
    fit = fit_power_law(ScalingSeries(Ns, mu, "sas"), mu_inf)
    assert fit.s == pytest.approx(s, abs=1e-9)
    assert fit.A == pytest.approx(A, rel=1e-9)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_rejects_short_or_crossing_series():
    with pytest.raises(InvalidParameterError):
        fit_power_law(ScalingSeries((4, 8), (0.6, 0.55), "sas"), 0.5)
    with pytest.raises(InvalidParameterError):
        fit_power_law(ScalingSeries((4, 8, 16), (0.6, 0.5, 0.4), "sas"), 0.5)


def test_coherent_series_is_size_independent():
    """Mean-field (coherent) critical couplings carry no finite-size shift."""
    cfg = two_level(1.0, 0.1, 4)
    gc = critical_coupling_2level(cfg)
    series = mu_critical_vs_N(cfg, [4, 8, 16], "coherent", coupling="gamma",
                              bracket=(0.2, 0.9), tol=1e-4)
    assert series.method == "coherent"
    for mu in series.mu_c:
        assert mu == pytest.approx(gc, abs=5e-4)


def test_sas_series_decreases_toward_mean_field():
    cfg = two_level(1.0, 0.1, 4)
    gc = critical_coupling_2level(cfg)
    series = mu_critical_vs_N(cfg, [4, 8, 16], "sas", coupling="gamma",
                              bracket=(0.2, 0.9), tol=1e-4)
    mus = series.mu_c
    assert mus[0] > mus[1] > mus[2] > gc


def test_exact_series_via_chi_peak():
    cfg = two_level(1.0, 0.1, 4, cutoff=16)
    gc = critical_coupling_2level(cfg)
    series = mu_critical_vs_N(cfg, [6], "exact", coupling="gamma",
                              bracket=(0.3, 1.0), tol=1e-3)
    # finite-size peak sits above the mean-field value
    assert gc < series.mu_c[0] < 1.0


def test_pseudospin_convention_doubles_atom_number():
    cfg = two_level(1.0, 0.1, 4)
    direct = mu_critical_vs_N(cfg, [8], "sas", coupling="gamma",
                              bracket=(0.2, 0.9), tol=1e-4)
    pseudo = mu_critical_vs_N(cfg, [4], "sas", coupling="gamma",
                              bracket=(0.2, 0.9), tol=1e-4, pseudospin=True)
    assert pseudo.N_values == (4,)
    assert pseudo.mu_c[0] == pytest.approx(direct.mu_c[0], abs=5e-4)


def test_bracket_error_when_no_transition():
    cfg = two_level(1.0, 0.1, 4)
    with pytest.raises(BracketError):
        mu_critical_vs_N(cfg, [4], "coherent", coupling="gamma",
                         bracket=(0.05, 0.1), tol=1e-3)


def test_unknown_method_rejected():
    with pytest.raises(InvalidParameterError):
        mu_critical_vs_N(two_level(1.0, 0.1, 4), [4], "magic")


def test_write_fit_report(tmp_path):
    Ns = (4, 8, 16)
    mu = tuple(0.5 + 0.2 * n**-0.5 for n in Ns)
    series = ScalingSeries(Ns, mu, "sas", "gamma")
    fit = fit_power_law(series, 0.5)
    path = tmp_path / "fit.csv"
    write_fit_report(series, fit, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert float(rows[0]["s"]) == pytest.approx(fit.s)
    assert rows[0]["method"] == "sas"
    assert float(rows[2]["mu_c"]) == pytest.approx(mu[2])
