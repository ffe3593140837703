import os

import pytest

from phasecart_figures import (
    EmptyDataError,
    FigureSpec,
    KINDS,
    MissingColumnError,
    render,
)
from phasecart_figures.scripts import main_heatmap, main_separatrix


SEPARATRIX = """\
mu23,mu12_boundary,order
0.0,1.0,second
0.5,1.0,second
1.0,1.0,second
1.5,0.95,first
2.0,0.75,first
2.5,0.4,first
"""

FLUCTUATION = """\
gamma,exact_n,exact_var_n,coherent_n,coherent_var_n
0.2,0.0,0.0,0.0,0.0
0.6,0.1,0.05,0.02,0.02
1.0,2.4,1.2,2.0,2.0
1.4,8.0,3.2,7.7,7.7
1.8,15.3,4.3,15.1,15.1
"""

FIDELITY = """\
gamma,fidelity
0.2,1.0
0.6,1.0
1.0,0.9971
1.4,0.9968
1.8,0.9966
"""

HEATMAP = """\
mu12,mu23,label
0.0,0.0,Normal
0.5,0.0,Normal
1.0,0.0,S12
0.0,0.5,Normal
0.5,0.5,S23
1.0,0.5,S12
"""

ERROR_MAP = """\
mu12,mu23,delta
0.0,0.0,0.0
0.5,0.0,0.0
1.0,0.0,0.002
0.0,0.5,0.0
0.5,0.5,0.0005
1.0,0.5,0.0001
"""

SCALING_FIT = """\
N,mu_c,ln_N,ln_dmu,s,A,r2,mu_inf,method
8,0.55,2.0794,-3.0,-0.571,0.193,0.999,0.5,sas
16,0.53,2.7726,-3.5,-0.571,0.193,0.999,0.5,sas
32,0.52,3.4657,-3.9,-0.571,0.193,0.999,0.5,sas
"""

FIXTURES = {
    "separatrix": SEPARATRIX,
    "fluctuation": FLUCTUATION,
    "fidelity": FIDELITY,
    "heatmap": HEATMAP,
    "error-map": ERROR_MAP,
    "scaling-fit": SCALING_FIT,
}

REQUIRED = {
    "separatrix": "mu12_boundary",
    "fluctuation": "coherent_var_n",
    "fidelity": "fidelity",
    "heatmap": "label",
    "error-map": "delta",
    "scaling-fit": "ln_dmu",
}


def _fixture(tmp_path, kind):
    p = tmp_path / f"{kind}.csv"
    p.write_text(FIXTURES[kind])
    return str(p)


@pytest.mark.parametrize("kind", KINDS)
def test_render_is_deterministic_and_read_only(tmp_path, kind):
    csv_path = _fixture(tmp_path, kind)
    before = open(csv_path, "rb").read()
    out1 = str(tmp_path / "a.png")
    out2 = str(tmp_path / "b.png")
    render(FigureSpec(csv_path, kind, out1, xlabel="x", ylabel="y"))
    render(FigureSpec(csv_path, kind, out2, xlabel="x", ylabel="y"))
    b1 = open(out1, "rb").read()
    b2 = open(out2, "rb").read()
    assert b1, "empty image"
    assert b1[:8] == b"\x89PNG\r\n\x1a\n"
    assert b1 == b2, f"re-render of {kind} not byte-identical"
    assert open(csv_path, "rb").read() == before  # input untouched


@pytest.mark.parametrize("kind", KINDS)
def test_missing_column_is_a_named_error(tmp_path, kind):
    text = FIXTURES[kind]
    victim = REQUIRED[kind]
    header, _, body = text.partition("\n")
    cols = header.split(",")
    keep = [i for i, c in enumerate(cols) if c != victim]
    lines = [",".join(ln.split(",")[i] for i in keep)
             for ln in text.strip().splitlines()]
    p = tmp_path / "broken.csv"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(MissingColumnError) as exc:
        render(FigureSpec(str(p), kind, str(tmp_path / "x.png")))
    assert victim in str(exc.value)


@pytest.mark.parametrize("kind", KINDS)
def test_empty_csv_is_an_empty_data_error(tmp_path, kind):
    header = FIXTURES[kind].splitlines()[0]
    p = tmp_path / "empty.csv"
    p.write_text(header + "\n")
    with pytest.raises(EmptyDataError):
        render(FigureSpec(str(p), kind, str(tmp_path / "x.png")))


def test_numeric_heatmap_value_column(tmp_path):
    p = tmp_path / "num.csv"
    p.write_text(ERROR_MAP)  # delta is numeric
    out = str(tmp_path / "n.png")
    render(FigureSpec(str(p), "heatmap", out, columns={"value": "delta"}))
    assert os.path.getsize(out) > 0


def test_unknown_kind_rejected(tmp_path):
    from phasecart_figures import FigureError
    with pytest.raises(FigureError):
        FigureSpec("x.csv", "pie-chart", "y.png")


def test_scripts_share_flags_and_exit_codes(tmp_path):
    csv_path = _fixture(tmp_path, "separatrix")
    out = str(tmp_path / "s.png")
    assert main_separatrix(["--csv", csv_path, "--out", out]) == 0
    assert os.path.getsize(out) > 0
    # missing file and bad column overrides exit 1
    assert main_separatrix(["--csv", str(tmp_path / "nope.csv"),
                            "--out", out]) == 1
    assert main_separatrix(["--csv", csv_path, "--out", out,
                            "--column", "oops"]) == 1
    # column override routes a different header through the same kind
    hm = _fixture(tmp_path, "heatmap")
    assert main_heatmap(["--csv", hm, "--out", str(tmp_path / "h.png"),
                         "--column", "x=mu12", "--column", "y=mu23",
                         "--column", "value=label"]) == 0
