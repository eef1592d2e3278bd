import csv
import json
import time
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from kflocal.casestudies import make_case
from kflocal.cli import RunConfig, build_parser, main
from kflocal.errors import InputError
from kflocal.export import fmt, kernel_rows, to_jsonable, write_csv
from kflocal.kernel import inverse_transform, default_grid
from kflocal.plantfile import dump_plant, load_plant, parse_plant, plant_to_dict
from kflocal.riccati import solve_grid
from kflocal.symbols import PlantSpec, Polynomial, RationalSymbol

WHITE_DOC = {"a_hat": {"coeffs": [0, 0, -1]}, "b_hat": {"num": {"coeffs": [1]}},
             "g_hat": {"num": {"coeffs": [1]}}}


def write(tmp_path, doc, name="plant.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- plant files ------------------------------------------------------------------

def test_plant_file_round_trip(tmp_path):
    plant = make_case("diffusion-correlated", kappa=0.7, sigma_w=1.3, sigma_v=0.4, l_v=0.9).plant
    dump_plant(plant, tmp_path / "p.json")
    back = load_plant(tmp_path / "p.json")
    lam = np.linspace(-5, 5, 11)
    for attr in ("a_hat", "b_hat", "c_hat", "g_hat"):
        assert np.allclose(getattr(back, attr)(lam), getattr(plant, attr)(lam), rtol=1e-15)
    assert plant_to_dict(back) == plant_to_dict(plant)


def test_plant_file_defaults():
    p = parse_plant(WHITE_DOC)
    assert p.c_hat(np.array([0.0, 3.0])).tolist() == [1.0, 1.0]
    assert p.g_hat(np.array([2.0]))[0] == 1.0


def test_plant_file_complex_pairs():
    doc = {**WHITE_DOC, "g_hat": {"num": {"coeffs": [[1, 0]]}, "den": {"coeffs": [[1, 0], [0, 2]]}}}
    p = parse_plant(doc)
    assert p.g_hat(np.array([1.0]))[0] == pytest.approx(1 / (1 + 2j))


@pytest.mark.parametrize("doc,where", [
    ({"b_hat": {"num": {"coeffs": [1]}}, "g_hat": {"num": {"coeffs": [1]}}}, "<root>"),
    ({**WHITE_DOC, "a_hat": {"coeffs": ["x"]}}, "a_hat/coeffs/0"),
    ({**WHITE_DOC, "g_hat": {"num": {"coeffs": [[1, 2, 3]]}}}, "g_hat/num/coeffs/0"),
    ({**WHITE_DOC, "extra": 1}, "<root>"),
])
def test_plant_file_schema_errors(doc, where):
    with pytest.raises(InputError, match=f"invalid at {where}"):
        parse_plant(doc)


def test_plant_file_syntax_error_location(tmp_path):
    p = write(tmp_path, '{\n  "a_hat": {"coeffs": [0, 0, -1]},\n  "b_hat": oops\n}')
    with pytest.raises(InputError, match=r"plant.json:3:\d+:"):
        load_plant(p)
    with pytest.raises(InputError, match="cannot read"):
        load_plant(tmp_path / "missing.json")


# --- export helpers ---------------------------------------------------------------

def test_fmt_round_trips():
    for x in (0.1, 1 / 3, -2.5e-300, 1e22, np.float64(7.25)):
        assert float(fmt(x)) == float(x)
    assert [fmt(np.nan), fmt(np.inf), fmt(-np.inf)] == ["nan", "inf", "-inf"]
    assert fmt(True) == "true" and fmt(np.int64(3)) == "3"


def test_to_jsonable():
    out = to_jsonable({"a": np.array([1.0, np.nan]), "b": 1 + 2j, 3: (np.int32(4), np.bool_(True))})
    assert out == {"a": [1.0, "nan"], "b": [1.0, 2.0], "3": [4, True]}
    json.dumps(out, allow_nan=False)


def test_kernel_rows_matched_has_delta_only():
    ker = inverse_transform(solve_grid(make_case("diffusion-correlated", pi_star=1.0).plant,
                                       default_grid(make_case("diffusion-correlated", pi_star=1.0).plant)))
    assert kernel_rows(ker) == [(0.0, ker.delta_strength, "delta")]


def test_write_csv(tmp_path):
    write_csv(tmp_path / "a.csv", ("x", "y"), [(1.0, np.nan), (0.1, 2)])
    assert (tmp_path / "a.csv").read_text() == "x,y\n1.0,nan\n0.1,2\n"


# --- RunConfig --------------------------------------------------------------------

@pytest.mark.parametrize("kw,msg", [
    ({}, "exactly one"),
    ({"spec": Path("a"), "case": "diffusion-white"}, "exactly one"),
    ({"case": "nope"}, "unknown case"),
    ({"case": "diffusion-white", "rtol": 0.0}, "rtol"),
    ({"case": "diffusion-white", "lam_max": -1.0}, "lmax"),
    ({"case": "diffusion-white", "n": 1000}, "power of two"),
    ({"case": "diffusion-white", "formats": ("png",)}, "format"),
    ({"case": "diffusion-white", "sweep_param": "l_star"}, "go together"),
    ({"spec": Path("a"), "sweep_param": "kappa", "sweep_values": (1.0,)}, "built-in"),
    ({"case": "diffusion-white", "sweep_param": "l_a", "sweep_values": (1.0,)}, "cannot be swept"),
])
def test_runconfig_validation(kw, msg):
    with pytest.raises(InputError, match=msg):
        RunConfig("synth", **kw)


def test_runconfig_casestudy_requires_case():
    with pytest.raises(InputError, match="casestudy needs"):
        RunConfig("casestudy", spec=Path("a"))


def test_runconfig_grid_overrides():
    cfg = RunConfig("synth", case="diffusion-white", lam_max=30.0)
    g = cfg.grid(cfg.plant())
    assert g.lam_max == 30.0 and g.n == default_grid(cfg.plant()).n


def test_help_lists_exit_codes(capsys):
    with pytest.raises(SystemExit) as e:
        build_parser().parse_args(["--help"])
    assert e.value.code == 0
    assert "exit status" in capsys.readouterr().out


# --- commands and exit codes ---------------------------------------------------------

def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", "--case", "diffusion-white"]) == 0
    bad = {**WHITE_DOC, "g_hat": {"num": {"coeffs": [1]}, "den": {"coeffs": [-1, 0, 1]}}}
    assert main(["validate", "--spec", str(write(tmp_path, bad))]) == 2
    assert "violates assumption" in capsys.readouterr().out
    assert main(["validate", "--spec", str(write(tmp_path, "{oops", "bad.json"))]) == 1
    assert "bad.json:1:2" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as e:
        main(["synth", "--case", "no-such-case"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    assert main(["synth", "--case", "diffusion-white", "--n", "1000"]) == 1


def test_numerical_failure_exit_three(tmp_path):
    assert main(["synth", "--case", "diffusion-white", "--lmax", "2", "--n", "1024",
                 "--out", str(tmp_path)]) == 3


def test_synth_files(tmp_path):
    assert main(["synth", "--case", "diffusion-white", "--out", str(tmp_path)]) == 0
    for f in ("synth_spectral.csv", "synth_kernel.csv", "synth_summary.json",
              "synth_symbol.svg", "synth_kernel.svg"):
        assert (tmp_path / f).stat().st_size > 0
    rows = read_csv(tmp_path / "synth_kernel.csv")
    assert rows[0] == ["x", "value", "component"]
    assert rows[1] == ["0.0", "0.0", "delta"]
    summ = json.loads((tmp_path / "synth_summary.json").read_text())
    assert summ["theta"] == pytest.approx(1 / np.sqrt(2))
    assert summ["status"] == "spatially distributed"
    ET.parse(tmp_path / "synth_kernel.svg")


def test_synth_matched_plant(tmp_path):
    out = tmp_path / "m"
    assert main(["synth", "--case", "diffusion-correlated", "--pi-star", "1", "--format", "csv,json",
                 "--out", str(out)]) == 0
    rows = read_csv(out / "synth_kernel.csv")
    assert len(rows) == 2 and rows[1][2] == "delta"
    assert json.loads((out / "synth_summary.json").read_text())["status"] == "completely decentralized"
    assert not (out / "synth_symbol.svg").exists()


def test_sh_matched_point_has_no_delta(tmp_path):
    assert main(["synth", "--case", "swift-hohenberg", "--pi-star", "1", "--format", "json",
                 "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "synth_summary.json").read_text())["delta_strength"] == 0.0


def test_match_command(tmp_path):
    assert main(["match", "--case", "diffusion-correlated", "--pi-star", "1", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "match.json").read_text())
    assert rep["matched"] and rep["ell"] == pytest.approx(1.0)
    assert main(["match", "--case", "diffusion-correlated", "--pi-star", "0.9", "--out", str(tmp_path)]) == 0
    assert not json.loads((tmp_path / "match.json").read_text())["matched"]


def test_bpl_sweep_aliases(tmp_path):
    assert main(["bpl", "--case", "diffusion-correlated", "--sweep-param", "pi-star",
                 "--sweep-values", "0.5,1,2", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "bpl.json").read_text())
    assert rep["param"] == "pi_star" and rep["collisions"] == [1.0]
    ET.parse(tmp_path / "bpl.svg")


def test_bpl_single_plant_file(tmp_path):
    spec = write(tmp_path, WHITE_DOC)
    assert main(["bpl", "--spec", str(spec), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "bpl.csv")
    assert len(rows) == 1 + 4


def test_perf_white_closed_form(tmp_path):
    assert main(["perf", "--case", "diffusion-white", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "perf.json").read_text())
    assert max(rep["closed_form_rel_err"]) < 1e-8
    assert rep["monotonicity"] == "constant"


def test_casestudy_deterministic_and_fast(tmp_path):
    outs = []
    for run in ("a", "b"):
        t0 = time.perf_counter()
        assert main(["casestudy", "--case", "diffusion-correlated", "--out", str(tmp_path / run)]) == 0
        assert time.perf_counter() - t0 < 30.0
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).iterdir())})
    assert outs[0].keys() == outs[1].keys()
    assert outs[0] == outs[1]
    assert {"bpl.json", "perf.json", "synth_kernel.csv"} <= set(outs[0])
    rep = json.loads(outs[0]["perf.json"])
    assert rep["monotonicity"] == "strictly decreasing"
