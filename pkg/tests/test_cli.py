import json
import os

import pytest

from stratinstab.cli import RunConfig, main, polyline_svg, read_config_file, resolve_config
from stratinstab.errors import ConfigurationError


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


def load(out, command):
    with open(out / f"{command}.json", encoding="utf-8") as fh:
        return json.load(fh)


def test_profile_check_outputs(tmp_path):
    code, out = run(tmp_path, "profile-check", "--kind", "tanh", "--beta", "5", "--alpha", "0.97", "--format", "csv,json,svg")
    assert code == 0
    doc = load(out, "profile-check")
    assert doc["schema"] == 1 and doc["command"] == "profile-check"
    assert doc["satisfied"] is False
    assert doc["min_ri"] == pytest.approx(0.97 * 0.03, rel=1e-9)
    assert doc["config"]["alpha"] == 0.97
    raw = (out / "profile-check.csv").read_bytes()
    assert raw.startswith(b"z,ri\n") and b"\r" not in raw
    row = raw.split(b"\n")[1].split(b",")
    assert len(row) == 2 and -1.0 <= float(row[0]) < -0.99
    assert (out / "profile-check.svg").read_text().startswith("<svg")


def test_profile_check_half(tmp_path):
    code, out = run(tmp_path, "profile-check", "--alpha", "0.5")
    assert code == 0
    doc = load(out, "profile-check")
    assert doc["satisfied"] is True and doc["min_ri"] == pytest.approx(0.25)


def test_bad_alpha_exit_2(tmp_path, capsys):
    code, out = run(tmp_path, "profile-check", "--alpha", "1.2")
    assert code == 2
    assert "AlphaOutOfRange" in capsys.readouterr().err
    assert not (out / "profile-check.json").exists()


@pytest.mark.parametrize(
    "text", ["alpha = 0.9\nbogus = 1\n", "alpha 0.9\n", "nz = many\n", "format = pdf\n", "deltas = a,b\n"]
)
def test_malformed_config_exit_2(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _ = run(tmp_path, "nyquist", "--config", str(cfg))
    assert code == 2


def test_unknown_command_and_flag_exit_2(tmp_path):
    assert main(["explode"]) == 2
    assert main(["nyquist", "--frobnicate", "1"]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nalpha = 0.9\nbeta = 3\nt-end = 4\n")
    rc = resolve_config(["profile-check", "--config", str(cfg), "--beta", "4"])
    assert rc.alpha == 0.9 and rc.beta == 4.0 and rc.t_end == 4.0
    assert read_config_file(str(cfg)) == {"alpha": 0.9, "beta": 3.0, "t_end": 4.0}
    with pytest.raises(ConfigurationError):
        RunConfig(command="nyquist", tol=0.0).validate()


def test_nyquist_winding(tmp_path):
    code, out = run(tmp_path, "nyquist", "--beta", "5")
    assert code == 0
    doc = load(out, "nyquist")
    assert doc["winding"] == 1 and doc["max_phase_step"] < 1.5707963
    code, out = run(tmp_path, "nyquist", "--beta", "0.1", name="weak")
    assert load(out, "nyquist")["winding"] == 0
    header = (out / "nyquist.csv").read_text().splitlines()[0]
    assert header == "re_c,im_c,re_F,im_F,phase"


def test_spectrum_stable_profile_is_empty(tmp_path):
    code, out = run(tmp_path, "spectrum", "--kind", "couette")
    assert code == 0
    assert (out / "spectrum.csv").read_text() == "method,alpha,kappa,re_c,im_c,residual,g1_pass\n"
    assert load(out, "spectrum")["gamma0"] is None


def test_neumann_on_non_friedlander_exit_2(tmp_path):
    code, _ = run(tmp_path, "spectrum", "--kind", "couette", "--method", "neumann")
    assert code == 2


def test_cfl_exit_3_writes_partial(tmp_path):
    code, out = run(tmp_path, "evolve-nonlinear", "--nz", "64", "--nx", "16", "--dt", "5")
    assert code == 3
    doc = load(out, "evolve-nonlinear")
    assert doc["deltas"] == [1e-4]
    assert (out / "evolve-nonlinear.csv").exists()


def test_determinism_and_round_trip(tmp_path):
    args = ["scan-beta", "--beta-list", "2,5"]
    c1, a = run(tmp_path, *args, name="a")
    c2, b = run(tmp_path, *args, name="a2")
    assert c1 == c2 == 0
    assert (a / "scan-beta.csv").read_bytes() == (b / "scan-beta.csv").read_bytes()
    da, db = load(a, "scan-beta"), load(b, "scan-beta")
    assert da.pop("config").pop("out") != db.pop("config").pop("out")
    assert da == db
    # re-run from the embedded configuration
    emb = load(a, "scan-beta")["config"]
    cfg = tmp_path / "emb.cfg"
    cfg.write_text("".join(f"{k} = {v}\n" for k, v in emb.items() if k not in ("command", "out")))
    code, c = run(tmp_path, "scan-beta", "--config", str(cfg), name="c")
    assert code == 0
    assert (c / "scan-beta.csv").read_bytes() == (a / "scan-beta.csv").read_bytes()
    dc = load(c, "scan-beta")
    dc["config"].pop("out")
    assert dc == {**load(a, "scan-beta"), "config": {k: v for k, v in emb.items() if k != "out"}}
    assert dc["scan"] == {"2": 1, "5": 1} and dc["first_unstable_beta"] == 2.0


def test_mode_command(tmp_path):
    code, out = run(tmp_path, "mode", "--nz", "254")
    assert code == 0
    doc = load(out, "mode")
    assert doc["tg_residual"] < 1e-5 and doc["bc_defect"] < 1e-8
    assert doc["sigma"] == pytest.approx(0.6667191151283013, rel=1e-9)


def test_polyline_svg_constant_series():
    s = polyline_svg([0, 1, 2], [3, 3, 3], "flat")
    assert "points=" in s and "nan" not in s
