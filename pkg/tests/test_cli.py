import hashlib
import math

import pytest

from spherelab.lab import cli
from spherelab.lab.experiments import SCHEMAS, parse_config_text


def test_parser_defaults_and_types():
    p = parse_config_text("nec_blowup", "# comment\nr = inf\nN_list=2,3,4\n\n")
    assert p["r"] == math.inf and p["N_list"] == [2, 3, 4] and p["seed"] == 0


@pytest.mark.parametrize("text,msg", [("bogus=1", "unknown key"), ("d", "key=value"),
                                      ("d=2\nd=3", "duplicate"), ("d=two", "bad value")])
def test_parser_rejects(text, msg):
    with pytest.raises(ValueError, match=msg):
        parse_config_text("slicing_check", text)


def test_unknown_experiment():
    with pytest.raises(ValueError):
        parse_config_text("nope", "")


def test_every_experiment_has_common_keys():
    for name in SCHEMAS:
        p = parse_config_text(name, "seed=3\nbudget_cells=100")
        assert p["seed"] == 3 and p["budget_cells"] == 100


def _run(tmp_path, experiment, text, *extra):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(text)
    out = tmp_path / "out"
    rc = cli.main([experiment, "--config", str(cfg), "--out", str(out), *extra])
    return rc, out


def test_covering_run_writes_manifest(tmp_path, capsys):
    rc, out = _run(tmp_path, "covering_fit", "set=cantor\nlam=0.25\ndepth=10\n", "--seed", "5")
    assert rc == 0
    assert "slope=" in capsys.readouterr().out
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == "delta,count" and len(lines) == 13
    man = dict(l.split("=", 1) for l in (out / "manifest.txt").read_text().splitlines()
               if not l.startswith("#"))
    assert man["seed"] == "5" and man["param.lam"] == "0.25" and "wall_clock_seconds" in man
    assert man["version"] == "0.1.0"
    for name in ("results.csv", "plot.svg"):
        digest = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert man[f"file.{name}"] == f"sha256:{digest}"
    assert (out / "manifest.txt").read_text().startswith("# one-sided")


def test_bad_config_exit_code(tmp_path, capsys):
    rc, _ = _run(tmp_path, "covering_fit", "colour=red\n")
    assert rc == 2
    assert "unknown key" in capsys.readouterr().err


def test_budget_flag_is_enforced(tmp_path):
    rc, _ = _run(tmp_path, "nec_blowup", "N_list=2,3,4\n", "--budget-cells", "1000")
    assert rc == 2


def test_single_delta_fit_refused(tmp_path, capsys):
    rc, _ = _run(tmp_path, "nikodym_witness", "deltas=0.1\n")
    assert rc == 2
    assert "at least 3" in capsys.readouterr().err


def test_plot_is_deterministic(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    _, a = _run(tmp_path / "a", "covering_fit", "set=interval\n")
    _, b = _run(tmp_path / "b", "covering_fit", "set=interval\n")
    assert (a / "plot.svg").read_bytes() == (b / "plot.svg").read_bytes()
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_region_table_csv(tmp_path):
    rc, out = _run(tmp_path, "region_table", "d_list=2\ns_list=0.5\n")
    assert rc == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[1].startswith("2,1/2,2/3,2/3,3/5,2/5,2/3,2/3")
    assert not (out / "plot.svg").exists()
