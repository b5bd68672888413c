import math
import warnings
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from rabeam import bench, cli
from rabeam.linalg import ExtRational

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = dict(seed=3, runs=2, snr_list_db=[0, 20], pq_list=[[2, 1], [2, "3/2"], [2, "inf"]],
             grid_points=256)


@pytest.fixture(scope="module")
def small_rows():
    return bench.run_experiment(bench.ExperimentConfig.from_dict(SMALL))


def test_defaults_are_reference_protocol():
    cfg = bench.ExperimentConfig()
    assert cfg.runs == 100 and cfg.snapshots == 50 and cfg.n_sensors == 10
    assert [str(q) for _, q in cfg.pq_list] == ["1", "3/2", "2", "4", "inf"]
    sc = cfg.scenario(20)
    assert sc.signal_true.power == pytest.approx(100)
    assert sc.signal_presumed.center == 34.0


@pytest.mark.parametrize("name", ["protocol.toml", "smoke.toml", "robust_norm.toml"])
def test_shipped_configs_parse(name):
    cfg = bench.ExperimentConfig.from_toml(CONFIGS / name)
    assert cfg.runs >= 1


def test_protocol_config_equals_defaults():
    cfg = bench.ExperimentConfig.from_toml(CONFIGS / "protocol.toml")
    assert bench.apply_overrides(cfg, out_csv=None) == bench.ExperimentConfig(
        out_csv="protocol.csv", out_svg="protocol.svg")


def test_unknown_key_rejected():
    with pytest.raises(bench.ConfigError, match="snaphsots"):
        bench.ExperimentConfig.from_dict({"snaphsots": 10})


@pytest.mark.parametrize("raw", [
    {"runs": 0},
    {"pq_list": [[2]]},
    {"pq_list": [[2, "1/2"]]},
    {"constraint_mode": "box"},
    {"inr_db": [1, 2]},
    {"gamma_factor": 0},
])
def test_invalid_values_rejected(raw):
    with pytest.raises(bench.ConfigError):
        bench.ExperimentConfig.from_dict(raw)


def test_bad_toml(tmp_path):
    f = tmp_path / "bad.toml"
    f.write_text("runs = = 3\n")
    with pytest.raises(bench.ConfigError):
        bench.ExperimentConfig.from_toml(f)


def test_rows_complete_and_sorted(small_rows):
    assert len(small_rows) == 2 * 3 * 2
    assert small_rows == sorted(small_rows, key=bench.ResultRow.sort_key)
    assert all(r.status == "alpha" for r in small_rows)
    for r in small_rows:
        assert r.sinr_db <= r.opt_bound_db + 1e-9


def test_deterministic_apart_from_timing(small_rows):
    again = bench.run_experiment(bench.ExperimentConfig.from_dict(SMALL))
    for a, b in zip(small_rows, again):
        assert (a.snr_db, a.p, a.q, a.run, a.sinr_db, a.worst_case_sinr_db, a.iterations,
                a.status) == (b.snr_db, b.p, b.q, b.run, b.sinr_db, b.worst_case_sinr_db,
                              b.iterations, b.status)


def test_parallel_matches_serial(small_rows):
    par = bench.run_experiment(bench.ExperimentConfig.from_dict(SMALL), threads=2)
    assert [r.sinr_db for r in par] == [r.sinr_db for r in small_rows]


def test_csv_round_trip(small_rows, tmp_path):
    f = tmp_path / "out.csv"
    bench.emit_csv(small_rows, f)
    text = f.read_text().splitlines()
    assert text[0] == ",".join(bench.CSV_COLUMNS)
    assert any(",3/2," in line for line in text) and any(",inf," in line for line in text)
    back = bench.read_csv(f)
    assert back == small_rows


def test_csv_nonfinite_values(tmp_path):
    row = bench.ResultRow(0.0, ExtRational.of(2), ExtRational.of("inf"), 0, math.nan,
                          -math.inf, 3.0, 0, 1.0, "error:RabError")
    f = tmp_path / "x.csv"
    bench.emit_csv([row], f)
    back = bench.read_csv(f)[0]
    assert math.isnan(back.sinr_db) and back.worst_case_sinr_db == -math.inf


def test_svg_well_formed(small_rows, tmp_path):
    f = tmp_path / "plot.svg"
    assert bench.emit_svg_lines(small_rows, f, title="a < b") == 3
    root = ET.parse(f).getroot()
    assert root.tag.endswith("svg")
    lines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(lines) == 3
    for pl in lines:
        assert len(pl.get("points").split()) == 2


def test_svg_warns_on_empty_series(small_rows, tmp_path):
    rows = list(small_rows)
    for r in rows:
        if str(r.q) == "inf":
            r.sinr_db = math.nan
    with pytest.warns(UserWarning, match="q=inf"):
        assert bench.emit_svg_lines(rows, tmp_path / "p.svg") == 2


def test_aggregate_means(small_rows):
    agg = bench.aggregate(small_rows)
    key = (ExtRational.of(2), ExtRational.of(1))
    vals = [r.sinr_db for r in small_rows if r.q == key[1] and r.snr_db == 0]
    assert agg[key][0] == (0.0, pytest.approx(np.mean(vals)))


def test_robust_norm_mode_runs():
    cfg = bench.ExperimentConfig.from_dict(dict(SMALL, constraint_mode="robust_norm", q1="3/2",
                                                pq_list=[[2, 2]], runs=1))
    rows = bench.run_experiment(cfg)
    assert all(r.status == "alpha" for r in rows)


def test_cpu_svg_path():
    assert bench.cpu_svg_path("out/plot.svg") == Path("out/plot_cpu.svg")


def test_cli_run(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "r.csv", tmp_path / "r.svg"
    code = cli.main(["run", "--config", str(CONFIGS / "smoke.toml"), "--runs", "1",
                     "--out-csv", str(csv_path), "--out-svg", str(svg_path), "--seed", "4"])
    assert code == 0
    assert len(bench.read_csv(csv_path)) == 2 * 3
    assert svg_path.exists() and (tmp_path / "r_cpu.svg").exists()
    assert "p=2 q=inf" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "missing.toml")]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 1\n")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert cli.main(["run", "--config", str(CONFIGS / "smoke.toml"),
                     "--out-csv", str(tmp_path / "nope" / "x.csv")]) == 2
    assert cli.main(["run", "--config", str(CONFIGS / "smoke.toml"), "--seed", "-1"]) == 2
    assert "error" in capsys.readouterr().err


def test_selftest_exit_code(monkeypatch):
    from rabeam import acceptance
    ok = acceptance.CriterionResult(1, "x", True, "", 0.0)
    bad = acceptance.CriterionResult(2, "y", False, "", 0.0)
    monkeypatch.setattr(acceptance, "run_all", lambda **kw: [ok])
    assert cli.main(["selftest"]) == 0
    monkeypatch.setattr(acceptance, "run_all", lambda **kw: [ok, bad])
    assert cli.main(["selftest"]) == 1
