import json

import numpy as np
import pytest

from fairsel.cli import main
from fairsel.data import load_config, load_problem

TINY = ["--population-size", "4", "--max-iterations", "2", "--trees", "3", "--max-depth", "3"]


def run(out, *extra):
    return main(["run", "--config", "german-age", "--seeds", "0", "--out", str(out), *TINY, *extra])


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert run(out) == 0
    return out


def test_run_writes_both_results(artifacts):
    doc = json.loads((artifacts / "german-age_seed0.json").read_text())
    assert doc["schema"] == "fairsel.problem_result/1"
    assert set(doc["lgaffs"]) == {"solution"}
    assert set(doc["pgaffs"]) == {"filtered", "front"}
    assert doc["pgaffs"]["filtered"] in doc["pgaffs"]["front"]
    for m in [doc["lgaffs"]["solution"], *doc["pgaffs"]["front"]]:
        for k, v in m["test_fitness"].items():
            if not isinstance(v, bool):
                assert 0.0 <= v <= 1.0, k
    assert (artifacts / "german-age_seed0_front.png").stat().st_size > 0
    log = (artifacts / "german-age_seed0.progress.log").read_text().splitlines()
    assert any(ln.startswith("lgaffs gen=1") for ln in log)
    assert any(ln.startswith("pgaffs gen=1") for ln in log)


def test_rerun_is_byte_identical(artifacts, tmp_path):
    assert run(tmp_path) == 0
    for name in ("german-age_seed0.json", "german-age_seed0.progress.log",
                 "german-age_seed0_front.png"):
        assert (tmp_path / name).read_bytes() == (artifacts / name).read_bytes(), name


def test_replay(artifacts, tmp_path):
    code = main(["run", "--replay", str(artifacts / "german-age_seed0.json"), "--out", str(tmp_path)])
    assert code == 0
    assert ((tmp_path / "german-age_seed0.json").read_bytes()
            == (artifacts / "german-age_seed0.json").read_bytes())


def test_single_algorithm(tmp_path):
    assert run(tmp_path, "--algorithm", "lgaffs") == 0
    doc = json.loads((tmp_path / "german-age_seed0.json").read_text())
    assert "lgaffs" in doc and "pgaffs" not in doc


def test_missing_config_leaves_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(out), *TINY])
    assert code != 0
    assert not out.exists() or not any(out.iterdir())
    assert "error" in capsys.readouterr().err


def test_compare_fixture(tmp_path, capsys):
    assert main(["compare", "--fixture", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert abs(summary["wilcoxon_p"]["gm"] - 0.00128) <= 0.005
    assert (tmp_path / "measures.png").exists()
    assert "wilcoxon_p" in capsys.readouterr().out


def test_compare_single_result(artifacts, tmp_path):
    assert main(["compare", str(artifacts / "german-age_seed0.json"), "--out", str(tmp_path)]) == 0
    table = (tmp_path / "comparison.csv").read_text().splitlines()
    assert table[-1].startswith("wilcoxon_p") and "NA" in table[-1]
    assert all(v is None for v in json.loads((tmp_path / "summary.json").read_text())
               ["wilcoxon_p"].values())
    assert (tmp_path / "domination.png").exists()


def test_compare_without_inputs():
    assert main(["compare"]) == 2


def _labels():
    return load_problem(load_config("german-age")).y


def test_metrics_perfect(tmp_path, capsys):
    p = tmp_path / "pred.txt"
    p.write_text("\n".join(str(v) for v in _labels()) + "\n")
    assert main(["metrics", str(p), "--config", "german-age", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["gm"] == 1.0


def test_metrics_constant(tmp_path, capsys):
    p = tmp_path / "pred.txt"
    p.write_text("1\n" * len(_labels()))
    assert main(["metrics", str(p), "--config", "german-age", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["gm"] == 0.0
    assert out["dp"] == 1.0 and out["consistency"] == 1.0


def test_metrics_length_mismatch(tmp_path, capsys):
    p = tmp_path / "pred.txt"
    p.write_text("1\n0\n")
    assert main(["metrics", str(p), "--config", "german-age"]) == 1
    assert "predictions" in capsys.readouterr().err


def test_metrics_table_output(tmp_path, capsys):
    p = tmp_path / "pred.txt"
    p.write_text("\n".join(str(v) for v in np.zeros(len(_labels()), int)) + "\n")
    assert main(["metrics", str(p), "--config", "german-age"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split("\t")[0] for ln in lines[:5]] == ["gm", "dp", "consistency", "fperbs", "fnerbs"]
