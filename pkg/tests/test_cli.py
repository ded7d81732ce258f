import csv
import io
import json

import numpy as np
import pytest

from cimanneal import cli
from cimanneal.graph import IsingProblem, write_gset

TRIANGLE = "3 3\n1 2 1\n2 3 1\n1 3 1\n"


@pytest.fixture
def tri_file(tmp_path):
    p = tmp_path / "tri.txt"
    p.write_text(TRIANGLE)
    return p


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def run_cli(*args):
    return cli.main([str(a) for a in args])


def test_three_node_fixture(tri_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli("--graph", tri_file, "--runs", 7, "--iterations", 100, "--out-dir", out) == cli.EXIT_OK
    rows = read_rows(out / "results.csv")
    assert len(rows) == 7
    assert list(rows[0]) == ["run_index", "seed", "cut", "energy", "wall_time_ms"]
    assert all(float(r["cut"]) == 2.0 for r in rows)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == 1
    assert summary["problem"]["n"] == 3
    assert summary["best_cut"] == 2.0
    assert sum(summary["histogram"]["counts"]) == 7
    assert "tri" in capsys.readouterr().out


def test_missing_file_is_config_error(tmp_path):
    out = tmp_path / "out"
    assert run_cli("--graph", tmp_path / "nope.txt", "--out-dir", out) == cli.EXIT_CONFIG
    assert not out.exists()


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1\n1 3 1\n")
    out = tmp_path / "out"
    assert run_cli("--graph", bad, "--out-dir", out) == cli.EXIT_PARSE
    assert not out.exists()


def test_divergence_exit_code(tri_file, tmp_path):
    out = tmp_path / "o"
    code = run_cli("--graph", tri_file, "--solver", "cim_physics", "--gain", 3, "--loss", 0, "--nonlinear-loss", 1,
                   "--noise", 1, "--runs", 2, "--iterations", 50, "--out-dir", out)
    assert code == cli.EXIT_DIVERGENCE
    assert not out.exists()


def test_io_error_exit_code(tri_file, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run_cli("--graph", tri_file, "--runs", 2, "--iterations", 10, "--out-dir", blocker / "sub") == cli.EXIT_IO


@pytest.mark.parametrize(
    "args",
    [
        ["--solver", "annealer"],
        ["--runs", "0"],
        ["--generate", "10,gaussian"],
        ["--generate", "10,cauchy,1"],
        ["--beta", "1.5"],
    ],
)
def test_config_errors(args, tmp_path, tri_file):
    base = ["--out-dir", str(tmp_path / "o")]
    if "--generate" not in args:
        base += ["--graph", str(tri_file)]
    assert cli.main(base + args) == cli.EXIT_CONFIG


def test_both_sources_rejected(tri_file, tmp_path):
    assert run_cli("--graph", tri_file, "--generate", "5,gaussian,1", "--out-dir", tmp_path) == cli.EXIT_CONFIG


def strip_timing(text):
    return [line.rsplit(",", 1)[0] for line in text.splitlines()]


@pytest.mark.parametrize("solver", ["simcim", "nmfa", "cim_physics"])
def test_byte_identical_reruns(solver, tmp_path):
    args = ["--solver", solver, "--generate", "30,gaussian,4", "--runs", 40, "--iterations", 150]
    assert run_cli(*args, "--out-dir", tmp_path / "a") == 0
    assert run_cli(*args, "--jobs", 3, "--out-dir", tmp_path / "b") == 0
    a = (tmp_path / "a" / "results.csv").read_text()
    b = (tmp_path / "b" / "results.csv").read_text()
    assert strip_timing(a) == strip_timing(b)


def test_summary_matches_csv(tmp_path):
    out = tmp_path / "o"
    assert run_cli("--generate", "40,gaussian,2", "--runs", 50, "--iterations", 200, "--out-dir", out) == 0
    cuts = np.array([float(r["cut"]) for r in read_rows(out / "results.csv")])
    stats = json.loads((out / "summary.json").read_text())["stats"]
    assert stats["min"] == cuts.min() and stats["max"] == cuts.max()
    assert stats["mean"] == pytest.approx(cuts.mean(), rel=1e-9)
    assert stats["std"] == pytest.approx(cuts.std(), rel=1e-9)
    assert stats["n_runs"] == 50


def test_config_round_trip(tmp_path):
    first = tmp_path / "first"
    args = ["--generate", "25,discrete:0.5,3", "--runs", 12, "--iterations", 120, "--v-start", -1.4,
            "--steepness", 2, "--noise", 0.07, "--seed", 9]
    assert run_cli(*args, "--out-dir", first) == 0
    second = tmp_path / "second"
    assert run_cli("--config", first / "summary.json", "--out-dir", second) == 0
    assert strip_timing((first / "results.csv").read_text()) == strip_timing((second / "results.csv").read_text())
    c1 = json.loads((first / "summary.json").read_text())["config"]
    c2 = json.loads((second / "summary.json").read_text())["config"]
    assert c1 == c2


def test_key_value_config_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\ngenerate = 20,gaussian,1\nruns = 5\niterations = 50\nnoise = 0.2\n")
    out = tmp_path / "o"
    assert run_cli("--config", cfg, "--runs", 8, "--out-dir", out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["runs"] == 8
    assert summary["config"]["noise"] == 0.2
    assert len(read_rows(out / "results.csv")) == 8


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("temperature = 3\n")
    assert run_cli("--config", cfg, "--generate", "5,gaussian,1", "--out-dir", tmp_path) == cli.EXIT_CONFIG


def test_trace_output(tmp_path):
    out = tmp_path / "o"
    assert run_cli("--generate", "40,gaussian,1", "--runs", 3, "--iterations", 60, "--trace", "--out-dir", out) == 0
    rows = read_rows(out / "trace.csv")
    assert len(rows) == 60
    assert list(rows[0])[:3] == ["iteration", "v", "eig_proximity"]
    prox = [float(r["eig_proximity"]) for r in rows if r["eig_proximity"]]
    assert all(0 <= p <= 2 for p in prox)


def test_parse_generate():
    g = cli.parse_generate("100,gaussian:0.5:2,7")
    assert (g.n, g.mean, g.stddev, g.seed) == (100, 0.5, 2.0, 7)
    g = cli.parse_generate("50,discrete:0.2,1")
    assert (g.distribution, g.p) == ("discrete", 0.2)


# -- suite ------------------------------------------------------------------


def test_manifest_two_fixtures(tmp_path, tri_file):
    write_gset(IsingProblem(np.array([[0.0, -1.0], [-1.0, 0.0]])), tmp_path / "pair.txt")
    man = tmp_path / "suite.txt"
    man.write_text("# two tiny problems\ntri.txt\npair.txt runs=4\n")
    out = tmp_path / "out"
    code = run_cli("--manifest", man, "--runs", 6, "--iterations", 80, "--out-dir", out)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert [p["name"] for p in report["problems"]] == ["tri", "pair"]
    agg = report["aggregates"]["simcim"]
    assert agg["n_problems"] == 2
    assert agg["mean_of_max_cuts"] == pytest.approx((2.0 + 1.0) / 2)
    assert len(read_rows(out / "pair" / "simcim" / "results.csv")) == 4


def test_empty_manifest(tmp_path):
    man = tmp_path / "empty.txt"
    man.write_text("# nothing\n")
    assert run_cli("--manifest", man, "--out-dir", tmp_path) == cli.EXIT_CONFIG


def test_suite_continues_after_failure(tmp_path, tri_file):
    man = tmp_path / "suite.txt"
    (tmp_path / "bad.txt").write_text("2 1\n1 5 1\n")
    man.write_text("bad.txt\ntri.txt\n")
    out = tmp_path / "out"
    assert run_cli("--manifest", man, "--runs", 3, "--iterations", 30, "--out-dir", out) == cli.EXIT_SUITE_FAILURES
    report = json.loads((out / "report.json").read_text())
    assert "error" in report["problems"][0]["results"]["simcim"]
    assert report["aggregates"]["simcim"]["n_problems"] == 1
    assert report["failed"] == 1


def test_ensemble_aggregates_match_csvs(tmp_path):
    man = tmp_path / "ens.txt"
    man.write_text("".join(f"generate:60,gaussian,{s}\n" for s in range(20)))
    out = tmp_path / "out"
    code = run_cli("--manifest", man, "--solver", "simcim,nmfa", "--runs", 10, "--iterations", 100, "--out-dir", out)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    for solver in ("simcim", "nmfa"):
        means, maxes = [], []
        for entry in report["problems"]:
            rows = read_rows(out / entry["name"] / solver / "results.csv")
            cuts = np.array([float(r["cut"]) for r in rows])
            means.append(cuts.mean())
            maxes.append(cuts.max())
        agg = report["aggregates"][solver]
        assert agg["n_problems"] == 20
        assert agg["mean_of_mean_cuts"] == pytest.approx(np.mean(means), rel=1e-9)
        assert agg["mean_of_max_cuts"] == pytest.approx(np.mean(maxes), rel=1e-9)


def test_results_csv_format():
    from cimanneal.simcim import SimCimParams, run_batch

    P = IsingProblem(-(np.ones((3, 3)) - np.eye(3)))
    res, _ = run_batch(P, SimCimParams().with_iterations(20), 3)
    rows = list(csv.reader(io.StringIO(cli.results_csv(res))))
    assert rows[1][:4] == ["0", str(int(res.seeds[0])), "2", "-1"]
