import json
import math

import numpy as np
import pytest

from trunctail import TruncatedSample, burr, gamma2_for_target_p
from trunctail.cli import main
from trunctail.truncation import TruncationModel


def _three_pair_csv(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("x,y\n1,3\n2,2.5\n4,6\n")
    return str(path)


def _complete_csv(tmp_path):
    path = tmp_path / "complete.csv"
    path.write_text("x,y\n1,1e9\n2,1e9\n4,1e9\n8,1e9\n")
    return str(path)


def _simulated_csv(tmp_path, big_n=400, seed=13):
    model = TruncationModel(burr(0.25, 0.6),
                            burr(0.25, gamma2_for_target_p(0.6, 0.7)))
    sample = model.sample(big_n, seed)
    path = tmp_path / "sim.csv"
    sample.to_csv(path)
    return str(path)


def test_estimate_single_log_ratio(tmp_path, capsys):
    code = main(["estimate", _three_pair_csv(tmp_path), "--k", "1", "--no-ci"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["gamma1_hat"] == pytest.approx(math.log(2.0), abs=1e-5)
    assert out["k"] == 1 and out["n"] == 3
    assert out["ci"] is None


def test_estimate_reduces_to_hill_on_complete_data(tmp_path, capsys):
    code = main(["estimate", _complete_csv(tmp_path),
                 "--variant", "lynden-bell", "--k", "2", "--no-ci"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["gamma1_hat"] == pytest.approx(1.0397207708399177, abs=1e-5)
    assert out["variant"] == "lynden-bell"


def test_estimate_rejects_x_above_y(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1,3\n5,2\n4,6\n")
    code = main(["estimate", str(path)])
    err = capsys.readouterr().err
    assert code == 2
    assert "row(s) 2" in err


def test_estimate_rejects_malformed_csv(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("u,v\n1,2\n")
    assert main(["estimate", str(path)]) == 2
    path.write_text("x,y\n1,2\n")
    assert main(["estimate", str(path)]) == 2  # below the 3-row minimum
    assert main(["estimate", str(tmp_path / "absent.csv")]) == 2
    capsys.readouterr()


def test_estimate_degenerate_without_threshold(tmp_path, capsys):
    code = main(["estimate", _complete_csv(tmp_path)])  # n=4, no --k
    assert code == 4
    assert "degenerate" in capsys.readouterr().err


def test_estimate_full_run_with_files(tmp_path, capsys):
    data = _simulated_csv(tmp_path)
    out_json = str(tmp_path / "est.json")
    out_trace = str(tmp_path / "trace.csv")
    code = main(["estimate", data, "--json", out_json, "--trace", out_trace])
    assert code == 0
    assert capsys.readouterr().out == ""
    report = json.loads((tmp_path / "est.json").read_text())
    assert report["ci"] is not None
    assert report["gamma2_hat"] > report["gamma1_hat"]
    assert 0.0 < report["gamma1_hat"] < 3.0
    trace_lines = (tmp_path / "trace.csv").read_text().strip().split("\n")
    assert trace_lines[0] == "k,gamma1_hat"
    first_k = int(trace_lines[1].split(",")[0])
    assert first_k == 2
    manifest = json.loads((tmp_path / "est.json.manifest.json").read_text())
    assert manifest["command"] == "estimate"
    assert manifest["outputs"] == [out_json, out_trace]
    assert data in manifest["input_digests"]


def test_estimate_replay_reproduces_outputs(tmp_path, capsys):
    data = _simulated_csv(tmp_path)
    first = tmp_path / "run1"
    first.mkdir()
    out_json = str(first / "est.json")
    out_trace = str(first / "trace.csv")
    assert main(["estimate", data, "--json", out_json, "--trace", out_trace]) == 0
    second = tmp_path / "run2"
    second.mkdir()
    code = main(["replay", out_json + ".manifest.json", "--outdir", str(second)])
    assert code == 0
    assert (second / "est.json").read_bytes() == (first / "est.json").read_bytes()
    assert (second / "trace.csv").read_bytes() == (first / "trace.csv").read_bytes()
    capsys.readouterr()


def test_replay_detects_changed_input(tmp_path, capsys):
    data = _simulated_csv(tmp_path)
    out_json = str(tmp_path / "est.json")
    assert main(["estimate", data, "--json", out_json]) == 0
    with open(data, "a") as fh:
        fh.write("5,6\n")
    code = main(["replay", out_json + ".manifest.json"])
    assert code == 2
    assert "changed" in capsys.readouterr().err


def test_replay_rejects_garbage(tmp_path, capsys):
    missing = main(["replay", str(tmp_path / "nope.json")])
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert missing == 2
    assert main(["replay", str(bad)]) == 2
    capsys.readouterr()


def test_estimate_model_violation_still_prints(tmp_path, capsys):
    rng = np.random.default_rng(7)
    x = np.exp(rng.normal(size=60) * 2.0)
    y = x.max() * (2.0 + 1e-9 * rng.random(60))
    sample = TruncatedSample(x, y)
    path = tmp_path / "flat.csv"
    sample.to_csv(path)
    code = main(["estimate", str(path)])
    captured = capsys.readouterr()
    assert code == 3
    out = json.loads(captured.out)
    assert out["gamma2_hat"] <= out["gamma1_hat"]
    assert out["ci"] is None
    assert "model violation" in captured.err


def test_simulate_inline(tmp_path, capsys):
    prefix = str(tmp_path / "study")
    code = main(["simulate", "--p", "0.7", "--gamma1", "0.6", "--N", "150",
                 "--reps", "6", "--seed", "1", "--out", prefix])
    assert code == 0
    lines = (tmp_path / "study.csv").read_text().strip().split("\n")
    assert lines[0].startswith("p,gamma1,N,")
    assert len(lines) == 2
    report = json.loads((tmp_path / "study.json").read_text())
    assert report["rows"][0]["N"] == 150
    manifest = json.loads((tmp_path / "study.manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seeds"] == {"master_seed": 1}
    assert manifest["parameters"]["config"]["replicates"] == 6
    capsys.readouterr()


def test_simulate_flag_validation(tmp_path, capsys):
    assert main(["simulate", "--p", "0.7", "--gamma1", "0.6",
                 "--N", "100", "--reps", "4"]) == 2  # no seed
    err = capsys.readouterr().err
    assert "--seed" in err
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"cells": [], "replicates": 2}))
    assert main(["simulate", "--config", str(config),
                 "--out", str(tmp_path / "s")]) == 2
    assert "/cells" in capsys.readouterr().err
    config.write_text(json.dumps(
        {"cells": [{"p": 0.7, "gamma1": 0.6, "N": 100}], "replicates": 2}))
    assert main(["simulate", "--config", str(config), "--p", "0.5",
                 "--out", str(tmp_path / "s")]) == 2
    assert "conflicts" in capsys.readouterr().err


def test_simulate_threads_do_not_change_bytes(tmp_path, capsys):
    args = ["simulate", "--p", "0.7", "--gamma1", "0.6", "--N", "200",
            "--reps", "8", "--seed", "3"]
    p1 = str(tmp_path / "one")
    p2 = str(tmp_path / "two")
    assert main(args + ["--threads", "1", "--out", p1]) == 0
    assert main(args + ["--threads", "2", "--out", p2]) == 0
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
    capsys.readouterr()


def test_simulate_env_default_threads(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("TRUNCTAIL_THREADS", "2")
    args = ["simulate", "--p", "0.7", "--gamma1", "0.6", "--N", "150",
            "--reps", "4", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "env")]) == 0
    monkeypatch.delenv("TRUNCTAIL_THREADS")
    assert main(args + ["--threads", "1", "--out", str(tmp_path / "plain")]) == 0
    assert ((tmp_path / "env.csv").read_bytes()
            == (tmp_path / "plain.csv").read_bytes())
    capsys.readouterr()


def test_simulate_replay(tmp_path, capsys):
    prefix = str(tmp_path / "study")
    assert main(["simulate", "--p", "0.7", "--gamma1", "0.6", "--N", "150",
                 "--reps", "5", "--seed", "2", "--out", prefix]) == 0
    redo = tmp_path / "redo"
    redo.mkdir()
    assert main(["replay", prefix + ".manifest.json",
                 "--outdir", str(redo)]) == 0
    assert ((redo / "study.csv").read_bytes()
            == (tmp_path / "study.csv").read_bytes())
    assert ((redo / "study.json").read_bytes()
            == (tmp_path / "study.json").read_bytes())
    capsys.readouterr()


def test_limit_check_stdout(capsys):
    code = main(["limit-check", "--gamma1", "0.6", "--gamma2", "1.4",
                 "--paths", "400", "--m", "512", "--seed", "4"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    for key in ("mc_variance", "sigma2_closed_form", "relative_error", "std_error"):
        assert key in out
    assert out["sigma2_closed_form"] == pytest.approx(1.598625, abs=1e-9)
    assert out["relative_error"] < 0.5


def test_limit_check_json_file_and_replay(tmp_path, capsys):
    out_json = str(tmp_path / "lc.json")
    args = ["limit-check", "--gamma1", "0.6", "--gamma2", "1.4",
            "--paths", "300", "--m", "256", "--seed", "8", "--json", out_json]
    assert main(args) == 0
    redo = tmp_path / "redo"
    redo.mkdir()
    assert main(["replay", out_json + ".manifest.json",
                 "--outdir", str(redo)]) == 0
    assert (redo / "lc.json").read_bytes() == (tmp_path / "lc.json").read_bytes()
    capsys.readouterr()


def test_limit_check_rejects_bad_ordering(capsys):
    code = main(["limit-check", "--gamma1", "1.4", "--gamma2", "0.6",
                 "--paths", "100", "--m", "128", "--seed", "1"])
    assert code == 3
    assert "model violation" in capsys.readouterr().err


def test_limit_check_requires_seed():
    with pytest.raises(SystemExit) as excinfo:
        main(["limit-check", "--gamma1", "0.6", "--gamma2", "1.4"])
    assert excinfo.value.code == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2
