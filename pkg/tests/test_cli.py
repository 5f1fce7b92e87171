"""Command line front end, exercised through main(argv)."""

import json
import shutil
import subprocess
import sys

import pytest

from dsalab.cli import main


@pytest.fixture()
def tiny_config(tmp_path):
    doc = {
        "pattern": {"type": "round_robin", "num_channels": 6, "goods": 1,
                    "switch_prob": 0.9},
        "users": [{"policy": "random"}],
        "horizon": 400,
        "window": 50,
        "seed": 7,
        "label": "tiny",
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_writes_artifacts(tiny_config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(tiny_config), "--out", str(out)]) == 0
    assert (out / "run_seed7.csv").exists()
    assert (out / "curve_seed7.svg").exists()
    captured = capsys.readouterr().out
    assert "final-20% avg reward" in captured
    assert "seed=7" in captured


def test_run_seed_override_and_replicas(tiny_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(tiny_config), "--out", str(out),
                 "--seed", "20", "--replicas", "2"]) == 0
    for seed in (20, 21):
        assert (out / f"run_seed{seed}.csv").exists()
        assert (out / f"curve_seed{seed}.svg").exists()


def test_run_missing_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 1


def test_run_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 1


def test_run_invalid_config_document(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pattern": {"type": "zigzag"}, "users": []}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 1


def test_run_rejects_bad_replicas(tiny_config, tmp_path):
    assert main(["run", "--config", str(tiny_config),
                 "--out", str(tmp_path), "--replicas", "0"]) == 1


def test_sweep_writes_summary(tiny_config, tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(tiny_config), "--out", str(out),
                 "--param", "switch_prob", "--values", "0.6,0.9"]) == 0
    lines = (out / "summary.csv").read_text().strip().split("\n")
    assert lines[0] == "param,value,seed,user,final_avg_reward"
    assert len(lines) == 3
    assert lines[1].startswith("switch_prob,0.6,7,0,")
    assert (out / "sweep.svg").exists()
    assert (out / "run_p0.6.csv").exists()
    assert (out / "run_p0.9.csv").exists()


def test_sweep_rejects_unknown_param(tiny_config, tmp_path):
    assert main(["sweep", "--config", str(tiny_config), "--out", str(tmp_path),
                 "--param", "gamma", "--values", "0.5"]) == 1


def test_sweep_rejects_bad_values(tiny_config, tmp_path):
    base = ["sweep", "--config", str(tiny_config), "--out", str(tmp_path),
            "--param", "switch_prob"]
    assert main(base + ["--values", "a,b"]) == 1
    assert main(base + ["--values", ","]) == 1


def test_bench_runtime_table_and_csv(tmp_path, capsys):
    out = tmp_path / "bench"
    assert main(["bench-runtime", "--channels", "4", "--trials", "3",
                 "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "ac s/decision" in table
    lines = (out / "runtime.csv").read_text().strip().split("\n")
    assert lines[0] == "channels,ac_seconds,dqn_seconds,reduction_percent"
    assert len(lines) == 2 and lines[1].startswith("4,")


def test_bench_runtime_rejects_bad_args():
    assert main(["bench-runtime", "--channels", "two"]) == 1
    assert main(["bench-runtime", "--channels", "4", "--trials", "0"]) == 1
    assert main(["bench-runtime", "--channels", "1"]) == 1


def test_opcount_prints_ratio(capsys):
    assert main(["opcount", "--channels", "16", "--minibatch", "32"]) == 0
    text = capsys.readouterr().out
    assert "input width K = 256" in text
    assert "ratio ac/dqn" in text
    assert "3/M = 0.093750" in text


def test_opcount_rejects_bad_args():
    assert main(["opcount", "--minibatch", "0"]) == 1
    assert main(["opcount", "--channels", "1"]) == 1


def test_usage_errors_exit_one():
    assert main([]) == 1
    assert main(["launch"]) == 1


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_console_script_installed():
    exe = shutil.which("dsalab")
    if exe is None:
        pytest.skip("console script not on PATH")
    done = subprocess.run([exe, "opcount"], capture_output=True, text=True)
    assert done.returncode == 0
    assert "ratio ac/dqn" in done.stdout


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "dsalab.cli", "opcount"],
                          capture_output=True, text=True)
    assert done.returncode == 0
    assert "ratio ac/dqn" in done.stdout
