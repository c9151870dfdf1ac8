"""CLI contract: subcommands, exit codes, manifests, reproducibility."""

import json
import os
import subprocess
import sys

import pytest

from ntnlink.cli import main

RUN = [sys.executable, "-m", "ntnlink.cli"]


def test_help_for_every_subcommand():
    for sub in ("train", "eval", "complexity"):
        out = subprocess.run(RUN + [sub, "--help"], capture_output=True, text=True)
        assert out.returncode == 0
        assert "--help" in out.stdout or sub in out.stdout


def test_complexity_assert_expected_exit_zero(capsys):
    assert main(["complexity", "--assert-expected"]) == 0
    out = capsys.readouterr().out
    assert "156,576" in out


def test_complexity_json_output(tmp_path, capsys):
    path = str(tmp_path / "c.json")
    assert main(["complexity", "--json", path]) == 0
    data = json.load(open(path))
    assert data["total_muls"] == 156576
    assert data["trainable_params"] == 5806


def test_complexity_custom_arch(tmp_path, capsys):
    from ntnlink.complexity import default_arch_entries

    path = tmp_path / "arch.json"
    path.write_text(json.dumps(default_arch_entries()[:3]))
    assert main(["complexity", "--arch-file", str(path)]) == 0
    assert main(["complexity", "--arch-file", str(path), "--assert-expected"]) == 1


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[link]\nmod_order = 8\n")
    assert main(["eval", "--config", str(bad)]) == 2
    assert main(["train", "--config", str(tmp_path / "missing.ini")]) == 2


def test_checkpoint_mismatch_exit_code(tmp_path):
    from ntnlink.predictor import ChannelPredictor

    prefix = str(tmp_path / "ck")
    ChannelPredictor(rng_seed=1).save(prefix)
    manifest = json.load(open(prefix + ".json"))
    manifest["fingerprint"][0]["kernel"] = [5, 5]
    json.dump(manifest, open(prefix + ".json", "w"))
    code = main(["eval", "--checkpoint", prefix, "--values", "10",
                 "--out", str(tmp_path / "out")])
    assert code == 4


def test_train_smoke_writes_artifacts(tmp_path):
    out = str(tmp_path / "trainout")
    code = main(["train", "--epochs", "2", "--batch", "4", "--seed", "3",
                 "--out", out])
    assert code == 0
    assert os.path.exists(os.path.join(out, "checkpoint.bin"))
    assert os.path.exists(os.path.join(out, "checkpoint.json"))
    log = open(os.path.join(out, "training_log.csv")).read().splitlines()
    assert log[0] == "epoch,lr,train_loss,val_nmse"
    assert len(log) == 3
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["command"] == "train"
    assert all(os.path.exists(p) for p in manifest["artifacts"])


def test_eval_smoke_and_byte_identical_rerun(tmp_path):
    cfgp = tmp_path / "cfg.ini"
    cfgp.write_text("[run]\nmax_iterations = 6\nmin_block_errors = 1000000\n"
                    "seed = 11\n")
    out1 = str(tmp_path / "o1")
    out2 = str(tmp_path / "o2")
    for out in (out1, out2):
        code = main(["eval", "--config", str(cfgp), "--values", "6:8:1",
                     "--out", out, "--threads", "1"])
        assert code == 0
    csv1 = open(os.path.join(out1, "records.csv"), "rb").read()
    csv2 = open(os.path.join(out2, "records.csv"), "rb").read()
    assert csv1 == csv2
    assert len(csv1.splitlines()) == 4
    manifest = json.load(open(os.path.join(out1, "manifest.json")))
    assert manifest["axis"] == "ebn0"
    for metric in ("uncoded_ber", "bler", "throughput", "nmse"):
        assert os.path.exists(os.path.join(out1, f"{metric}.svg"))
        assert os.path.exists(os.path.join(out1, f"{metric}_estimation.txt"))


def test_eval_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("NTNLINK_OUTDIR", str(tmp_path / "envout"))
    cfgp = tmp_path / "cfg.ini"
    cfgp.write_text("[run]\nmax_iterations = 2\nmin_block_errors = 1000000\n")
    assert main(["eval", "--config", str(cfgp)]) == 0
    assert os.path.exists(tmp_path / "envout" / "eval" / "records.csv")


def test_values_parser():
    from ntnlink.cli import _parse_values

    assert _parse_values("0:12:1") == [float(v) for v in range(13)]
    assert _parse_values("5,30,50") == ["5", "30", "50"]
    assert _parse_values("0:1:0.5") == [0.0, 0.5, 1.0]
