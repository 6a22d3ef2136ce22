import csv
import io
import json
import shutil
import socket

import numpy as np
import pytest

from fallguard.classify import save_model, train_knn
from fallguard.cli import main

from helpers import MockTelegram, parse_multipart

FALL_SCRIPT = {
    "segments": [
        {"class": "Pose1", "duration": 5, "motion_amplitude": 0.05},
        {"class": "Pose6", "duration": 6, "motion_amplitude": 0.001},
    ]
}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["generate", "--per-class", "100", "--seed", "1", "--out", str(d / "ds.jsonl")]) == 0
    assert main(["train", "--dataset", str(d / "ds.jsonl"), "--n-trees", "20", "--out", str(d / "m.fgm")]) == 0
    return d


def run_config(d, **alert):
    cfg = {
        "stream": {"speed": "max"},
        "alert": {"sink": "dryrun", "dryrun_dir": str(d / "alerts"), **alert},
        "logging": {"event_log_path": str(d / "events.jsonl")},
    }
    return write_json(d / "cfg.json", cfg)


def events(d):
    return [json.loads(x) for x in (d / "events.jsonl").read_text().splitlines()]


# ---------------------------------------------------------------- generate


@pytest.mark.parametrize("per_class,total", [(600, 7200), (1, 12)])
def test_generate_counts(tmp_path, capsys, per_class, total):
    out = tmp_path / "d.jsonl"
    assert main(["generate", "--per-class", str(per_class), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == total
    assert f"Pose12: {per_class}" in capsys.readouterr().out


def test_generate_missing_directory(tmp_path, capsys):
    bad = tmp_path / "nope" / "d.jsonl"
    assert main(["generate", "--per-class", "1", "--out", str(bad)]) == 1
    assert str(bad) in capsys.readouterr().err


def test_generate_scenario(tmp_path):
    script = write_json(tmp_path / "s.json", FALL_SCRIPT)
    out = tmp_path / "fall.jsonl"
    assert main(["generate", "--scenario", script, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 110
    ann = json.loads((tmp_path / "fall.jsonl.annotations.json").read_text())
    assert [a["class"] for a in ann] == ["Pose1", "Pose6"]


# ---------------------------------------------------------------- train / evaluate


def test_train_default_report(tmp_path, capsys):
    ds = tmp_path / "d.jsonl"
    main(["generate", "--per-class", "600", "--out", str(ds)])
    capsys.readouterr()
    reports = []
    for name in ("a.fgm", "b.fgm"):
        assert main(["train", "--dataset", str(ds), "--n-trees", "10", "--out", str(tmp_path / name)]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert (rep["train_size"], rep["test_size"]) == (5760, 1440)
        assert rep["model"] == "rf" and rep["seed"] == 42
        reports.append({k: v for k, v in rep.items() if k != "model_path"})
    assert reports[0] == reports[1]
    assert (tmp_path / "a.fgm").read_bytes() == (tmp_path / "b.fgm").read_bytes()
    assert json.loads((tmp_path / "a.fgm.report.json").read_text())["test"]["accuracy"] >= 0.99


def test_train_unknown_type(workdir, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--dataset", str(workdir / "ds.jsonl"), "--type", "svm"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_train_knn(workdir, capsys):
    out = workdir / "k.fgm"
    assert main(["train", "--dataset", str(workdir / "ds.jsonl"), "--type", "knn", "--k", "3", "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["params"] == {"k": 3}


def test_evaluate_csv(workdir, capsys):
    out = workdir / "cm.csv"
    assert main(["evaluate", "--dataset", str(workdir / "ds.jsonl"), "--model", str(workdir / "m.fgm"), "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0][0] == "true\\pred" and len(rows) == 13
    assert all(sum(int(v) for v in r[1:]) == 20 for r in rows[1:])
    assert "accuracy" in capsys.readouterr().out


def test_evaluate_feature_mismatch(workdir, capsys):
    toy = workdir / "toy.fgm"
    toy.write_bytes(save_model(train_knn(np.zeros((3, 4)), np.array([0, 1, 2]), k=1)))
    assert main(["evaluate", "--dataset", str(workdir / "ds.jsonl"), "--model", str(toy)]) == 1
    assert "4 features" in capsys.readouterr().err


def test_evaluate_corrupt_model(workdir, capsys):
    bad = workdir / "bad.fgm"
    bad.write_bytes(b"junk")
    assert main(["evaluate", "--dataset", str(workdir / "ds.jsonl"), "--model", str(bad)]) == 1
    assert "magic" in capsys.readouterr().err


# ---------------------------------------------------------------- run


def scenario(d, script, name):
    out = d / name
    assert main(["generate", "--scenario", write_json(d / f"{name}.json", script), "--out", str(out)]) == 0
    return str(out)


def fresh(d):
    shutil.rmtree(d / "alerts", ignore_errors=True)
    (d / "events.jsonl").unlink(missing_ok=True)


def test_run_single_alert(workdir):
    fresh(workdir)
    src = scenario(workdir, FALL_SCRIPT, "fall.jsonl")
    cfg = run_config(workdir)
    assert main(["run", "--config", cfg, "--source", src, "--model", str(workdir / "m.fgm")]) == 0
    recs = events(workdir)
    alerts = [r for r in recs if r["type"] == "alert"]
    assert len(alerts) == 1 and alerts[0]["status"] == "sent"
    assert sorted(p.name for p in (workdir / "alerts").iterdir()) == ["alert_0001.json", "alert_0001.png"]
    assert recs[-1]["type"] == "summary" and recs[-1]["frames"] == 110
    assert [r["to"] for r in recs if r["type"] == "transition"] == ["fall_pose_held", "confirmed"]


def test_run_two_falls_short_cooldown(workdir):
    fresh(workdir)
    two = {"segments": FALL_SCRIPT["segments"] + [
        {"class": "Pose1", "duration": 4, "motion_amplitude": 0.05},
        {"class": "Pose6", "duration": 6, "motion_amplitude": 0.001},
    ]}
    src = scenario(workdir, two, "two.jsonl")
    cfg = run_config(workdir, cooldown_secs=1)
    assert main(["run", "--config", cfg, "--source", src, "--model", str(workdir / "m.fgm")]) == 0
    sent = [r for r in events(workdir) if r["type"] == "alert" and r["status"] == "sent"]
    assert len(sent) == 2
    assert sent[1]["t"] - sent[0]["t"] == pytest.approx(10.0, abs=0.3)


def test_run_default_cooldown_suppresses_second(workdir):
    fresh(workdir)
    two = {"segments": FALL_SCRIPT["segments"] * 2}
    src = scenario(workdir, two, "two_b.jsonl")
    assert main(["run", "--config", run_config(workdir), "--source", src, "--model", str(workdir / "m.fgm")]) == 0
    statuses = [r["status"] for r in events(workdir) if r["type"] == "alert"]
    assert statuses == ["sent", "suppressed"]


def test_run_truncated_stream(workdir, capsys):
    fresh(workdir)
    src = scenario(workdir, FALL_SCRIPT, "trunc.jsonl")
    text = open(src).read()
    with open(src, "w") as fh:
        fh.write(text[: len(text) // 2])
    rc = main(["run", "--config", run_config(workdir), "--source", src, "--model", str(workdir / "m.fgm")])
    assert rc != 0
    err = capsys.readouterr().err
    assert "stream failed" in err
    assert events(workdir)[-1]["status"] == "error"


def test_run_missing_source(workdir, capsys):
    rc = main(["run", "--config", run_config(workdir), "--source", str(workdir / "none.jsonl"), "--model", str(workdir / "m.fgm")])
    assert rc == 1


# ---------------------------------------------------------------- test-alert / config


def test_test_alert_dryrun(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"alert": {"dryrun_dir": str(tmp_path / "a")}})
    assert main(["test-alert", "--config", cfg]) == 0
    receipt = json.loads(capsys.readouterr().out)
    assert receipt["success"] and receipt["sink"] == "dryrun"
    assert "[TEST]" in json.loads((tmp_path / "a" / "alert_0001.json").read_text())["caption"]


def test_test_alert_telegram(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FALLGUARD_BOT_TOKEN", "42:abc")
    with MockTelegram([(200, {"ok": True, "result": {"message_id": 9}})]) as mock:
        cfg = write_json(tmp_path / "c.json", {"alert": {"sink": "telegram", "chat_id": "55", "api_base_url": mock.url}})
        assert main(["test-alert", "--config", cfg]) == 0
    assert json.loads(capsys.readouterr().out)["remote_id"] == 9
    parts = parse_multipart(mock.requests[0]["content_type"], mock.requests[0]["body"])
    assert parts["chat_id"][1] == b"55"
    assert parts["photo"][1].startswith(b"\x89PNG")


def test_test_alert_missing_token(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("FALLGUARD_BOT_TOKEN", raising=False)
    with MockTelegram() as mock:
        cfg = write_json(tmp_path / "c.json", {"alert": {"sink": "telegram", "chat_id": "55", "api_base_url": mock.url}})
        assert main(["test-alert", "--config", cfg]) == 2
    assert mock.requests == []
    assert "FALLGUARD_BOT_TOKEN" in capsys.readouterr().err


def test_test_alert_unreachable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FALLGUARD_BOT_TOKEN", "42:abc")
    monkeypatch.setattr("time.sleep", lambda s: None)
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    cfg = write_json(tmp_path / "c.json", {"alert": {"sink": "telegram", "chat_id": "1", "api_base_url": f"http://127.0.0.1:{port}"}})
    assert main(["test-alert", "--config", cfg]) == 1
    err = capsys.readouterr().err
    assert "4 attempts" in err and "42:abc" not in err


def test_print_default_config(capsys):
    assert main(["--print-default-config"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["alert"]["cooldown_secs"] == 420
    assert cfg["monitor"]["motion_threshold"] == 0.02
    assert cfg["model"]["rf"]["n_trees"] == 100


def test_unknown_config_key(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"alert": {"cooldown": 5}})
    assert main(["test-alert", "--config", cfg]) == 2
    assert "alert.cooldown" in capsys.readouterr().err


def test_bad_config_value(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"monitor": {"fall_pose": "Pose99"}})
    assert main(["test-alert", "--config", cfg]) == 2


def test_no_command(capsys):
    assert main([]) == 2
