from __future__ import annotations

import json

import pytest

from squadbench.harness.cli import main


def test_validate_bundled_and_custom(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({
        "task_id": 42, "name": "custom", "family": "eow", "seed_base": 1,
        "ally_kits": {"preset": "standard"},
        "waves": [[{"id": "e", "element": "fire", "max_hp": 500,
                    "speed": 90, "damage": 50}]],
    }))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"task_id": 43, "family": "eow"}))

    assert main(["validate", "1", str(good)]) == 0
    out = capsys.readouterr().out
    assert "ok" in out and "custom" in out

    assert main(["validate", str(bad)]) == 1
    assert "INVALID" in capsys.readouterr().out


def test_run_replay_report_round_trip(tmp_path, capsys):
    logs = tmp_path / "logs"
    out = tmp_path / "out"
    rc = main([
        "run", "--tasks", "1", "--regime", "ta", "--agent", "random",
        "--trials", "2", "--seed-base", "0",
        "--log-dir", str(logs), "--out", str(out), "--no-figures",
    ])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "rimefang" in stdout
    log_files = sorted(logs.glob("*.jsonl"))
    assert len(log_files) == 2
    assert (out / "report.csv").exists()
    assert (out / "report.txt").exists()

    assert main(["replay", *map(str, log_files)]) == 0
    replay_out = capsys.readouterr().out
    assert replay_out.count(" ok") == 2

    rc = main(["report", "--logs", str(logs), "--out", str(out / "rebuilt"),
               "--no-figures"])
    assert rc == 0
    rebuilt = (out / "rebuilt" / "report.csv").read_text().strip().splitlines()
    assert len(rebuilt) == 2  # header + the single task row


def test_replay_flags_tampered_log(tmp_path, capsys):
    logs = tmp_path / "logs"
    main(["run", "--tasks", "1", "--regime", "ta", "--agent", "random",
          "--trials", "1", "--seed-base", "5", "--log-dir", str(logs)])
    capsys.readouterr()
    log_file = next(logs.glob("*.jsonl"))
    lines = log_file.read_text().splitlines()
    # tamper with a logged action's target
    for i, line in enumerate(lines):
        rec = json.loads(line)
        if rec.get("type") == "step" and rec["resolution"]["kind"] == "action":
            rec["resolution"]["action"]["target"] = "striker" \
                if rec["resolution"]["action"]["target"] != "striker" else "herald"
            lines[i] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
            break
    log_file.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(log_file)]) == 1


def test_unknown_agent_rejected():
    with pytest.raises(SystemExit):
        main(["run", "--agent", "wizard", "--tasks", "1"])
