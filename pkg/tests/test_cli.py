import io
import json
import os
import subprocess
import sys

from trisat.cli import main


def run(argv, stdin=""):
    out = io.StringIO()
    code = main(argv, out, io.StringIO(stdin))
    return code, out.getvalue()


def test_oracle_cross_max():
    code, out = run(["oracle", "--claim", "cross-c5-max"])
    d = json.loads(out)
    assert code == 0 and (d["max"], d["labeled"], d["iso_classes"]) == (10, 10, 1)


def test_oracle_other_claims():
    assert json.loads(run(["oracle", "--claim", "vertex-c5-max"])[1])["max"] == 2
    assert json.loads(run(["oracle", "--claim", "cross-c5-min-maximal"])[1])["min"] == 5
    assert json.loads(run(["oracle", "--claim", "density", "--k", "11"])[1])["value"] == "26/121"
    d = json.loads(run(["oracle", "--claim", "bounds", "--n", "10"])[1])
    assert (d["lower"], d["upper"]) == (9, 25)
    code, _ = run(["oracle", "--claim", "density", "--k", "4"])
    assert code != 0


def test_solve_hajnal_six():
    code, out = run(["solve", "--n", "6", "--game", "hajnal"])
    assert code == 0 and json.loads(out)["winner"] == "first"


def test_solve_saturation_and_refusal():
    code, out = run(["solve", "--n", "5", "--convention", "sat_g'"])
    d = json.loads(out)
    assert code == 0 and d["value"] == 6 and d["convention"] == "sat_g'" and d["pv"]
    code, _ = run(["solve", "--n", "9", "--game", "hajnal"])
    assert code == 2


def test_malformed_arguments():
    assert run([])[0] != 0
    assert run(["solve"])[0] != 0
    assert run(["solve", "--n", "x"])[0] != 0
    assert run(["simulate", "--n", "13", "--adversary", "nobody"])[0] != 0
    assert run(["replay", "/nonexistent/trace.jsonl"])[0] != 0
    assert run(["audit", "/nonexistent"])[0] != 0


def test_simulate_replay_audit(tmp_path):
    tdir = tmp_path / "traces"
    csv_path = tmp_path / "s.csv"
    code, _ = run(["simulate", "--n", "13", "24", "--games", "2", "--convention", "sat_g", "sat_g'",
                   "--trace-dir", str(tdir), "--csv", str(csv_path)])
    assert code == 0
    rows = csv_path.read_text().splitlines()
    assert len(rows) == 1 + 2 * 2 * 5 * 2
    files = sorted(os.listdir(tdir))
    assert len(files) == 40
    for f in files:
        code, out = run(["replay", str(tdir / f)])
        d = json.loads(out)
        assert code == 0 and d["ok"] and d["score"] == d["recorded_score"]
    code, out = run(["audit", str(tdir)])
    assert code == 0 and json.loads(out)["ok"]


def test_replay_detects_a_doctored_summary(tmp_path):
    tdir = tmp_path / "t"
    run(["simulate", "--n", "13", "--games", "1", "--adversary", "random", "--trace-dir", str(tdir)])
    path = tdir / os.listdir(tdir)[0]
    lines = path.read_text().splitlines()
    summary = json.loads(lines[-1])
    summary["summary"]["score"] += 1
    lines[-1] = json.dumps(summary)
    path.write_text("\n".join(lines) + "\n")
    assert run(["replay", str(path)])[0] == 1


def test_simulate_is_deterministic(tmp_path):
    outs = [run(["simulate", "--n", "24", "--games", "2", "--seed", "5"])[1] for _ in range(2)]
    assert outs[0] == outs[1] and outs[0].startswith("n,convention")


def test_play_with_scripted_input():
    # one legal reply, one malformed edge, then quit
    code, out = run(["play", "--n", "6"], stdin="4 5\n0 0\nq\n")
    assert code == 0
    assert "builder plays 0 1" in out
    assert "rejected" in out and out.rstrip().endswith("bye")
    assert "  0: 1" in out


def test_play_to_the_end():
    moves = "".join(f"{a} {b}\n" for a in range(7) for b in range(a + 1, 7))
    code, out = run(["play", "--n", "7", "--first", "human"], stdin=moves)
    assert code == 0 and "game over" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "trisat", "oracle", "--claim", "vertex-c5-max"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and json.loads(r.stdout)["max"] == 2
