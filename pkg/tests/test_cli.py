import json

import pytest

from memspike.cli import main, parse_schedule, UsageError


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def snapshot(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_simulate_zero_schedule(tmp_path):
    sched = tmp_path / "zeros.txt"
    sched.write_text("0\n0\n0\n")
    out = tmp_path / "out"
    assert run(out, "simulate", str(sched)) == 0
    lines = (out / "zeros_trace.csv").read_text().splitlines()
    assert lines[0] == "step,time_s,voltage_V,current_A"
    assert len(lines) == 4
    assert all(line.split(",")[3] == "0.0" for line in lines[1:])


def test_simulate_square_wave(tmp_path):
    assert run(tmp_path, "simulate", "square-wave") == 0
    rows = (tmp_path / "square_wave_trace.csv").read_text().splitlines()[1:]
    currents = [float(r.split(",")[3]) for r in rows]
    assert max(currents) > 0 > min(currents)


def test_simulate_bad_line(tmp_path, caplog):
    sched = tmp_path / "bad.txt"
    sched.write_text("0.1\nabc\n")
    assert run(tmp_path, "simulate", str(sched)) == 2
    assert "line 2" in caplog.text


def test_simulate_missing_file(tmp_path):
    assert run(tmp_path, "simulate", str(tmp_path / "nope.txt")) == 2


def test_parse_schedule_formats():
    assert parse_schedule("step,voltage_V\n0,0.1\n1,-0.2\n") == [0.1, -0.2]
    assert parse_schedule("# header\n0.1  # pulse\n\n0\n") == [0.1, 0.0]
    with pytest.raises(UsageError):
        parse_schedule("# nothing\n")
    with pytest.raises(UsageError, match="line 1"):
        parse_schedule("1,2,3\n")


def test_gate_xor(tmp_path, capsys):
    assert run(tmp_path, "gate", "xor", "1", "0") == 0
    assert "-> 1" in capsys.readouterr().out
    doc = json.loads((tmp_path / "xor_10.json").read_text())
    assert doc["decoded"] == 1


def test_gate_full_adder_table(tmp_path, capsys):
    assert run(tmp_path, "gate", "full-adder", "--table", "--traces") == 0
    assert "8/8 rows pass" in capsys.readouterr().out
    doc = json.loads((tmp_path / "full_adder_table.json").read_text())
    assert doc["passed"] == doc["total"] == 8
    assert (tmp_path / "full_adder_011.csv").exists()


def test_gate_or_calibrate(tmp_path):
    assert run(tmp_path, "gate", "or", "--calibrate") == 0
    doc = json.loads((tmp_path / "or_bands.json").read_text())
    bands = doc["channels"]["or"]["bands"]
    assert len(bands) == 2  # one threshold
    assert bands[0]["upper"] == bands[1]["lower"]


def test_gate_uses_saved_bands(tmp_path, capsys):
    assert run(tmp_path, "gate", "full-adder", "--calibrate") == 0
    bands = tmp_path / "full_adder_bands.json"
    assert run(tmp_path, "gate", "full-adder", "0", "1", "1", "--bands", str(bands)) == 0
    assert '"arithmetic_sum": 2' in capsys.readouterr().out


def test_gate_failure_exit_code(tmp_path):
    # bands that read every full-adder sum as 0
    doc = {
        "channels": {
            "sum": {"statistic": "max_positive", "margin": None, "bands": [{"lower": None, "upper": None, "label": 0}]},
            "order": {"statistic": "value_at_step", "margin": None, "bands": [{"lower": None, "upper": None, "label": "zero"}]},
        }
    }
    path = tmp_path / "bad_bands.json"
    path.write_text(json.dumps(doc))
    assert run(tmp_path, "gate", "full-adder", "--table", "--bands", str(path)) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ("gate", "nand", "1", "0"),
        ("gate", "xor", "1"),
        ("gate", "xor", "1", "2"),
        ("gate", "xor"),
        ("experiment", "bogus"),
    ],
)
def test_usage_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == 2


def test_unknown_subcommand_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "frobnicate")
    assert exc.value.code == 2


def test_bad_params_file(tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"tau": -1}')
    assert main(["--params", str(p), "--out", str(tmp_path), "analyze"]) == 2
    p.write_text("not json")
    assert main(["--params", str(p), "--out", str(tmp_path), "analyze"]) == 2


def test_params_file_is_used(tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"g_spike": 2e-6}')
    sched = tmp_path / "one.txt"
    sched.write_text("0.1\n")
    assert main(["--params", str(p), "--out", str(tmp_path / "o"), "simulate", str(sched)]) == 0
    current = float((tmp_path / "o" / "one_trace.csv").read_text().splitlines()[1].split(",")[3])
    assert current == pytest.approx(0.1 * (1e-7 + 2e-6))


def test_flags_after_subcommand(tmp_path):
    assert main(["gate", "xor", "1", "1", "--out", str(tmp_path), "--seed", "3"]) == 0
    assert (tmp_path / "xor_11.json").exists()


@pytest.mark.parametrize("name", ["habituation", "summation", "order-sweep"])
def test_experiment(tmp_path, capsys, name):
    assert run(tmp_path, "experiment", name) == 0
    out = capsys.readouterr().out
    assert "false" not in out
    if name == "habituation":
        assert "train strictly decreasing (+0.1 V): true" in out
    if name == "order-sweep":
        header = (tmp_path / "order_sweep.csv").read_text().splitlines()[0]
        assert header.startswith("v_a,S1,T1,T2,S2")


def test_analyze(tmp_path, capsys):
    assert run(tmp_path, "analyze") == 0
    out = capsys.readouterr().out
    assert "3/4 (75%)" in out and "4/8 (50%)" in out and "8/8 (100%)" in out
    assert "1:1" in out and "undefined" in out


COMMANDS = [
    ("simulate", "square-wave"),
    ("gate", "full-adder", "--table", "--calibrate", "--traces"),
    ("gate", "xor", "1", "0", "--traces"),
    ("experiment", "habituation"),
    ("experiment", "summation"),
    ("experiment", "order-sweep"),
    ("analyze",),
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_repeat_runs_byte_identical(tmp_path, capsys, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "--seed", "7", *argv) == 0
    out_a = capsys.readouterr().out.replace(str(a), "")
    assert run(b, "--seed", "7", *argv) == 0
    out_b = capsys.readouterr().out.replace(str(b), "")
    assert out_a == out_b
    if argv[0] != "analyze":
        assert snapshot(a) and snapshot(a) == snapshot(b)


def test_noisy_runs_depend_on_seed(tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"noise_sigma": 1e-9}')
    outs = []
    for seed, d in ((1, "a"), (1, "b"), (2, "c")):
        assert main(["--params", str(p), "--seed", str(seed), "--out", str(tmp_path / d), "simulate", "square-wave"]) == 0
        outs.append((tmp_path / d / "square_wave_trace.csv").read_bytes())
    assert outs[0] == outs[1] != outs[2]
