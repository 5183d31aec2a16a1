import json

import pytest

from toric_ccc import presets
from toric_ccc.cli import dispatch as main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def body(out):
    doc = json.loads(out)
    return doc.get("report", doc)


def test_fan_validate_file_and_preset(tmp_path, capsys):
    path = tmp_path / "p2.json"
    path.write_text(json.dumps(presets.p2().to_dict()))
    code, cap = run(capsys, "fan", "validate", str(path))
    assert code == 0 and body(cap.out)["valid"]
    code, cap = run(capsys, "fan", "validate", "f1")
    assert code == 0


def test_invalid_fan_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 1, "rays": [[2]], "maximal_cones": [[0]]}))
    code, _ = run(capsys, "fan", "validate", str(path))
    assert code == 1


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sheaf"])
    assert exc.value.code == 2
    code, _ = run(capsys, "divisor", "cartier", "no-such-fan", "1,1")
    assert code == 2
    code, _ = run(capsys, "flow", "run", "--fan", "p1", "--divisor", "1,1", "--eps", "0.1",
                  "--t", "1", "--x", "0", "--xi", "zz")
    assert code == 2


def test_divisor_commands(capsys):
    code, cap = run(capsys, "--no-envelope", "divisor", "cartier", "p1", "1,1")
    assert code == 0
    code, cap = run(capsys, "divisor", "extend", "a2", "1,1", "p2", "--new-coeffs", "2:3")
    assert code == 0 and body(cap.out)["extended"] == [1, 1, 3]


def test_sheaf_build_and_stalk(tmp_path, capsys):
    out = tmp_path / "c.json"
    code, cap = run(capsys, "sheaf", "build", "--fan", "p1", "--divisor", "1,1", "--out", str(out))
    assert code == 0 and out.exists()
    code, cap = run(capsys, "sheaf", "stalk", "--complex", str(out), "--x", "0")
    assert code == 0 and body(cap.out)["dims"] == {"-1": 1}


def test_verify_picard_is_deterministic(capsys):
    argv = ["--no-envelope", "verify", "picard", "--fan", "p1", "--d1", "1,0", "--d2", "1,1",
            "--points", "10"]
    code1, a = run(capsys, *argv)
    code2, b = run(capsys, *argv)
    assert code1 == code2 == 0 and a.out == b.out


def test_smooth_eval_and_csv(capsys):
    code, cap = run(capsys, "--samples", "20000", "smooth", "eval", "--fan", "p2",
                    "--divisor", "1,1,1", "--eps", "0.1", "--xi", "1,1")
    assert code == 0
    code, cap = run(capsys, "--samples", "20000", "--format", "csv", "smooth", "verify", "bound",
                    "--fan", "p1", "--divisor", "1,1", "--points", "20")
    assert code == 0 and cap.out.startswith("# toric_ccc.table/1")
