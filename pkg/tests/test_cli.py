import json

import pytest

from permcommit import cli
from permcommit.adversary import key_swap


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_analysis(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "simulate", "--n", "6", "--bit", "1", "--key-index", "0", "--json", str(path))
    assert code == 0
    assert "Accept(1)" in out and "opening qubits 21" in out
    rep = json.loads(path.read_text())
    assert rep["schema"] == cli.SCHEMA and rep["status"] == "pass"
    assert rep["result"]["verdict"]["probability"] == pytest.approx(1, abs=1e-9)
    assert rep["result"]["transcript"]["ledger"]["opening_qubits"] == 21
    assert set(rep["tolerances"]) == {"atol", "prune"}
    assert isinstance(rep["git"], str)


def test_json_on_stdout_is_the_only_stdout(capsys):
    code, out, err = run(capsys, "binding", "--strategy", "key-swap", "--n", "6", "--json", "-")
    assert code == 0
    assert json.loads(out)["result"]["T0"] == pytest.approx(0.25, abs=1e-9)
    assert "claim2_norm_bound" in err


def test_simulate_sample(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "2", "--bit", "0", "--mode", "sample", "--seed", "7")
    assert code == 0 and "Accept(0)" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--n", "4"],
        ["simulate", "--key-index", "15"],
        ["simulate", "--bit", "2"],
        ["verify-lemmas", "--n", "10"],
        ["verify-lemmas", "--n", "2", "--samples", "0"],
        ["binding", "--strategy", "key-swap", "--n", "2"],
        ["binding", "--strategy", "no-such-file.json"],
        ["hpsp", "--key-index", "99"],
    ],
)
def test_bad_input_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--mode", "fast"])
    assert exc.value.code == 2


def test_malformed_strategy_exit_3(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert run(capsys, "binding", "--strategy", str(bad))[0] == 3
    nonunitary = tmp_path / "nu.json"
    nonunitary.write_text(json.dumps(
        {"u1": [{"kind": "Dense", "params": {"matrix": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}, "targets": ["bit"]}]}
    ))
    code, _, err = run(capsys, "binding", "--strategy", str(nonunitary))
    assert code == 3 and "unitary" in err
    trespass = tmp_path / "t.json"
    trespass.write_text(json.dumps({"u1": [{"kind": "Hadamard", "targets": ["B_private"]}]}))
    assert run(capsys, "hpsp", "--strategy", str(trespass))[0] == 3


def test_binding_key_swap(capsys, tmp_path):
    path = tmp_path / "b.json"
    code, out, _ = run(capsys, "binding", "--strategy", "key-swap", "--json", str(path))
    assert code == 0
    res = json.loads(path.read_text())["result"]
    assert res["excess"] == pytest.approx(0.25, abs=1e-9)
    assert res["flags"]["claim2_norm_bound"] and res["flags"]["composed_bound"]


def test_binding_strategy_file(capsys, tmp_path):
    path = tmp_path / "ks.json"
    path.write_text(json.dumps(key_swap(6).to_json()))
    code, out, _ = run(capsys, "binding", "--strategy", str(path), "--json", "-")
    assert code == 0
    body = out[out.index("{"):]
    assert json.loads(body)["result"]["T0"] == pytest.approx(0.25, abs=1e-9)


def test_binding_honest_zero(capsys):
    code, out, _ = run(capsys, "binding", "--strategy", "honest-0")
    assert code == 0 and "n/a" in out


def test_hpsp_all_and_single(capsys, tmp_path):
    path = tmp_path / "h.json"
    code, out, _ = run(capsys, "hpsp", "--strategy", "key-swap", "--json", str(path), "--jobs", "2")
    assert code == 0
    res = json.loads(path.read_text())["result"]
    assert res["mean_success"] == pytest.approx(1 / 15, abs=1e-9) and res["mean_success"] >= 1 / 128
    assert [r["success"] for r in res["per_key"]].count(max(r["success"] for r in res["per_key"])) == 1
    code, out, _ = run(capsys, "hpsp", "--strategy", "key-swap", "--key-index", "1")
    assert code == 0 and "success 1" in out
    code, out, _ = run(capsys, "hpsp", "--strategy", "honest-1")
    assert code == 0 and "vacuous" in out


def test_verify_lemmas_exit_codes(capsys):
    code, out, _ = run(capsys, "verify-lemmas", "--n", "2")
    assert code == 0 and "fail" not in out
    code, out, _ = run(capsys, "verify-lemmas", "--n", "6", "--samples", "200", "--seed", "3")
    assert code == 1 and "fail  overlap_table " in out


def test_reports_are_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(capsys, "simulate", "--n", "6", "--bit", "0", "--key-index", "3", "--mode", "sample", "--seed", "5",
            "--json", str(p))
    assert a.read_bytes() == b.read_bytes()
