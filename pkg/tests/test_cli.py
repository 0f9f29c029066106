import json
import subprocess
import sys

from ilkit.cli import main


def run_cli(*argv):
    import contextlib
    import io

    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


def run_proc(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "ilkit.cli", *argv], capture_output=True, text=True
    )
    return proc.returncode, proc.stdout


def test_prove_positive():
    code, out = run_cli("prove", "--logic", "ilm", "p |> q -> (p & []r) |> (q & []r)")
    assert code == 0
    assert out.strip() == "derivable"


def test_prove_negative_writes_cert(tmp_path):
    cert = tmp_path / "out.json"
    code, _ = run_cli("prove", "--logic", "gl", "p -> []p", "--cert", str(cert))
    assert code == 1
    data = json.loads(cert.read_text())
    assert data["logic"] == "gl"
    assert set(data) >= {"model", "world", "holds", "query"}
    # certificate re-validates in a separate process
    code2, out2 = run_proc("modelcheck", str(cert), "--json")
    assert code2 == 0
    payload = json.loads(out2)
    assert payload["frame_valid"] is True
    assert payload["forces"] is True


def test_sat_exit_codes():
    assert run_cli("sat", "--logic", "gl", "p & ~p")[0] == 1
    assert run_cli("sat", "--logic", "gl", "p")[0] == 0


def test_unknown_exit_code():
    code, _ = run_cli(
        "sat",
        "--logic",
        "gl",
        "<>p & <>~p & <>(p & <>~p)",
        "--max-steps",
        "1",
        "--max-backtracks",
        "1",
    )
    assert code == 2


def test_usage_errors():
    assert run_cli("prove", "p ->")[0] == 3
    assert run_cli("prove", "--logic", "gl", "p |> q")[0] == 3
    assert main(["nonsense-command"]) == 3


def test_classify_tsg_cli():
    code, out = run_cli("classify", "tsg", "[][]p -> []p", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["answer"] == "yes"
    assert data["witness"] == "[]p"


def test_classify_negative_and_cert(tmp_path):
    cert = tmp_path / "sigma.json"
    code, out = run_cli("classify", "sigma1", "p & []p", "--json", "--cert", str(cert))
    assert code == 1
    code2, _ = run_proc("modelcheck", str(cert))
    assert code2 == 0


def test_rules_cli():
    code, out = run_cli("rules", "iii", "<>q", "q", "--json")
    assert code == 0
    assert json.loads(out)["agree"] is True


def test_close_cli(tmp_path):
    frame = tmp_path / "frame.json"
    frame.write_text(
        json.dumps({"worlds": ["a", "b", "c"], "R": [["a", "b"], ["b", "c"]], "S": [], "val": {}})
    )
    code, out = run_cli("close", str(frame), "--logic", "ilm")
    assert code == 0
    data = json.loads(out)
    assert ["a", "c"] in data["R"]
    assert ["a", "b", "c"] in data["S"]


def test_checkproof_cli(tmp_path):
    proof = tmp_path / "proof.txt"
    proof.write_text(
        "1. p -> p ; Taut\n"
        "2. [](p -> p) ; Nec 1\n"
    )
    code, out = run_cli("checkproof", str(proof), "--logic", "gl")
    assert code == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("1. p ; Taut\n")
    assert run_cli("checkproof", str(bad), "--logic", "gl")[0] == 1


def test_export_dot_cli(tmp_path):
    model = tmp_path / "m.json"
    model.write_text(
        json.dumps(
            {
                "worlds": ["a", "b"],
                "R": [["a", "b"]],
                "S": [["a", "b", "b"]],
                "val": {"b": ["p"]},
            }
        )
    )
    code, out = run_cli("export-dot", str(model))
    assert code == 0
    assert out.startswith("digraph")
    assert '"a" -> "b";' in out
    assert "style=dashed" in out


def test_byte_determinism_subprocess():
    a = run_proc("countermodel", "--logic", "ilm", "p |> q", "--json")
    b = run_proc("countermodel", "--logic", "ilm", "p |> q", "--json")
    assert a == b
    c = run_proc("classify", "sigma1", "<>p", "--json")
    d = run_proc("classify", "sigma1", "<>p", "--json")
    assert c == d
