import json

import pytest

from src.cli.commands import EXIT_OK, EXIT_USAGE, main

pytestmark = pytest.mark.integration


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_table(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == EXIT_OK
    assert "❌" not in out
    assert out.strip().endswith("checks passed")


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants", "--json")
    assert code == EXIT_OK
    rows = json.loads(out)
    names = {row["name"] for row in rows}
    assert {"c_star", "lambda_star", "val_dr", "k_dr", "fig1_middle_breakpoint"} <= names
    assert all(row["passed"] for row in rows)


def test_bound_chain(capsys):
    code, out, _ = run(capsys, "bound-chain", "--eps", "4e-11", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["improvement"] >= 1e-12
    assert data["kg_lower"] > 1.6769


def test_bound_chain_scan(capsys):
    code, out, _ = run(capsys, "bound-chain", "--scan", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["best"]["epsilon"] == pytest.approx(4.42e-11, rel=0.03)
    assert data["gap_ratio_lower"] > 1.6769


def test_bound_chain_table(capsys):
    code, out, _ = run(capsys, "bound-chain", "--scan")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "Bound chain at eps=4e-11"
    keys = {line.split()[0] for line in lines[2:]}
    assert {"epsilon", "improvement", "kg_lower", "best.epsilon", "gap_ratio_lower"} <= keys


def test_bound_chain_rejects_large_eps(capsys):
    code, out, err = run(capsys, "bound-chain", "--eps", "1e-2")
    assert code == EXIT_USAGE
    assert out == ""
    assert "error: gap term" in err


def test_landscape_file_is_deterministic(capsys, tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "landscape", "--steps", "11", "--out", str(first))[0] == EXIT_OK
    assert run(capsys, "landscape", "--steps", "11", "--out", str(second))[0] == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0] == "C,F,Fprime"
    assert len(first.read_text().splitlines()) == 12


def test_landscape_to_stdout(capsys):
    code, out, _ = run(capsys, "landscape", "--min", "0", "--max", "1", "--steps", "3")
    assert code == EXIT_OK
    assert out.splitlines()[1].startswith("0,")


def test_landscape_json(capsys, tmp_path):
    out_file = tmp_path / "landscape.json"
    code, out, _ = run(
        capsys, "landscape", "--min", "0", "--max", "1", "--steps", "3", "--json", "--out", str(out_file)
    )
    assert code == EXIT_OK
    assert out == ""
    rows = json.loads(out_file.read_text())
    assert [row["C"] for row in rows] == [0.0, 0.5, 1.0]
    assert set(rows[0]) == {"C", "F", "Fprime"}


def test_landscape_too_few_steps(capsys):
    assert run(capsys, "landscape", "--steps", "1")[0] == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["witness", "--k", "2"],
        ["landscape", "--steps", "many"],
        [],
        ["verify-lemmas", "--pairs", "0"],
        ["verify-lemmas", "--unions", "-3"],
        ["witness", "--samples", "0"],
        ["discretize", "--cap", "-1"],
        ["optimize", "--seed", "-1"],
        ["optimize", "--workers", "0"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_help_exits_cleanly(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == EXIT_OK
    assert "bound-chain" in out


def test_discretize_json(capsys, tmp_path):
    matrix = tmp_path / "matrix.txt"
    code, out, _ = run(
        capsys, "discretize", "--m", "10", "--cap", "6", "--iters", "50", "--out", str(matrix), "--json"
    )
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["m"] == 10
    assert data["bca_sdp"] >= data["brute_val"] - 1e-9
    assert matrix.read_text().splitlines()[0] == "10"


def test_witness(capsys):
    code, out, _ = run(
        capsys, "witness", "--n", "10", "--k", "1", "--samples", "1000", "--seed", "1", "--json"
    )
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["n"] == 10
    assert data["value_mean"] == pytest.approx(1 - 0.19748, abs=0.1)


def test_witness_table(capsys):
    code, out, _ = run(capsys, "witness", "--n", "10", "--k", "1", "--samples", "500", "--seed", "1")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "Witness n=10 k=1"
    assert any(line.startswith("value_mean") for line in out.splitlines())


def test_optimize_json(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys,
        "optimize",
        "--eps", "1e-3",
        "--restarts", "2",
        "--breakpoints", "3",
        "--seed", "5",
        "--trace", str(trace),
        "--json",
    )
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["config"]["restarts"] == 2
    assert trace.read_text().startswith("restart,iteration,val")


def test_optimize_invalid_config(capsys):
    assert run(capsys, "optimize", "--restarts", "0")[0] == EXIT_USAGE


@pytest.mark.slow
def test_verify_lemmas_small_sweep(capsys):
    code, out, _ = run(
        capsys, "verify-lemmas", "--seed", "3", "--pairs", "20", "--unions", "50", "--triples", "20",
        "--restarts", "2",
    )
    assert code == EXIT_OK
    assert "❌" not in out
    assert "search_robustness_excess" in out
