import io
import subprocess
import sys

import pytest

from termmodal.cli import main
from termmodal.fileio import load_model


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def server(fixtures):
    return fixtures / "server_error"


def test_check_true_and_false(server):
    code, text = run("check", server / "office.model", "--world", "u",
                     "--formula", "forall x. !K[x] exists y. M(y)")
    assert code == 0 and text.startswith("true")
    code, text = run("check", server / "office.model", "--world", "u", "--formula", "K[a_] M(c_)")
    assert code == 1 and text.startswith("false")


def test_check_formula_file_reports_each(server, tmp_path):
    f = tmp_path / "q.txt"
    f.write_text("# queries\nforall x. !K[x] exists y. M(y)\nK[a_] M(c_)\n")
    code, text = run("check", server / "office.model", "--formula-file", f)
    assert code == 1 and len(text.splitlines()) == 2


def test_check_errors_exit_2(server, capsys):
    assert run("check", server / "missing.model", "--formula", "true")[0] == 2
    assert run("check", server / "office.model", "--formula", "forall x. (")[0] == 2
    assert "1:12" in capsys.readouterr().err
    assert run("check", server / "office.model", "--world", "zz", "--formula", "true")[0] == 2
    assert run("frobnicate")[0] == 2


def test_check_dynamic_strict(server):
    args = ("check", server / "office.model", "--world", "w", "--action", f"log={server / 'log.action'}",
            "--formula", "[log:2] false")
    assert run(*args)[0] == 0
    assert run(*args, "--strict-dynamic")[0] == 2


def test_update_writes_five_worlds(server, tmp_path):
    out = tmp_path / "after.model"
    code, _ = run("update", server / "office.model", server / "log.action", "--event", "3",
                  "--world", "u", "--out", out)
    assert code == 0
    pm = load_model(out)
    assert len(pm.model.worlds) == 5 and pm.actual == "u3"


def test_update_not_applicable(server):
    code, text = run("update", server / "office.model", server / "log.action", "--event", "2", "--world", "w")
    assert code == 1 and "M(b_)" in text


def test_update_self_test(server):
    code, text = run("update", server / "office.model", "--self-test")
    assert code == 0 and "is isomorphic" in text


def test_translate_hybrid():
    assert run("translate", "--hybrid-formula", "N p")[1].strip() == "forall y. N(x,y) -> p(y)"
    assert run("translate", "--hybrid-formula", "U p")[1].strip() == "forall x. p(x)"
    assert run("translate", "--hybrid-formula", "@i K p", "--nominals", "i")[1].strip() == "K[i] p(i)"
    assert run("translate", "--hybrid-formula", "@x p", "--nominals", "x")[0] == 2


def test_translate_learning_is_guarded_conjunction(fixtures):
    kdl = fixtures / "kdl"
    code, text = run("translate", "--kdl-formula", "[l] p", "--update", kdl / "learn.update",
                     "--kdl-model", kdl / "triangle.kdl")
    assert code == 0
    conjuncts = text.strip().split(" & (")
    assert len(conjuncts) == 8 and all("-> [Delta_l:v" in c for c in conjuncts)


def test_translate_transformation(fixtures):
    kdl = fixtures / "kdl"
    code, text = run("translate", "--kdl-formula", "[d] p", "--update", kdl / "spread.update",
                     "--kdl-model", kdl / "triangle.kdl", "--show-actions")
    assert code == 0
    assert text.splitlines()[0] == "[Delta_d:e_d] p(x)"
    assert "name: Delta_d" in text


def test_verify_reports_seed():
    code, text = run("verify", "--suite", "prop1", "--seed", "5", "--iterations", "20")
    assert code == 0 and "seed=5" in text
    code, text = run("verify", "--suite", "figures")
    assert code == 0 and "PASS" in text


def test_verify_mutated_fn_names_axiom():
    code, text = run("verify", "--suite", "fn", "--iterations", "20", "--mutate", "asymmetric N")
    assert code == 1 and "axiom Neigh fails" in text


def test_verify_is_deterministic():
    a = run("verify", "--suite", "prop2", "--iterations", "10")[1]
    b = run("verify", "--suite", "prop2", "--iterations", "10")[1]
    assert a == b


def test_run_scenarios(fixtures, tmp_path):
    code, text = run("run", fixtures / "thieves" / "thieves.scenario")
    assert code == 0 and "FAIL" not in text
    empty = tmp_path / "e.scenario"
    empty.write_text("{}\n")
    assert run("run", empty) == (0, "")


def test_console_entry_point(server):
    proc = subprocess.run([sys.executable, "-m", "termmodal.cli", "check", str(server / "office.model"),
                           "--formula", "K[a_] M(c_)"], capture_output=True, text=True)
    assert proc.returncode == 1
