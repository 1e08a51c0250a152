import json
import subprocess
import sys

import numpy as np
import pytest

from lindstruct import serialize
from lindstruct.cli import main
from lindstruct.corpus import load
from lindstruct.generator import LindbladGenerator, generator_to_json
from lindstruct.linop import matrix_to_json
from lindstruct.perturbation import perturbation_to_json


@pytest.fixture
def gen_file(tmp_path):
    def write(g, name="g.json"):
        p = tmp_path / name
        p.write_text(json.dumps(generator_to_json(g)))
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("verb,kind", [("validate", "validation"), ("spectrum", "spectrum"),
                                       ("structure", "structure"), ("evolve", "trajectory"),
                                       ("asymptotics", "asymptotics")])
def test_generator_verbs_emit_valid_reports(capsys, gen_file, verb, kind):
    path = gen_file(load("undamped-oscillation").generator)
    extra = ["--t-max", "2", "--steps", "4"] if verb == "evolve" else []
    code, out, _ = run(capsys, verb, path, *extra)
    assert code == 0
    assert serialize.check_report(json.loads(out)) == kind


def test_spectrum_values(capsys, gen_file):
    code, out, _ = run(capsys, "spectrum", gen_file(load("dissipation").generator))
    rep = json.loads(out)
    assert sorted(z["re"] for z in rep["eigenvalues"]) == pytest.approx([-2, -1, -1, 0], abs=1e-12)
    assert rep["kernel_dim"] == 1 and rep["gap"] == pytest.approx(1.0)


def test_structure_text_labels(capsys, gen_file):
    code, out, _ = run(capsys, "structure", gen_file(load("cascade").generator), "--format", "text")
    assert code == 0
    for label in ("Decay", "Dissipation", "Dephasing"):
        assert label in out


def test_evolve_csv_and_out(capsys, gen_file, tmp_path):
    target = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "evolve", gen_file(load("dissipation").generator), "--format", "csv",
                       "--t-max", "1", "--steps", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert len(target.read_text().strip().split("\n")) == 4


def test_evolve_with_state(capsys, gen_file, tmp_path):
    st = tmp_path / "rho.json"
    st.write_text(json.dumps(matrix_to_json(np.diag([0.0, 1.0]))))
    code, out, _ = run(capsys, "evolve", gen_file(load("dissipation").generator), "--state", str(st),
                       "--t-max", "1", "--steps", "1")
    rep = json.loads(out)
    assert code == 0 and len(rep["states"]) == 2
    bad = tmp_path / "rho3.json"
    bad.write_text(json.dumps(matrix_to_json(np.eye(3) / 3)))
    code, _, err = run(capsys, "evolve", gen_file(load("dissipation").generator), "--state", str(bad))
    assert code == 2 and "shape" in err


def test_perturb(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps(perturbation_to_json(load("merge-enclosures").system)))
    code, out, _ = run(capsys, "perturb", str(p), "--order", "3", "--lambda", "0.05", "--probe")
    rep = json.loads(out)
    assert code == 0 and serialize.check_report(rep) == "series"
    assert rep["order"] == 3 and "continuity" in rep
    assert rep["residuals"][0]["residual"] < 1e-5


def test_perturb_unresolved_is_a_certification_failure(capsys, tmp_path):
    from lindstruct.perturbation import PerturbedGenerator

    p = tmp_path / "p.json"
    p.write_text(json.dumps(perturbation_to_json(PerturbedGenerator(load("dephasing-enclosures").generator))))
    code, _, err = run(capsys, "perturb", str(p), "--order", "1")
    assert code == 1 and err


def test_validation_failure_exit_code(capsys, gen_file):
    g = LindbladGenerator(np.array([[0, 1], [0, 0]]), ())
    code, out, _ = run(capsys, "validate", gen_file(g))
    assert code == 1 and json.loads(out)["ok"] is False


def test_corpus_commands(capsys):
    code, out, _ = run(capsys, "corpus", "list", "--format", "text")
    assert code == 0 and "cascade" in out.split()
    code, out, _ = run(capsys, "corpus", "run", "dissipation")
    assert code == 0 and serialize.check_report(json.loads(out)) == "corpus"
    code, _, err = run(capsys, "corpus", "run", "nope")
    assert code == 2 and "nope" in err


@pytest.mark.parametrize("argv", [
    [], ["spectrum"], ["frobnicate", "x"], ["spectrum", "/no/such/file.json"],
    ["spectrum", "GARBAGE", "--tol-rank", "-1"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_malformed_inputs(capsys, tmp_path, gen_file):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["spectrum", str(p)]) == 2
    p.write_text(json.dumps({"hamiltonian": "x"}))
    assert main(["spectrum", str(p)]) == 2
    good = gen_file(load("dissipation").generator)
    assert main(["spectrum", good, "--format", "csv"]) == 2
    assert main(["evolve", good, "--steps", "0"]) == 2


def test_module_entry_point(tmp_path, gen_file):
    path = gen_file(load("dissipation").generator)
    proc = subprocess.run([sys.executable, "-m", "lindstruct", "validate", path, "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
