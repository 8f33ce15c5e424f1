import numpy as np
import pytest

from unitary_landscapes.cli import main, parse_config_text, subsystem_rng
from unitary_landscapes.errors import ConfigError
from unitary_landscapes.fileio import dumps_matrix


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(text):
    lines = text.splitlines()
    assert lines[0].startswith("# unitary-landscapes ")
    return lines[1:]


def records(text):
    return [ln.split() for ln in body(text) if not ln.startswith("#")]


def test_strata_identity_n3(capsys):
    code, out, _ = run(capsys, "strata", "--A", "identity", "--N", "3", "--kind", "F")
    assert code == 0
    rows = records(out)
    assert [float(r[2]) for r in rows] == pytest.approx([0, 4, 8, 12])
    assert [int(r[3]) for r in rows] == [0, 4, 4, 0]
    assert rows[0][-1] == "globalMin" and rows[-1][-1] == "globalMax"


def test_strata_distinct_diagonal(capsys):
    code, out, _ = run(capsys, "strata", "--A", "diagonal", "2,1")
    rows = records(out)
    assert code == 0 and len(rows) == 4
    assert all(int(r[3]) == 0 for r in rows)


def test_strata_p_identity_n2(capsys):
    code, out, _ = run(capsys, "strata", "--A", "identity", "--N", "2", "--kind", "P")
    rows = records(out)
    assert code == 0
    assert len([r for r in rows if r[0] != "maxset"]) == 1
    mx = [r for r in rows if r[0] == "maxset"][0]
    assert mx[-2:] == ["nondegenerate", "false"]


def test_maxset_parity(capsys):
    code, out, _ = run(capsys, "maxset", "--A", "identity", "--N", "3")
    assert code == 0 and body(out)[-1] == "nondegenerate true"


@pytest.mark.parametrize("argv", [
    ("verify", "--A", "identity", "--N", "3", "--kind", "F"),
    ("verify", "--A", "random", "7", "--N", "4", "--kind", "P"),
])
def test_verify_passes(capsys, argv):
    code, out, _ = run(capsys, *argv)
    rows = records(out)
    assert code == 0, out
    assert all(r[1] == "pass" for r in rows)


def test_corrupted_weight_file(capsys, tmp_path):
    p = tmp_path / "A.txt"
    p.write_text("N 3\n1 0 0\n0 1\n")
    code, out, err = run(capsys, "strata", "--A", "file", str(p))
    assert code == 2 and out == "" and "A" in err


def test_weight_file_roundtrip(capsys, tmp_path):
    p = tmp_path / "A.txt"
    p.write_text(dumps_matrix(np.diag([2.0, 1.0]).astype(complex)))
    code, out, _ = run(capsys, "strata", "--A", "file", str(p))
    assert code == 0 and len(records(out)) == 4


def test_flow_geodesic(capsys, tmp_path):
    term = tmp_path / "U.txt"
    code, out, _ = run(capsys, "flow", "--N", "3", "--kind", "G", "--seed", "5", "--terminal", str(term))
    assert code == 0
    summary = [ln for ln in body(out) if ln.startswith("# summary")][0].split()
    assert summary[summary.index("status") + 1] == "converged"
    assert float(summary[summary.index("final") + 1]) <= 1e-10
    assert term.exists()


def test_synth_hadamard(capsys):
    code, out, _ = run(capsys, "synth", "--W", "hadamard", "--kind", "GP", "--H0", "sigma_z", "--mu", "sigma_x",
                       "--T", "10", "--m", "200", "--max-iter", "500", "--tau-value", "1e-4")
    assert code == 0
    summary = [ln for ln in body(out) if ln.startswith("# summary")][0].split()
    assert float(summary[summary.index("final") + 1]) <= 1e-4


def test_synth_rank_deficient(capsys):
    code, out, _ = run(capsys, "synth", "--W", "hadamard", "--kind", "G", "--H0", "sigma_z", "--mu", "sigma_x",
                       "--T", "1", "--m", "3")
    assert code == 1 and "rankDeficient" in out


def test_outputs_are_deterministic(capsys):
    argv = ("flow", "--N", "2", "--kind", "F", "--A", "random", "--seed", "9")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert body(a) == body(b)


def test_config_file_sections_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[landscape]\nA identity\nN 3  # dimension\nkind F\n\n[run]\nseed 4\n")
    code, out, _ = run(capsys, "strata", "--config", str(cfg))
    assert code == 0 and len(records(out)) == 4
    code, out, _ = run(capsys, "strata", "--config", str(cfg), "--N", "2")
    assert code == 0 and len(records(out)) == 3


def test_output_file(capsys, tmp_path):
    dest = tmp_path / "out.txt"
    code, out, _ = run(capsys, "strata", "--A", "identity", "--N", "2", "--output", str(dest))
    assert code == 0 and out == ""
    assert len(records(dest.read_text())) == 3


@pytest.mark.parametrize("argv", [
    ("strata", "--A", "identity", "--N", "2", "--kind", "Q"),
    ("strata", "--A", "identity", "--N", "2", "--bogus", "1"),
    ("strata", "--A", "identity", "--N", "two"),
    ("strata", "--A", "identity", "--N", "2", "--kind", "G"),
    ("strata", "--A", "file", "/nonexistent/A.txt"),
    ("flow", "--kind", "G"),
    ("synth", "--W", "hadamard", "--H0", "sigma_z", "--mu", "sigma_x", "zz", "--T", "1", "--m", "10"),
    ("nonsense",),
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("N 2\nweights identity\n")
    code, _, err = run(capsys, "strata", "--config", str(cfg))
    assert code == 2 and "weights" in err
    with pytest.raises(ConfigError):
        parse_config_text("kind\n")


def test_subsystem_streams_are_independent():
    a = subsystem_rng(1, "W").standard_normal(4)
    b = subsystem_rng(1, "U0").standard_normal(4)
    c = subsystem_rng(1, "W").standard_normal(4)
    assert not np.allclose(a, b) and np.array_equal(a, c)
