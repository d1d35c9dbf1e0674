import io
import random
import re
import subprocess
import sys

import pytest

from helpers import FIXTURES, random_suite
from tdpmc import cli
from tdpmc.cnf import serialize_dimacs
from tdpmc.oracle import OracleResult
from tdpmc.solver import count

EXAMPLE = FIXTURES / "example1.cnf"


def run(*argv):
    out = io.StringIO()
    code = cli.run([str(a) for a in argv], out)
    return code, out.getvalue()


def mask_times(text):
    return re.sub(r"^c o time-(sat|proj) \d+$", r"c o time-\1 *", text, flags=re.M)


def test_example_output_lines():
    code, text = run(EXAMPLE)
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "c o width 2"
    assert lines[1].startswith("c o nodes ")
    assert lines[2] == "c o heuristic min-fill"
    assert re.fullmatch(r"c o time-sat \d+", lines[3])
    assert re.fullmatch(r"c o time-proj \d+", lines[4])
    assert lines[-1] == "s pmc 4"


def test_projection_options(tmp_path):
    assert run(EXAMPLE, "--projection", "1,2,3,4")[1].endswith("s pmc 6\n")
    assert run(EXAMPLE, "--projection", "")[1].endswith("s pmc 1\n")
    pfile = tmp_path / "p.txt"
    pfile.write_text("3\n")
    assert run(EXAMPLE, "--projection-file", pfile)[1].endswith("s pmc 2\n")


def test_imported_td():
    code, text = run(EXAMPLE, "--td", FIXTURES / "example1_tprime.td")
    assert code == 0
    assert "c o heuristic td-import\n" in text
    assert "c o nodes 12\n" in text
    assert text.endswith("s pmc 4\n")
    assert run(EXAMPLE, "--td", FIXTURES / "example1_fig1.td")[1].endswith("s pmc 4\n")


def test_invalid_td_is_rejected(tmp_path):
    bad = tmp_path / "bad.td"
    bad.write_text("s td 2 2 4\nb 1 1 2\nb 2 3 4\n1 2\n")
    assert run(EXAMPLE, "--td", bad)[0] == 1


def test_unsat_instance():
    code, text = run(FIXTURES / "unsat.cnf")
    assert code == 0 and text.endswith("s pmc 0\n")
    assert run(FIXTURES / "unsat.cnf", "--mode", "sat")[1].endswith("s UNSATISFIABLE\n")


def test_modes():
    code, text = run(EXAMPLE, "--mode", "sat")
    assert code == 0 and text.endswith("s SATISFIABLE\n")
    assert "time-proj" not in text
    code, text = run(EXAMPLE, "--mode", "stats-only")
    assert code == 0
    assert text.splitlines() == ["c o width 2", text.splitlines()[1], "c o heuristic min-fill"]


def test_parse_errors(tmp_path):
    broken = tmp_path / "broken.cnf"
    broken.write_text("p cnf 2 1\n1 5 0\n")
    assert run(broken)[0] == 1
    assert run(tmp_path / "missing.cnf")[0] == 1
    assert run(EXAMPLE, "--projection", "9")[0] == 1
    assert run(EXAMPLE, "--max-width", "-1")[0] == 1


def test_guards_exit_2(tmp_path):
    assert run(EXAMPLE, "--max-width", "1")[0] == 2
    assert run(EXAMPLE, "--table-cap", "1")[0] == 2
    assert run(EXAMPLE, "--memory-cap", "10")[0] == 2
    assert run(EXAMPLE, "--max-width", "1", "--force")[0] == 0


def test_check_oracle_agrees():
    code, text = run(EXAMPLE, "--check-oracle")
    assert code == 0
    assert "c o oracle agrees\n" in text


def test_oracle_mismatch_exits_3(monkeypatch):
    monkeypatch.setattr(cli, "brute_force", lambda inst: OracleResult(0, 99))
    code, text = run(EXAMPLE, "--check-oracle")
    assert code == 3
    assert "c o oracle-mismatch dp=4 oracle=99\n" in text


def test_dump_tables_go_to_stderr(capsys):
    code, text = run(EXAMPLE, "--dump-tables", "--td", FIXTURES / "example1_tprime.td")
    err = capsys.readouterr().err
    assert code == 0
    assert "c node t12 (rem 1) bag []" in err
    assert "c node" not in text


def test_output_is_deterministic():
    for heuristic in ("min-fill", "min-degree"):
        first = mask_times(run(EXAMPLE, "--heuristic", heuristic, "--seed", "3")[1])
        second = mask_times(run(EXAMPLE, "--heuristic", heuristic, "--seed", "3")[1])
        assert first == second


def test_sat_mode_agrees_with_counts(tmp_path):
    for k, inst in enumerate(random_suite(313, 200, vars_range=(3, 10), clause_range=(5, 40))):
        sat = count(inst, mode="sat").satisfiable
        assert sat == (count(inst).count > 0)
        if k % 40 == 0:
            path = tmp_path / f"i{k}.cnf"
            path.write_text(serialize_dimacs(inst))
            expected = "SATISFIABLE" if sat else "UNSATISFIABLE"
            assert run(path, "--mode", "sat")[1].endswith(f"s {expected}\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tdpmc", str(EXAMPLE)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.endswith("s pmc 4\n")
