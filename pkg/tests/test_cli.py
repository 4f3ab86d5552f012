import io
import re
import subprocess
import sys
from fractions import Fraction

from fmeit.cli import (EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_PARSE,
                       CliConfig, emit_machine_report, run)
from fmeit.model import GE, Constraint, LinExpr
from fmeit.reducer import ReductionReport

from oracles import facets, primitive


def go(tmp_path, text, **kw):
    f = tmp_path / "p.txt"
    f.write_text(text)
    out, err = io.StringIO(), io.StringIO()
    code = run(CliConfig(str(f), **kw), out, err)
    return code, out.getvalue(), err.getvalue()


def test_tighter_bound_wins(tmp_path):
    code, out, _ = go(tmp_path, "rates: R1\nsubject to:\nR1 <= 1\nR1 <= 2\n")
    assert code == EXIT_OK and out == "R1 <= 1\n"


def test_contradiction_exit_2(tmp_path):
    code, out, err = go(tmp_path, "rates: R1\nsubject to:\nR1 >= 1\n-R1 >= 0\n")
    assert code == EXIT_INFEASIBLE and "infeasible" in err and out == ""


def test_contradiction_found_by_elimination(tmp_path):
    text = "rates: A, B\neliminate: B\nsubject to:\nB >= A + 1\nB <= A\n"
    code, out, err = go(tmp_path, text, output_format="machine")
    assert code == EXIT_INFEASIBLE and out.startswith("infeasible: true")


def test_parse_error_exit_1(tmp_path):
    code, _, err = go(tmp_path, "rates: R1\nsubject to:\nR1 <= Q\n")
    assert code == EXIT_PARSE and re.search(r"p\.txt:3:7: .*'Q'", err)


def test_missing_file_exit_3(tmp_path):
    out, err = io.StringIO(), io.StringIO()
    assert run(CliConfig(str(tmp_path / "nope.txt")), out, err) == EXIT_IO


def test_target_isolation_and_order(tmp_path):
    text = """rates: A, B, C
targets: A, B
subject to:
A + B <= 4
2B <= 3 + C
A <= 3
C >= 0
B >= 0
A >= 0
"""
    code, out, _ = go(tmp_path, text)
    assert code == EXIT_OK
    assert out.splitlines() == ["A <= 3", "A >= 0", "2B <= C + 3", "B >= 0",
                                "A + B <= 4", "C >= 0"]


def test_show_certificates(tmp_path):
    text = "rates: R1, R2\nsubject to:\nR1 <= 1\nR2 <= 1\nR1 + R2 <= 3\n"
    code, out, _ = go(tmp_path, text, show_certificates=True)
    assert out.splitlines()[:2] == ["R1 <= 1", "R2 <= 1"]
    assert "# R1 + R2 <= 3" in out
    assert "#   optimal value=" in out


def test_no_sti_keeps_shannon_redundancy(tmp_path):
    text = "vars: X, Y\nrates: R\nsubject to:\nR <= H(X)\nR <= H(X,Y)\n"
    _, with_sti, _ = go(tmp_path, text)
    _, without, _ = go(tmp_path, text, no_sti=True)
    assert with_sti.splitlines() == ["R <= H(X)"]
    assert len(without.splitlines()) == 2


def test_no_sti_equals_polyhedral_oracle(tmp_path):
    text = "rates: A, B\nsubject to:\nA + 3 >= 0\nB + 2 >= 0\nA + B <= 4\nA <= 5\n2A + B <= 20\n"
    _, out, _ = go(tmp_path, text, no_sti=True, output_format="machine")
    rows = [([Fraction(1), Fraction(0)], Fraction(3)),
            ([Fraction(0), Fraction(1)], Fraction(2)),
            ([Fraction(-1), Fraction(-1)], Fraction(4)),
            ([Fraction(-1), Fraction(0)], Fraction(5)),
            ([Fraction(-2), Fraction(-1)], Fraction(20))]
    expected = {primitive(*rows[i]) for i in facets(rows, 2)}
    kept = []
    for line in out.splitlines():
        if line.startswith("kept:"):
            f = dict(kv.split("=") for kv in line.split()[3:])
            kept.append(primitive([Fraction(f.get("A", "0")), Fraction(f.get("B", "0"))],
                                  Fraction(f["const"])))
    assert set(kept) == expected


def test_machine_format_examples():
    assert emit_machine_report(ReductionReport(())) == \
        "infeasible: false\nkept_count: 0\nremoved_count: 0\n"
    rep = ReductionReport((Constraint(LinExpr.rate(1), GE, "line:1"),), kept_ids=(0,))
    assert "kept: ge id=#0 r1=1/1 const=0/1 origin=line:1" in emit_machine_report(rep)


def test_machine_and_text_agree(tmp_path):
    text = """vars: X, Y, Z
rates: R, S
targets: R, S
markov: X - Y - Z
subject to:
R <= I(X;Z)
R <= I(X;Y)
S <= H(Z)
R + S <= H(X,Y,Z)
"""
    _, txt, _ = go(tmp_path, text)
    _, mach, _ = go(tmp_path, text, output_format="machine")
    kept = [l for l in mach.splitlines() if l.startswith("kept:")]
    removed = [l for l in mach.splitlines() if l.startswith("removed:")]
    assert len(kept) == len(txt.splitlines())
    assert f"kept_count: {len(kept)}" in mach
    assert f"removed_count: {len(removed)}" in mach
    certs = [l for l in mach.splitlines() if l.startswith("certificate:")]
    assert len(certs) == len(removed) > 0


def test_deterministic_output(tmp_path):
    text = "vars: X, Y\nrates: A, B\neliminate: B\nsubject to:\nA <= B\nB <= I(X;Y)\nB <= H(Y)\n"
    runs = [go(tmp_path, text, output_format=fmt)[1]
            for fmt in ("text", "text", "machine", "machine")]
    assert runs[0] == runs[1] and runs[2] == runs[3]


def test_prune_each_step_same_region(tmp_path):
    text = "rates: A, B, C\neliminate: B, C\nsubject to:\nA <= B\nB <= C\nC <= 5\nB <= 7\nA >= 0\n"
    _, a, _ = go(tmp_path, text)
    _, b, _ = go(tmp_path, text, prune_each_step=True)
    assert a == b == "A <= 5\nA >= 0\n"


def test_console_script_stdin():
    proc = subprocess.run([sys.executable, "-m", "fmeit.cli", "-"],
                          input="rates: R1\nsubject to:\nR1 <= 1\nR1 <= 2\n",
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "R1 <= 1\n"
