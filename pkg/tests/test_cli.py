import json
import subprocess
import sys

import pytest

from markercoe.cli import main
from markercoe.graph import theta

PHI = '{"m": "a", "d": "", "d2": "b"}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--graph", "theta")
    assert code == 0 and "period\t2" in out
    code, _, _ = run(capsys, "analyze", "--graph", "circle:4")
    assert code == 2


def test_analyze_json_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(theta().to_json()))
    code, out, _ = run(capsys, "analyze", "--graph", str(path), "--format", "json")
    assert code == 0 and json.loads(out)["period"] == 2


def test_classes(capsys):
    code, out, _ = run(capsys, "classes", "--graph", "rose:2", "--max-len", "3")
    assert code == 0 and out.splitlines() == ["1\ta", "1\tb", "2\tab", "3\taab", "3\tabb"]
    code, out, _ = run(capsys, "classes", "--graph", "rose:2", "--max-len", "1")
    assert len(out.splitlines()) == 2
    code, _, err = run(capsys, "classes", "--graph", "circle:3")
    assert code == 2 and "subdivided circle" in err
    assert run(capsys, "classes", "--graph", "rose:2", "--max-len", "0")[0] == 2


def test_marker_commands(capsys):
    code, out, _ = run(capsys, "marker", "check", "--graph", "rose:2", "--marker", PHI)
    assert code == 0 and out.startswith("valid")
    code, out, _ = run(capsys, "marker", "fphi", "--graph", "rose:2", "--marker", PHI, "--input", "a")
    assert code == 0 and out.strip() == "[ab]"
    code, out, _ = run(capsys, "marker", "apply", "--graph", "rose:2", "--marker", PHI, "--input", "b")
    assert code == 0 and out.strip() == "o|b"
    code, out, _ = run(capsys, "marker", "apply", "--graph", "rose:2", "--marker", PHI, "--input", "b|a")
    assert code == 0 and out.strip() == "o|ba"  # b (ab)^inf = (ba)^inf


def test_marker_errors(capsys):
    bad = '{"m": "a", "d": "", "d2": "a"}'
    code, _, err = run(capsys, "marker", "check", "--graph", "rose:2", "--marker", bad)
    assert code == 2 and "overlap" in err
    assert run(capsys, "marker", "check", "--graph", "rose:2", "--marker", "{oops")[0] == 2
    assert run(capsys, "marker", "fphi", "--graph", "rose:2", "--marker", PHI)[0] == 2
    assert run(capsys, "marker", "fphi", "--graph", "rose:2", "--marker", PHI, "--input", "aa")[0] == 2


def test_transitivity(capsys):
    code, out, _ = run(capsys, "transitivity", "--graph", "rose:2", "--src", "a", "--dst", "b")
    assert code == 0 and "verified\tTrue" in out
    code, out, _ = run(capsys, "transitivity", "--graph", "rose:2", "--src", "a", "--dst", "ab", "--format", "json")
    payload = json.loads(out)
    assert code == 0 and len(payload["moves"]) == 1 and payload["verified"]
    code, out, _ = run(capsys, "transitivity", "--graph", "rose:2", "--src", "ab", "--dst", "ba")
    assert code == 0 and "moves\t0" in out
    assert run(capsys, "transitivity", "--graph", "rose:2", "--src", "aa", "--dst", "b")[0] == 2


def test_proximality(capsys):
    code, out, _ = run(capsys, "proximality", "--graph", "rose:3", "--start", "a", "--n-max", "20")
    assert code == 0 and "# reached\t20" in out
    rows = [line.split("\t") for line in out.splitlines() if line and line[0].isdigit()]
    assert len(rows) == 20 and all(0 <= float(r[2]) <= 1 for r in rows)
    code, _, err = run(capsys, "proximality", "--graph", "rose:2")
    assert code == 2 and "2-rose" in err
    code, _, _ = run(capsys, "proximality", "--graph", "rose:3", "--start", "b", "--n-max", "3")
    assert code == 4
    assert run(capsys, "proximality", "--graph", "rose:3", "--epsilon", "2")[0] == 2


def test_homology(capsys):
    code, out, _ = run(capsys, "homology", "--graph", "ht:3,1")
    assert code == 0 and "NOT C*-simple (2-torsion" in out and "H0\tZ/2" in out
    code, out, _ = run(capsys, "homology", "--graph", "rose:2", "--format", "json")
    assert json.loads(out)["cstar_simple"] is True


def test_ektw(capsys):
    code, out, _ = run(capsys, "ektw", "--graph", "rose:3", "--format", "json")
    assert code == 0 and json.loads(out)["record"]["passed"] is True


def test_bad_graph_specs(capsys):
    assert run(capsys, "analyze", "--graph", "nonsense")[0] == 2
    assert run(capsys, "analyze", "--graph", "rose:x")[0] == 2
    assert run(capsys, "analyze", "--graph", "missing.json")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "markercoe", "classes", "--graph", "rose:2", "--max-len", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[-1] == "2\tab"


@pytest.mark.parametrize("argv", [[], ["analyze"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
