import json
import subprocess
import sys

import pytest

from wickorder.cli import main, parse_chi
from wickorder.scalar import Scalar
from wickorder.sordering import ChiPath


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def scalar_from_entries(entries):
    from fractions import Fraction

    from wickorder.scalar import Gaussian

    total = Scalar(0)
    for e in entries:
        term = Scalar(Gaussian(Fraction(e["re"]), Fraction(e["im"])))
        for name, power in e["params"].items():
            term = term * Scalar.var(name) ** power
        if e["sqrt2"]:
            term = term * Scalar.sqrt2()
        total = total + term
    return total


def test_order(capsys):
    code, out, _ = run(capsys, "order", "W{ q^2*p }")
    assert code == 0 and out.strip() == "q^2*p - i*q"


def test_order_json_schema(capsys):
    code, payload = run_json(capsys, "order", "S[s=1/2]{ c^2*cd }")
    assert code == 0
    entries = payload["normal_form"]
    assert {tuple(e["word"]): (e["re"], e["im"]) for e in entries} == {
        ("cd", "c", "c"): ("1", "0"), ("c",): ("1/2", "0")}
    assert all(set(e) == {"word", "re", "im", "params", "sqrt2"} for e in entries)


def test_order_two_modes(capsys):
    code, payload = run_json(capsys, "order", "c[2]*cd[2]*q[1]", "--modes", "2")
    assert code == 0
    words = sorted(tuple(e["word"]) for e in payload["normal_form"])
    assert words == [("c[1]",), ("c[1]", "cd[2]", "c[2]"), ("cd[1]",), ("cd[1]", "cd[2]", "c[2]")]
    # q = (c + cd)/sqrt2 is carried exactly as 1/2 * sqrt2
    assert all((e["re"], e["sqrt2"]) == ("1/2", 1) for e in payload["normal_form"])


def test_contract_pq_normal(capsys):
    code, payload = run_json(capsys, "contract", "--from", "PQ", "--to", "N", "--x", "i*z*p + zc*q")
    assert code == 0
    z, zc = Scalar.var("z"), Scalar.var("zc")
    quarter = Scalar(1) / 4
    assert scalar_from_entries(payload["contraction"]) == quarter * zc * zc - quarter * z * z + z * zc / 2


def test_contract_text(capsys):
    code, out, _ = run(capsys, "contract", "--from", "N", "--to", "A", "--x", "l*cd + lc*c")
    assert code == 0 and out.strip() == "-l*lc"


def test_gwt_verify_passes(capsys):
    code, payload = run_json(capsys, "gwt-verify", "--from", "N", "--to", "A", "--x", "l*cd + lc*c",
                             "--degree", "6")
    assert code == 0
    assert payload["report"]["passed"] and payload["report"]["max_degree"] == 6
    assert scalar_from_entries(payload["contraction"]) == -Scalar.var("l") * Scalar.var("lc")


def test_gwt_verify_text(capsys):
    code, out, _ = run(capsys, "gwt-verify", "--from", "QP", "--to", "PQ", "--x", "a*q + b*p", "--degree", "4")
    assert code == 0 and out.splitlines()[0] == "pass"


def test_sweights(capsys):
    code, payload = run_json(capsys, "sweights", "--chi", "t", "--n", "2", "--m", "1")
    assert code == 0
    assert payload["weights"] == {"ccd": "1/3", "cdc": "1/3", "dcc": "1/3"}
    assert payload["s"] == "0" and payload["report"]["passed"]


def test_sweights_piecewise_text(capsys):
    code, out, _ = run(capsys, "sweights", "--chi", "0:1/2:2*t^2; 1/2:1:-1 + 4*t - 2*t^2", "--n", "1", "--m", "2")
    assert code == 0
    assert out.splitlines()[0] == "s = 0" and out.splitlines()[-1] == "verified"


def test_svalue(capsys):
    code, out, _ = run(capsys, "svalue", "--s", "-1", "--n", "1", "--m", "1")
    assert code == 0 and out.strip() == "cd*c + 1"


@pytest.mark.parametrize(
    "text, expected",
    [
        ("t", ChiPath.identity()),
        ("t^3", ChiPath.power(3)),
        ("jump@1/2", ChiPath.jump_at("1/2")),
    ],
)
def test_parse_chi(text, expected):
    assert parse_chi(text).poly.pieces == expected.poly.pieces
    assert parse_chi(text).breaks == expected.breaks


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_evolve_particle_with_check(capsys, tmp_path):
    drive = write(tmp_path, "force.txt", "0 1 1/2\n")
    code, payload = run_json(capsys, "evolve", "particle", "--drive", drive, "--t", "1", "--fock", "48",
                             "--steps", "300", "--tolerance", "1e-4")
    assert code == 0
    assert scalar_from_entries(payload["dp"]) == Scalar(1) / 2
    assert scalar_from_entries(payload["dq"]) == Scalar(-1) / 4
    assert scalar_from_entries(payload["contraction"]) == Scalar.i() / 12
    assert payload["report"]["passed"]


def test_evolve_cavity_tolerance_failure_exit_code(capsys, tmp_path):
    drive = write(tmp_path, "field.txt", "0 1/2 3/10\n1/2 1 1/5i\n")
    code, payload = run_json(capsys, "evolve", "cavity", "--drive", drive, "--fock", "24", "--steps", "3",
                             "--tolerance", "1e-12")
    assert code == 4 and not payload["report"]["passed"]


def test_evolve_cavity_with_frequency(capsys, tmp_path):
    drive = write(tmp_path, "field.txt", "0 1 3/10\n")
    code, out, _ = run(capsys, "evolve", "cavity", "--drive", drive, "--omega", "1", "--fock", "32",
                       "--steps", "2000", "--tolerance", "1e-5")
    assert code == 0
    assert "safe-block operator error" in out


def test_config_file_sets_defaults(capsys, tmp_path):
    drive = write(tmp_path, "field.txt", "0 1 3/10\n")
    config = write(tmp_path, "run.cfg", "# numeric check\nfock = 16\nsteps = 10\ntolerance = 1e-6\n")
    code, payload = run_json(capsys, "evolve", "cavity", "--drive", drive, "--config", config)
    assert code == 0 and payload["report"]["tolerance"] == 1e-6
    # a flag overrides the file
    code, payload = run_json(capsys, "evolve", "cavity", "--drive", drive, "--config", config,
                             "--tolerance", "1e-30")
    assert code == 4


def test_config_file_errors(capsys, tmp_path):
    config = write(tmp_path, "bad.cfg", "colour = blue\n")
    code, _, err = run(capsys, "svalue", "--s", "0", "--n", "1", "--m", "1", "--config", config)
    assert code == 1 and "unknown key" in err


def test_squeeze(capsys):
    code, payload = run_json(capsys, "squeeze", "--mu", "2", "--fock", "40", "--tolerance", "1e-8")
    assert code == 0
    assert scalar_from_entries(payload["beta"]) == Scalar(-1) / 5
    assert scalar_from_entries(payload["prefactor_squared"]) == Scalar(4) / 5
    assert payload["report"]["passed"]


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "order", "q + * p")
    assert code == 2 and "line 1, column 5" in err


def test_bad_ordering_name_is_usage_error(capsys):
    code, _, err = run(capsys, "contract", "--from", "XY", "--to", "N", "--x", "q")
    assert code == 1 and "unknown ordering" in err


def test_non_linear_x_is_usage_error(capsys):
    code, _, _ = run(capsys, "contract", "--from", "QP", "--to", "PQ", "--x", "q*p")
    assert code == 1


def test_missing_argument_exits_with_usage_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["svalue", "--s", "0"])
    assert info.value.code == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wickorder.cli", "svalue", "--s", "0", "--n", "2", "--m", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "cd*c^2 + c"
