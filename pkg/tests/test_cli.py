import json
from pathlib import Path

import pytest

from dirac_gaps.cli import main

GOLDEN = Path(__file__).parent / "golden"


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _numeric_match(text, golden, rel=1e-12):
    """Headers identical; numeric fields equal up to rel (libm may differ in the last bits)."""
    a, b = text.splitlines(), golden.splitlines()
    assert len(a) == len(b)
    for la, lb in zip(a, b):
        if la.startswith("#") or not la[:1].lstrip("-").isdigit():
            assert la == lb
            continue
        for x, y in zip(la.split(","), lb.split(",")):
            try:
                fx, fy = float(x), float(y)
            except ValueError:
                assert x == y
                continue
            assert fx == fy or abs(fx - fy) <= rel * max(abs(fx), abs(fy))


def test_spectrum_free_golden(capsys):
    code, out, _ = _run(capsys, "spectrum", "--bc", "per-", "--K", "64", "--nmax", "20", "preset:zero")
    assert code == 0
    assert out == (GOLDEN / "spectrum_zero.csv").read_text()


def test_coeffs_golden(capsys):
    code, out, _ = _run(capsys, "coeffs", "--n-range", "3:5", "--z", "0", "--nu-max", "2",
                        "preset:example-c15", "0.3", "0.2", "0.25", "0.1")
    assert code == 0
    _numeric_match(out, (GOLDEN / "coeffs_c15.csv").read_text())


def test_coeffs_json_golden(capsys):
    code, out, _ = _run(capsys, "coeffs", "--json", "--n-range", "1:2", "--nu-max", "1",
                        "preset:example-c15", "0.3", "0.2", "0.25", "0.1")
    assert code == 0
    got, want = json.loads(out), json.loads((GOLDEN / "coeffs_c15.json").read_text())
    assert got["columns"] == want["columns"] and got["schema_version"] == 1
    for r1, r2 in zip(got["rows"], want["rows"]):
        assert r1 == pytest.approx(r2, rel=1e-12, abs=1e-18)


def test_asymptotics_golden(capsys):
    code, out, _ = _run(capsys, "asymptotics", "--n-range", "3:11",
                        "preset:example-c15", "0.5", "0.5", "0.5", "0.5")
    assert code == 0
    _numeric_match(out, (GOLDEN / "asymptotics_c15.csv").read_text())


def test_riesz_verdict(capsys):
    code, out, _ = _run(capsys, "riesz", "--bc", "per-", "preset:example-c15", "0.1", "0.1", "0.1", "0.1",
                        "--n-range", "5:25")
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "riesz-basis" and d["schema_version"] == 1


def test_basic_eq_bad_file(capsys):
    code, _, err = _run(capsys, "basic-eq", "--n-range", "8:20", "badfile")
    assert code == 1 and "badfile" in err


def test_basic_eq_runs(capsys):
    code, out, _ = _run(capsys, "basic-eq", "--n-range", "8:10", "preset:example-c15", "0.1", "0.1", "0.1", "0.1")
    assert code == 0
    rows = out.splitlines()[2:]
    assert [r.split(",")[0] for r in rows] == ["8", "9", "10"]
    assert all(float(r.split(",")[9]) < 1e-8 for r in rows)


def test_spectrum_monodromy_and_dir(capsys):
    code, out, _ = _run(capsys, "spectrum", "--bc", "dir", "--method", "monodromy", "--nmax", "3", "preset:zero")
    assert code == 0
    mus = [float(r.split(",")[1]) for r in out.splitlines()[2:]]
    assert mus == pytest.approx([-3, -2, -1, 1, 2, 3], abs=1e-12)
    code, _, err = _run(capsys, "spectrum", "--bc", "dir", "--nmax", "3", "preset:zero")
    assert code == 1 and "monodromy" in err


def test_maps(capsys):
    code, out, _ = _run(capsys, "maps", "--json", "--N", "3", "--nmax", "7",
                        "preset:example-c15", "0.1", "0.1", "0.1", "0.1")
    assert code == 0
    d = json.loads(out)
    assert d["symmetry"] == "X_t" and d["t"] == pytest.approx(1.0)


@pytest.mark.parametrize("argv", [
    [], ["spectrum", "preset:zero"], ["spectrum", "--bc", "per-", "--bogus", "preset:zero"],
    ["coeffs", "--n-range", "5", "preset:zero"], ["spectrum", "--bc", "per-", "preset:nope"],
    ["spectrum", "--bc", "per-", "--nmax", "0", "preset:zero"], ["experiment"],
    ["asymptotics", "--n-range", "3:5", "preset:zero"],
])
def test_usage_errors(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 1 and err


def test_asymptotics_rejects_other_modes(tmp_path, capsys):
    f = tmp_path / "v.txt"
    f.write_text("P 4 0.1 0\nQ -4 0.1 0\n")
    code, _, err = _run(capsys, "asymptotics", "--n-range", "3:5", str(f))
    assert code == 1 and "+-2" in err


def test_numerical_failure_exit(capsys):
    # per- with N=0 and a sizeable potential: disc D_1 is crowded
    code, _, err = _run(capsys, "spectrum", "--bc", "per-", "--K", "40", "--nmax", "5",
                        "preset:example-c15", "0.6", "0.6", "-0.6", "0.6")
    assert code == 2 and "numerical failure" in err


def test_help_exit_zero(capsys):
    assert main(["--help"]) == 0
    for sub in ("spectrum", "coeffs", "basic-eq", "riesz", "asymptotics", "maps"):
        assert main([sub, "--help"]) == 0


def test_experiment_run(tmp_path, capsys):
    cfg = tmp_path / "gd.ini"
    cfg.write_text("[experiment]\nkind = gap-decay\npotential = preset:example-c15 0.2 0.1 0.2 0.1\n"
                   "bc = per-\nn_range = 5:15\n")
    code, out, _ = _run(capsys, "experiment", "run", str(cfg))
    assert code == 0
    paths = out.split()
    assert len(paths) == 2 and all(Path(p).exists() for p in paths)
    code, _, err = _run(capsys, "experiment", "run", str(tmp_path / "missing.ini"))
    assert code == 1
