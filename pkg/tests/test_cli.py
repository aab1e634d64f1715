import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ramprime.cli import build_parser, main


def run(capsys, *argv, environ=None):
    code = main(list(argv), environ={} if environ is None else environ)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sigma_zero(capsys):
    code, out, _ = run(capsys, "sigma-zero")
    assert code == 0
    (r,) = rows(out)
    assert abs(float(r["u0"]) - 3.65887) < 5e-4
    assert float(r["exponent"]) <= 0.27332
    code, out, _ = run(capsys, "sigma-zero", "--format", "kv")
    assert out.startswith("u0=3.6588") and ",exponent=0.27330" in out


def test_dilog_and_eval(capsys):
    code, out, _ = run(capsys, "dilog", "--x", "-1")
    assert code == 0
    assert rows(out)[0]["li2"].startswith("-0.8224670334")
    code, out, _ = run(capsys, "sigma-eval", "--u", "2")
    assert float(rows(out)[0]["sigma"]) == pytest.approx(14 - 16 * math.log(2), abs=1e-9)
    code, out, _ = run(capsys, "buchstab", "--u", "1.5")
    assert float(rows(out)[0]["omega"]) == pytest.approx(2 / 3, abs=1e-15)


def test_sieve_count(capsys):
    code, out, _ = run(capsys, "sieve-count", "--x", "30", "--y", "10", "--z", "3")
    assert code == 0
    assert out.splitlines()[1].startswith("30,10,3,3,")
    code, out, _ = run(capsys, "sieve-count", "--x", "30", "--y", "10", "--z", "3",
                       "--log-weighted", "--asymptotic")
    r = rows(out)[0]
    assert float(r["band_log"]) == pytest.approx(3.4294, abs=1e-4)
    assert r["in_range"] == "true" and "asymptotic_rough_z" in r


def test_c_constant_and_mean_value(capsys):
    code, out, _ = run(capsys, "c-constant", "--level", "1", "--cutoff", "10")
    r = rows(out)[0]
    assert float(r["value"]) == pytest.approx(
        (1 / 2) ** 3 * 5 / 2 * (2 / 3) ** 3 * 2 * (4 / 5) ** 3 * 8 / 5 * (6 / 7) ** 3 * 10 / 7, rel=1e-14)
    code, out, _ = run(capsys, "mean-value", "--y", "100", "--u", "1")
    r = rows(out)[0]
    assert float(r["ratio"]) == pytest.approx(float(r["lhs"]) / float(r["rhs"]), rel=1e-14)


def test_dataset_pipeline(capsys, tmp_path):
    path = str(tmp_path / "d.tsv")
    code, out, _ = run(capsys, "synth", "--limit", "1000", "--seed", "11",
                       "--violate", "2:2.5,3:-3,5:4", "--out", path)
    assert code == 0 and rows(out)[0]["records"] == "168"
    code, out, _ = run(capsys, "least-prime", "--input", path)
    r = rows(out)[0]
    assert r["p"] == "7" and r["found"] == "true"
    code, out, _ = run(capsys, "density", "--input", path, "--x", "1000")
    r = rows(out)[0]
    assert r["ramanujan_count"] == "165" and r["identity_holds"] == "true"
    code, out, _ = run(capsys, "pnt-sums", "--input", path, "--x", "100")
    assert code == 0
    code, out, _ = run(capsys, "lift-means", "--input", path, "--x", "1000")
    assert rows(out)[0]["flagged"] == "true"
    code, out, _ = run(capsys, "s-sums", "--x", "50", "--input", path)
    r = rows(out)[0]
    assert float(r["S"]) == pytest.approx(float(r["S_plus"]) + float(r["S_minus"]), rel=1e-12)


def test_s_sums_without_input(capsys):
    code, out, _ = run(capsys, "s-sums", "--x", "1.5")
    assert rows(out)[0]["S"] == f"{math.log(1.5):.17g}"


def test_identity_check(capsys):
    code, out, _ = run(capsys, "identity-check", "--trials", "300")
    assert code == 0 and rows(out)[0]["passed"] == "true"


def test_grid_dump(capsys):
    code, out, _ = run(capsys, "grid", "--problem", "sigma", "--u-end", "2", "--step-h", "0.125")
    r = rows(out)
    assert len(r) == 17 and r[0]["u"] == "0" and float(r[-1]["u"]) == 2.0
    assert float(r[-1]["y"]) == pytest.approx(14 - 16 * math.log(2), abs=1e-4)


def test_json_same_fields(capsys):
    _, c, _ = run(capsys, "sieve-count", "--x", "100", "--y", "10", "--z", "3", "--log-weighted")
    _, j, _ = run(capsys, "sieve-count", "--x", "100", "--y", "10", "--z", "3", "--log-weighted",
                  "--format", "json")
    (obj,) = json.loads(j)
    (row,) = rows(c)
    assert list(obj) == list(row)
    assert obj["phi_band"] == int(row["phi_band"])


def test_digits(capsys):
    _, out, _ = run(capsys, "dilog", "--x", "-1", "--digits", "5")
    assert rows(out)[0]["li2"] == "-0.82247"
    _, out, _ = run(capsys, "dilog", "--x", "0.3")
    assert len(rows(out)[0]["li2"].replace("0.", "", 1).lstrip("0")) >= 15


def test_deterministic(capsys, tmp_path):
    outs = [run(capsys, "s-sums", "--x", "300", "--seed", "4")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    a, b = str(tmp_path / "a.tsv"), str(tmp_path / "b.tsv")
    run(capsys, "synth", "--limit", "500", "--seed", "8", "--out", a)
    run(capsys, "synth", "--limit", "500", "--seed", "8", "--out", b)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_config_file_and_env(capsys, tmp_path):
    cfg = tmp_path / "rs.conf"
    cfg.write_text("# solver\noutput_format=json\nstep_h=0.001\n")
    _, out, _ = run(capsys, "sigma-zero", "--config", str(cfg))
    assert json.loads(out)[0]["u0"] == pytest.approx(3.65887, abs=5e-4)
    _, out, _ = run(capsys, "sigma-zero", environ={"RS_CONFIG": str(cfg)})
    assert out.startswith("[")
    _, out, _ = run(capsys, "sigma-zero", "--format", "csv", environ={"RS_CONFIG": str(cfg)})
    assert out.startswith("u0,exponent")
    cfg.write_text("colour=blue\n")
    assert run(capsys, "sigma-zero", "--config", str(cfg))[0] == 2
    cfg.write_text("step_h=0.3\n")
    assert run(capsys, "sigma-zero", "--config", str(cfg))[0] == 2


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "dilog", "--x", "2")[0] == 2
    assert run(capsys, "sigma-eval", "--u", "2", "--step-h", "0.3")[0] == 2
    assert run(capsys, "density", "--input", str(tmp_path / "missing.tsv"), "--x", "10")[0] == 2
    bad = tmp_path / "bad.tsv"
    bad.write_text("# level=1\n# t_phi=0\np\tlambda_re\tlambda_im\tchi_re\tchi_im\n4\t1\t0\t1\t0\n")
    code, _, err = run(capsys, "density", "--input", str(bad), "--x", "10")
    assert code == 2 and "line 4" in err
    gap = tmp_path / "gap.tsv"
    gap.write_text("# level=1\n# t_phi=0\np\tlambda_re\tlambda_im\tchi_re\tchi_im\n2\t1\t0\t1\t0\n5\t1\t0\t1\t0\n")
    assert run(capsys, "density", "--input", str(gap), "--x", "10")[0] == 3
    with pytest.raises(SystemExit) as info:
        main(["dilog", "--x", "1", "--bogus"], environ={})
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"], environ={})
    assert info.value.code == 64


def _subcommands():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    return sub.choices


@pytest.mark.parametrize("name", sorted(_subcommands()))
def test_help_documents_all_flags(name, capsys):
    with pytest.raises(SystemExit) as info:
        main([name, "--help"], environ={})
    assert info.value.code == 0
    text = capsys.readouterr().out
    for action in _subcommands()[name]._actions:
        for opt in action.option_strings:
            assert opt in text


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ramprime", "dilog", "--x", "-1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("-1,-0.8224670334")
