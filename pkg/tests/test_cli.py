import io
import json
import os
import subprocess
import sys

import pytest

from hauptprod import cli
from hauptprod.arith import CACHE_FILENAME, KloostermanCache, KloostermanKey, kloosterman


def run(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), out=out)
    return code, out.getvalue()


def test_haupt_rows():
    code, text = run("haupt", "--level", "1", "--prec", "3", "--format", "csv")
    assert code == 0
    assert text.splitlines() == ["r,a", "-1,1", "0,0", "1,196884", "2,21493760"]
    code, text = run("haupt", "--level", "2", "--prec", "2")
    obj = json.loads(text)
    assert [(c["r"], c["a"]) for c in obj["coefficients"]] == [(-1, 1), (0, 0), (1, 276)]


def test_unsupported_level_exit_2(capsys):
    code, _ = run("haupt", "--level", "11")
    assert code == 2
    err = capsys.readouterr().err
    assert "supported levels" in err and "25" in err


def test_verify_borcherds_pass_and_mutation():
    code, text = run("verify-borcherds", "--level", "1", "--box", "6")
    obj = json.loads(text)
    assert code == 0 and obj["pass"] is True and obj["mismatches"] == []
    assert list(obj)[:6] == ["level", "box", "pass", "mismatches", "elapsed_ms", "exponent_source"]
    code, _ = run("verify-borcherds", "--level", "5", "--box", "6")
    assert code == 0
    code, text = run("verify-borcherds", "--level", "1", "--box", "6", "--perturb", "1,1,1")
    assert code == 1 and json.loads(text)["pass"] is False


def test_verify_several_levels_and_literal_source():
    code, text = run("verify-borcherds", "--level", "1,2,3", "--box", "4,5")
    reports = json.loads(text)["reports"]
    assert code == 0 and [r["level"] for r in reports] == [1, 2, 3]
    assert reports[0]["box"] == [4, 5]
    code, _ = run("verify-borcherds", "--level", "4", "--box", "6", "--exponents", "literal")
    assert code == 1


def test_kloosterman_command():
    code, text = run("kloosterman", "1", "1", "5", "--format", "text")
    assert code == 0 and text.startswith("0.381966011250")
    obj = json.loads(run("kloosterman", "1", "1", "5")[1])
    assert set(obj) >= {"value", "error_bound", "term_count"}


def test_eisenstein_command():
    obj = json.loads(run("eisenstein", "--level", "1", "--r", "1", "--exact")[1])
    assert obj["value"] == -24 and obj["exact"] is True
    obj = json.loads(run("eisenstein", "--level", "3", "--r", "2", "--cmax", "3000")[1])
    assert abs(obj["value"] - obj["exact_value"]) <= obj["tail_bound"]


def test_poincare_command():
    code, text = run("poincare", "--level", "1", "--rprime", "1", "--r", "1", "--cmax", "10000")
    obj = json.loads(text)
    assert code == 0
    assert abs(abs(obj["value"]) - 196884) / 196884 < 1e-3
    assert obj["tail_bound"] > 0 and obj["exact_prediction"] == -196884
    assert obj["elapsed_ms"] is None


def test_selberg_command():
    code, text = run("selberg", "2", "2", "4")
    obj = json.loads(text)
    assert code == 0 and obj["agree"] is True and abs(obj["lhs"] - 2) < 1e-12


def test_hecke_apply_csv():
    code, text = run("hecke-apply", "--m", "2", "--prec", "6")
    assert code == 0
    assert text.splitlines() == ["n,before,after", "0,0,0", "1,1,-2", "2,-2,4", "3,-1,2", "4,2,-4", "5,1,-2"]
    code, _ = run("hecke-apply", "--level", "5", "--m", "2")
    assert code == 2


def test_hecke_apply_from_file(tmp_path):
    from hauptprod.qseries import LaurentSeries

    path = tmp_path / "f.json"
    path.write_text(json.dumps(LaurentSeries([0, 1, 1, 1, 1, 1, 1, 1], 0, 8).to_json()))
    code, text = run("hecke-apply", "--input", str(path), "--m", "2", "--prec", "4", "--level", "1")
    rows = [line.split(",") for line in text.splitlines()[1:]]
    # b(n) = a(2n) + 2 a(n/2)
    assert [r[2] for r in rows] == ["0", "1", "3", "1"]


@pytest.mark.parametrize("argv", [
    ["haupt", "--level", "1", "--bogus"],
    ["haupt"],
    ["verify-borcherds", "--level", "1", "--box", "1,2,3"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        cli.run(argv)
    assert info.value.code == 2


@pytest.mark.parametrize("argv", [
    ["haupt", "--level", "1", "--prec", "0"],
    ["poincare", "--rprime", "1", "--r", "1", "--cmax", "-5"],
    ["verify-borcherds", "--level", "1", "--box", "0"],
    ["kloosterman", "1", "1", "0"],
    ["haupt", "--level", "1", "--threads", "0"],
])
def test_nonpositive_parameters_exit_2(argv):
    assert run(*argv)[0] == 2


def test_cache_round_trip(tmp_path):
    code, first = run("poincare", "--rprime", "1", "--r", "2", "--cmax", "500", "--cache-dir", str(tmp_path))
    path = tmp_path / CACHE_FILENAME
    cache = KloostermanCache.load(path)
    assert len(cache) == 500
    for c in (1, 7, 499):
        stored = cache.get(KloostermanKey.normalize(-2, 1, c))
        assert format(stored, ".17g") == format(kloosterman(-2, 1, c), ".17g")
    code, second = run("poincare", "--rprime", "1", "--r", "2", "--cmax", "500", "--cache-dir", str(tmp_path))
    assert first == second


def test_corrupt_cache_is_advisory(tmp_path, caplog):
    (tmp_path / CACHE_FILENAME).write_text("NOT A CACHE\n")
    code, text = run("kloosterman", "1", "1", "5", "--cache-dir", str(tmp_path))
    assert code == 0 and "0.38196601125" in text
    assert "ignoring" in caplog.text
    assert KloostermanCache.load(tmp_path / CACHE_FILENAME).get(KloostermanKey(5, 1, 1)) is not None


def test_cache_dir_from_environment(tmp_path):
    env = dict(os.environ, HAUPTPROD_CACHE_DIR=str(tmp_path))
    proc = subprocess.run(
        [sys.executable, "-m", "hauptprod", "kloosterman", "2", "3", "7"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert json.loads(proc.stdout)["c"] == 7
    assert (tmp_path / CACHE_FILENAME).exists()


def test_json_float_format():
    assert cli.dumps({"x": 0.1, "y": [1, None, True]}) == '{"x": 0.10000000000000001, "y": [1, null, true]}'
