import copy
import json
import time
from importlib import resources

import numpy as np
import pytest

from tricover.cli import main
from tricover.io import (CACHE_ENV, InputError, PeriodCache, cached_periods, config_to_dict, default_cache_dir,
                         input_hash, load_config, parse_config, period_key, periods_from_dict, periods_to_dict)
from tricover.periods import precision_from
from tricover.thomae import EXAMPLE7

DATA = resources.files("tricover") / "data"


def test_round_trip(example, tmp_path):
    config, tree, lam = example
    doc = config_to_dict(config, tree, lam)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    c2, t2, l2 = load_config(path)
    assert (c2, l2) == (config, lam)
    assert config_to_dict(c2, t2, l2) == doc


def test_unknown_field_rejected():
    doc = copy.deepcopy(EXAMPLE7)
    doc["tree"]["inner"][0]["colour"] = "white"
    with pytest.raises(InputError) as err:
        parse_config(doc)
    assert err.value.path == "$.tree.inner[0]"


def test_schema_path_for_bad_point():
    doc = copy.deepcopy(EXAMPLE7)
    doc["lambda"][2] = [1.0]
    with pytest.raises(InputError) as err:
        parse_config(doc)
    assert err.value.path == "$.lambda[2]"


def test_hash_changes_with_any_digit(example):
    config, tree, lam = example
    doc = copy.deepcopy(EXAMPLE7)
    doc["lambda"][3] = [3.0000001, 0]
    c2, t2, _ = parse_config(doc)
    assert input_hash(config, tree, lam) != input_hash(c2, t2, lam)
    assert period_key(config, tree, precision_from("double")) != period_key(config, tree, precision_from("extended"))


def test_cache_hits_are_bit_identical(example, tmp_path):
    config, tree, _ = example
    cache = PeriodCache(tmp_path)
    cold, hit1 = cached_periods(config, tree, "double", cache)
    warm, hit2 = cached_periods(config, tree, "double", cache)
    assert (hit1, hit2) == (False, True)
    assert periods_to_dict(cold) == periods_to_dict(warm)


def test_extended_periods_serialise(example):
    config, tree, _ = example
    from tricover.periods import period_matrices

    pd = period_matrices(config, tree, "extended")
    back = periods_from_dict(json.loads(json.dumps(periods_to_dict(pd))), pd.precision)
    assert np.array_equal(back.tau, pd.tau)
    assert back.mp_tau is not None


def test_cache_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert default_cache_dir() == tmp_path


# -- command line -------------------------------------------------------------


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_validate(capsys):
    code, out, _ = run(capsys, "validate", DATA / "example7.json")
    assert code == 0 and "genus 2" in out
    code, _, err = run(capsys, "validate", DATA / "monochromatic_edge.json")
    assert code == 1
    assert json.loads(err)["error"] == "invalid_tree"


def test_cli_schema_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**EXAMPLE7, "extra": 1}))
    code, _, err = run(capsys, "verify", bad)
    assert code == 1 and json.loads(err)["path"] == "$"
    code, _, err = run(capsys, "verify", tmp_path / "missing.json")
    assert code == 1


def test_cli_verify_twice_identical(capsys, tmp_path):
    args = ("verify", DATA / "example7.json", "--json", "--cache-dir", tmp_path)
    t0 = time.perf_counter()
    code1, out1, _ = run(capsys, *args)
    t1 = time.perf_counter()
    code2, out2, _ = run(capsys, *args)
    t2 = time.perf_counter()
    assert code1 == code2 == 0
    assert out1 == out2
    report = json.loads(out1)
    assert report["pass"]["all"] and report["schema_version"] == "1.0"
    assert t2 - t1 < t1 - t0


def test_cli_verify_needs_lambda(capsys, tmp_path):
    doc = {k: v for k, v in EXAMPLE7.items() if k != "Lambda"}
    path = tmp_path / "nolam.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "verify", path, "--no-cache")
    assert code == 1 and json.loads(err)["path"] == "$.Lambda"


def test_cli_theta(capsys):
    code, out, _ = run(capsys, "theta", "--tau", DATA / "tau_omega.json", "--char", "1/6;-1/6", "--json")
    assert code == 0
    val = complex(*json.loads(out)["sixth_power"])
    from tricover.theta import chowla_selberg_value

    assert abs(val / chowla_selberg_value() - 1) < 1e-10
    code, _, _ = run(capsys, "theta", "--tau", DATA / "tau_omega.json", "--char", "1/6,0;0,0")
    assert code == 1


def test_cli_example7(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsys, "example7", "--json", "--out", out_file)
    assert code == 0
    assert json.loads(out)["pass"] is True
    assert json.loads(out_file.read_text())["pass"] is True


def test_cli_degenerate(capsys):
    code, out, _ = run(capsys, "degenerate", DATA / "example7.json", "--merge", "2", "--tilde", "2.5", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["pass"] and "det_limit" in report and "factorization" in report
    code, _, _ = run(capsys, "degenerate", DATA / "example7.json", "--merge", "1")
    assert code == 1


def test_cli_periods_numerical_failure(capsys, tmp_path):
    doc = copy.deepcopy(EXAMPLE7)
    doc["lambda"] = [[0, 0], [1e-300, 0], [2, 0], [3, 0]]
    path = tmp_path / "close.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "periods", path, "--no-cache")
    assert code in (1, 2)
    assert "error" in json.loads(err)


def test_cli_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--precision", "double")
    assert code == 0 and "FAIL" not in out
