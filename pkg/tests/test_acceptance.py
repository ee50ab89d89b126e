"""One test per acceptance criterion; each prints a pass/fail line."""
import math

import pytest

from relex import acceptance as A

SEED = 7


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in A.run_checks(SEED)}


def test_01_order_formulas(results, record_check):
    r = record_check(results[1])
    for row in r.measured["instances"]:
        assert row["order"] == 2 ** ((3 if row["d"] == 2 else 8) * (row["n"] - 1))
    assert len(r.measured["instances"]) == 7
    assert r.seconds < 30
    assert r.passed


def test_02_gamma_series_battery(results, record_check):
    r = record_check(results[2])
    groups = r.measured["groups"]
    assert len(groups) >= 10 and r.measured["failures"] == 0
    assert {g["order"] for g in groups} == {2 ** k for k in range(1, 7)}
    for g in groups:
        assert g["steps"] <= round(math.log2(g["order"]))
    assert r.passed


def test_03_tower_law(results, record_check):
    r = record_check(results[3])
    m = r.measured
    assert (m["H1"], m["H2"], m["order_law"]) == (4, 128, 128)
    assert m["pairs"] == 128 ** 2 and m["mismatches"] == 0
    assert r.passed


def test_04_degree(results, record_check):
    r = record_check(results[4])
    assert all(row["degree"] == 10 for row in r.measured["instances"])
    assert r.passed


def test_05_relative_gap(results, record_check):
    r = record_check(results[5])
    rows = {row["n"]: row for row in r.measured["instances"]}
    assert [rows[n]["order"] for n in (2, 3, 4)] == [128, 4096, 131072]
    for row in rows.values():
        assert row["method"] == "lanczos" and row["residual"] <= 1e-8
    assert rows[2]["dense_gap"] <= 1e-8
    assert r.measured["max_theta"] < 0.999
    print({n: rows[n]["theta"] for n in rows})
    assert r.passed


def test_06_poincare_oracle(results, record_check):
    r = record_check(results[6])
    assert r.measured["comparisons"] > 100
    assert r.measured["worst_relative_gap"] <= 1e-8
    assert abs(r.measured["z4_C_star"] - 1) <= 1e-10
    assert r.passed


def test_07_interpolation(results, record_check):
    r = record_check(results[7])
    assert r.measured == dict(lp_n0=3, curved_n0=3, p2_mismatches=0)
    assert r.passed


def test_08_theta_series(results, record_check):
    r = record_check(results[8])
    assert abs(r.measured["theta_p1"] - 12) <= 1e-8
    assert abs(r.measured["theta_p2"] - 88) <= 1e-8
    assert r.measured["beta_prime_worst_relative"] <= 1e-8
    assert r.passed


def test_09_sandwich(results, record_check):
    r = record_check(results[9])
    ex, sm = r.measured["exhaustive"], r.measured["sampled"]
    assert ex["pairs"] == 256 * 255 // 2 and ex["violations"] == 0
    assert sm["pairs"] == 10 ** 6 and sm["violations"] == 0
    assert r.measured["wreath_order"] == 2048
    assert r.passed


def test_10_truncated_lipschitz(results, record_check):
    r = record_check(results[10])
    for row in r.measured["instances"]:
        assert row["max_edge_stretch"] <= 2
    assert r.passed


def test_11_fiber_detector(results, record_check):
    r = record_check(results[11])
    trials = r.measured["trials"]
    assert len(trials) == 50 and {t["X"] for t in trials} == {256, 1024, 2000}
    for t in trials:
        assert t["fiber_size"] >= t["bound"]
        assert t["lam"] >= 0.1
    assert r.measured["violations"] == 0 and r.seconds < 300
    assert r.passed


def test_12_cheeger(results, record_check):
    r = record_check(results[12])
    assert r.measured["C8"] == 0.5 and r.measured["K4"] == 2
    assert r.measured["sandwich_failures"] == [] and r.measured["graphs"] > 10
    assert r.passed


def test_13_refuter(results, record_check):
    r = record_check(results[13])
    vals = r.measured["values"]
    assert len(vals) >= 2 and all(b > a for a, b in zip(vals, vals[1:]))
    print(vals)
    assert r.passed


def test_14_determinism(tmp_path, record_check):
    passed, measured = A.check_determinism(SEED, str(tmp_path))
    record_check(A.CheckResult(14, A.NAMES[14], passed, measured))
    assert measured["exit_codes"] == [0, 0]
    assert passed
