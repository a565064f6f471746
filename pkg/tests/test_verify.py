import io
import math

import pytest

from dvhilbert.config import CliConfig, dump_config
from dvhilbert.errors import AccuracyNotReached, HypothesisError, InputError
from dvhilbert.config import TolerancesSection
from dvhilbert.schemas import Report, SuiteId, SweepRow, SweepTable, Verdict
from dvhilbert.suites import PROFILES, QUICK, suite_params
from dvhilbert.utils import content_key
from dvhilbert.verify import CSV_COLUMNS, Scenario, _sweep_checks, report_rows, run_suite, write_csv


def test_check_records_pass_fail_and_nan():
    s = Scenario("demo")
    s.check("ok", "anchor", "x <= 1", True, 0.5, 1.0)
    s.check("bad", "anchor", "x <= 1", False, 2.0, 1.0)
    s.check("nan", "anchor", "x <= 1", True, math.nan, 1.0)
    verdicts = [a.verdict for a in s.result().assertions]
    assert verdicts == [Verdict.PASS, Verdict.FAIL, Verdict.INDETERMINATE]
    assert s.result().assertions[2].value is None


@pytest.mark.parametrize(
    "error, control, expected",
    [
        (HypothesisError("vg2", "std:2.5", "operators"), True, Verdict.OUTSIDE),
        (HypothesisError("vg2", "std:2.5", "operators"), False, Verdict.FAIL),
        (AccuracyNotReached(1.0, 0.5), False, Verdict.INDETERMINATE),
        (InputError("bad spec", "symbols"), True, Verdict.FAIL),
    ],
)
def test_guard_turns_refusals_into_rows(error, control, expected):
    s = Scenario("demo")
    with s.guard("step", "anchor", control=control):
        raise error
    (row,) = s.result().assertions
    assert row.verdict == expected
    assert row.detail == str(error)


def test_guard_lets_other_exceptions_through():
    s = Scenario("demo")
    with pytest.raises(ZeroDivisionError):
        with s.guard("step", "anchor"):
            1 / 0


def test_suite_params_profiles():
    assert set(PROFILES) == {"full", "quick"}
    for suite in SuiteId:
        assert suite_params(suite, "quick").keys() == suite_params(suite).keys()
    assert suite_params(SuiteId.HS_IDENTITY, "quick")["N"] < suite_params(SuiteId.HS_IDENTITY)["N"]
    with pytest.raises(InputError):
        suite_params(SuiteId.HS_IDENTITY, "huge")


@pytest.mark.parametrize("profile", ["full", "quick"])
def test_sigma_truncation_covers_every_block(profile):
    params = suite_params(SuiteId.SCHATTEN_EQUIVALENCE, profile)
    assert params["sigma_N"] >= 2 ** (params["sigma_blocks"] + 1)
    assert params["sigma_N"] in params["log_N_list"]


def test_suite_params_reject_short_sigma_truncation(monkeypatch):
    bad = {**QUICK[SuiteId.SCHATTEN_EQUIVALENCE], "sigma_N": 256}
    monkeypatch.setitem(PROFILES, "short", {SuiteId.SCHATTEN_EQUIVALENCE: bad})
    with pytest.raises(InputError):
        suite_params(SuiteId.SCHATTEN_EQUIVALENCE, "short")


def _row(N: int, converged: bool) -> SweepRow:
    return SweepRow(
        N=N, p=2.0, s_p_norm=1.0, b_norm_matched=1.0, ratio=1.0, rel_change=0.0 if N > 16 else None,
        truncation=1e-7 if converged else 0.01, truncation_converged=converged,
    )


def test_unconverged_truncation_is_indeterminate():
    tol = TolerancesSection()
    s = Scenario("std:1 pow:0.75")
    table = SweepTable(weight="std:1", symbol="pow:0.75", rows=[_row(16, True), _row(32, False)])
    _sweep_checks(s, table, [2.0], tol, "anchor")
    stabilizes, monotone = s.result().assertions
    assert stabilizes.verdict == Verdict.INDETERMINATE
    assert stabilizes.value == 0.01
    assert stabilizes.bound == tol.truncation
    assert monotone.verdict == Verdict.PASS

    s = Scenario("std:1 pow:0.75")
    table = SweepTable(weight="std:1", symbol="pow:0.75", rows=[_row(16, True), _row(32, True)])
    _sweep_checks(s, table, [2.0], tol, "anchor")
    assert [a.verdict for a in s.result().assertions] == [Verdict.PASS, Verdict.PASS]


def test_hardy_littlewood_bound_uses_m1():
    result = run_suite(SuiteId.HARDY_LITTLEWOOD, profile="quick")
    rows = [a for scenario in result.scenarios for a in scenario.assertions]
    bounds = [a for a in rows if a.name == "Hardy-Littlewood bound"]
    spreads = [a for a in rows if a.name == "Hardy-Littlewood spread"]
    assert len(bounds) == len(spreads) == 3
    assert all(a.verdict == Verdict.PASS and a.value <= a.bound for a in bounds)
    # the spread is reported, never asserted
    assert all(a.verdict == Verdict.PASS and a.value > 1.0 for a in spreads)
    assert result.scenarios[-1].assertions[0].verdict == Verdict.OUTSIDE


def test_compactness_suite_passes():
    result = run_suite(SuiteId.COMPACTNESS_DICHOTOMY, profile="quick")
    assert result.id == SuiteId.COMPACTNESS_DICHOTOMY
    names = [scenario.name for scenario in result.scenarios]
    assert names[:5] == ["pow:0.75", "poly:0,1,0,1", "blockw:0.5", "log", "blockw:0"]
    assert result.count(Verdict.FAIL) == 0
    assert result.count(Verdict.PASS) == 11
    little_oh = [a for scenario in result.scenarios for a in scenario.assertions if a.name == "little-oh"]
    assert len(little_oh) == 5
    assert all("log2(n+1)" in a.detail and a.bound == -0.1 for a in little_oh)


def _report() -> Report:
    s = Scenario("std:1")
    s.check("tail", "closed forms", "relative error <= 1e-10", True, 1e-13, 1e-10)
    s.record("control", "closed forms", "refused", Verdict.OUTSIDE)
    suite = {"id": SuiteId.WEIGHT_LEMMAS, "scenarios": [s.result()]}
    return Report(version="0.1.0", config_hash="abc", suites=[suite])


def test_report_rows_and_csv():
    report = _report()
    rows = list(report_rows(report))
    assert rows[0]["suite"] == "weight-lemmas"
    assert float(rows[0]["value"]) == 1e-13
    assert rows[1]["value"] == "" and rows[1]["verdict"] == "outside-hypotheses"
    assert report.total == 2
    assert report.passed

    buffer = io.StringIO()
    write_csv(report, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3


def test_config_hash_is_deterministic():
    config = CliConfig()
    assert content_key(dump_config(config), "quick") == content_key(dump_config(CliConfig()), "quick")
    assert content_key(dump_config(config), "quick") != content_key(dump_config(config), "full")
