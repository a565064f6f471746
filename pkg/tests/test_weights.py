import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta, expn

from dvhilbert.errors import HypothesisError, InputError, MomentUnderflow
from dvhilbert.schemas import ConditionVerdict, Precision
from dvhilbert.weights import (
    BergmanLiftedWeight,
    ExponentialWeight,
    StandardWeight,
    TabulatedWeight,
    condition_report,
    lemma_checks,
    parse_weight,
    welldef_constant,
)


def test_standard_tail_closed_form(std1):
    np.testing.assert_allclose(std1.tail(0.5), 0.125, rtol=1e-14)
    np.testing.assert_allclose(std1.tail(0.0), 0.5, rtol=1e-14)
    np.testing.assert_allclose(std1.vhat(0.5, 2.0), 0.5, rtol=1e-14)


@settings(deadline=None, max_examples=30)
@given(
    alpha=st.floats(min_value=-0.9, max_value=4.0),
    x=st.floats(min_value=0.0, max_value=200.0),
)
def test_standard_moments_are_beta_values(alpha, x):
    w = StandardWeight(alpha)
    np.testing.assert_allclose(w.moment(x), beta(x + 1.0, alpha + 1.0), rtol=1e-10)


def test_moments_decrease(std1):
    values = std1.moments(np.arange(0.0, 50.0))
    assert np.all(np.diff(values) < 0.0)


def test_moment_underflow_and_extended_precision():
    with pytest.raises(MomentUnderflow) as info:
        StandardWeight(1.0).moment(1e200)
    assert info.value.exit_code == 3
    extended = StandardWeight(1.0, Precision.EXTENDED).moment(1e200)
    assert isinstance(extended, mpmath.mpf)
    assert extended > 0


def test_moment_and_tail_domain(std1):
    with pytest.raises(InputError):
        std1.moment(-1.0)
    with pytest.raises(InputError):
        std1.tail(1.0)
    with pytest.raises(InputError):
        std1.tail(-0.1)


def test_parse_weight():
    assert parse_weight("std:1").id == "std:1"
    assert parse_weight(" std:0.5 ") == StandardWeight(0.5)
    assert isinstance(parse_weight("bergman:std:-0.5"), BergmanLiftedWeight)
    assert isinstance(parse_weight("exp:1:0.5"), ExponentialWeight)
    for bad in ("std:-1", "std:x", "cauchy:1", "exp:1", "exp:-1:0.5", "table:"):
        with pytest.raises(InputError):
            parse_weight(bad)


@settings(deadline=None, max_examples=50)
@given(alpha=st.floats(min_value=-0.99, max_value=10.0))
def test_weight_id_round_trips(alpha):
    w = StandardWeight(alpha)
    assert parse_weight(w.id) == w
    assert float(w.id.split(":")[1]) == alpha


def test_nearby_weights_stay_distinct():
    near, far = StandardWeight(0.5000001), StandardWeight(0.5)
    assert near.id == "std:0.5000001"
    assert far.id == "std:0.5"
    assert near != far
    assert len({near, far}) == 2
    assert condition_report(near) is not condition_report(far)
    assert condition_report(near).weight == "std:0.5000001"
    assert ExponentialWeight(1.0, 0.25).id == "exp:1:0.25"


def test_bergman_lift_of_standard_weight_is_standard():
    lifted = BergmanLiftedWeight(StandardWeight(-0.5))
    assert lifted.id == "bergman:std:-0.5"
    np.testing.assert_allclose(lifted.tail(0.5), 0.5 ** 1.5 / 1.5, rtol=1e-12)
    np.testing.assert_allclose(lifted.moment(3.0), beta(4.0, 1.5), rtol=1e-12)


def test_tabulated_weight_matches_standard():
    s = np.linspace(0.0, 0.99, 12)
    table = TabulatedWeight(s, 1.0 - s, label="linear")
    assert table.id == "table:linear"
    np.testing.assert_allclose(table.tail(0.5), 0.125, rtol=1e-6)
    np.testing.assert_allclose(table.moment(2.0), beta(3.0, 2.0), rtol=1e-6)


def test_tabulated_weight_from_file(tmp_path):
    path = tmp_path / "weight.txt"
    s = np.linspace(0.0, 0.95, 8)
    np.savetxt(path, np.column_stack([s, (1.0 - s) ** 2]))
    w = parse_weight(f"table:{path}")
    np.testing.assert_allclose(w.tail(0.5), 0.5 ** 3 / 3.0, rtol=1e-6)


def test_tabulated_weight_rejects_bad_samples():
    with pytest.raises(InputError):
        TabulatedWeight([0.0, 0.5], [1.0, 0.5])
    with pytest.raises(InputError):
        TabulatedWeight([0.0, 0.2, 0.1, 0.5], [1.0, 1.0, 1.0, 1.0])
    with pytest.raises(InputError):
        TabulatedWeight([0.0, 0.2, 0.4, 0.6], [1.0, 0.0, 1.0, 1.0])


def test_condition_report_standard_weight(std1):
    report = condition_report(std1)
    assert report.doubling.verdict
    np.testing.assert_allclose(report.doubling.sup_ratio, 4.0, rtol=0.01)
    np.testing.assert_allclose(report.doubling.beta_estimate, 2.0, rtol=1e-6)
    assert report.hypotheses_hold
    assert report.failed_conditions == []
    assert abs(report.m1.value - 1.0) <= 0.01
    assert abs(report.m2.value - 1.0) <= 0.01
    assert report.vg2.is_finite


def test_condition_report_outside_the_range():
    heavy = condition_report(StandardWeight(2.5))
    assert heavy.m2.verdict == ConditionVerdict.INFINITE
    assert "M2" in heavy.failed_conditions
    assert "vg2" in heavy.failed_conditions

    light = condition_report(StandardWeight(-0.5))
    assert light.m1.verdict == ConditionVerdict.INFINITE
    assert "M1" in light.failed_conditions


@pytest.mark.parametrize("alpha, condition", [(0.0, "m1"), (2.0, "m2")])
def test_condition_report_at_the_boundary(alpha, condition):
    # both products diverge logarithmically at the ends of 0 < alpha < 2
    report = condition_report(StandardWeight(alpha))
    assert getattr(report, condition).verdict == ConditionVerdict.INFINITE
    assert condition.upper() in report.failed_conditions
    other = "m2" if condition == "m1" else "m1"
    assert getattr(report, other).is_finite
    np.testing.assert_allclose(report.doubling.sup_ratio, 2.0 ** (alpha + 1.0), rtol=0.01)


def test_exponential_weight_tail():
    # substituting t = 1/(1 - s) turns the tail at 0 into E_2(1)
    w = ExponentialWeight(1.0, 1.0)
    assert w.id == "exp:1:1"
    np.testing.assert_allclose(w.tail(0.0), expn(2, 1.0), rtol=1e-9)
    np.testing.assert_allclose(w.tail(0.0), 0.1484955068, rtol=1e-9)


def test_exponential_weight_is_not_doubling():
    report = condition_report(ExponentialWeight(1.0, 0.5))
    assert not report.doubling.verdict
    assert "doubling" in report.failed_conditions
    r12 = 1.0 - 2.0 ** -12
    ratio = next(y for x, y in report.doubling.trail if abs(x - r12) < 1e-15)
    assert ratio > 1e3
    ratios = [y for _, y in report.doubling.trail]
    assert ratios[-1] > ratios[len(ratios) // 2]


def test_condition_report_rejects_shallow_grid(std1):
    with pytest.raises(InputError):
        condition_report(std1, depth=5)


def test_welldef_constant(std1):
    value = welldef_constant(std1)
    assert math.isfinite(value)
    assert value > 1.0
    assert math.isinf(welldef_constant(StandardWeight(2.5)))


def test_lemma_checks_standard_weight(std1):
    report = lemma_checks(std1)
    assert set(report.series) == {
        "moment_vs_tail", "omega_star", "upper_dyadic_sum", "lower_dyadic_sum",
        "moment_doubling", "tail_exponent", "m4_over_m2",
    }
    doubling = report.series["moment_doubling"]
    np.testing.assert_allclose(doubling.ratios[-1], 4.0, rtol=0.01)
    for series in report.series.values():
        assert series.min is not None and series.min > 0.0


def test_lemma_checks_refuse_non_doubling_weight():
    with pytest.raises(HypothesisError):
        lemma_checks(parse_weight("exp:1:0.5"))
