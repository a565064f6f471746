import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dvhilbert.errors import InputError
from dvhilbert.schemas import DivergenceKind, NormMethod
from dvhilbert.symbols import (
    BlockWeightedSymbol,
    LogSymbol,
    PolynomialSymbol,
    PowerSymbol,
    block_profile,
    block_values,
    bnorm,
    little_oh_verdict,
    parse_symbol,
)


def test_log_coefficients(log_symbol):
    np.testing.assert_allclose(log_symbol.coefficients(4), [0.0, 1.0, 0.5, 1.0 / 3.0])
    assert log_symbol.coeff(10000) == pytest.approx(1e-4)
    with pytest.raises(InputError):
        log_symbol.coeff(-1)


def test_power_coefficients_follow_the_recurrence():
    g = PowerSymbol(0.75)
    # g'(z) = (1 - z)^-b, so (k+1) ĝ(k+1) = (b)_k / k!
    k = np.arange(6)
    expected = [math.gamma(j + 0.75) / (math.gamma(0.75) * math.factorial(j)) for j in k]
    np.testing.assert_allclose((k + 1) * g.coefficients(7)[1:], expected, rtol=1e-13)


def test_power_symbol_range():
    for b in (0.5, 1.0, 0.2):
        with pytest.raises(InputError):
            PowerSymbol(b)


def test_parse_symbol():
    assert parse_symbol("log") == LogSymbol()
    assert parse_symbol("pow:0.6").id == "pow:0.6"
    assert parse_symbol("poly:0,1,0,1").degree() == 3
    assert parse_symbol("poly:1,2,0,0").id == "poly:1,2"
    assert isinstance(parse_symbol("blockw:0.5"), BlockWeightedSymbol)
    for bad in ("log:1", "pow:x", "poly:", "exp", "pow:1.5"):
        with pytest.raises(InputError):
            parse_symbol(bad)


def test_symbol_ids_keep_full_precision():
    assert parse_symbol("pow:0.6000001").id == "pow:0.6000001"
    assert parse_symbol("pow:0.6000001") != parse_symbol("pow:0.6")
    assert parse_symbol("blockw:0.1234567891").id == "blockw:0.1234567891"
    assert parse_symbol("log").scaled(1.0 / 3.0).id == f"{1.0 / 3.0!r}*log"
    assert parse_symbol("log").shifted(-0.5).id == "log-0.5"


def test_scaled_and_shifted_symbols(log_symbol):
    g = log_symbol.scaled(2.0).shifted(3.0)
    assert g.id == "2*log+3"
    np.testing.assert_allclose(g.coefficients(3), [3.0, 2.0, 1.0])
    assert log_symbol.coefficients(3)[0] == 0.0


def test_log_blocks_are_one(log_symbol):
    np.testing.assert_allclose(block_values(log_symbol, 24), 1.0, rtol=1e-12)


def test_block_weighted_closed_form():
    g = BlockWeightedSymbol(0.5)
    values = block_values(g, 25)
    np.testing.assert_allclose(values, 1.0 / (np.arange(26) + 1.0), rtol=1e-12)


def test_polynomial_blocks_vanish_past_the_degree():
    values = block_values(PolynomialSymbol([0.0, 1.0, 0.0, 1.0]), 6)
    np.testing.assert_allclose(values[:2], [1.0, 0.5 * (4.0 * 0.0 + 9.0 * 1.0)])
    assert np.all(values[2:] == 0.0)


def test_block_profile():
    profile = block_profile(parse_symbol("pow:0.75"), 10)
    assert profile.n_max == 10
    assert len(profile.values) == 11
    ratios = np.array(profile.values[1:]) / np.array(profile.values[:-1])
    np.testing.assert_allclose(ratios[-1], 2.0 ** -0.5, rtol=0.02)
    with pytest.raises(InputError):
        block_profile(parse_symbol("log"), 0)


@settings(deadline=None, max_examples=20)
@given(c=st.floats(min_value=-10.0, max_value=10.0).filter(lambda c: abs(c) > 1e-3))
def test_blocks_scale_quadratically(c):
    g = parse_symbol("pow:0.6")
    np.testing.assert_allclose(block_values(g.scaled(c), 12), c * c * block_values(g, 12), rtol=1e-12)


def test_bnorm_log(log_symbol):
    sup = bnorm(log_symbol, math.inf)
    assert sup.is_finite
    assert sup.value == pytest.approx(1.0, rel=1e-12)

    divergent = bnorm(log_symbol, 2.0)
    assert divergent.verdict == DivergenceKind.DIVERGING
    assert divergent.value is None

    partial = bnorm(log_symbol, 2.0, n_max=9, extrapolate=False)
    assert partial.value == pytest.approx(math.sqrt(10.0), rel=1e-12)


def test_bnorm_power_symbol_converges(pow075):
    for p in (1.0, 2.0, 4.0):
        result = bnorm(pow075, p)
        assert result.is_finite
        assert result.value >= bnorm(pow075, p, n_max=20, extrapolate=False).value


def test_bnorm_harmonic_blocks_diverge_for_p2():
    result = bnorm(BlockWeightedSymbol(0.5), 2.0)
    assert result.verdict == DivergenceKind.DIVERGING


def test_bnorm_rejects_nonpositive_p(log_symbol):
    with pytest.raises(InputError):
        bnorm(log_symbol, 0.0)


def test_bnorm_integral_method_for_a_monomial():
    # g = z: M_2(r, g')² = 1, so the p = 2 integral is ∫_0^1 dr = 1
    g = PolynomialSymbol([0.0, 1.0])
    result = bnorm(g, 2.0, NormMethod.INTEGRAL, depth=12)
    assert result.is_finite
    assert result.value == pytest.approx(1.0, rel=1e-6)
    sup = bnorm(g, math.inf, NormMethod.INTEGRAL, depth=12)
    assert sup.value == pytest.approx(1.0, rel=1e-9)


def test_little_oh_dichotomy():
    assert little_oh_verdict(parse_symbol("pow:0.75")).member
    assert little_oh_verdict(parse_symbol("poly:0,1,0,1")).member
    assert little_oh_verdict(parse_symbol("blockw:0.5")).member
    assert not little_oh_verdict(parse_symbol("log")).member
    assert not little_oh_verdict(parse_symbol("blockw:0")).member
    with pytest.raises(InputError):
        little_oh_verdict(parse_symbol("log"), n_max=5)


def test_little_oh_reports_its_fit():
    verdict = little_oh_verdict(parse_symbol("blockw:0.5"))
    assert verdict.regressor == "log2(n+1)"
    assert verdict.threshold == -0.1
    # B_n = 1/(n+1) is a line of slope -1 against log2(n+1)
    assert verdict.slope == pytest.approx(-1.0, rel=1e-9)
    flat = little_oh_verdict(parse_symbol("log"))
    assert flat.regressor == "log2(n+1)"
    assert flat.slope == pytest.approx(0.0, abs=1e-9)
