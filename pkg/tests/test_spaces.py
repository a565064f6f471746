import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dvhilbert.errors import DegenerateBlock, HypothesisError, InputError
from dvhilbert.schemas import BasisKind, IntegrationSpec
from dvhilbert.spaces import (
    CoefficientFunction,
    RadialFunction,
    basis_element,
    bergman_lift,
    bergman_norm_sq,
    dv_inner,
    dv_norm,
    fejer_ratio,
    hl_checks,
    l2v2_norm,
    m_infinity,
    monomial_norms,
    polynomial_corpus,
)
from dvhilbert.symbols import parse_symbol
from dvhilbert.weights import BergmanLiftedWeight, StandardWeight

W1 = StandardWeight(1.0)
coefficients = arrays(np.float64, st.integers(1, 12), elements=st.floats(-10.0, 10.0))


def test_monomial_norms(std1):
    # ‖z^j‖² = 2 j² B(2j, 2)
    np.testing.assert_allclose(monomial_norms(std1, 3), [1.0, math.sqrt(1.0 / 3.0), math.sqrt(0.4)], rtol=1e-13)
    assert dv_norm(std1, CoefficientFunction.monomial(1)) == pytest.approx(math.sqrt(1.0 / 3.0))


@settings(deadline=None, max_examples=30)
@given(a=coefficients, b=coefficients)
def test_dv_inner_is_symmetric(a, b):
    f, h = CoefficientFunction(a), CoefficientFunction(b)
    assert dv_inner(W1, f, h) == pytest.approx(dv_inner(W1, h, f), rel=1e-12, abs=1e-12)
    assert dv_inner(W1, f, f) >= 0.0


def test_coefficient_function_validation():
    with pytest.raises(InputError):
        CoefficientFunction(np.array([1.0, np.inf]))
    f = CoefficientFunction(np.array([1.0, 2.0, 0.0]))
    assert f.degree == 1
    assert f.evaluate(0.5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        f.coefficients[0] = 3.0


@pytest.mark.parametrize("kind", [BasisKind.MONOMIAL, BasisKind.BLOCK])
def test_basis_is_orthonormal(std1, kind):
    elements = [basis_element(std1, kind, n) for n in range(8)]
    gram = np.array([[dv_inner(std1, a, b) for b in elements] for a in elements])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)


def test_block_element_support(std1):
    e = basis_element(std1, BasisKind.BLOCK, 2)
    assert np.flatnonzero(e.coefficients).tolist() == [3, 4, 5, 6]


def test_sigma_elements(std1):
    g = parse_symbol("poly:0,1")
    sigma = basis_element(std1, BasisKind.SIGMA, 0, g)
    np.testing.assert_allclose(sigma.coefficients, [1.0])
    with pytest.raises(DegenerateBlock):
        basis_element(std1, BasisKind.SIGMA, 1, g)
    with pytest.raises(InputError):
        basis_element(std1, BasisKind.SIGMA, 1)
    with pytest.raises(InputError):
        basis_element(std1, BasisKind.MONOMIAL, -1)


def test_m_infinity():
    values, used = m_infinity(CoefficientFunction(np.array([1.0, 1.0])), np.array([0.5]))
    assert values[0] == pytest.approx(1.5)
    assert used == 0
    values, used = m_infinity(CoefficientFunction(np.array([1.0, -1.0])), np.array([0.5]))
    assert values[0] == pytest.approx(1.5, rel=1e-12)
    assert used >= 16


def test_fejer_ratio(std1):
    assert fejer_ratio(std1, CoefficientFunction(np.ones(1))) == pytest.approx(1.0, rel=1e-12)
    # 1 - 2z changes sign at 1/2: ∫|1 - 2t| = 1/2, ‖1 - 2z‖² = 1 + 8/6
    f = CoefficientFunction(np.array([1.0, -2.0]))
    assert fejer_ratio(std1, f) == pytest.approx(0.5 / math.sqrt(1.0 + 8.0 / 6.0), rel=1e-10)


def test_l2v2_norm(std1):
    # V̂₂ = 1/2 for std:1
    inside = RadialFunction(lambda t: np.ones_like(t), support=(0.0, 0.5))
    assert l2v2_norm(std1, inside) == pytest.approx(0.5, rel=1e-12)
    whole = RadialFunction(lambda t: np.ones_like(t))
    assert l2v2_norm(std1, whole) == pytest.approx(math.sqrt(0.5), rel=1e-7)


def test_hl_checks(std1):
    checks = hl_checks(std1, CoefficientFunction(np.ones(1)))
    assert checks.fejer_ratio == pytest.approx(1.0)
    assert checks.hl_ratio == pytest.approx(0.5, rel=1e-6)
    assert checks.fejer_ratio <= checks.welldef_bound
    with pytest.raises(HypothesisError):
        hl_checks(StandardWeight(-0.5), CoefficientFunction(np.ones(1)))
    coarse = hl_checks(W1, CoefficientFunction(np.ones(1)), spec=IntegrationSpec(abs_tol=1e-8, rel_tol=1e-6))
    assert coarse.hl_ratio == pytest.approx(0.5, rel=1e-5)


def test_bergman_norm():
    omega = StandardWeight(0.0)
    assert bergman_norm_sq(omega, CoefficientFunction(np.ones(1))) == pytest.approx(1.0)
    assert bergman_norm_sq(omega, CoefficientFunction.monomial(1)) == pytest.approx(0.5)


def test_polynomial_corpus_is_seeded():
    first, second = polynomial_corpus(), polynomial_corpus()
    assert len(first) == 20
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.coefficients, b.coefficients)
    assert max(f.degree for f in first) <= 9


def test_bergman_lift_standard_weight():
    corpus = [CoefficientFunction(np.ones(1), label="one"), CoefficientFunction.monomial(1)]
    lift = bergman_lift(StandardWeight(0.0), corpus)
    assert lift.v.id == "bergman:std:0"
    # ‖1‖ ratio 1, ‖z‖ ratio (1/2)/(1/3)
    assert [s.ratio for s in lift.samples] == pytest.approx([1.0, 1.5])
    assert lift.ratio_spread() == pytest.approx(1.5)
    assert lift.samples[0].hl_ratio == pytest.approx(0.5, rel=1e-6)
    # ∫_r^1 1/ω̂ diverges for alpha = 0
    assert not lift.m2cond.is_finite


def test_bergman_lift_through_quadrature():
    # (1 - r) * (1 - r) * 1 has no closed form on the outer lift
    omega = BergmanLiftedWeight(StandardWeight(0.0))
    corpus = [CoefficientFunction(np.ones(1), label="one"), CoefficientFunction.monomial(1), polynomial_corpus()[-1]]
    lift = bergman_lift(omega, corpus)
    reference = bergman_lift(StandardWeight(1.0), corpus)
    assert lift.v.id == "bergman:bergman:std:0"
    np.testing.assert_allclose(lift.v.tail(0.5), 0.5 ** 3 / 3.0, rtol=1e-8)
    np.testing.assert_allclose(
        [s.ratio for s in lift.samples], [s.ratio for s in reference.samples], rtol=1e-7
    )
    np.testing.assert_allclose(
        [s.hl_ratio for s in lift.samples], [s.hl_ratio for s in reference.samples], rtol=1e-6
    )
    assert lift.m2cond.is_finite == reference.m2cond.is_finite


@settings(deadline=None, max_examples=30)
@given(a=coefficients, b=coefficients)
def test_dv_inner_cauchy_schwarz(a, b):
    f, h = CoefficientFunction(a), CoefficientFunction(b)
    bound = dv_norm(W1, f) * dv_norm(W1, h)
    assert abs(dv_inner(W1, f, h)) <= bound * (1.0 + 1e-12) + 1e-12
