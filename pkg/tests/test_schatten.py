import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dvhilbert import database
from dvhilbert.errors import InputError
from dvhilbert.models import SpectrumRecord
from dvhilbert.operators import hg_matrix
from dvhilbert.schatten import (
    hilbert_matrix_spectrum,
    log_growth_fit,
    matched_block_count,
    schatten_norm,
    singular_values,
    sweep,
)
from dvhilbert.symbols import parse_symbol
from dvhilbert.weights import StandardWeight


def test_singular_values_of_a_small_matrix():
    spectrum = singular_values(np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]]))
    root = math.sqrt(13.0)
    np.testing.assert_allclose(spectrum.values, [(4.0 + root) / 6.0, (4.0 - root) / 6.0], rtol=1e-12)
    assert spectrum.size == 2
    assert spectrum.residual < 1e-12
    assert not spectrum.cached


def test_singular_values_reject_bad_input():
    with pytest.raises(InputError):
        singular_values(np.array([1.0, 2.0]))
    with pytest.raises(InputError):
        singular_values(np.array([[1.0, np.nan]]))


def test_schatten_norm_values():
    assert schatten_norm([3.0, 4.0], 1.0) == pytest.approx(7.0)
    assert schatten_norm([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert schatten_norm([3.0, 4.0], math.inf) == 4.0
    assert schatten_norm([], 2.0) == 0.0
    assert schatten_norm([0.0, 0.0], 0.5) == 0.0
    assert schatten_norm([1.0, 1.0], 0.5) == pytest.approx(4.0)
    with pytest.raises(InputError):
        schatten_norm([1.0], 0.0)


@settings(deadline=None, max_examples=50)
@given(
    values=arrays(np.float64, st.integers(1, 20), elements=st.floats(0.0, 1e3)),
    p=st.floats(0.25, 8.0),
    q=st.floats(0.25, 8.0),
)
def test_schatten_norm_decreases_in_p(values, p, q):
    low, high = min(p, q), max(p, q)
    assert schatten_norm(values, high) <= schatten_norm(values, low) * (1.0 + 1e-12) + 1e-300
    assert schatten_norm(values, math.inf) <= schatten_norm(values, high) * (1.0 + 1e-12) + 1e-300


def test_hilbert_matrix_oracle():
    tops = [hilbert_matrix_spectrum(N).top for N in (16, 64, 256)]
    assert tops[0] < tops[1] < tops[2] < math.pi
    # the 10 x 10 Hilbert matrix already has norm 1.7519
    assert tops[0] > 1.75
    with pytest.raises(InputError):
        hilbert_matrix_spectrum(0)


def test_log_growth_fit_and_matched_blocks():
    slope, intercept, r2 = log_growth_fit([64, 128, 256, 512], [6.0, 7.0, 8.0, 9.0])
    assert slope == pytest.approx(1.0)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0)
    assert [matched_block_count(N) for N in (2, 3, 64, 100)] == [1, 1, 6, 6]


def test_operator_spectra_are_cached(std1, pow075, fresh_cache):
    M = hg_matrix(std1, pow075, 24, check_hypotheses=False, probe_rows=0)
    first = singular_values(M)
    second = singular_values(M)
    assert not first.cached
    assert second.cached
    np.testing.assert_array_equal(first.values, second.values)
    with database.get_db() as db:
        assert db.query(SpectrumRecord).count() == 1


def test_cache_can_be_disabled(std1, pow075, fresh_cache):
    database.configure("")
    assert not database.cache_enabled()
    M = hg_matrix(std1, pow075, 16, check_hypotheses=False, probe_rows=0)
    assert not singular_values(M).cached
    assert not singular_values(M).cached


def test_sweep_table(std1, pow075):
    table = sweep(std1, pow075, [1.0, 2.0, math.inf], [16, 32, 64], workers=1)
    assert table.weight == "std:1"
    assert not table.outside_hypotheses
    assert table.b_norm_divergent == {"1": False, "2": False, "inf": False}
    assert len(table.rows) == 9
    assert table.monotone_violations() == 0
    for p in (1.0, 2.0, math.inf):
        rows = table.rows_for(p)
        assert [row.N for row in rows] == [16, 32, 64]
        assert rows[0].rel_change is None
        norms = [row.s_p_norm for row in rows]
        assert norms == sorted(norms)
        assert all(math.isfinite(row.ratio) and row.ratio > 0.0 for row in rows)


def test_sweep_marks_unconverged_truncations(std1, log_symbol):
    table = sweep(std1, log_symbol, [2.0], [16, 32], workers=1)
    assert table.unconverged(2.0) == table.rows
    assert all(row.truncation > 1e-6 for row in table.rows)

    loose = sweep(std1, log_symbol, [2.0], [16, 32], workers=1, truncation=1.0)
    assert loose.unconverged(2.0) == []
    assert [row.s_p_norm for row in loose.rows] == [row.s_p_norm for row in table.rows]

    poly = sweep(std1, parse_symbol("poly:0,1,0,1"), [2.0], [8, 16], workers=1)
    assert all(row.truncation == 0.0 and row.truncation_converged for row in poly.rows)


def test_sweep_quasi_norm_and_outside_hypotheses(pow075):
    table = sweep(StandardWeight(2.5), pow075, [0.5], [8, 16], workers=2)
    assert table.outside_hypotheses
    assert "M2" in table.failed_conditions
    assert all(row.quasi_norm for row in table.rows)


def test_sweep_rejects_bad_arguments(std1, pow075):
    with pytest.raises(InputError):
        sweep(std1, pow075, [2.0], [32, 16])
    with pytest.raises(InputError):
        sweep(std1, pow075, [-1.0], [16, 32])


@settings(deadline=None, max_examples=25)
@given(
    matrix=arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(2, 8)), elements=st.floats(-5.0, 5.0)),
    data=st.data(),
)
def test_spectrum_is_permutation_invariant(matrix, data):
    rows = data.draw(st.permutations(range(matrix.shape[0])))
    cols = data.draw(st.permutations(range(matrix.shape[1])))
    permuted = matrix[np.ix_(rows, cols)]
    np.testing.assert_allclose(
        singular_values(permuted).values, singular_values(matrix).values, rtol=1e-10, atol=1e-10
    )
