import math

import numpy as np
import pytest
from scipy.linalg import svdvals

from dvhilbert.errors import DivergentQuantity, HypothesisError, InputError, ResourceError
from dvhilbert.operators import (
    eqp2_column_norm_sq,
    extremal,
    f_n,
    fn_coefficients,
    hg_apply,
    hg_column,
    hg_matrix,
    hilbert_discretized,
    hilbert_norm_estimate,
    moment_of,
    moments_of,
    phi_lower_bound,
    phi_probe,
    phi_r,
    sigma_pairings,
)
from dvhilbert.schemas import BasisKind
from dvhilbert.spaces import CoefficientFunction, monomial_norms
from dvhilbert.symbols import parse_symbol
from dvhilbert.weights import StandardWeight


def test_moments_of_polynomials():
    f = CoefficientFunction(np.array([1.0, 1.0]))
    # ∫ t^j (1 + t) dt = 1/(j+1) + 1/(j+2)
    np.testing.assert_allclose(moments_of(f, 3), [1.5, 1.0 / 2 + 1.0 / 3, 1.0 / 3 + 1.0 / 4])
    assert moment_of(f, 0) == pytest.approx(1.5)
    with pytest.raises(InputError):
        moment_of(f, -1)


def test_hg_apply_log_on_constant(std1, log_symbol):
    image = hg_apply(std1, log_symbol, CoefficientFunction(np.ones(1)), 3)
    np.testing.assert_allclose(image.coefficients, [1.0, 0.5, 1.0 / 3.0, 0.25], rtol=1e-14)


def test_hg_apply_refused_without_vg2(log_symbol):
    with pytest.raises(HypothesisError) as info:
        hg_apply(StandardWeight(2.5), log_symbol, CoefficientFunction(np.ones(1)), 3)
    assert info.value.condition == "vg2"


def test_hg_matrix_small_entries(std1, log_symbol):
    M = hg_matrix(std1, log_symbol, 2, probe_rows=0)
    expected = [
        [1.0, math.sqrt(3.0) / 2.0],
        [1.0 / (2.0 * math.sqrt(3.0)), 1.0 / 3.0],
    ]
    np.testing.assert_allclose(M.entries, expected, rtol=1e-13)
    assert M.shape == (2, 2)
    assert M.weight == "std:1"
    assert M.symbol == "log"
    assert M.diagnostics.dropped_row_mass == 0.0


def test_hg_matrix_columns_match_coefficient_action(std1, pow075):
    J = 7
    M = hg_matrix(std1, pow075, 8, probe_rows=0)
    norms = monomial_norms(std1, J + 1)
    for n in (0, 3, 7):
        column = hg_column(std1, pow075, n, J)
        np.testing.assert_allclose(M.entries[:, n], column.coefficients * norms, rtol=1e-12)


def test_hg_matrix_compression_and_diagnostics(std1, pow075):
    M = hg_matrix(std1, pow075, 32, probe_rows=32)
    assert M.diagnostics.rows_probed == 32
    assert 0.0 < M.diagnostics.relative < 1.0
    np.testing.assert_array_equal(M.compression(8).entries, M.entries[:8, :8])
    threaded = hg_matrix(std1, pow075, 1100, check_hypotheses=False, probe_rows=0, workers=3)
    serial = hg_matrix(std1, pow075, 1100, check_hypotheses=False, probe_rows=0)
    np.testing.assert_array_equal(threaded.entries, serial.entries)


def test_truncation_diagnostics_flag_slow_row_decay(std1, log_symbol):
    M = hg_matrix(std1, log_symbol, 64)
    assert M.diagnostics.threshold == 1e-6
    assert M.diagnostics.relative > 1e-3
    assert not M.diagnostics.converged
    part = M.compression(16)
    assert part.diagnostics.rows_probed == 16
    assert part.diagnostics.relative > 1e-3
    assert not part.diagnostics.converged
    assert hg_matrix(std1, log_symbol, 64, threshold=1.0).diagnostics.converged

    # g = z + z^3 only reaches output rows 0 and 2
    exact = hg_matrix(std1, parse_symbol("poly:0,1,0,1"), 16)
    assert exact.diagnostics.dropped_row_mass == 0.0
    assert exact.diagnostics.converged
    assert exact.compression(4).diagnostics.converged


def test_hg_matrix_block_basis(std1, pow075):
    M = hg_matrix(std1, pow075, 4, basis=BasisKind.BLOCK, probe_rows=0)
    assert M.shape == (15, 4)
    assert np.all(np.isfinite(M.entries))


def test_hg_matrix_rejections(std1, log_symbol):
    with pytest.raises(InputError):
        hg_matrix(std1, log_symbol, 1)
    with pytest.raises(InputError):
        hg_matrix(std1, log_symbol, 4, basis=BasisKind.SIGMA)
    with pytest.raises(HypothesisError):
        hg_matrix(StandardWeight(2.5), log_symbol, 4)


def test_hg_matrix_memory_budget(std1, log_symbol, env_settings):
    env_settings(memory_budget_mb=1)
    with pytest.raises(ResourceError):
        hg_matrix(std1, log_symbol, 512, check_hypotheses=False)


def test_column_series_matches_truncated_matrix(std1, pow075):
    N = 64
    M = hg_matrix(std1, pow075, N, probe_rows=0)
    for n in (0, 1, 5, 40):
        series = eqp2_column_norm_sq(std1, pow075, n, rows=N)
        np.testing.assert_allclose(series, np.sum(M.entries[:, n] ** 2), rtol=1e-10)
    full = eqp2_column_norm_sq(std1, pow075, 5)
    assert math.isfinite(full)
    assert full >= eqp2_column_norm_sq(std1, pow075, 5, rows=N)


def test_sigma_pairings(std1):
    values = sigma_pairings(std1, parse_symbol("poly:0,1,0,1"), 3)
    assert len(values) == 4
    assert values[0] is not None and values[0] > 0.0
    assert values[2] is None and values[3] is None


def test_hilbert_discretized(std1):
    G = hilbert_discretized(std1, 1, 1)
    np.testing.assert_allclose(G.entries, [[1.0]], rtol=1e-14)
    tops = [svdvals(hilbert_discretized(std1, D, 32).entries)[0] for D in (4, 8, 16)]
    assert tops[0] <= tops[1] <= tops[2]
    with pytest.raises(InputError):
        hilbert_discretized(std1, 0, 4)
    with pytest.raises(InputError):
        hilbert_discretized(std1, 65, 4)
    with pytest.raises(HypothesisError):
        hilbert_discretized(StandardWeight(2.0), 4, 4)


def test_fn_coefficients_geometric_case():
    # λ = 3 gives (1 - a z)^-1
    values = fn_coefficients(0.5, 3.0)
    np.testing.assert_allclose(values[:6], 0.5 ** np.arange(6), rtol=1e-15)


def test_f_n_series_matches_closed_form(std1):
    radial, series = f_n(std1, 3, lam=3.0)
    np.testing.assert_allclose(radial(np.array([0.0])), math.sqrt(2.0) * 2.0 ** -1.5, rtol=1e-14)
    t = np.array([0.1, 0.3, 0.6])
    np.testing.assert_allclose(series.evaluate(t), radial(t), rtol=1e-8)
    with pytest.raises(InputError):
        f_n(std1, 3, lam=1.0)


def test_phi_r(std1):
    phi = phi_r(std1, 0.5)
    assert phi.norm_sq == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(phi(np.array([0.25, 0.75])), [0.0, 2.0], rtol=1e-12)
    assert moment_of(phi, 0) == pytest.approx(1.0, rel=1e-8)
    truncated = phi_r(std1, 0.5, depth=10)
    assert truncated.support == (0.0, 1.0 - 2.0 ** -10)
    assert truncated.norm_sq == pytest.approx(1.0 - 2.0 ** -9, rel=1e-12)
    for r in (0.0, 1.0):
        with pytest.raises(InputError):
            phi_r(std1, r)
    with pytest.raises(DivergentQuantity):
        phi_r(StandardWeight(2.0), 0.5)


def test_extremal_dispatch(std1):
    assert extremal(std1, "phi_r", r=0.5).label == "phi_0.5"
    radial, series = extremal(std1, "fN", N=2, lam=3.0)
    assert radial.label == series.label
    with pytest.raises(InputError):
        extremal(std1, "unknown")


def test_phi_probe_exceeds_lower_bound(std1):
    probe = phi_probe(std1, 0.5, depth=30)
    assert probe.input_norm == pytest.approx(math.sqrt(1.0 - 2.0 ** -29), rel=1e-12)
    assert probe.output_norm >= phi_lower_bound(std1, 0.5, depth=30)
    assert probe.truncation == 1.0 - 2.0 ** -30


def test_hilbert_norm_estimate(std1):
    estimate = hilbert_norm_estimate(std1, D=8, J=16, radii=(0.5, 0.9), depth=20)
    assert estimate.weight == "std:1"
    assert len(estimate.probes) == 2
    assert estimate.lower_estimate == max(estimate.top_singular_value, estimate.probe_sup)
    assert estimate.floor_shape == pytest.approx(estimate.m2 / estimate.m1)
