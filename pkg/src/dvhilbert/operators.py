"""
Concrete realizations of H_g f(z) = ∫_0^1 f(t) g'(tz) dt and of the
classical Hilbert operator H: coefficient actions, truncated matrices in
orthonormal D_v bases, and the extremal inputs f_N and φ_r.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import svdvals
from scipy.special import logsumexp

from .config import get_settings
from .errors import DegenerateBlock, DivergentQuantity, HypothesisError, InputError, ResourceError
from .quadrature import classify_increments, divergence_probe, integrate
from .schemas import (
    BasisKind,
    ConditionReport,
    DivergenceKind,
    HilbertNormEstimate,
    IntegrationSpec,
    ProbeValue,
    Side,
    TruncationDiagnostics,
)
from .spaces import (
    CoefficientFunction,
    RadialFunction,
    basis_element,
    dv_inner,
    monomial_norms,
)
from .symbols import Symbol
from .weights import RadialWeight, StandardWeight, condition_report

logger = logging.getLogger(__name__)

HILBERT_SYMBOL = "H"
MAX_CELLS = 64
TRUNCATION_THRESHOLD = 1e-6
PROBE_BLOCKS = 14
SERIES_BLOCKS = 22
_LEG_X, _LEG_W = np.polynomial.legendre.leggauss(20)
_CHUNK = 4096


@dataclass(frozen=True)
class OperatorMatrix:
    """Finite section of an operator: rows = output basis j, columns = input basis n."""

    entries: np.ndarray
    weight: str
    symbol: str
    basis: BasisKind
    diagnostics: Optional[TruncationDiagnostics] = None
    # rows beyond the kept ones, evaluated for the dropped-mass estimate
    tail: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def compression(self, n: int) -> "OperatorMatrix":
        """Leading n x n block, with diagnostics when the dropped rows are known."""
        diagnostics = None
        if self.tail is not None and self.diagnostics is not None:
            below = np.vstack([self.entries[n:, :n], self.tail[:, :n]])[:n]
            diagnostics = truncation_diagnostics(self.entries[:n, :n], below, self.diagnostics.threshold)
        return OperatorMatrix(self.entries[:n, :n], self.weight, self.symbol, self.basis, diagnostics)


def truncation_diagnostics(
    kept: np.ndarray, dropped: np.ndarray, threshold: float = TRUNCATION_THRESHOLD
) -> TruncationDiagnostics:
    frobenius_sq = float(np.sum(kept ** 2))
    dropped_mass = float(np.sum(dropped ** 2))
    return TruncationDiagnostics(
        frobenius_sq=frobenius_sq,
        dropped_row_mass=dropped_mass,
        relative=dropped_mass / frobenius_sq if frobenius_sq > 0.0 else 0.0,
        rows_probed=dropped.shape[0],
        threshold=threshold,
    )


# Hypotheses


def _require(report: ConditionReport, conditions: Sequence[str], subject: str, module: str) -> None:
    for name in conditions:
        if name == "doubling" and not report.doubling.verdict:
            raise HypothesisError("doubling", subject, module)
        if name == "M1" and not report.m1.is_finite:
            raise HypothesisError("M1", subject, module, report.m1.verdict.value)
        if name == "M2" and not report.m2.is_finite:
            raise HypothesisError("M2", subject, module, report.m2.verdict.value)
        if name == "vg2" and not report.vg2.is_finite:
            raise HypothesisError("vg2", subject, module, report.vg2.kind.value)


def _check_budget(rows: int, cols: int) -> None:
    budget = get_settings().memory_budget_mb * 1024 * 1024
    # entries plus SVD workspace
    needed = 4 * rows * cols * 8
    if needed > budget:
        raise ResourceError(
            f"{rows}x{cols} matrix needs ~{needed // 2 ** 20} MB, budget is {budget // 2 ** 20} MB",
            "operators",
        )


# Moments and coefficient actions


def _radial_moments(f: RadialFunction, js: np.ndarray) -> np.ndarray:
    lo, hi = f.support
    spec = IntegrationSpec(abs_tol=1e-15, rel_tol=1e-11)
    out = np.empty(len(js))
    for i, j in enumerate(js):
        integrand = lambda t, j=j: t ** j * f(t)
        if hi < 1.0:
            out[i] = integrate(integrand, lo, hi, spec, f.breakpoints)[0]
            continue
        verdict = divergence_probe(integrand, Side.TOWARD_1, points=f.breakpoints)
        if not verdict.is_finite:
            raise DivergentQuantity(f"moment {j} of {f.label or 'function'}", verdict, "operators")
        out[i] = verdict.value
    return out


def moment_of(f: Union[CoefficientFunction, RadialFunction], j: int) -> float:
    """∫_0^1 t^j f(t) dt; exact for coefficient functions."""
    if j < 0:
        raise InputError(f"moment index must be >= 0, got {j}", "operators")
    return float(moments_of(f, j + 1)[j])


def moments_of(f: Union[CoefficientFunction, RadialFunction], count: int) -> np.ndarray:
    """∫_0^1 t^j f(t) dt for j = 0..count-1."""
    js = np.arange(count, dtype=float)
    if isinstance(f, RadialFunction):
        return _radial_moments(f, js)
    coefficients = f.coefficients
    nonzero = np.flatnonzero(coefficients)
    k = nonzero.astype(float)
    out = np.empty(count)
    for start in range(0, count, _CHUNK):
        block = js[start:start + _CHUNK]
        out[start:start + _CHUNK] = (coefficients[nonzero][None, :] / (k[None, :] + block[:, None] + 1.0)).sum(axis=1)
    return out


def _output_weights(g: Symbol, count: int) -> np.ndarray:
    """(j+1) ĝ(j+1) for j = 0..count-1."""
    j = np.arange(count, dtype=float)
    return (j + 1.0) * g.coefficients(count + 1)[1:]


def hg_apply(
    w: RadialWeight,
    g: Symbol,
    f: Union[CoefficientFunction, RadialFunction],
    J: int,
) -> CoefficientFunction:
    """Coefficients 0..J of H_g(f): (j+1) ĝ(j+1) ∫_0^1 t^j f(t) dt.

    Raises:
        HypothesisError: vg2 fails for w (H_g f need not be defined).
    """
    if J < 0:
        raise InputError(f"J must be >= 0, got {J}", "operators")
    _require(condition_report(w), ["vg2"], w.id, "operators")
    values = _output_weights(g, J + 1) * moments_of(f, J + 1)
    return CoefficientFunction(values, label=f"H_g[{g.id}]({getattr(f, 'label', '')})")


# Matrices


def _monomial_columns(w: RadialWeight, g: Symbol, rows: int, cols: np.ndarray) -> np.ndarray:
    a = _output_weights(g, rows) * monomial_norms(w, rows)
    c = 1.0 / monomial_norms(w, int(cols[-1]) + 1)[cols]
    j = np.arange(rows, dtype=float)
    return a[:, None] * c[None, :] / (cols[None, :] + j[:, None] + 1.0)


def _block_columns(w: RadialWeight, g: Symbol, rows: int, cols: np.ndarray) -> np.ndarray:
    a = _output_weights(g, rows) * monomial_norms(w, rows)
    out = np.empty((rows, len(cols)))
    for i, n in enumerate(cols):
        e = basis_element(w, BasisKind.BLOCK, int(n))
        out[:, i] = a * moments_of(e, rows)
    return out


def _assemble(w: RadialWeight, g: Symbol, rows: int, cols: int, basis: BasisKind, workers: int) -> np.ndarray:
    build = _monomial_columns if basis == BasisKind.MONOMIAL else _block_columns
    chunks = [np.arange(start, min(start + 512, cols)) for start in range(0, cols, 512)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: build(w, g, rows, c), chunks))
    else:
        parts = [build(w, g, rows, c) for c in chunks]
    entries = np.hstack(parts)
    if not np.all(np.isfinite(entries)):
        raise InputError(f"matrix of {g.id} under {w.id} has non-finite entries", "operators")
    return entries


def hg_matrix(
    w: RadialWeight,
    g: Symbol,
    N: int,
    basis: BasisKind = BasisKind.MONOMIAL,
    rows: Optional[int] = None,
    check_hypotheses: bool = True,
    probe_rows: Optional[int] = None,
    workers: int = 1,
    threshold: float = TRUNCATION_THRESHOLD,
) -> OperatorMatrix:
    """Truncation of H_g in an orthonormal D_v basis.

    Columns are the inputs e_n (monomial, or dyadic block for basis=block),
    rows the monomial orthonormal basis of the output, so that
    M[j][n] = (j+1) ĝ(j+1) μ_n(j) ‖z^j‖ with μ_n(j) = ∫_0^1 t^j e_n(t) dt.
    Rows j = N..N+probe_rows-1 are evaluated to estimate the dropped mass;
    the diagnostics are converged when its share of the kept Frobenius mass
    is at most threshold.

    Raises:
        InputError: N < 2.
        HypothesisError: doubling, M1 or M2 fails (unless check_hypotheses=False).
        ResourceError: the matrix exceeds the memory budget.
    """
    basis = BasisKind(basis)
    if N < 2:
        raise InputError(f"N must be >= 2, got {N}", "operators")
    if basis == BasisKind.SIGMA:
        raise InputError("sigma elements are a pairing family, not a matrix basis", "operators")
    if check_hypotheses:
        _require(condition_report(w), ["doubling", "M1", "M2"], w.id, "operators")
    rows = rows or (N if basis == BasisKind.MONOMIAL else 2 ** N - 1)
    probe = probe_rows if probe_rows is not None else rows
    _check_budget(rows + probe, N)
    entries = _assemble(w, g, rows + probe, N, basis, workers)
    kept, dropped = entries[:rows], entries[rows:]
    diagnostics = truncation_diagnostics(kept, dropped, threshold)
    if not diagnostics.converged:
        logger.warning(
            "truncation of %s under %s at N=%d drops %.3g of the row mass", g.id, w.id, N, diagnostics.relative
        )
    return OperatorMatrix(np.ascontiguousarray(kept), w.id, g.id, basis, diagnostics, dropped)


def hg_column(w: RadialWeight, g: Symbol, n: int, J: int) -> CoefficientFunction:
    """H_g(e_n) for the monomial orthonormal e_n, coefficients 0..J."""
    return hg_apply(w, g, basis_element(w, BasisKind.MONOMIAL, n), J)


def eqp2_column_norm_sq(w: RadialWeight, g: Symbol, n: int, rows: Optional[int] = None) -> float:
    """‖H_g(e_n)‖²_{D_v} from the coefficient series.

    For n >= 1 this is |ĝ(1)|²/(2(n+1)²n²v_(2n-1)) +
    (1/(n²v_(2n-1))) Σ_k k² g̃_(k+1) v_(2k-1)/(n+k+1)². With rows the
    sum stops at k = rows-1 (the truncated column); otherwise it runs over
    dyadic blocks of k with power-law extrapolation.
    """
    norm_n_sq = monomial_norms(w, n + 1)[n] ** 2
    g1 = g.coeff(1)
    head = g1 ** 2 / ((n + 1.0) ** 2 * norm_n_sq)

    def block(lo: int, hi: int) -> float:
        k = np.arange(lo, hi, dtype=float)
        tilde = ((k + 1.0) * g.coefficients(hi + 1)[lo + 1:hi + 1]) ** 2
        log_v = w.log_moments(2.0 * k - 1.0)
        return float(np.sum(2.0 * k ** 2 * tilde * np.exp(log_v) / (n + k + 1.0) ** 2))

    if rows is not None:
        return head + (block(1, rows) if rows > 1 else 0.0) / norm_n_sq
    sums = [block(2 ** m, 2 ** (m + 1)) for m in range(SERIES_BLOCKS)]
    series = classify_increments(sums, power_law=True)
    if series.kind != DivergenceKind.FINITE:
        return math.inf
    return head + (sum(sums) + series.tail) / norm_n_sq


def sigma_pairings(w: RadialWeight, g: Symbol, n_max: int) -> List[Optional[float]]:
    """<H_g e_n, σ_n>_{D_v} for block inputs e_n, n = 0..n_max (None on degenerate blocks)."""
    values: List[Optional[float]] = []
    for n in range(n_max + 1):
        try:
            sigma = basis_element(w, BasisKind.SIGMA, n, g)
        except DegenerateBlock:
            values.append(None)
            continue
        image = hg_apply(w, g, basis_element(w, BasisKind.BLOCK, n), len(sigma) - 1)
        values.append(dv_inner(w, image, sigma))
    return values


# Classical Hilbert operator on L²_{V̂₂}


def _cell_power_integrals(u_outer: float, u_inner: float, count: int) -> np.ndarray:
    """∫ t^j dt over t in [1-u_outer, 1-u_inner), j = 0..count-1, without cancellation."""
    j1 = np.arange(1, count + 1, dtype=float)
    log_b = math.log1p(-u_inner)
    log_a = math.log1p(-u_outer) if u_outer < 1.0 else -math.inf
    upper = np.exp(j1 * log_b)
    return -upper * np.expm1(j1 * (log_a - log_b)) / j1


def _inverse_v2_integral(w: RadialWeight, u_inner: float, u_outer: float) -> float:
    """∫ 1/V̂₂ = ∫ u²/v̂(1-u) du over u in [u_inner, u_outer]."""
    if isinstance(w, StandardWeight):
        if w.alpha == 2.0:
            return 3.0 * math.log(u_outer / u_inner)
        e = 2.0 - w.alpha
        return (w.alpha + 1.0) * (u_outer ** e - u_inner ** e) / e
    spec = IntegrationSpec(abs_tol=1e-300, rel_tol=1e-11, singular_at_0=u_inner == 0.0)
    value, _ = integrate(lambda u: np.exp(2.0 * np.log(u) - w.log_tail_at_distance(u)), u_inner, u_outer, spec)
    return value


def _v2_integral(w: RadialWeight, u_inner: float, u_outer: float) -> float:
    """∫ V̂₂ = ∫ v̂(1-u)/u² du over u in [u_inner, u_outer]."""
    if isinstance(w, StandardWeight):
        a = w.alpha
        if a == 0.0:
            return math.log(u_outer / u_inner)
        return (u_outer ** a - u_inner ** a) / (a * (a + 1.0))
    spec = IntegrationSpec(abs_tol=1e-300, rel_tol=1e-11)
    value, _ = integrate(lambda u: np.exp(w.log_tail_at_distance(u) - 2.0 * np.log(u)), u_inner, u_outer, spec)
    return value


def hilbert_discretized(
    w: RadialWeight,
    D: int,
    J: int,
    check_hypotheses: bool = True,
) -> OperatorMatrix:
    """Matrix of H: L²_{V̂₂} -> D_v from normalized cell indicators to monomials.

    G[j][i] = (∫_{c_i} t^j dt) ‖z^j‖ / ‖χ_{c_i}‖ with cells
    c_i = [1-2^-i, 1-2^-i-1), i < D. Its top singular value is a lower
    bound for ‖H‖ that is nondecreasing in D and J.

    Raises:
        InputError: D outside 1..64 or J < 1.
        HypothesisError: M1 or vg2 fails.
    """
    if not 1 <= D <= MAX_CELLS or J < 1:
        raise InputError(f"need 1 <= D <= {MAX_CELLS} and J >= 1, got D={D}, J={J}", "operators")
    if check_hypotheses:
        _require(condition_report(w), ["M1", "vg2"], w.id, "operators")
    norms = monomial_norms(w, J)
    G = np.empty((J, D))
    for i in range(D):
        u_outer, u_inner = 2.0 ** -i, 2.0 ** -(i + 1)
        chi = math.sqrt(_v2_integral(w, u_inner, u_outer))
        G[:, i] = _cell_power_integrals(u_outer, u_inner, J) * norms / chi
    return OperatorMatrix(G, w.id, HILBERT_SYMBOL, BasisKind.MONOMIAL)


# Extremal inputs


def fn_coefficients(a: float, lam: float, tol: float = 1e-10, limit: int = 1 << 22) -> np.ndarray:
    """Maclaurin coefficients of (1 - a z)^((1-λ)/2), truncated at relative tail tol."""
    beta = (lam - 1.0) / 2.0
    values = [1.0]
    total = 1.0
    k = 1
    while k < limit:
        term = values[-1] * (k - 1.0 + beta) * a / k
        values.append(term)
        total += term
        ratio = a * (k + beta) / (k + 1.0)
        if ratio < 1.0 and term * ratio / (1.0 - ratio) < tol * total:
            break
        k += 1
    return np.array(values)


def f_n(
    w: RadialWeight,
    N: int,
    lam: Optional[float] = None,
) -> Tuple[RadialFunction, CoefficientFunction]:
    """f_N(z) = (1-a_N)^(λ/2) v̂(a_N)^(-1/2) (1 - a_N z)^((1-λ)/2), a_N = 1 - 2^-N.

    λ defaults to 2β + 4 with β the tail regression exponent of w.

    Raises:
        InputError: λ <= 1 or N < 0.
    """
    if N < 0:
        raise InputError(f"N must be >= 0, got {N}", "operators")
    if lam is None:
        lam = 2.0 * condition_report(w).doubling.beta_estimate + 4.0
    if not lam > 1.0:
        raise InputError(f"f_N needs lambda > 1, got {lam}", "operators")
    a = 1.0 - 2.0 ** -N
    u = 2.0 ** -N
    log_scale = 0.5 * lam * math.log(u) - 0.5 * float(w.log_tail_at_distance(np.array([u]))[0])
    scale = math.exp(log_scale)
    exponent = (1.0 - lam) / 2.0

    def evaluator(t: np.ndarray) -> np.ndarray:
        return scale * (1.0 - a * t) ** exponent

    label = f"f_{N}[lambda={lam:g}]"
    radial = RadialFunction(evaluator, label=label)
    series = CoefficientFunction(scale * fn_coefficients(a, lam), label=label)
    return radial, series


def phi_r(w: RadialWeight, r: float, depth: Optional[int] = None) -> RadialFunction:
    """φ_r = χ_[r,ρ) / V̂₂ with ρ = 1 - 2^-depth (ρ = 1 when depth is None).

    Raises:
        InputError: r outside (0, 1) or ρ <= r.
        DivergentQuantity: ρ = 1 and ∫_r^1 1/V̂₂ diverges.
    """
    if not 0.0 < r < 1.0:
        raise InputError(f"phi_r needs 0 < r < 1, got {r}", "operators")
    u_inner = 0.0 if depth is None else 2.0 ** -depth
    if not u_inner < 1.0 - r:
        raise InputError(f"truncation 1 - 2^-{depth} must exceed r = {r}", "operators")
    if u_inner == 0.0:
        report = condition_report(w)
        if not report.vg2.is_finite:
            raise DivergentQuantity(f"L2(V2) norm of phi_{r:g}", report.vg2, "operators")
    rho = 1.0 - u_inner

    def evaluator(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            values = 1.0 / w.vhat(t, 2.0)
        return np.where((t >= r) & (t < rho), values, 0.0)

    norm_sq = _inverse_v2_integral(w, u_inner, 1.0 - r)
    return RadialFunction(
        evaluator, label=f"phi_{r:g}", breakpoints=(r,), support=(0.0, rho), norm_sq=norm_sq
    )


def extremal(w: RadialWeight, kind: str, **params) -> Union[RadialFunction, Tuple[RadialFunction, CoefficientFunction]]:
    """Dispatch to f_n (kind 'fN', params N, lam) or phi_r (kind 'phi_r', params r, depth)."""
    if kind == "fN":
        return f_n(w, params["N"], params.get("lam"))
    if kind == "phi_r":
        return phi_r(w, params["r"], params.get("depth"))
    raise InputError(f"unknown extremal kind {kind!r}", "operators")


def _phi_moments(w: RadialWeight, r: float, u_inner: float, count: int) -> np.ndarray:
    """∫_r^ρ t^j / V̂₂(t) dt for j = 0..count-1 on geometric cells in u."""
    u_outer = 1.0 - r
    levels = max(1, int(math.ceil(math.log2(u_outer / u_inner)))) if u_inner > 0.0 else 52
    edges = np.maximum(u_outer * np.exp2(-np.arange(levels + 1, dtype=float)), u_inner)
    lo, hi = edges[1:], edges[:-1]
    half = 0.5 * (hi - lo)
    mask = half > 0.0
    lo, hi, half = lo[mask], hi[mask], half[mask]
    u = (0.5 * (hi + lo))[:, None] + half[:, None] * _LEG_X[None, :]
    log_tail = w.log_tail_at_distance(u.reshape(-1)).reshape(u.shape)
    log_w = np.log(half)[:, None] + np.log(_LEG_W)[None, :] + 2.0 * np.log(u) - log_tail
    log_w, u = log_w.reshape(-1), u.reshape(-1)
    log_t = np.log1p(-u)
    out = np.empty(count)
    for start in range(0, count, _CHUNK):
        js = np.arange(start, min(start + _CHUNK, count), dtype=float)
        out[start:start + len(js)] = np.exp(logsumexp(log_w[None, :] + js[:, None] * log_t[None, :], axis=1))
    return out


def phi_probe(w: RadialWeight, r: float, depth: int = 40) -> ProbeValue:
    """‖H φ_r‖_{D_v} / ‖φ_r‖_{L²_{V̂₂}} with φ_r truncated at ρ = 1 - 2^-depth.

    The output norm sums dyadic blocks of j up to 2^14 and extrapolates the
    block sums when they decay like a power; otherwise the partial sum is
    used, which is the exact value for the truncated input up to the
    dropped coefficients.
    """
    u_inner = 2.0 ** -depth
    phi = phi_r(w, r, depth)
    count = 2 ** (PROBE_BLOCKS + 1)
    moments = _phi_moments(w, r, u_inner, count)
    terms = (moments * monomial_norms(w, count)) ** 2
    blocks = [float(terms[0])] + [float(terms[2 ** m:2 ** (m + 1)].sum()) for m in range(PROBE_BLOCKS + 1)]
    total = float(sum(blocks))
    series = classify_increments(blocks[1:], power_law=True)
    if series.kind == DivergenceKind.FINITE:
        total += series.tail
    output = math.sqrt(total)
    input_norm = math.sqrt(phi.norm_sq)
    return ProbeValue(r=r, value=output / input_norm, output_norm=output, input_norm=input_norm,
                      truncation=1.0 - u_inner)


def phi_lower_bound(w: RadialWeight, r: float, depth: int = 40) -> float:
    """(1/2)(∫_0^r V̂₄)^(1/2) ∫_r^ρ 1/V̂₂, a lower bound for ‖H φ_r‖_{D_v}."""
    spec = IntegrationSpec(abs_tol=1e-300, rel_tol=1e-11)
    v4, _ = integrate(lambda s: w.vhat(s, 4.0), 0.0, r, spec)
    return 0.5 * math.sqrt(v4) * _inverse_v2_integral(w, 2.0 ** -depth, 1.0 - r)


def hilbert_norm_estimate(
    w: RadialWeight,
    D: int = 64,
    J: int = 64,
    radii: Sequence[float] = (0.5, 0.9, 0.99, 0.999),
    depth: int = 40,
) -> HilbertNormEstimate:
    """Lower estimate max(top singular value, φ_r probes) with the M2/M1 and M1·M2 shapes."""
    report = condition_report(w)
    G = hilbert_discretized(w, D, J)
    top = float(svdvals(G.entries)[0])
    probes = [phi_probe(w, r, depth) for r in radii]
    probe_sup = max(p.value for p in probes)
    m1 = report.m1.value if report.m1.is_finite else None
    m2 = report.m2.value if report.m2.is_finite else None
    return HilbertNormEstimate(
        weight=w.id,
        top_singular_value=top,
        probe_sup=probe_sup,
        lower_estimate=max(top, probe_sup),
        m1=m1,
        m2=m2,
        ceiling_shape=m1 * m2 if m1 is not None and m2 is not None else None,
        floor_shape=m2 / m1 if m1 is not None and m2 is not None else None,
        probes=probes,
    )
