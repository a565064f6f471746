"""
Radial weights on [0, 1): tails, moments, the doubling class and the
Muckenhoupt-type conditions M1..M4, vg2.

Every weight works in log form internally (log_tail, log_moments) so that
non-doubling weights report overflowing ratios as infinities instead of
NaN. Integrals that degenerate at s = 1 are evaluated in the distance
variable u = 1 - s.
"""

import logging
import math
from abc import ABC, abstractmethod
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import betaln, logsumexp

from .config import get_settings
from .errors import AccuracyNotReached, HypothesisError, InputError, MomentUnderflow
from .quadrature import (
    NonFiniteIntegrand,
    classify_increments,
    geometric_rule,
    grid_sup,
    integrate,
)
from .schemas import (
    ConditionReport,
    ConditionValue,
    ConditionVerdict,
    DivergenceKind,
    DivergenceVerdict,
    DoublingReport,
    IntegrationSpec,
    LemmaReport,
    Precision,
    RatioSeries,
)
from .utils import content_key, fit_line, format_param, geometric_grid

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

EXTENDED_THRESHOLD = 1e3
DOUBLING_WINDOW = 5
DOUBLING_TOLERANCE = 0.01
_LN2 = math.log(2.0)
_CELL_SPEC = IntegrationSpec(abs_tol=1e-15, rel_tol=1e-11)
_LEG_X, _LEG_W = np.polynomial.legendre.leggauss(20)


def _as_array(value: ArrayLike) -> np.ndarray:
    return np.asarray(value, dtype=float)


class RadialWeight(ABC):
    """A positive integrable weight profile v on [0, 1).

    Subclasses implement the log-density and the log-tail in the distance
    variable plus log-moments; everything else derives from those.
    """

    kind: str = ""

    def __init__(self, precision: Precision = Precision.DOUBLE):
        self.precision = Precision(precision)

    @property
    @abstractmethod
    def id(self) -> str:
        """Canonical mini-language spec, e.g. ``std:1``."""

    @abstractmethod
    def log_density_at_distance(self, u: np.ndarray) -> np.ndarray:
        """log v(1 - u)."""

    @abstractmethod
    def log_tail_at_distance(self, u: np.ndarray) -> np.ndarray:
        """log v̂(1 - u)."""

    @abstractmethod
    def log_moments(self, xs: ArrayLike) -> np.ndarray:
        """log v_x, vectorized over x >= 0."""

    def __hash__(self) -> int:
        return hash(self.id)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RadialWeight) and other.id == self.id

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.id!r})"

    # density and tails

    def density(self, s: ArrayLike) -> np.ndarray:
        s = _as_array(s)
        with np.errstate(all="ignore"):
            return np.exp(self.log_density_at_distance(1.0 - s))

    def log_density(self, s: ArrayLike) -> np.ndarray:
        return self.log_density_at_distance(1.0 - _as_array(s))

    def log_tail(self, r: ArrayLike) -> np.ndarray:
        return self.log_tail_at_distance(1.0 - _as_array(r))

    def tail_at_distance(self, u: ArrayLike) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.exp(self.log_tail_at_distance(_as_array(u)))

    def tails(self, r: ArrayLike) -> np.ndarray:
        r = _as_array(r)
        if np.any((r < 0.0) | (r >= 1.0)) or np.any(np.isnan(r)):
            raise InputError(f"tail requires 0 <= r < 1 for {self.id}", "weights")
        return self.tail_at_distance(1.0 - r)

    def tail(self, r: float) -> float:
        """v̂(r) = ∫_r^1 v(s) ds."""
        return float(self.tails(np.array([r]))[0])

    def vhat(self, r: ArrayLike, x: float) -> np.ndarray:
        """V̂_x(r) = v̂(r) / (1 - r)^x."""
        u = 1.0 - _as_array(r)
        with np.errstate(all="ignore"):
            return np.exp(self.log_tail_at_distance(u) - x * np.log(u))

    # moments

    def moments(self, xs: ArrayLike) -> np.ndarray:
        """v_x for an array of x; values below the double range come back as 0."""
        xs = _as_array(xs)
        if np.any(xs < 0.0):
            raise InputError("moments require x >= 0", "weights")
        with np.errstate(under="ignore"):
            return np.exp(self.log_moments(xs))

    def moment(self, x: float) -> Union[float, mpmath.mpf]:
        """v_x = ∫_0^1 s^x v(s) ds.

        In extended precision, moments with x > 1e3 are returned as mpmath
        numbers so they never underflow.

        Raises:
            InputError: x < 0.
            MomentUnderflow: the value underflows in double precision.
        """
        if not x >= 0.0:
            raise InputError(f"moment requires x >= 0, got {x}", "weights")
        if self.precision == Precision.EXTENDED and x > EXTENDED_THRESHOLD:
            return self._extended_moment(x)
        log_value = float(self.log_moments(np.array([x]))[0])
        value = math.exp(log_value) if log_value > -745.0 else 0.0
        if value == 0.0:
            raise MomentUnderflow(self.id, x)
        return value

    def _extended_moment(self, x: float) -> mpmath.mpf:
        with mpmath.workdps(30):
            return mpmath.exp(mpmath.mpf(float(self.log_moments(np.array([x]))[0])))


class StandardWeight(RadialWeight):
    """v(s) = (1 - s)^alpha, alpha > -1."""

    kind = "standard"

    def __init__(self, alpha: float, precision: Precision = Precision.DOUBLE):
        super().__init__(precision)
        alpha = float(alpha)
        if not alpha > -1.0 or not math.isfinite(alpha):
            raise InputError(f"standard weight needs alpha > -1, got {alpha}", "weights")
        self.alpha = alpha

    @property
    def id(self) -> str:
        return f"std:{format_param(self.alpha)}"

    def log_density_at_distance(self, u):
        with np.errstate(divide="ignore"):
            return self.alpha * np.log(_as_array(u))

    def log_tail_at_distance(self, u):
        a1 = self.alpha + 1.0
        with np.errstate(divide="ignore"):
            return a1 * np.log(_as_array(u)) - math.log(a1)

    def log_moments(self, xs):
        return betaln(_as_array(xs) + 1.0, self.alpha + 1.0)

    def _extended_moment(self, x: float) -> mpmath.mpf:
        with mpmath.workdps(30):
            return mpmath.beta(mpmath.mpf(x) + 1, mpmath.mpf(self.alpha) + 1)


class _QuadratureWeight(RadialWeight):
    """Weights whose tails and moments come from a geometric Gauss rule.

    The rule and the tails at the cell edges are computed once at
    construction; instances are immutable afterwards.
    """

    depth = 40

    def _build(self) -> None:
        rule = geometric_rule(self.depth)
        with np.errstate(all="ignore"):
            log_v = self.log_density_at_distance(rule.distances)
        self._rule = rule
        self._log_nodes = np.log(rule.weights) + log_v
        self._log_s = np.log1p(-rule.distances)
        cells = logsumexp(self._log_nodes.reshape(rule.depth, -1), axis=1)
        if np.any(np.isnan(cells)):
            raise InputError(f"density of {self.id} is not finite on [0, 1)", "weights")
        remainder, self._tail_exponent = self._remainder(cells)
        # log v̂ at the edges 1 - 2^-k, k = 0..depth
        stacked = np.append(cells, remainder)
        self._log_edge_tails = np.array([logsumexp(stacked[k:]) for k in range(rule.depth + 1)])

    def _remainder(self, cells: np.ndarray) -> Tuple[float, float]:
        last, prev = cells[-1], cells[-2]
        if not np.isfinite(last):
            return -math.inf, math.inf
        log_q = last - prev
        if not log_q < 0.0:
            raise InputError(f"{self.id} is not integrable near s = 1", "weights")
        q = math.exp(log_q)
        # cells shrink by q per halving of the distance: v̂ ~ u^(-log2 q)
        return last + log_q - math.log1p(-q), -log_q / _LN2

    def log_tail_at_distance(self, u):
        u = np.atleast_1d(_as_array(u))
        out = np.empty_like(u)
        depth = self._rule.depth
        with np.errstate(divide="ignore"):
            level = np.minimum(np.floor(-np.log2(u)), depth).astype(int)
        deep = level >= depth
        if np.any(deep):
            ratio = u[deep] * 2.0 ** depth
            out[deep] = self._log_edge_tails[depth] + self._tail_exponent * np.log(ratio)
        shallow = ~deep
        if np.any(shallow):
            k = np.clip(level[shallow], 0, depth - 1)
            uu = u[shallow]
            # v̂(1-u) = v̂ at the next edge + ∫ over distances [2^-k-1, u]
            inner = np.exp2(-(k + 1.0))
            half = 0.5 * (uu - inner)
            nodes = (0.5 * (uu + inner))[:, None] + half[:, None] * _LEG_X[None, :]
            with np.errstate(all="ignore"):
                logs = self.log_density_at_distance(nodes) + np.log(np.abs(half))[:, None]
                partial = logsumexp(logs, b=_LEG_W[None, :], axis=1)
            partial = np.where(half > 0.0, partial, -np.inf)
            out[shallow] = np.logaddexp(self._log_edge_tails[k + 1], partial)
        return out

    def log_moments(self, xs):
        xs = np.atleast_1d(_as_array(xs))
        depth = self._rule.depth
        u_last = 2.0 ** -depth
        remainder = self.log_tail_at_distance(np.array([u_last]))[0]
        out = np.empty_like(xs)
        chunk = 2048
        for start in range(0, len(xs), chunk):
            block = xs[start:start + chunk]
            terms = self._log_nodes[:, None] + self._log_s[:, None] * block[None, :]
            tail = remainder + block * math.log1p(-u_last)
            out[start:start + chunk] = np.logaddexp(logsumexp(terms, axis=0), tail)
        return out


class BergmanLiftedWeight(_QuadratureWeight):
    """v(r) = (1 - r) ω(r), the weight whose Dirichlet space is A²_ω."""

    kind = "bergman_lifted"

    def __init__(self, base: RadialWeight, precision: Optional[Precision] = None):
        super().__init__(precision or base.precision)
        self.base = base
        self._closed: Optional[StandardWeight] = None
        if isinstance(base, StandardWeight):
            self._closed = StandardWeight(base.alpha + 1.0, self.precision)
        else:
            self._build()

    @property
    def id(self) -> str:
        return f"bergman:{self.base.id}"

    def log_density_at_distance(self, u):
        u = _as_array(u)
        with np.errstate(divide="ignore"):
            return np.log(u) + self.base.log_density_at_distance(u)

    def log_tail_at_distance(self, u):
        if self._closed is not None:
            return self._closed.log_tail_at_distance(u)
        return super().log_tail_at_distance(u)

    def log_moments(self, xs):
        if self._closed is not None:
            return self._closed.log_moments(xs)
        return super().log_moments(xs)

    def _extended_moment(self, x: float) -> mpmath.mpf:
        if self._closed is not None:
            return self._closed._extended_moment(x)
        return super()._extended_moment(x)


class ExponentialWeight(_QuadratureWeight):
    """v(s) = exp(-c / (1 - s)^gamma); rapidly decreasing, not doubling."""

    kind = "exponential"
    _laguerre = np.polynomial.laguerre.laggauss(64)
    _legendre = np.polynomial.legendre.leggauss(96)

    def __init__(self, c: float, gamma: float, precision: Precision = Precision.DOUBLE):
        super().__init__(precision)
        if not (c > 0.0 and gamma > 0.0):
            raise InputError(f"exponential weight needs c > 0 and gamma > 0, got {c}, {gamma}", "weights")
        self.c = float(c)
        self.gamma = float(gamma)
        self._build()

    @property
    def id(self) -> str:
        return f"exp:{format_param(self.c)}:{format_param(self.gamma)}"

    def log_density_at_distance(self, u):
        with np.errstate(divide="ignore"):
            return -self.c / np.power(_as_array(u), self.gamma)

    def log_tail_at_distance(self, u):
        # v̂(1-u) = e^-K u/(γK) ∫_0^∞ e^-w (1 + w/K)^(-1/γ-1) dw,  K = c/u^γ
        u = np.atleast_1d(_as_array(u))
        K = self.c / np.power(u, self.gamma)
        out = np.empty_like(u)
        large = K > 20.0
        if np.any(large):
            w_nodes, w_weights = self._laguerre
            k = K[large][:, None]
            scaled = np.power(1.0 + w_nodes[None, :] / k, -1.0 / self.gamma - 1.0) @ w_weights
            out[large] = -K[large] + np.log(u[large]) - np.log(self.gamma * K[large]) + np.log(scaled)
        small = ~large
        if np.any(small):
            x, w = self._legendre
            tau = 0.5 * (x + 1.0)
            with np.errstate(all="ignore"):
                values = np.exp(-K[small][:, None] * np.power(tau[None, :], -self.gamma))
            out[small] = np.log(u[small]) + np.log(0.5 * (values @ w))
        return out


class TabulatedWeight(_QuadratureWeight):
    """A weight given by samples (s_i, v(s_i)).

    log v is interpolated monotonically (PCHIP) against t = -log(1 - s) and
    continued linearly past the samples, i.e. as a power of (1 - s).
    """

    kind = "tabulated"

    def __init__(
        self,
        s: Sequence[float],
        v: Sequence[float],
        label: Optional[str] = None,
        precision: Precision = Precision.DOUBLE,
    ):
        super().__init__(precision)
        s = np.asarray(s, dtype=float)
        v = np.asarray(v, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or len(s) < 4:
            raise InputError("tabulated weight needs at least 4 (s, v) samples", "weights")
        if np.any(s < 0.0) or np.any(s >= 1.0) or np.any(np.diff(s) <= 0.0):
            raise InputError("tabulated s must be strictly increasing in [0, 1)", "weights")
        if np.any(~np.isfinite(v)) or np.any(v <= 0.0):
            raise InputError("tabulated v must be finite and positive", "weights")
        self.samples = (s, v)
        self.label = label or content_key(s.tolist(), v.tolist())[:12]
        t = -np.log1p(-s)
        self._t_range = (t[0], t[-1])
        self._interp = PchipInterpolator(t, np.log(v), extrapolate=False)
        slope = self._interp.derivative()
        self._end_slopes = (float(slope(t[0])), float(slope(t[-1])))
        self._end_values = (float(np.log(v[0])), float(np.log(v[-1])))
        self._build()

    @classmethod
    def from_file(cls, path: str, precision: Precision = Precision.DOUBLE) -> "TabulatedWeight":
        """Read a two-column text file: s, v(s)."""
        try:
            data = np.loadtxt(path, comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read weight table {path}: {exc}", "weights") from exc
        if data.shape[1] != 2:
            raise InputError(f"weight table {path} must have two columns", "weights")
        return cls(data[:, 0], data[:, 1], label=path, precision=precision)

    @property
    def id(self) -> str:
        return f"table:{self.label}"

    def log_density_at_distance(self, u):
        u = _as_array(u)
        with np.errstate(divide="ignore"):
            t = -np.log(u)
        lo, hi = self._t_range
        out = self._interp(np.clip(t, lo, hi))
        out = np.where(t < lo, self._end_values[0] + self._end_slopes[0] * (t - lo), out)
        return np.where(t > hi, self._end_values[1] + self._end_slopes[1] * (t - hi), out)


def parse_weight(spec: str, precision: Optional[Precision] = None) -> RadialWeight:
    """Build a weight from ``std:<a>``, ``bergman:<spec>``, ``exp:<c>:<g>`` or ``table:<path>``."""
    precision = Precision(precision or get_settings().precision)
    text = spec.strip()
    head, _, rest = text.partition(":")
    try:
        if head == "std":
            return StandardWeight(float(rest), precision)
        if head == "bergman":
            return BergmanLiftedWeight(parse_weight(rest, precision))
        if head == "exp":
            c, gamma = rest.split(":")
            return ExponentialWeight(float(c), float(gamma), precision)
        if head == "table" and rest:
            return TabulatedWeight.from_file(rest, precision)
    except ValueError as exc:
        raise InputError(f"malformed weight spec {spec!r}: {exc}", "weights") from exc
    raise InputError(f"unknown weight spec {spec!r}", "weights")


# Conditions


def _log_integral(log_f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> float:
    """log ∫_a^b exp(log_f), scaled by the largest sampled value of log_f."""
    if not a < b:
        return -math.inf
    with np.errstate(all="ignore"):
        probe = np.asarray(log_f(np.array([a, 0.5 * (a + b), b])), dtype=float)
    finite = probe[np.isfinite(probe)]
    if np.any(probe == np.inf):
        return math.inf
    if finite.size == 0:
        return -math.inf
    anchor = float(finite.max())

    def scaled(s: np.ndarray) -> np.ndarray:
        return np.exp(log_f(s) - anchor)

    try:
        value, _ = integrate(scaled, a, b, _CELL_SPEC)
    except AccuracyNotReached as exc:
        logger.warning("cell (%g, %g): %s; using best estimate", a, b, exc)
        value = exc.value
    except NonFiniteIntegrand as exc:
        return math.nan if exc.has_nan else math.inf
    return anchor + math.log(value) if value > 0.0 else -math.inf


class _GridCells:
    """∫ exp(log_f) over the cells between the cutoffs 1 - 2^-k, in log form.

    Answers ∫_0^r and ∫_r^1 at any r; the part past the last cutoff is the
    geometric extrapolation of the cell sequence.
    """

    def __init__(self, log_f: Callable[[np.ndarray], np.ndarray], depth: int):
        self.log_f = log_f
        self.edges = np.concatenate([[0.0], geometric_grid(depth)])
        self.cells = np.array([_log_integral(log_f, lo, hi) for lo, hi in zip(self.edges[:-1], self.edges[1:])])
        with np.errstate(over="ignore"):
            increments = np.exp(self.cells)
        self.series = classify_increments(increments)
        self.lower_edges = np.concatenate([[-math.inf], np.logaddexp.accumulate(self.cells)])
        if self.series.kind == DivergenceKind.FINITE and self.series.tail > 0.0:
            remainder = math.log(self.series.tail)
        else:
            remainder = -math.inf
        stacked = np.append(self.cells, remainder)
        self.upper_edges = np.logaddexp.accumulate(stacked[::-1])[::-1]

    @property
    def finite(self) -> bool:
        return self.series.kind == DivergenceKind.FINITE

    def verdict(self) -> DivergenceVerdict:
        with np.errstate(over="ignore"):
            partials = np.exp(self.lower_edges[1:])
        trail = [(float(r), float(p)) for r, p in zip(self.edges[1:], partials)]
        if self.finite:
            return DivergenceVerdict(
                kind=DivergenceKind.FINITE,
                value=float(np.exp(self.upper_edges[0])),
                error=abs(self.series.tail_error),
                slope=self.series.slope,
                trail=trail,
            )
        return DivergenceVerdict(kind=self.series.kind, rate=self.series.rate, slope=self.series.slope, trail=trail)

    def _locate(self, r: float) -> int:
        return int(np.searchsorted(self.edges, r, side="right") - 1)

    def lower(self, r: float) -> float:
        k = self._locate(r)
        if self.edges[k] == r:
            return float(self.lower_edges[k])
        return float(np.logaddexp(self.lower_edges[k], _log_integral(self.log_f, self.edges[k], r)))

    def upper(self, r: float) -> float:
        k = self._locate(r)
        if self.edges[k] == r:
            return float(self.upper_edges[k])
        if k + 1 >= len(self.edges):
            return float(self.upper_edges[-1])
        return float(np.logaddexp(self.upper_edges[k + 1], _log_integral(self.log_f, r, self.edges[k + 1])))


def _log_distance(s: np.ndarray) -> np.ndarray:
    return np.log1p(-s)


def _doubling(w: RadialWeight, depth: int) -> DoublingReport:
    r = np.concatenate([[0.0], geometric_grid(depth - 1)])
    log_ratio = w.log_tail(r) - w.log_tail(0.5 * (1.0 + r))
    with np.errstate(over="ignore"):
        ratios = np.exp(log_ratio)
    trail = [(float(x), float(y)) for x, y in zip(r, ratios)]
    last = ratios[-DOUBLING_WINDOW:]
    stable = bool(np.all(np.isfinite(last)) and last.max() / last.min() - 1.0 <= DOUBLING_TOLERANCE)
    grid = geometric_grid(depth)
    slope, intercept, _ = fit_line(np.log1p(-grid), w.log_tail(grid))
    residual = w.log_tail(grid) - (slope * np.log1p(-grid) + intercept)
    rms = float(np.sqrt(np.mean(residual ** 2)))
    sup_ratio = float(ratios.max())
    return DoublingReport(
        verdict=stable and math.isfinite(sup_ratio),
        sup_ratio=sup_ratio,
        beta_estimate=max(0.0, slope) if math.isfinite(slope) else 0.0,
        beta_residual=rms if math.isfinite(rms) else math.inf,
        trail=trail,
    )


def _product_condition(
    log_product: Callable[[float], float],
    depth: int,
    guard: Optional[_GridCells] = None,
) -> ConditionValue:
    """Supremum over r of exp(log_product(r)), refused when a guarding factor diverges."""
    if guard is not None and not guard.finite:
        verdict = guard.verdict()
        kind = ConditionVerdict.INFINITE if verdict.kind == DivergenceKind.DIVERGING else ConditionVerdict.INDETERMINATE
        return ConditionValue(verdict=kind, trail=verdict.trail, note=f"tail factor {verdict.describe()}")

    def f(r: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.array([log_product(float(x)) for x in np.atleast_1d(r)]))

    result = grid_sup(f, depth)
    if result.unbounded:
        return ConditionValue(verdict=ConditionVerdict.INFINITE, trail=result.trail, note="product unbounded as r -> 1")
    return ConditionValue(verdict=ConditionVerdict.FINITE, value=result.estimate, trail=result.trail)


class _ConditionIntegrals:
    """The five cell families shared by M1..M4 and vg2."""

    def __init__(self, w: RadialWeight, depth: int):
        lt, dist, ld = w.log_tail, _log_distance, w.log_density
        self.w = w
        self.m1_upper = _GridCells(lambda s: lt(s) - 2.0 * dist(s), depth)
        self.m1_lower = _GridCells(lambda s: -lt(s), depth)
        self.m2_lower = _GridCells(lambda s: lt(s) - 4.0 * dist(s), depth)
        # ∫ 1/V̂₂ = ∫ (1-s)²/v̂, the vg2 integrand
        self.inverse_v2 = _GridCells(lambda s: 2.0 * dist(s) - lt(s), depth)
        self.m3_lower = _GridCells(lambda s: -dist(s) - lt(s), depth)
        self.m4_lower = _GridCells(lambda s: ld(s) - 3.0 * dist(s), depth)


def _m_values(w: RadialWeight, depth: int) -> Tuple[ConditionValue, ...]:
    c = _ConditionIntegrals(w, depth)
    lt = lambda r: float(w.log_tail(np.array([r]))[0])
    m1 = _product_condition(lambda r: 0.5 * (c.m1_upper.upper(r) + c.m1_lower.lower(r)), depth, c.m1_upper)
    m2 = _product_condition(lambda r: 0.5 * (c.m2_lower.lower(r) + c.inverse_v2.upper(r)), depth, c.inverse_v2)
    m3 = _product_condition(lambda r: 0.5 * (lt(r) + c.m3_lower.lower(r)), depth)
    m4 = _product_condition(lambda r: 0.5 * (c.m4_lower.lower(r) + c.inverse_v2.upper(r)), depth, c.inverse_v2)
    return m1, m2, m3, m4, c.inverse_v2.verdict()


def condition_report(w: RadialWeight, depth: Optional[int] = None) -> ConditionReport:
    """Doubling, M1..M4 and vg2 for w on the grid 1 - 2^-k, k <= depth.

    Raises:
        InputError: depth < 10.
    """
    depth = depth or get_settings().grid_depth
    if depth < 10:
        raise InputError(f"condition depth must be >= 10, got {depth}", "weights")
    return _condition_report(w, depth)


@lru_cache(maxsize=64)
def _condition_report(w: RadialWeight, depth: int) -> ConditionReport:
    logger.info("condition report for %s (depth %d)", w.id, depth)
    doubling = _doubling(w, depth)
    m1, m2, m3, m4, vg2 = _m_values(w, depth)
    return ConditionReport(
        weight=w.id, doubling=doubling, m1=m1, m2=m2, m3=m3, m4=m4, vg2=vg2, grid_depth=depth
    )


def bergman_condition(omega: RadialWeight, depth: Optional[int] = None) -> ConditionValue:
    """sup_r (∫_0^r ω̂/(1-t)²)^1/2 (∫_r^1 1/ω̂)^1/2 for the Bergman-space reduction."""
    depth = depth or get_settings().grid_depth
    lt, dist = omega.log_tail, _log_distance
    lower = _GridCells(lambda s: lt(s) - 2.0 * dist(s), depth)
    upper = _GridCells(lambda s: -lt(s), depth)
    return _product_condition(lambda r: 0.5 * (lower.lower(r) + upper.upper(r)), depth, upper)


def require_doubling(w: RadialWeight, module: str, depth: Optional[int] = None) -> ConditionReport:
    report = condition_report(w, depth)
    if not report.doubling.verdict:
        raise HypothesisError("doubling", w.id, module, "fails (tail ratio grows)")
    return report


def welldef_constant(w: RadialWeight, blocks: int = 16) -> float:
    """C(v) with ∫_0^1 |f| <= C(v) ||f||_{D_v}; infinite when vg2 fails.

    C(v)² = 1 + Σ_k 1/(2k²(k+1)² v_{2k-1}), summed over dyadic blocks of k
    with geometric extrapolation of the block sums.
    """
    k = np.arange(1, 2 ** blocks, dtype=float)
    log_terms = -(math.log(2.0) + 2.0 * np.log(k) + 2.0 * np.log(k + 1.0) + w.log_moments(2.0 * k - 1.0))
    index = np.floor(np.log2(k)).astype(int)
    with np.errstate(over="ignore"):
        sums = np.array([np.exp(logsumexp(log_terms[index == n])) for n in range(blocks)])
    series = classify_increments(sums)
    if series.kind != DivergenceKind.FINITE:
        return math.inf
    return math.sqrt(1.0 + float(sums.sum()) + series.tail)


# Lemma checks


def _series(name: str, points: Sequence[float], ratios: Sequence[float]) -> RatioSeries:
    values = [float(x) if math.isfinite(x) else None for x in ratios]
    finite = [x for x in values if x is not None]
    return RatioSeries(
        name=name,
        points=[float(p) for p in points],
        ratios=values,
        min=min(finite) if finite else None,
        max=max(finite) if finite else None,
    )


def omega_star(w: RadialWeight, r: float) -> float:
    """ω*(r) = ∫_r^1 s log(s/r) ω(s) ds."""
    if not 0.0 < r < 1.0:
        raise InputError(f"omega_star requires 0 < r < 1, got {r}", "weights")
    spec = IntegrationSpec(abs_tol=1e-300, rel_tol=1e-10, singular_at_1=True)
    value, _ = integrate(lambda s: s * np.log(s / r) * w.density(s), r, 1.0, spec)
    return value


def _dyadic_tail_sums(w: RadialWeight, q: float, kmax: int, cap: int = 45) -> Tuple[List[float], List[float]]:
    n = np.arange(0, cap + 1, dtype=float)
    log_v = w.log_moments(np.exp2(n + 1.0))
    upper_terms = -3.0 * q * n * _LN2 - q * log_v
    lower_terms = -q * n * _LN2 - q * log_v
    upper, lower = [], []
    for k in range(1, kmax + 1):
        upper.append(float(np.exp(logsumexp(upper_terms[k:]) - upper_terms[k])))
        lower.append(float(np.exp(logsumexp(lower_terms[1:k + 1]) - lower_terms[k])))
    return upper, lower


def lemma_checks(w: RadialWeight, q: float = 1.0, kmax: int = 10, xmax: float = 128.0) -> LemmaReport:
    """Two-sided ratios for the weight lemmas the operator estimates rely on.

    Series:
        moment_vs_tail: v_x / v̂(1 - 1/x), x = 1, 2, 4, ... up to xmax.
        omega_star: ω*(r) / (v̂(r)(1 - r)) at r = 1 - 2^-k.
        upper_dyadic_sum: Σ_{n>=k} 2^-3qn v_{2^(n+1)}^-q over its first term.
        lower_dyadic_sum: Σ_{n=1..k} 2^-qn v_{2^(n+1)}^-q over its last term.
        moment_doubling: v_n / v_2n.
        tail_exponent: v̂(r_k) / (2^(4β) v̂(r_{k+4})) with the regression β.
        m4_over_m2: M4 / M2.

    Raises:
        InputError: q <= 0, kmax < 6 or xmax < 1.
        HypothesisError: w is not doubling.
    """
    if not q > 0.0 or kmax < 6 or not xmax >= 1.0:
        raise InputError("lemma checks need q > 0, kmax >= 6 and xmax >= 1", "weights")
    report = require_doubling(w, "weights")
    series: Dict[str, RatioSeries] = {}

    xs = [2.0 ** j for j in range(int(math.log2(xmax)) + 1)]
    if xs[-1] < xmax:
        xs.append(float(xmax))
    log_ratio = w.log_moments(np.array(xs)) - w.log_tail(1.0 - 1.0 / np.array(xs))
    series["moment_vs_tail"] = _series("moment_vs_tail", xs, np.exp(log_ratio))

    rs = geometric_grid(kmax)
    star = [omega_star(w, float(r)) / (w.tail(float(r)) * (1.0 - r)) for r in rs]
    series["omega_star"] = _series("omega_star", rs, star)

    upper, lower = _dyadic_tail_sums(w, q, kmax)
    ks = list(range(1, kmax + 1))
    series["upper_dyadic_sum"] = _series("upper_dyadic_sum", ks, upper)
    series["lower_dyadic_sum"] = _series("lower_dyadic_sum", ks, lower)

    ns = np.exp2(np.arange(0, 12, dtype=float))
    series["moment_doubling"] = _series(
        "moment_doubling", ns, np.exp(w.log_moments(ns) - w.log_moments(2.0 * ns))
    )

    beta = report.doubling.beta_estimate
    grid = geometric_grid(kmax + 4)
    log_gap = w.log_tail(grid[:kmax]) - w.log_tail(grid[4:]) - 4.0 * beta * _LN2
    series["tail_exponent"] = _series("tail_exponent", grid[:kmax], np.exp(log_gap))

    m2, m4 = report.m2, report.m4
    ratio = m4.value / m2.value if m2.is_finite and m4.is_finite and m2.value else math.inf
    series["m4_over_m2"] = _series("m4_over_m2", [float(report.grid_depth)], [ratio])
    return LemmaReport(weight=w.id, q=q, series=series)
