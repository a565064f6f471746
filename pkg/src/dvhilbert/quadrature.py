"""
Numerical substrate: adaptive Gauss-Kronrod integration, QUADPACK for
endpoint-singular integrands, divergence probing along the cutoffs
r_k = 1 - 2^-k, and supremum search on the same grid.

Integrands are vectorized callables: they receive a float ndarray and must
return an array of the same shape.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import AccuracyNotReached, InputError
from .schemas import (
    DivergenceKind,
    DivergenceVerdict,
    GridSup,
    IntegrationSpec,
    Rate,
    RateKind,
    Side,
)
from .utils import fit_line, geometric_grid

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

DIVERGENCE_SLOPE = -0.05
POWER_LAW_EXPONENT = -1.1
_EPS = float(np.finfo(float).eps)
_TINY = 1e-300
_LN2 = math.log(2.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# QUADPACK qk15: Kronrod abscissae (descending, last is the centre) and weights,
# Gauss 7-point weights on the odd abscissae and the centre
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG8 = np.array([
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS = np.concatenate([_WG8[:-1], _WG8[::-1]])


class NonFiniteIntegrand(InputError):
    """The integrand returned NaN or an infinite value inside the interval."""

    def __init__(self, a: float, b: float, has_nan: bool):
        kind = "NaN" if has_nan else "an infinite value"
        super().__init__(f"integrand returned {kind} on ({a:.17g}, {b:.17g})", "quadrature")
        self.has_nan = has_nan


def _evaluate(f: Integrand, x: np.ndarray, a: float, b: float) -> np.ndarray:
    with np.errstate(all="ignore"):
        fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        raise NonFiniteIntegrand(a, b, bool(np.any(np.isnan(fx))))
    return fx


def _gk15(f: Integrand, a: float, b: float) -> Tuple[float, float]:
    """Kronrod value and QUADPACK-style error estimate on [a, b]."""
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fx = _evaluate(f, centre + half * _NODES, a, b)
    resk = float(np.dot(_KRONROD, fx))
    resg = float(np.dot(_GAUSS, fx))
    resabs = float(np.dot(_KRONROD, np.abs(fx)))
    resasc = float(np.dot(_KRONROD, np.abs(fx - 0.5 * resk)))
    error = abs((resk - resg) * half)
    resasc *= abs(half)
    if resasc != 0.0 and error != 0.0:
        error = resasc * min(1.0, (200.0 * error / resasc) ** 1.5)
    # roundoff floor
    error = max(error, 50.0 * _EPS * resabs * abs(half))
    return resk * half, error


@dataclass
class _Panel:
    a: float
    b: float
    value: float
    error: float

    def __lt__(self, other: "_Panel") -> bool:
        return self.error > other.error


def _tolerance(spec: IntegrationSpec, value: float) -> float:
    return max(spec.abs_tol, spec.rel_tol * abs(value))


def _quadpack(
    f: Integrand, a: float, b: float, spec: IntegrationSpec, points: Sequence[float]
) -> Tuple[float, float]:
    """Endpoint-singular integrals go to QUADPACK (QAGS/QAGP, or QAWS for known exponents)."""

    def scalar(x: float) -> float:
        return float(_evaluate(f, np.array([x]), a, b)[0])

    options = dict(
        full_output=1,
        epsabs=spec.abs_tol,
        epsrel=max(spec.rel_tol, 50.0 * _EPS),
        limit=spec.max_panels,
    )
    cuts = sorted({float(p) for p in points if a < p < b})
    if spec.endpoint_exponents is not None:
        if cuts:
            raise InputError("breakpoints cannot be combined with endpoint exponents", "quadrature")
        result = quad(scalar, a, b, weight="alg", wvar=tuple(spec.endpoint_exponents), **options)
    else:
        result = quad(scalar, a, b, points=cuts or None, **options)
    value, error, info = result[:3]
    if len(result) > 3 and error > _tolerance(spec, value):
        logger.debug("quad stopped after %s subintervals on (%g, %g): %s", info.get("last"), a, b, result[3])
        raise AccuracyNotReached(float(value), float(error), reason=str(result[3]).split("\n")[0])
    return float(value), float(error)


def integrate(
    f: Integrand,
    a: float,
    b: float,
    spec: Optional[IntegrationSpec] = None,
    points: Sequence[float] = (),
) -> Tuple[float, float]:
    """Integrate f over (a, b).

    Regular integrands run through an adaptive G7/K15 panel heap. When an
    endpoint is flagged singular, or endpoint exponents are given, the
    integral is handed to scipy's QUADPACK, whose extrapolation handles
    integrable power and log behavior at the ends.

    Args:
        f: vectorized integrand, finite on the open interval.
        a, b: interval ends, a < b.
        spec: tolerances, panel budget and endpoint flags.
        points: interior breakpoints (jumps, kinks).

    Returns:
        (value, error_estimate)

    Raises:
        InputError: a >= b, or f returned NaN/inf.
        AccuracyNotReached: tolerance not met within max_panels.
    """
    spec = spec or IntegrationSpec()
    a, b = float(a), float(b)
    if not a < b:
        raise InputError(f"empty interval ({a}, {b})", "quadrature")
    if spec.singular_at_0 or spec.singular_at_1 or spec.endpoint_exponents is not None:
        return _quadpack(f, a, b, spec, points)

    cuts = sorted({float(p) for p in points if a < p < b})
    edges = [a, *cuts, b]
    heap: List[_Panel] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, error = _gk15(f, lo, hi)
        heapq.heappush(heap, _Panel(lo, hi, value, error))
    count = len(heap)

    value = math.fsum(p.value for p in heap)
    error = math.fsum(p.error for p in heap)
    while error > _tolerance(spec, value):
        if count + 1 > spec.max_panels:
            logger.debug("panel budget %d exhausted on (%g, %g)", spec.max_panels, a, b)
            raise AccuracyNotReached(value, error)
        worst = heapq.heappop(heap)
        mid = 0.5 * (worst.a + worst.b)
        if not worst.a < mid < worst.b:
            heapq.heappush(heap, worst)
            raise AccuracyNotReached(value, error, reason="panel width at machine precision")
        for lo, hi in ((worst.a, mid), (mid, worst.b)):
            v, e = _gk15(f, lo, hi)
            heapq.heappush(heap, _Panel(lo, hi, v, e))
        count += 1
        value = math.fsum(p.value for p in heap)
        error = math.fsum(p.error for p in heap)
    return value, error


@dataclass(frozen=True)
class SeriesClass:
    kind: DivergenceKind
    slope: float
    rate: Optional[Rate] = None
    tail: float = 0.0
    tail_error: float = 0.0


def classify_increments(increments: Sequence[float], power_law: bool = False) -> SeriesClass:
    """Classify the series of increments as convergent or divergent.

    The least-squares slope of log|increment| against the index over the last
    half of the sequence decides: slope <= -0.05 is geometric decay. With
    power_law=True a second fit against log(index) accepts decay faster than
    index^-1.1 as convergent.
    """
    d = np.asarray(increments, dtype=float)
    n = len(d)
    if n < 4:
        return SeriesClass(DivergenceKind.INDETERMINATE, math.nan)
    if np.any(np.isnan(d)):
        return SeriesClass(DivergenceKind.INDETERMINATE, math.nan)
    if np.any(np.isinf(d)):
        return SeriesClass(DivergenceKind.DIVERGING, math.inf, Rate(kind=RateKind.FASTER))
    size = max(4, n // 2)
    window = d[-size:]
    index = np.arange(n - size + 1, n + 1, dtype=float)
    magnitude = np.abs(window)
    partial = abs(float(np.sum(d)))
    if np.all(magnitude <= 1e-15 * max(partial, _TINY)):
        return SeriesClass(DivergenceKind.FINITE, -math.inf, tail=0.0, tail_error=float(magnitude.max(initial=0.0)))
    signs = np.sign(window[magnitude > _TINY])
    if signs.size and not (np.all(signs > 0) or np.all(signs < 0)):
        return SeriesClass(DivergenceKind.INDETERMINATE, math.nan)
    logs = np.log(np.maximum(magnitude, _TINY))
    slope, _, r2_geometric = fit_line(index, logs)
    exponent, r2_power = math.nan, -math.inf
    if power_law:
        exponent, _, r2_power = fit_line(np.log(index), logs)

    if slope <= DIVERGENCE_SLOPE and not r2_power > r2_geometric + 1e-6:
        last, prev = window[-1], window[-2]
        q = last / prev if prev != 0.0 else 0.0
        if not 0.0 < q < 1.0:
            q = math.exp(slope)
        q_prev = prev / window[-3] if window[-3] != 0.0 else q
        q_prev = q_prev if 0.0 < q_prev < 1.0 else q
        tail = last * q / (1.0 - q)
        error = abs(tail) * abs(q - q_prev) / (1.0 - q) + 1e-15 * abs(tail)
        return SeriesClass(DivergenceKind.FINITE, slope, tail=float(tail), tail_error=float(error))

    if power_law:
        if exponent <= POWER_LAW_EXPONENT:
            # Σ_{k>N} c k^e ≈ d_N N / (-e - 1)
            tail = window[-1] * index[-1] / (-exponent - 1.0)
            return SeriesClass(DivergenceKind.FINITE, slope, tail=float(tail), tail_error=0.5 * abs(float(tail)))
        return SeriesClass(
            DivergenceKind.DIVERGING, slope, Rate(kind=RateKind.POWER, exponent=float(exponent + 1.0))
        )

    half = size // 2
    first, _, _ = fit_line(index[:half], logs[:half])
    second, _, _ = fit_line(index[half:], logs[half:])
    if second > 0.2 and second > max(2.0 * first, first + 0.5):
        rate = Rate(kind=RateKind.FASTER)
    elif abs(slope) < 0.1 * _LN2:
        rate = Rate(kind=RateKind.LOG)
    else:
        rate = Rate(kind=RateKind.POWER, exponent=float(slope / _LN2))
    return SeriesClass(DivergenceKind.DIVERGING, slope, rate)


def divergence_probe(
    f: Integrand,
    side: Side = Side.TOWARD_1,
    depth: int = 24,
    spec: Optional[IntegrationSpec] = None,
    points: Sequence[float] = (),
) -> DivergenceVerdict:
    """Partial integrals of f on (0, 1) along the cutoffs 1 - 2^-k (or 2^-k).

    Interior breakpoints in `points` are passed to the cells containing them.
    """
    if depth < 8:
        raise InputError(f"probe depth must be >= 8, got {depth}", "quadrature")
    side = Side(side)
    spec = spec or IntegrationSpec()
    cell_spec = spec.model_copy(update={"singular_at_0": False, "singular_at_1": False, "endpoint_exponents": None})
    k = np.arange(0, depth + 1, dtype=float)
    if side == Side.TOWARD_1:
        cutoffs = 1.0 - np.exp2(-k)
        cells = list(zip(cutoffs[:-1], cutoffs[1:]))
    else:
        cutoffs = np.exp2(-k)
        cells = [(lo, hi) for hi, lo in zip(cutoffs[:-1], cutoffs[1:])]

    increments: List[float] = []
    errors: List[float] = []
    trail: List[Tuple[float, float]] = []
    partial = 0.0
    for (lo, hi), cutoff in zip(cells, cutoffs[1:]):
        try:
            value, error = integrate(f, lo, hi, cell_spec, points)
        except AccuracyNotReached as exc:
            logger.warning("probe cell (%g, %g): %s; using best estimate", lo, hi, exc)
            value, error = exc.value, exc.error
        except NonFiniteIntegrand as exc:
            value, error = (math.nan if exc.has_nan else math.inf), math.inf
        increments.append(value)
        errors.append(error)
        partial += value
        trail.append((float(cutoff), partial))
        if not math.isfinite(value):
            break

    cls = classify_increments(increments)
    if cls.kind == DivergenceKind.FINITE:
        total = partial + cls.tail
        error = math.fsum(e for e in errors if math.isfinite(e)) + cls.tail_error
        return DivergenceVerdict(
            kind=DivergenceKind.FINITE, value=total, error=error, slope=cls.slope, trail=trail
        )
    if cls.kind == DivergenceKind.INDETERMINATE:
        logger.warning("divergence probe indeterminate after %d cells", len(increments))
    return DivergenceVerdict(kind=cls.kind, rate=cls.rate, slope=cls.slope, trail=trail)


def _golden_max(f: Integrand, lo: float, hi: float, iterations: int = 80) -> Tuple[float, float]:
    def value(x: float) -> float:
        with np.errstate(all="ignore"):
            y = float(np.asarray(f(np.array([x])), dtype=float).reshape(-1)[0])
        return y if not math.isnan(y) else -math.inf

    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = value(x1), value(x2)
    for _ in range(iterations):
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = value(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = value(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def grid_sup(f: Integrand, depth: int = 24, refine: bool = True) -> GridSup:
    """Supremum of f over (0, 1) on the grid 1 - 2^-k, refined by golden section.

    When the maximum sits at the last grid point the increments decide
    between an unbounded trail and a limit approached as r -> 1.
    """
    if depth < 8:
        raise InputError(f"grid depth must be >= 8, got {depth}", "quadrature")
    r = geometric_grid(depth)
    with np.errstate(all="ignore"):
        values = np.asarray(f(r), dtype=float)
    trail = [(float(x), float(y)) for x, y in zip(r, values)]
    bad = ~np.isfinite(values)
    if np.any(bad):
        first = int(np.argmax(bad))
        return GridSup(sup=math.inf, arg=float(r[first]), trail=trail, unbounded=True)

    i = int(np.argmax(values))
    best, arg = float(values[i]), float(r[i])
    if refine:
        lo = 0.0 if i == 0 else float(r[i - 1])
        hi = float(r[i + 1]) if i + 1 < depth else float(r[i])
        if hi > lo:
            x, fx = _golden_max(f, lo, hi)
            if fx > best:
                best, arg = fx, x

    unbounded, limit = False, None
    if i == depth - 1:
        deltas = np.diff(values)
        window = deltas[-max(4, len(deltas) // 2):]
        if np.all(window > 0):
            cls = classify_increments(window)
            if cls.kind == DivergenceKind.DIVERGING:
                unbounded = True
            elif cls.kind == DivergenceKind.FINITE:
                limit = float(values[-1] + cls.tail)
        elif np.all(window >= 0):
            limit = float(values[-1])
    return GridSup(sup=best, arg=arg, trail=trail, unbounded=unbounded, limit=limit)


@dataclass(frozen=True)
class GeometricRule:
    """Composite Gauss-Legendre rule on the cells [1-2^-k, 1-2^-k-1).

    `distances` holds 1 - node computed without cancellation; integrands
    that degenerate at s = 1 should be evaluated through it.
    """

    nodes: np.ndarray
    distances: np.ndarray
    weights: np.ndarray
    cells: np.ndarray
    edges: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.edges) - 1

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate sampled values; columns of a 2-D array are separate integrands."""
        return self.weights @ values


@lru_cache(maxsize=8)
def geometric_rule(depth: int = 40, order: int = 20) -> GeometricRule:
    x, w = np.polynomial.legendre.leggauss(order)
    k = np.arange(depth, dtype=float)
    half = np.exp2(-k - 2.0)
    # cell k spans distances [2^-k-1, 2^-k] from 1
    distances = 3.0 * half[:, None] - half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    edges = 1.0 - np.exp2(-np.arange(depth + 1, dtype=float))
    cells = np.repeat(np.arange(depth), order)
    arrays = [1.0 - distances.reshape(-1), distances.reshape(-1), weights.reshape(-1), cells, edges]
    for array in arrays:
        array.setflags(write=False)
    return GeometricRule(*arrays)
