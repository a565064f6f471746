"""
Analytic symbols g given by Maclaurin coefficient rules, their dyadic block
profiles and the B(2,p) / b(2,inf) norms of g - g(0).

Dyadic blocks are I(n) = [2^n, 2^(n+1)), so the blocks tile the positive
integers; B_n = 2^-n Σ_{k in I(n)} k²|ĝ(k)|².
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import InputError
from .quadrature import classify_increments, grid_sup, integrate
from .schemas import (
    BlockProfile,
    DivergenceKind,
    IntegrationSpec,
    LittleOhVerdict,
    NormMethod,
    NormResult,
    format_p,
)
from .utils import fit_line, format_param, geometric_grid

logger = logging.getLogger(__name__)

DIRECT_BLOCKS = 20
PREFIX_DEGREE = 1 << 13
M2_CUTOFF = 40.0
LITTLE_OH_SLOPE = -0.1
LITTLE_OH_REGRESSOR = "log2(n+1)"


class Symbol(ABC):
    """Coefficient rule ĝ(k) with an optional scale c and shift d: c·g + d."""

    kind: str = ""

    def __init__(self, scale: float = 1.0, shift: float = 0.0, degree: int = PREFIX_DEGREE):
        self.scale = float(scale)
        self.shift = float(shift)
        self._prefix = self._compute(degree)
        self._prefix.setflags(write=False)

    @property
    @abstractmethod
    def base_id(self) -> str:
        """Mini-language spec of the unscaled, unshifted symbol."""

    @abstractmethod
    def _raw(self, count: int) -> np.ndarray:
        """ĝ(0..count-1) of the base symbol."""

    def _compute(self, count: int) -> np.ndarray:
        values = self.scale * self._raw(count)
        if count:
            values[0] += self.shift
        return values

    @property
    def id(self) -> str:
        text = self.base_id
        if self.scale != 1.0:
            text = f"{format_param(self.scale)}*{text}"
        if self.shift != 0.0:
            text = f"{text}{format_param(self.shift, signed=True)}"
        return text

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.id!r})"

    def __hash__(self) -> int:
        return hash(self.id)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Symbol) and other.id == self.id

    def _clone(self, scale: float, shift: float) -> "Symbol":
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.scale, clone.shift = scale, shift
        clone._prefix = clone._compute(len(self._prefix))
        clone._prefix.setflags(write=False)
        return clone

    def scaled(self, c: float) -> "Symbol":
        return self._clone(self.scale * c, self.shift * c)

    def shifted(self, c: float) -> "Symbol":
        return self._clone(self.scale, self.shift + c)

    def coefficients(self, count: int) -> np.ndarray:
        """ĝ(0..count-1)."""
        if count <= len(self._prefix):
            return self._prefix[:count]
        return self._compute(count)

    def coeff(self, k: int) -> float:
        if k < 0:
            raise InputError(f"coefficient index must be >= 0, got {k}", "symbols")
        if k < len(self._prefix):
            return float(self._prefix[k])
        return float(self._compute(k + 1)[k])

    def g_tilde(self, count: int) -> np.ndarray:
        """k²|ĝ(k)|² for k = 0..count-1."""
        k = np.arange(count, dtype=float)
        return (k * self.coefficients(count)) ** 2

    def degree(self) -> Optional[int]:
        """Polynomial degree, None for transcendental symbols."""
        return None

    def block_value(self, n: int) -> Optional[float]:
        """Closed-form B_n when the rule admits one."""
        return None


class LogSymbol(Symbol):
    """g(z) = log 1/(1 - z): ĝ(k) = 1/k."""

    kind = "log"

    @property
    def base_id(self) -> str:
        return "log"

    def _raw(self, count):
        out = np.zeros(count)
        out[1:] = 1.0 / np.arange(1, count, dtype=float)
        return out

    def block_value(self, n):
        return self.scale ** 2


class PowerSymbol(Symbol):
    """g with g'(z) = (1 - z)^-b: ĝ(k) = c_(k-1)/k, c_m = c_(m-1)(m-1+b)/m."""

    kind = "power"

    def __init__(self, b: float, **kwargs):
        b = float(b)
        if not 0.5 < b < 1.0:
            raise InputError(f"power symbol needs 1/2 < b < 1, got {b}", "symbols")
        self.b = b
        super().__init__(**kwargs)

    @property
    def base_id(self) -> str:
        return f"pow:{format_param(self.b)}"

    def _raw(self, count):
        out = np.zeros(count)
        if count > 1:
            m = np.arange(1, count - 1, dtype=float)
            c = np.concatenate([[1.0], np.cumprod((m - 1.0 + self.b) / m)])
            out[1:] = c / np.arange(1, count, dtype=float)
        return out

    def asymptotic_ratio(self) -> float:
        """B_(n+1)/B_n for large n."""
        return 2.0 ** (2.0 * self.b - 2.0)


class PolynomialSymbol(Symbol):
    kind = "polynomial"

    def __init__(self, coefficients: Sequence[float], **kwargs):
        coefficients = [float(c) for c in coefficients]
        if not coefficients or not all(math.isfinite(c) for c in coefficients):
            raise InputError("polynomial symbol needs finite coefficients", "symbols")
        while len(coefficients) > 1 and coefficients[-1] == 0.0:
            coefficients.pop()
        self.poly = tuple(coefficients)
        super().__init__(**kwargs)

    @property
    def base_id(self) -> str:
        return "poly:" + ",".join(format_param(c) for c in self.poly)

    def _raw(self, count):
        out = np.zeros(count)
        n = min(count, len(self.poly))
        out[:n] = self.poly[:n]
        return out

    def degree(self):
        return len(self.poly) - 1

    def block_value(self, n):
        # zero past the block holding the degree
        if 2 ** n > self.degree():
            return 0.0
        return None


class BlockWeightedSymbol(Symbol):
    """ĝ(k) = (n+1)^-theta / k for k in I(n); B_n = (n+1)^(-2 theta)."""

    kind = "block_weighted"

    def __init__(self, theta: float, **kwargs):
        theta = float(theta)
        if not math.isfinite(theta):
            raise InputError(f"block-weighted symbol needs finite theta, got {theta}", "symbols")
        self.theta = theta
        super().__init__(**kwargs)

    @property
    def base_id(self) -> str:
        return f"blockw:{format_param(self.theta)}"

    def _raw(self, count):
        out = np.zeros(count)
        if count > 1:
            k = np.arange(1, count, dtype=float)
            n = np.floor(np.log2(k))
            out[1:] = (n + 1.0) ** -self.theta / k
        return out

    def block_value(self, n):
        return self.scale ** 2 * (n + 1.0) ** (-2.0 * self.theta)


def parse_symbol(spec: str) -> Symbol:
    """Build a symbol from ``log``, ``pow:<b>``, ``poly:<c0,c1,...>`` or ``blockw:<theta>``."""
    text = spec.strip()
    head, _, rest = text.partition(":")
    try:
        if head == "log" and not rest:
            return LogSymbol()
        if head == "pow":
            return PowerSymbol(float(rest))
        if head == "poly":
            return PolynomialSymbol([float(c) for c in rest.split(",")])
        if head == "blockw":
            return BlockWeightedSymbol(float(rest))
    except ValueError as exc:
        raise InputError(f"malformed symbol spec {spec!r}: {exc}", "symbols") from exc
    raise InputError(f"unknown symbol spec {spec!r}", "symbols")


def _direct_blocks(g: Symbol, count: int) -> np.ndarray:
    tilde = g.g_tilde(2 ** count)
    return np.array([tilde[2 ** n:2 ** (n + 1)].sum() / 2.0 ** n for n in range(count)])


def block_values(g: Symbol, n_max: int) -> np.ndarray:
    """B_0..B_n_max: direct summation up to 2^DIRECT_BLOCKS, closed forms past it."""
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}", "symbols")
    direct = min(n_max + 1, DIRECT_BLOCKS)
    values = list(_direct_blocks(g, direct))
    for n in range(direct, n_max + 1):
        closed = g.block_value(n)
        if closed is None and isinstance(g, PowerSymbol):
            closed = values[-1] * g.asymptotic_ratio()
        if closed is None:
            raise InputError(f"no block value for {g.id} at n={n}", "symbols")
        values.append(closed)
    return np.array(values)


def block_profile(g: Symbol, n_max: int) -> BlockProfile:
    if n_max < 1:
        raise InputError(f"block profile needs n_max >= 1, got {n_max}", "symbols")
    return BlockProfile(symbol=g.id, n_max=n_max, values=block_values(g, n_max).tolist())


def _check_p(p: float) -> None:
    if not p > 0:
        raise InputError(f"exponent p must be positive, got {p}", "symbols")


def _blocks_norm(g: Symbol, p: float, n_max: int, extrapolate: bool) -> NormResult:
    blocks = block_values(g, n_max)
    if math.isinf(p):
        roots = np.sqrt(blocks)
        i = int(np.argmax(roots))
        verdict, rate = DivergenceKind.FINITE, None
        if extrapolate and i == len(roots) - 1 and n_max >= 8:
            series = classify_increments(np.diff(roots), power_law=True)
            if series.kind == DivergenceKind.DIVERGING and np.all(np.diff(roots)[-4:] > 0):
                verdict, rate = DivergenceKind.DIVERGING, series.rate
        value = float(roots[i]) if verdict == DivergenceKind.FINITE else None
        return NormResult(
            symbol=g.id, p=p, method=NormMethod.BLOCKS, verdict=verdict, value=value,
            partial_sums=np.maximum.accumulate(roots).tolist(), rate=rate,
        )

    terms = blocks ** (p / 2.0)
    partial = np.cumsum(terms)
    if not extrapolate:
        return NormResult(
            symbol=g.id, p=p, method=NormMethod.BLOCKS, verdict=DivergenceKind.FINITE,
            value=float(partial[-1] ** (1.0 / p)), partial_sums=partial.tolist(),
        )
    series = classify_increments(terms, power_law=True)
    if series.kind != DivergenceKind.FINITE:
        return NormResult(
            symbol=g.id, p=p, method=NormMethod.BLOCKS, verdict=series.kind,
            partial_sums=partial.tolist(), rate=series.rate,
        )
    total = float(partial[-1] + series.tail)
    return NormResult(
        symbol=g.id, p=p, method=NormMethod.BLOCKS, verdict=DivergenceKind.FINITE,
        value=total ** (1.0 / p), partial_sums=partial.tolist(), extrapolated=series.tail != 0.0,
    )


class _IntegralMeans:
    """M_2(r, g')² = Σ_m (m+1)²|ĝ(m+1)|² r^(2m), truncated at m ≈ 40/(1-r)."""

    def __init__(self, g: Symbol, depth: int):
        self.depth = depth
        size = int(M2_CUTOFF * 2.0 ** (depth + 1)) + 2
        self.weights = g.g_tilde(size + 1)[1:]

    def squared(self, r: np.ndarray) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, x in enumerate(r):
            count = min(len(self.weights), int(M2_CUTOFF / max(1.0 - x, 1e-300)) + 16)
            m = np.arange(count, dtype=float)
            with np.errstate(divide="ignore"):
                powers = np.exp(2.0 * m * np.log(x)) if x > 0.0 else (m == 0).astype(float)
            out[i] = float(self.weights[:count] @ powers)
        return out


def _integral_norm(g: Symbol, p: float, depth: int) -> NormResult:
    means = _IntegralMeans(g, depth)
    if math.isinf(p):
        result = grid_sup(lambda r: np.sqrt(means.squared(r) * (1.0 - np.asarray(r))), depth)
        if result.unbounded:
            return NormResult(symbol=g.id, p=p, method=NormMethod.INTEGRAL, verdict=DivergenceKind.DIVERGING,
                              partial_sums=[v for _, v in result.trail])
        # r = 0 is not on the grid; M_2(0, g')² = |ĝ(1)|²
        value = max(result.estimate, math.sqrt(means.squared(np.array([0.0]))[0]))
        return NormResult(symbol=g.id, p=p, method=NormMethod.INTEGRAL, verdict=DivergenceKind.FINITE,
                          value=value, partial_sums=[v for _, v in result.trail], extrapolated=result.limit is not None)

    def integrand(r: np.ndarray) -> np.ndarray:
        return means.squared(r) ** (p / 2.0) * (1.0 - r) ** (p / 2.0 - 1.0)

    spec = IntegrationSpec(abs_tol=1e-14, rel_tol=1e-10)
    edges = np.concatenate([[0.0], geometric_grid(depth)])
    cells = [integrate(integrand, lo, hi, spec)[0] for lo, hi in zip(edges[:-1], edges[1:])]
    partial = np.cumsum(cells)
    series = classify_increments(cells)
    if series.kind != DivergenceKind.FINITE:
        return NormResult(symbol=g.id, p=p, method=NormMethod.INTEGRAL, verdict=series.kind,
                          partial_sums=partial.tolist(), rate=series.rate)
    total = float(partial[-1] + series.tail)
    return NormResult(symbol=g.id, p=p, method=NormMethod.INTEGRAL, verdict=DivergenceKind.FINITE,
                      value=total ** (1.0 / p), partial_sums=partial.tolist(), extrapolated=True)


def bnorm(
    g: Symbol,
    p: float,
    method: NormMethod = NormMethod.BLOCKS,
    n_max: int = 20,
    depth: int = 14,
    extrapolate: bool = True,
) -> NormResult:
    """‖g - g(0)‖_{B(2,p)} by the dyadic block formula or by integral means.

    Blocks: (Σ_n B_n^(p/2))^(1/p), or sup_n B_n^(1/2) for p = inf.
    Integral: (∫_0^1 M_2(r,g')^p (1-r)^(p/2-1) dr)^(1/p), or
    sup_r M_2(r,g')(1-r)^(1/2) for p = inf.

    With extrapolate=False the blocks method returns the plain partial norm
    over n <= n_max.

    Raises:
        InputError: p <= 0.
    """
    _check_p(p)
    method = NormMethod(method)
    if method == NormMethod.BLOCKS:
        result = _blocks_norm(g, p, n_max, extrapolate)
    else:
        result = _integral_norm(g, p, depth)
    if not result.is_finite:
        logger.info("B(2,%s) norm of %s: %s", format_p(p), g.id, result.verdict.value)
    return result


def little_oh_verdict(g: Symbol, n_max: int = 20) -> LittleOhVerdict:
    """g in b(2,inf) iff B_n decays over the last n_max/2 blocks.

    The slope is fitted to log2 B_n against log2(n+1), so both geometric
    decay and decay like a power of n count; slope < -0.1 is membership.
    """
    if n_max < 10:
        raise InputError(f"little-oh verdict needs n_max >= 10, got {n_max}", "symbols")
    blocks = block_values(g, n_max)
    size = n_max // 2
    tail = blocks[-size:]
    if np.all(tail == 0.0):
        return LittleOhVerdict(
            symbol=g.id, member=True, slope=-math.inf, regressor=LITTLE_OH_REGRESSOR, trail=blocks.tolist()
        )
    with np.errstate(divide="ignore"):
        logs = np.log2(np.maximum(tail, 1e-300))
    n = np.arange(n_max - size + 1, n_max + 1, dtype=float)
    slope, _, _ = fit_line(np.log2(n + 1.0), logs)
    return LittleOhVerdict(
        symbol=g.id,
        member=slope < LITTLE_OH_SLOPE,
        slope=slope,
        regressor=LITTLE_OH_REGRESSOR,
        threshold=LITTLE_OH_SLOPE,
        trail=blocks.tolist(),
    )
