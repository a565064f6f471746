"""
Hilbert-space geometry: the D_v inner product on coefficient sequences,
L²_{V̂₂} on the radius, the orthonormal bases, Hardy-Littlewood type
checks and the Bergman-space reduction.

The inner product carries the factor 2 throughout:
<f, h> = f̂(0)ĥ(0) + 2 Σ_k k² f̂(k) ĥ(k) v_(2k-1).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateBlock, DivergentQuantity, HypothesisError, InputError
from .quadrature import divergence_probe, integrate
from .schemas import (
    BasisKind,
    ConditionValue,
    EquivalenceSample,
    HLChecks,
    IntegrationSpec,
    Side,
)
from .symbols import Symbol
from .weights import (
    BergmanLiftedWeight,
    RadialWeight,
    bergman_condition,
    condition_report,
    require_doubling,
    welldef_constant,
)

logger = logging.getLogger(__name__)

MIN_CIRCLE_SAMPLES = 16
CIRCLE_TOLERANCE = 1e-6
CORPUS_SIZE = 20
CORPUS_DEGREE = 9


@dataclass(frozen=True)
class CoefficientFunction:
    """f(z) = Σ_k f̂(k) z^k, a polynomial or a truncated power series."""

    coefficients: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.array(self.coefficients, dtype=float).reshape(-1)
        if values.size == 0:
            values = np.zeros(1)
        if not np.all(np.isfinite(values)):
            raise InputError(f"coefficient function {self.label or ''} has non-finite entries", "spaces")
        values.setflags(write=False)
        object.__setattr__(self, "coefficients", values)

    @classmethod
    def monomial(cls, n: int, scale: float = 1.0) -> "CoefficientFunction":
        values = np.zeros(n + 1)
        values[n] = scale
        return cls(values, label=f"z^{n}")

    @property
    def degree(self) -> int:
        nonzero = np.flatnonzero(self.coefficients)
        return int(nonzero[-1]) if nonzero.size else 0

    def __len__(self) -> int:
        return len(self.coefficients)

    def evaluate(self, z) -> np.ndarray:
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    def scaled(self, c: float) -> "CoefficientFunction":
        return CoefficientFunction(c * self.coefficients, self.label)

    def norm(self, w: RadialWeight) -> float:
        return math.sqrt(dv_inner(w, self, self))


@dataclass(frozen=True)
class RadialFunction:
    """A function on (0, 1) given by a vectorized evaluator.

    `breakpoints` lists interior jumps; `norm_sq`, when known, is the exact
    squared L²_{V̂₂} norm.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    breakpoints: Tuple[float, ...] = ()
    support: Tuple[float, float] = (0.0, 1.0)
    norm_sq: Optional[float] = None

    def __call__(self, t) -> np.ndarray:
        return self.evaluator(np.asarray(t, dtype=float))


# Inner products and norms


def dv_inner(w: RadialWeight, f: CoefficientFunction, h: CoefficientFunction) -> float:
    """<f, h>_{D_v} = f̂(0)ĥ(0) + 2 Σ_k k² f̂(k) ĥ(k) v_(2k-1)."""
    n = min(len(f), len(h))
    a, b = f.coefficients[:n], h.coefficients[:n]
    value = float(a[0] * b[0])
    if n > 1:
        k = np.arange(1, n, dtype=float)
        value += float(2.0 * np.sum(k * k * a[1:] * b[1:] * w.moments(2.0 * k - 1.0)))
    return value


def dv_norm(w: RadialWeight, f: CoefficientFunction) -> float:
    return f.norm(w)


def monomial_norms(w: RadialWeight, count: int) -> np.ndarray:
    """‖z^j‖_{D_v} for j = 0..count-1."""
    j = np.arange(count, dtype=float)
    log_norms = 0.5 * (math.log(2.0) + 2.0 * np.log(np.maximum(j, 1.0)) + w.log_moments(np.maximum(2.0 * j - 1.0, 0.0)))
    log_norms[0] = 0.0
    return np.exp(log_norms)


def l2v2_norm(w: RadialWeight, phi: RadialFunction, depth: int = 24) -> float:
    """(∫_0^1 φ(t)² V̂₂(t) dt)^(1/2).

    Raises:
        DivergentQuantity: the integral diverges at t = 1.
    """
    def integrand(t: np.ndarray) -> np.ndarray:
        return phi(t) ** 2 * w.vhat(t, 2.0)

    lo, hi = phi.support
    if hi < 1.0:
        spec = IntegrationSpec(abs_tol=1e-15, rel_tol=1e-11)
        value, _ = integrate(integrand, lo, hi, spec, phi.breakpoints)
        return math.sqrt(value)
    verdict = divergence_probe(integrand, Side.TOWARD_1, depth, points=phi.breakpoints)
    if not verdict.is_finite:
        raise DivergentQuantity(f"L2(V2) norm of {phi.label or 'function'} under {w.id}", verdict, "spaces")
    return math.sqrt(verdict.value)


# Bases


def _block_range(n: int) -> range:
    """Indices k with k + 1 in I(n)."""
    return range(2 ** n - 1, 2 ** (n + 1) - 1)


def basis_element(
    w: RadialWeight,
    kind: BasisKind,
    n: int,
    g: Optional[Symbol] = None,
) -> CoefficientFunction:
    """Orthonormal element e_n (monomial or block) or σ_n(g).

    Raises:
        InputError: n < 0, or sigma without a symbol.
        DegenerateBlock: sigma on a block where ĝ vanishes.
    """
    kind = BasisKind(kind)
    if n < 0:
        raise InputError(f"basis index must be >= 0, got {n}", "spaces")
    if kind == BasisKind.MONOMIAL:
        if n == 0:
            return CoefficientFunction(np.ones(1), label="e_0")
        norm = monomial_norms(w, n + 1)[n]
        return CoefficientFunction.monomial(n, 1.0 / norm)

    ks = np.arange(_block_range(n).start, _block_range(n).stop)
    if kind == BasisKind.BLOCK:
        values = np.zeros(ks[-1] + 1)
        values[ks] = 1.0
        label = f"block_{n}"
    else:
        if g is None:
            raise InputError("sigma basis needs a symbol", "spaces")
        shifted = g.coefficients(ks[-1] + 2)[ks + 1]
        values = np.zeros(ks[-1] + 1)
        values[ks] = (ks + 1.0) * shifted
        label = f"sigma_{n}[{g.id}]"
    f = CoefficientFunction(values, label=label)
    norm_sq = dv_inner(w, f, f)
    if not norm_sq > 0.0:
        raise DegenerateBlock(f"{label} vanishes on block {n} under {w.id}", "spaces")
    return f.scaled(1.0 / math.sqrt(norm_sq))


# Hardy-Littlewood type checks


def m_infinity(f: CoefficientFunction, s: np.ndarray, samples: int = MIN_CIRCLE_SAMPLES) -> Tuple[np.ndarray, int]:
    """max_θ |f(s e^iθ)| for each radius s.

    Nonnegative coefficients give M_∞(s, f) = f(s) exactly; otherwise the
    circle is sampled at >= 4·degree points, doubling until the maxima
    change by less than 1e-6 relative.

    Returns:
        (values, samples used)
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.all(f.coefficients >= 0.0):
        return f.evaluate(s), 0
    count = max(samples, 4 * max(f.degree, 1))
    previous = None
    while True:
        theta = 2.0 * np.pi * np.arange(count) / count
        z = s[:, None] * np.exp(1j * theta)[None, :]
        current = np.abs(f.evaluate(z)).max(axis=1)
        if previous is not None:
            scale = np.maximum(np.abs(current), 1e-300)
            if np.max(np.abs(current - previous) / scale) < CIRCLE_TOLERANCE:
                return current, count
        previous, count = current, 2 * count
        if count > 1 << 16:
            return current, count // 2


def _abs_integral(f: CoefficientFunction) -> float:
    roots: List[float] = []
    if 0 < f.degree <= 64 and np.any(f.coefficients < 0.0):
        # sign changes of f on (0, 1) become breakpoints
        for root in np.roots(f.coefficients[: f.degree + 1][::-1]):
            if abs(root.imag) < 1e-12 and 0.0 < root.real < 1.0:
                roots.append(float(root.real))
    spec = IntegrationSpec(abs_tol=1e-15, rel_tol=1e-11)
    value, _ = integrate(lambda t: np.abs(f.evaluate(t)), 0.0, 1.0, spec, roots)
    return value


def fejer_ratio(w: RadialWeight, f: CoefficientFunction) -> float:
    """∫_0^1 |f(t)| dt / ‖f‖_{D_v}."""
    return _abs_integral(f) / f.norm(w)


def hl_checks(
    w: RadialWeight,
    f: CoefficientFunction,
    circle_samples: int = MIN_CIRCLE_SAMPLES,
    spec: Optional[IntegrationSpec] = None,
) -> HLChecks:
    """Fejér-type and Hardy-Littlewood type ratios for f under w.

    spec sets the tolerances of the radial integral; s = 1 is always treated
    as singular.

    Raises:
        HypothesisError: vg2 or M1 fails for w.
    """
    report = condition_report(w)
    if not report.vg2.is_finite:
        raise HypothesisError("vg2", w.id, "spaces", report.vg2.kind.value)
    if not report.m1.is_finite:
        raise HypothesisError("M1", w.id, "spaces", report.m1.verdict.value)
    norm_sq = dv_inner(w, f, f)
    if not norm_sq > 0.0:
        raise InputError("hl_checks needs a nonzero function", "spaces")
    used = [0]

    def integrand(s: np.ndarray) -> np.ndarray:
        values, count = m_infinity(f, s, circle_samples)
        used[0] = max(used[0], count)
        return values ** 2 * w.vhat(s, 2.0)

    spec = (spec or IntegrationSpec(abs_tol=1e-15, rel_tol=1e-9)).model_copy(update={"singular_at_1": True})
    hl, _ = integrate(integrand, 0.0, 1.0, spec)
    return HLChecks(
        fejer_ratio=_abs_integral(f) / math.sqrt(norm_sq),
        hl_ratio=hl / norm_sq,
        welldef_bound=welldef_constant(w),
        circle_samples=used[0],
    )


# Bergman reduction


def bergman_norm_sq(omega: RadialWeight, f: CoefficientFunction) -> float:
    """‖f‖²_{A²_ω} = Σ_k |f̂(k)|² 2ω_(2k+1)."""
    k = np.arange(len(f), dtype=float)
    return float(np.sum(f.coefficients ** 2 * 2.0 * omega.moments(2.0 * k + 1.0)))


def polynomial_corpus(seed: int = 0) -> List[CoefficientFunction]:
    """Monomials of degree 0..9 and ten seeded random polynomials of degree <= 9."""
    corpus = [CoefficientFunction.monomial(n) for n in range(CORPUS_DEGREE + 1)]
    rng = np.random.default_rng(seed)
    while len(corpus) < CORPUS_SIZE:
        degree = int(rng.integers(1, CORPUS_DEGREE + 1))
        values = rng.standard_normal(degree + 1)
        corpus.append(CoefficientFunction(values, label=f"random_{len(corpus) - CORPUS_DEGREE - 1}"))
    return corpus


@dataclass
class BergmanLift:
    omega: RadialWeight
    v: RadialWeight
    m2cond: ConditionValue
    samples: List[EquivalenceSample] = field(default_factory=list)

    def ratio_spread(self) -> float:
        ratios = [s.ratio for s in self.samples]
        return max(ratios) / min(ratios) if ratios else math.nan


def bergman_hl_ratio(omega: RadialWeight, f: CoefficientFunction) -> float:
    """∫_0^1 M_∞(r, f)² ω̂(r) dr / ‖f‖²_{A²_ω}."""
    spec = IntegrationSpec(abs_tol=1e-15, rel_tol=1e-9, singular_at_1=True)
    value, _ = integrate(lambda s: m_infinity(f, s)[0] ** 2 * omega.tail_at_distance(1.0 - s), 0.0, 1.0, spec)
    return value / bergman_norm_sq(omega, f)


def bergman_lift(
    omega: RadialWeight,
    corpus: Optional[Sequence[CoefficientFunction]] = None,
    depth: Optional[int] = None,
) -> BergmanLift:
    """Lift ω to v(r) = (1 - r)ω(r) and compare ‖f‖²_{A²_ω} with ‖f‖²_{D_v}.

    Raises:
        HypothesisError: ω is not doubling.
    """
    require_doubling(omega, "spaces", depth)
    v = BergmanLiftedWeight(omega)
    m2cond = bergman_condition(omega, depth)
    samples = []
    for f in corpus if corpus is not None else polynomial_corpus():
        ratio = bergman_norm_sq(omega, f) / dv_inner(v, f, f)
        samples.append(EquivalenceSample(label=f.label, ratio=ratio, hl_ratio=bergman_hl_ratio(omega, f)))
    logger.info("bergman lift %s -> %s: %d samples", omega.id, v.id, len(samples))
    return BergmanLift(omega=omega, v=v, m2cond=m2cond, samples=samples)
