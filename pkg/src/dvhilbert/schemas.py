from pydantic import BaseModel, Field, ConfigDict, field_validator
from typing import Optional, List, Dict, Tuple, Any
from enum import Enum
import math


# 判定相关枚举
class DivergenceKind(str, Enum):
    FINITE = "finite"
    DIVERGING = "diverging"
    INDETERMINATE = "indeterminate"


class RateKind(str, Enum):
    POWER = "power"
    LOG = "log"
    FASTER = "faster"


class ConditionVerdict(str, Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    INDETERMINATE = "indeterminate"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"
    OUTSIDE = "outside-hypotheses"


# 参数相关枚举
class Side(str, Enum):
    TOWARD_1 = "toward_1"
    TOWARD_0 = "toward_0"


class NormMethod(str, Enum):
    BLOCKS = "blocks"
    INTEGRAL = "integral"


class BasisKind(str, Enum):
    MONOMIAL = "monomial"
    BLOCK = "block"
    SIGMA = "sigma"


class Precision(str, Enum):
    DOUBLE = "double"
    EXTENDED = "extended"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    PLAIN = "plain"


class SuiteId(str, Enum):
    WEIGHT_LEMMAS = "weight-lemmas"
    MUCKENHOUPT_DICHOTOMY = "muckenhoupt-dichotomy"
    HILBERT_SANDWICH = "hilbert-sandwich"
    HS_IDENTITY = "hs-identity"
    SCHATTEN_EQUIVALENCE = "schatten-equivalence"
    COMPACTNESS_DICHOTOMY = "compactness-dichotomy"
    BERGMAN_COROLLARY = "bergman-corollary"
    HARDY_LITTLEWOOD = "hardy-littlewood"


class _Model(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")


# 积分相关模型
class IntegrationSpec(_Model):
    abs_tol: float = Field(1e-12, gt=0)
    rel_tol: float = Field(1e-10, gt=0)
    max_panels: int = Field(500, ge=4)
    singular_at_0: bool = False
    singular_at_1: bool = False
    # f is multiplied by (s - a)^e0 (b - s)^e1
    endpoint_exponents: Optional[Tuple[float, float]] = None

    @field_validator("endpoint_exponents")
    @classmethod
    def _integrable(cls, v: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if v is not None and min(v) <= -1.0:
            raise ValueError("endpoint exponents must exceed -1")
        return v


class Rate(_Model):
    kind: RateKind
    exponent: Optional[float] = None

    def describe(self) -> str:
        if self.kind == RateKind.POWER:
            return f"power({self.exponent:.3g})"
        return self.kind.value


class DivergenceVerdict(_Model):
    kind: DivergenceKind
    value: Optional[float] = None
    error: Optional[float] = None
    rate: Optional[Rate] = None
    slope: Optional[float] = None
    trail: List[Tuple[float, float]] = Field(default_factory=list)

    @property
    def is_finite(self) -> bool:
        return self.kind == DivergenceKind.FINITE

    def describe(self) -> str:
        if self.kind == DivergenceKind.FINITE:
            return f"finite({self.value:.10g})"
        if self.kind == DivergenceKind.DIVERGING:
            return f"diverging, rate {self.rate.describe() if self.rate else 'unknown'}"
        return "indeterminate"


class GridSup(_Model):
    sup: float
    arg: float
    trail: List[Tuple[float, float]]
    unbounded: bool = False
    limit: Optional[float] = None

    @property
    def estimate(self) -> float:
        """Limit value when the supremum is approached at r -> 1, else the grid sup."""
        if self.limit is not None:
            return max(self.limit, self.sup)
        return self.sup


# 权重相关模型
class DoublingReport(_Model):
    verdict: bool
    sup_ratio: float
    beta_estimate: float = Field(..., ge=0)
    beta_residual: float = 0.0
    trail: List[Tuple[float, float]] = Field(default_factory=list)


class ConditionValue(_Model):
    verdict: ConditionVerdict
    value: Optional[float] = None
    trail: List[Tuple[float, float]] = Field(default_factory=list)
    note: Optional[str] = None

    @property
    def is_finite(self) -> bool:
        return self.verdict == ConditionVerdict.FINITE


class ConditionReport(_Model):
    weight: str
    doubling: DoublingReport
    m1: ConditionValue
    m2: ConditionValue
    m3: ConditionValue
    m4: ConditionValue
    vg2: DivergenceVerdict
    grid_depth: int

    @property
    def hypotheses_hold(self) -> bool:
        """Doubling with finite M1 and M2."""
        return self.doubling.verdict and self.m1.is_finite and self.m2.is_finite

    @property
    def failed_conditions(self) -> List[str]:
        failed = []
        if not self.doubling.verdict:
            failed.append("doubling")
        if not self.m1.is_finite:
            failed.append("M1")
        if not self.m2.is_finite:
            failed.append("M2")
        if not self.vg2.is_finite:
            failed.append("vg2")
        return failed


class RatioSeries(_Model):
    name: str
    points: List[float]
    ratios: List[Optional[float]]
    min: Optional[float] = None
    max: Optional[float] = None


class LemmaReport(_Model):
    weight: str
    q: float
    series: Dict[str, RatioSeries]


# 符号相关模型
class BlockProfile(_Model):
    symbol: str
    n_max: int
    values: List[float]
    convention: str = "I(n) = [2^n, 2^(n+1))"


class NormResult(_Model):
    symbol: str
    p: float
    method: NormMethod
    verdict: DivergenceKind
    value: Optional[float] = None
    partial_sums: List[float] = Field(default_factory=list)
    extrapolated: bool = False
    rate: Optional[Rate] = None

    @property
    def is_finite(self) -> bool:
        return self.verdict == DivergenceKind.FINITE


class LittleOhVerdict(_Model):
    symbol: str
    member: bool
    slope: float
    # the slope is of log2 B_n against this regressor
    regressor: str = "log2(n+1)"
    threshold: float = -0.1
    trail: List[float]


# 函数空间相关模型
class HLChecks(_Model):
    fejer_ratio: float
    hl_ratio: float
    welldef_bound: float
    circle_samples: int


class EquivalenceSample(_Model):
    label: str
    ratio: float
    hl_ratio: Optional[float] = None


# 算子相关模型
class TruncationDiagnostics(_Model):
    frobenius_sq: float
    dropped_row_mass: float
    relative: float
    rows_probed: int
    threshold: float = 1e-6

    @property
    def converged(self) -> bool:
        return self.relative <= self.threshold


class ProbeValue(_Model):
    r: float
    value: float
    output_norm: float
    input_norm: float
    truncation: Optional[float] = None


class HilbertNormEstimate(_Model):
    weight: str
    top_singular_value: float
    probe_sup: float
    lower_estimate: float
    m1: Optional[float] = None
    m2: Optional[float] = None
    ceiling_shape: Optional[float] = None
    floor_shape: Optional[float] = None
    probes: List[ProbeValue] = Field(default_factory=list)


# Schatten 范数扫描模型
class SweepRow(_Model):
    N: int
    p: float
    s_p_norm: float
    b_norm: Optional[float] = None
    b_norm_matched: float
    ratio: float
    rel_change: Optional[float] = None
    quasi_norm: bool = False
    monotone: bool = True
    truncation: Optional[float] = None
    truncation_converged: bool = True


class SweepTable(_Model):
    weight: str
    symbol: str
    outside_hypotheses: bool = False
    failed_conditions: List[str] = Field(default_factory=list)
    b_norm_divergent: Dict[str, bool] = Field(default_factory=dict)
    rows: List[SweepRow] = Field(default_factory=list)

    def rows_for(self, p: float) -> List[SweepRow]:
        return [row for row in self.rows if row.p == p]

    def monotone_violations(self) -> int:
        return sum(1 for row in self.rows if not row.monotone)

    def unconverged(self, p: float) -> List[SweepRow]:
        return [row for row in self.rows_for(p) if not row.truncation_converged]


# 验证报告模型
class AssertionResult(_Model):
    name: str
    anchor: str
    criterion: str
    verdict: Verdict
    value: Optional[float] = None
    bound: Optional[float] = None
    detail: Optional[str] = None


class ScenarioResult(_Model):
    name: str
    assertions: List[AssertionResult] = Field(default_factory=list)


class SuiteResult(_Model):
    id: SuiteId
    scenarios: List[ScenarioResult] = Field(default_factory=list)

    def count(self, verdict: Verdict) -> int:
        return sum(
            1 for scenario in self.scenarios for a in scenario.assertions if a.verdict == verdict
        )


class Report(_Model):
    version: str
    config_hash: str
    suites: List[SuiteResult] = Field(default_factory=list)

    def count(self, verdict: Verdict) -> int:
        return sum(suite.count(verdict) for suite in self.suites)

    @property
    def total(self) -> int:
        return sum(len(s.assertions) for suite in self.suites for s in suite.scenarios)

    @property
    def passed(self) -> bool:
        return self.count(Verdict.FAIL) == 0


# 基础响应模型
class CommandResponse(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    code: int = 0
    message: str = "success"
    success: bool = True
    data: Any = None


def parse_p(value: Any) -> float:
    """Parse an exponent p; accepts 'inf'/'infinity'."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "∞"):
            return math.inf
        value = float(text)
    return float(value)


def format_p(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"
