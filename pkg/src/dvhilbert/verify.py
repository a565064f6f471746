"""
Verification suites.

Each suite binds weights, symbols and exponents into scenarios; every
scenario ends in named assertions carrying the computed value, the bound it
was held to and a verdict. Refusals inside a scenario become assertion rows
instead of aborting the report.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, TextIO

import mpmath
import numpy as np
from scipy.linalg import svdvals

from . import __version__
from .config import CliConfig, TolerancesSection, dump_config, get_settings
from .errors import DegenerateBlock, DvHilbertError, HypothesisError, NumericalError
from .operators import (
    eqp2_column_norm_sq,
    f_n,
    hg_apply,
    hg_column,
    hg_matrix,
    hilbert_discretized,
    hilbert_norm_estimate,
    phi_lower_bound,
    phi_probe,
    sigma_pairings,
)
from .quadrature import integrate
from .schatten import hilbert_matrix_spectrum, log_growth_fit, schatten_norm, singular_values, sweep
from .schemas import (
    AssertionResult,
    BasisKind,
    ConditionVerdict,
    NormMethod,
    Precision,
    Report,
    ScenarioResult,
    SuiteId,
    SuiteResult,
    SweepTable,
    Verdict,
    format_p,
)
from .spaces import basis_element, bergman_lift, dv_inner, fejer_ratio, hl_checks, polynomial_corpus
from .suites import suite_params
from .symbols import bnorm, little_oh_verdict, parse_symbol
from .utils import content_key, format_number, relative_change
from .weights import (
    BergmanLiftedWeight,
    StandardWeight,
    bergman_condition,
    condition_report,
    lemma_checks,
    parse_weight,
    welldef_constant,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["suite", "scenario", "assertion", "anchor", "value", "bound", "verdict"]


class Scenario:
    """Collects the assertions of one scenario."""

    def __init__(self, name: str):
        self.name = name
        self.assertions: List[AssertionResult] = []

    def record(
        self,
        name: str,
        anchor: str,
        criterion: str,
        verdict: Verdict,
        value: Optional[float] = None,
        bound: Optional[float] = None,
        detail: Optional[str] = None,
    ) -> None:
        self.assertions.append(AssertionResult(
            name=name, anchor=anchor, criterion=criterion, verdict=verdict,
            value=value, bound=bound, detail=detail,
        ))

    def check(
        self,
        name: str,
        anchor: str,
        criterion: str,
        ok: bool,
        value: Optional[float] = None,
        bound: Optional[float] = None,
        detail: Optional[str] = None,
    ) -> None:
        if value is not None and math.isnan(value):
            self.record(name, anchor, criterion, Verdict.INDETERMINATE, None, bound, detail or "value is NaN")
            return
        self.record(name, anchor, criterion, Verdict.PASS if ok else Verdict.FAIL, value, bound, detail)

    @contextmanager
    def guard(self, name: str, anchor: str, control: bool = False) -> Iterator[None]:
        """Turn a refusal into an assertion row."""
        try:
            yield
        except HypothesisError as exc:
            verdict = Verdict.OUTSIDE if control else Verdict.FAIL
            self.record(name, anchor, "hypotheses hold", verdict, detail=str(exc))
        except NumericalError as exc:
            logger.warning("%s / %s: %s", self.name, name, exc)
            self.record(name, anchor, "computation converges", Verdict.INDETERMINATE, detail=str(exc))
        except DvHilbertError as exc:
            self.record(name, anchor, "inputs accepted", Verdict.FAIL, detail=str(exc))

    def result(self) -> ScenarioResult:
        return ScenarioResult(name=self.name, assertions=self.assertions)


@dataclass
class SuiteContext:
    params: Dict[str, Any]
    tolerances: TolerancesSection
    workers: int = 1
    scenarios: List[Scenario] = field(default_factory=list)

    def scenario(self, name: str) -> Scenario:
        scenario = Scenario(name)
        self.scenarios.append(scenario)
        logger.info("scenario %s", name)
        return scenario


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def _spread(values: Sequence[float]) -> float:
    finite = [v for v in values if v is not None and math.isfinite(v) and v > 0.0]
    if len(finite) < len(values) or not finite:
        return math.inf
    return max(finite) / min(finite)


# weight-lemmas


def _weight_lemmas(ctx: SuiteContext) -> None:
    p = ctx.params
    anchor = "closed-form tails and moments of standard weights"
    for alpha in p["alphas"]:
        s = ctx.scenario(f"closed forms std:{alpha:g}")
        w = StandardWeight(alpha)
        a1 = mpmath.mpf(alpha) + 1
        with s.guard("tail", anchor), mpmath.workdps(30):
            errors = [
                _rel(w.tail(r), float((1 - mpmath.mpf(r)) ** a1 / a1)) for r in p["tail_rs"]
            ]
            s.check("tail", anchor, "relative error <= 1e-10", max(errors) <= 1e-10, max(errors), 1e-10)
        with s.guard("moments", anchor), mpmath.workdps(30):
            errors = [_rel(float(w.moment(x)), float(mpmath.beta(x + 1, a1))) for x in p["moment_xs"]]
            s.check("moments", anchor, "relative error <= 1e-10", max(errors) <= 1e-10, max(errors), 1e-10)
        with s.guard("moments by quadrature", anchor):
            errors = []
            for x in p["moment_xs"]:
                spec = ctx.tolerances.integration_spec().model_copy(update={"singular_at_1": alpha < 0.0})
                value, _ = integrate(lambda t, x=x: t ** x * w.density(t), 0.0, 1.0, spec)
                errors.append(_rel(value, float(w.moment(x))))
            s.check("moments by quadrature", anchor, "relative error <= 1e-8", max(errors) <= 1e-8, max(errors), 1e-8)
        with s.guard("extended moments", anchor):
            extended = StandardWeight(alpha, precision=Precision.EXTENDED)
            errors = [_rel(float(extended.moment(x)), float(w.moments(np.array([x]))[0])) for x in p["extended_xs"]]
            s.check("extended moments", anchor, "relative error <= 1e-8", max(errors) <= 1e-8, max(errors), 1e-8)

    anchor = "two-sided estimates for doubling weights"
    for spec in p["lemma_weights"]:
        control = spec in p["controls"]
        s = ctx.scenario(f"lemmas {spec}")
        with s.guard("lemma ratios", anchor, control=control):
            report = lemma_checks(parse_weight(spec))
            for name, series in report.series.items():
                spread = _spread(series.ratios)
                s.check(name, anchor, f"max/min <= {ctx.tolerances.bracket:g}", spread <= ctx.tolerances.bracket,
                        spread, ctx.tolerances.bracket)
            if control:
                s.check("control refused", anchor, "non-doubling weight is refused", False,
                        detail="lemma checks accepted a non-doubling control")


# muckenhoupt-dichotomy


def _verdict_matches(s: Scenario, name: str, anchor: str, verdict: ConditionVerdict, expected: bool) -> None:
    if verdict == ConditionVerdict.INDETERMINATE:
        s.record(name, anchor, "verdict determined", Verdict.INDETERMINATE)
        return
    finite = verdict == ConditionVerdict.FINITE
    s.check(name, anchor, "finite" if expected else "infinite", finite == expected,
            detail=f"verdict {verdict.value}")


def _muckenhoupt(ctx: SuiteContext) -> None:
    anchor = "both product conditions hold exactly for 0 < alpha < 2"
    for alpha in ctx.params["alphas"]:
        s = ctx.scenario(f"std:{alpha:g}")
        w = StandardWeight(alpha)
        with s.guard("conditions", anchor):
            report = condition_report(w, ctx.params["depth"])
            _verdict_matches(s, "M1 finite", anchor, report.m1.verdict, alpha > 0.0)
            _verdict_matches(s, "M2 finite", anchor, report.m2.verdict, alpha < 2.0)
            ratio = report.doubling.sup_ratio
            expected = 2.0 ** (alpha + 1.0)
            s.check("doubling ratio", "tail doubling of standard weights", "within 1% of 2^(alpha+1)",
                    _rel(ratio, expected) <= 0.01, ratio, expected)
            if alpha == 1.0:
                for name, value in (("M1 value", report.m1.value), ("M2 value", report.m2.value)):
                    ok = value is not None and abs(value - 1.0) <= 0.01
                    s.check(name, anchor, "1.00 +/- 0.01", ok, value, 1.0)


# hilbert-sandwich


def _hilbert_sandwich(ctx: SuiteContext) -> None:
    p, tol = ctx.params, ctx.tolerances
    anchor = "norm of the Hilbert operator between M2/M1 and M1*M2"
    for alpha in p["alphas"]:
        s = ctx.scenario(f"std:{alpha:g}")
        w = StandardWeight(alpha)
        with s.guard("discretized operator", anchor):
            tops = [float(svdvals(hilbert_discretized(w, D, p["J"]).entries)[0]) for D in p["D_list"]]
            monotone = all(b >= a * (1.0 - 1e-12) for a, b in zip(tops, tops[1:]))
            s.check("top singular value nondecreasing in D", anchor, "nondecreasing", monotone, tops[-1])
            change = relative_change(tops[-1], tops[-2])
            s.check("top singular value stabilizes", anchor, "relative change <= 5%",
                    change is not None and change <= 0.05, change, 0.05)
        with s.guard("probes", anchor):
            estimate = hilbert_norm_estimate(w, p["D_list"][-1], p["J"], p["radii"], p["depth"])
            for probe in estimate.probes:
                s.check(f"top >= probe r={probe.r:g}", anchor, "top singular value >= probe",
                        estimate.top_singular_value >= probe.value, probe.value, estimate.top_singular_value)
            if estimate.floor_shape is not None:
                s.check("floor shape", anchor, f"lower estimate * {tol.bracket:g} >= M2/M1",
                        estimate.lower_estimate * tol.bracket >= estimate.floor_shape,
                        estimate.lower_estimate, estimate.floor_shape)
                s.check("ceiling shape", anchor, f"lower estimate <= {tol.bracket:g} * M1*M2",
                        estimate.lower_estimate <= tol.bracket * estimate.ceiling_shape,
                        estimate.lower_estimate, estimate.ceiling_shape)
        if alpha == 1.0:
            with s.guard("probe lower bound", anchor):
                for r in p["bound_radii"]:
                    probe = phi_probe(w, r, p["depth"])
                    bound = phi_lower_bound(w, r, p["depth"])
                    s.check(f"probe lower bound r={r:g}", anchor, "‖H phi_r‖ >= bound",
                            probe.output_norm >= bound, probe.output_norm, bound)

    s = ctx.scenario(f"control std:{p['control_alpha']:g}")
    w = StandardWeight(p["control_alpha"])
    with s.guard("discretized operator refused", anchor, control=True):
        hilbert_discretized(w, 8, 8)
        s.check("discretized operator refused", anchor, "vg2 fails", False, detail="control accepted")
    with s.guard("probe trail grows", anchor, control=True):
        trail = [phi_probe(w, 0.5, depth).value for depth in p["control_depths"]]
        growing = all(b > a for a, b in zip(trail, trail[1:])) and trail[-1] > trail[0] * (1.0 + tol.stabilization)
        s.record("probe trail grows", anchor, "increasing without stabilizing",
                 Verdict.OUTSIDE if growing else Verdict.FAIL, trail[-1], trail[0])

    s = ctx.scenario("Hilbert matrix oracle")
    anchor = "classical Hilbert matrix norm pi"
    with s.guard("oracle", anchor):
        tops = [hilbert_matrix_spectrum(N).top for N in p["oracle_sizes"]]
        s.check("increasing in N", anchor, "strictly increasing", all(b > a for a, b in zip(tops, tops[1:])), tops[-1])
        s.check("bracket", anchor, "2 < top < pi", 2.0 < tops[-1] < math.pi, tops[-1], math.pi)


# hs-identity


def _hs_identity(ctx: SuiteContext) -> None:
    p = ctx.params
    N = p["N"]
    anchor = "Hilbert-Schmidt norm as a column-norm series"
    for alpha in p["alphas"]:
        w = StandardWeight(alpha)
        for spec in p["symbols"]:
            g = parse_symbol(spec)
            s = ctx.scenario(f"std:{alpha:g} {g.id} N={N}")
            with s.guard("S2 identity", anchor):
                M = hg_matrix(w, g, N, workers=ctx.workers)
                s2 = schatten_norm(singular_values(M, ctx.tolerances.svd_tol), 2.0)
                frob = float(np.linalg.norm(M.entries, "fro"))
                series = math.sqrt(sum(eqp2_column_norm_sq(w, g, n, rows=N) for n in range(N)))
                s.check("SVD vs column series", anchor, "relative difference <= 1e-8",
                        _rel(s2, series) <= 1e-8, s2, series)
                s.check("SVD vs Frobenius", anchor, "relative difference <= 1e-10",
                        _rel(s2, frob) <= 1e-10, s2, frob)
                errors = [
                    _rel(float(np.linalg.norm(M.entries[:, n])), hg_column(w, g, n, N - 1).norm(w))
                    for n in range(p["column_checks"])
                ]
                s.check("matrix columns vs coefficient action", "coefficient action of H_g",
                        "relative difference <= 1e-10", max(errors) <= 1e-10, max(errors), 1e-10)

        s = ctx.scenario(f"parseval std:{alpha:g}")
        anchor_basis = "orthonormal bases of D_v"
        g = parse_symbol(p["symbols"][1])
        for kind in BasisKind:
            with s.guard(f"{kind.value} basis", anchor_basis):
                elements = []
                for n in range(p["parseval_n"] + 1):
                    try:
                        elements.append(basis_element(w, kind, n, g))
                    except DegenerateBlock:
                        continue
                gram = np.array([[dv_inner(w, a, b) for b in elements] for a in elements])
                error = float(np.max(np.abs(gram - np.eye(len(elements)))))
                s.check(f"{kind.value} basis", anchor_basis, "Gram matrix = identity to 1e-10",
                        error <= 1e-10, error, 1e-10)

    s = ctx.scenario(f"control {p['control']}")
    with s.guard("matrix refused", anchor, control=True):
        hg_matrix(parse_weight(p["control"]), parse_symbol(p["symbols"][1]), 16)
        s.check("matrix refused", anchor, "M2 fails", False, detail="control accepted")


# schatten-equivalence


def _sweep_checks(s: Scenario, table: SweepTable, p_list: Sequence[float], tol: TolerancesSection, anchor: str) -> None:
    for p in p_list:
        rows = table.rows_for(p)
        change = rows[-1].rel_change
        if not rows[-1].truncation_converged:
            s.record(f"ratio stabilizes p={format_p(p)}", anchor, "truncation drops at most the allowed row mass",
                     Verdict.INDETERMINATE, rows[-1].truncation, tol.truncation,
                     detail=f"dropped row mass {rows[-1].truncation:.3g} of the Frobenius mass at N={rows[-1].N}")
            continue
        s.check(f"ratio stabilizes p={format_p(p)}", anchor,
                f"relative change <= {tol.stabilization:g} at the last doubling",
                change is not None and change <= tol.stabilization, change, tol.stabilization)
    violations = table.monotone_violations()
    s.check("compression monotonicity", "compressions never increase S_p norms", "no violations",
            violations == 0, float(violations), 0.0)


def _schatten_equivalence(ctx: SuiteContext) -> None:
    p, tol = ctx.params, ctx.tolerances
    anchor = "S_p norm of H_g comparable to the B(2,p) norm of g"
    for alpha in p["alphas"]:
        w = StandardWeight(alpha)
        finals: Dict[float, List[float]] = {q: [] for q in p["p_list"]}
        for spec in p["symbols"]:
            g = parse_symbol(spec)
            s = ctx.scenario(f"std:{alpha:g} {g.id}")
            with s.guard("sweep", anchor):
                table = sweep(w, g, p["p_list"], p["N_list"], ctx.workers, tol.svd_tol, tol.truncation)
                _sweep_checks(s, table, p["p_list"], tol, anchor)
                for q in p["p_list"]:
                    finals[q].append(table.rows_for(q)[-1].ratio)
        s = ctx.scenario(f"std:{alpha:g} family spread")
        for q, ratios in finals.items():
            spread = _spread(ratios) if len(ratios) == len(p["symbols"]) else math.nan
            s.check(f"spread p={format_p(q)}", anchor, f"max/min ratio <= {tol.spread:g}",
                    spread <= tol.spread, spread, tol.spread)

    s = ctx.scenario("std:1 log")
    w, g = StandardWeight(1.0), parse_symbol("log")
    anchor_log = "classical Hilbert operator is bounded but in no S_p"
    with s.guard("divergence law", anchor_log):
        table = sweep(w, g, p["log_p_list"], p["log_N_list"], ctx.workers, tol.svd_tol, tol.truncation)
        rows = table.rows_for(2.0)
        slope, _, r2 = log_growth_fit([row.N for row in rows], [row.s_p_norm ** 2 for row in rows])
        s.check("S2 squared affine in log2 N", anchor_log, "slope > 0 and R^2 > 0.99", slope > 0.0 and r2 > 0.99,
                r2, 0.99, detail=f"slope {slope:.6g}")
        for q in p["log_p_list"]:
            s.check(f"B(2,{format_p(q)}) diverges", anchor_log, "block norm diverges",
                    table.b_norm_divergent[format_p(q)])
        violations = table.monotone_violations()
        s.check("compression monotonicity", "compressions never increase S_p norms", "no violations",
                violations == 0, float(violations), 0.0)
        pairings = [abs(v) for v in sigma_pairings(w, g, p["sigma_blocks"]) if v is not None]
        trace = next(row.s_p_norm for row in table.rows_for(1.0) if row.N == p["sigma_N"])
        s.check("sigma pairings below trace norm", "pairings with orthonormal families bound S_1",
                f"sum <= S_1 at N={p['sigma_N']}", sum(pairings) <= trace, sum(pairings), trace)

    s = ctx.scenario(f"control {p['control']}")
    with s.guard("outside hypotheses", anchor, control=True):
        table = sweep(parse_weight(p["control"]), parse_symbol("pow:0.75"), [2.0], p["control_N_list"], ctx.workers)
        s.record("outside hypotheses", anchor, "table stamped outside hypotheses",
                 Verdict.OUTSIDE if table.outside_hypotheses else Verdict.FAIL,
                 detail=", ".join(table.failed_conditions))


# compactness-dichotomy


def _compactness(ctx: SuiteContext) -> None:
    p, tol = ctx.params, ctx.tolerances
    anchor = "H_g compact iff g in b(2,inf)"
    for spec, member in [(x, True) for x in p["members"]] + [(x, False) for x in p["non_members"]]:
        g = parse_symbol(spec)
        s = ctx.scenario(g.id)
        with s.guard("little-oh", anchor):
            verdict = little_oh_verdict(g, p["n_max"])
            s.check("little-oh", anchor, "member" if member else "not a member", verdict.member == member,
                    verdict.slope, verdict.threshold,
                    detail=f"slope of log2 B_n against {verdict.regressor}: {verdict.slope:.4g}")
        with s.guard("bounded", "H_g bounded iff g in B(2,inf)"):
            result = bnorm(g, math.inf, NormMethod.BLOCKS, p["n_max"])
            s.check("bounded", "H_g bounded iff g in B(2,inf)", "B(2,inf) norm finite", result.is_finite, result.value)

    s = ctx.scenario("std:1 log truncations")
    anchor_bounded = "H_g bounded iff g in B(2,inf)"
    with s.guard("top singular value bounded", anchor_bounded):
        g = parse_symbol("log")
        table = sweep(StandardWeight(1.0), g, [math.inf], p["bounded_N_list"], ctx.workers, tol.svd_tol, tol.truncation)
        last = table.rows[-1]
        s.check("top singular value bounded", anchor_bounded, f"s_max <= {tol.bracket:g} * B(2,inf) norm",
                last.s_p_norm <= tol.bracket * last.b_norm_matched, last.s_p_norm, last.b_norm_matched)


# bergman-corollary


def _bergman(ctx: SuiteContext) -> None:
    p, tol = ctx.params, ctx.tolerances
    anchor = "Schatten classes of H_g on weighted Bergman spaces"
    omega = parse_weight(p["omega"])
    s = ctx.scenario(f"lift of {omega.id}")
    with s.guard("lift", anchor):
        lift = bergman_lift(omega)
        report = condition_report(lift.v)
        s.check("lift M1 finite", anchor, "finite", report.m1.is_finite, report.m1.value)
        s.check("lift M2 finite", anchor, "finite", report.m2.is_finite, report.m2.value)
        s.check("Bergman condition", anchor, "finite", lift.m2cond.is_finite, lift.m2cond.value)
        spread = lift.ratio_spread()
        s.check("norm equivalence", anchor, f"ratio spread <= {tol.bracket:g}", spread <= tol.bracket, spread,
                tol.bracket)
        if isinstance(omega, StandardWeight):
            a = omega.alpha
            exact = [_rel(lift.v.tail(r), (1.0 - r) ** (a + 2.0) / (a + 2.0)) for r in p["tail_rs"]]
            s.check("lift tail exact", anchor, "relative error <= 1e-10", max(exact) <= 1e-10, max(exact), 1e-10)
            quoted = [lift.v.tail(r) / ((1.0 - r) ** (a + 2.0) / ((a + 1.0) * (a + 2.0))) for r in p["tail_rs"]]
            s.check("lift tail comparable", anchor, "constant ratio to the quoted closed form",
                    _spread(quoted) <= 1.0 + 1e-10, quoted[0], a + 1.0)
    with s.guard("sweep", anchor):
        table = sweep(BergmanLiftedWeight(omega), parse_symbol(p["symbol"]), p["p_list"], p["N_list"],
                      ctx.workers, tol.svd_tol, tol.truncation)
        _sweep_checks(s, table, p["p_list"], tol, anchor)

    s = ctx.scenario(f"control {p['control']}")
    with s.guard("Bergman condition fails", anchor, control=True):
        value = bergman_condition(parse_weight(p["control"]))
        s.record("Bergman condition fails", anchor, "condition infinite",
                 Verdict.OUTSIDE if value.verdict == ConditionVerdict.INFINITE else Verdict.FAIL,
                 detail=f"verdict {value.verdict.value}")


# hardy-littlewood


def _hardy_littlewood(ctx: SuiteContext) -> None:
    p, tol = ctx.params, ctx.tolerances
    anchor = "integral means of |f| on radii bounded by the D_v norm"
    corpus = polynomial_corpus()
    g = parse_symbol(p["fn_symbol"])
    for alpha in p["alphas"]:
        w = StandardWeight(alpha)
        s = ctx.scenario(f"std:{alpha:g}")
        with s.guard("corpus", anchor):
            checks = [hl_checks(w, f, spec=tol.integration_spec()) for f in corpus]
            worst = max(c.fejer_ratio / c.welldef_bound for c in checks)
            s.check("Fejer bound", anchor, "∫|f| <= C(v)‖f‖ on the corpus", worst <= 1.0, worst, 1.0)
            ratios = [c.hl_ratio for c in checks]
            limit = tol.bracket * condition_report(w).m1.value ** 2
            s.check("Hardy-Littlewood bound", anchor,
                    f"∫M_∞²V̂₂ / ‖f‖² <= {tol.bracket:g}·M1² on the corpus", max(ratios) <= limit, max(ratios), limit)
            s.record("Hardy-Littlewood spread", anchor, "reported, not asserted", Verdict.PASS, _spread(ratios),
                     detail="max/min of ∫M_∞²V̂₂ / ‖f‖² over the corpus")
        with s.guard("f_N family", anchor):
            bound = welldef_constant(w)
            ratios, fejer = [], []
            for N in p["fn_levels"]:
                _, series = f_n(w, N)
                fejer.append(fejer_ratio(w, series))
                image = hg_apply(w, g, series, 2 ** (N + 1) - 1)
                block = float(g.g_tilde(2 ** (N + 1) + 1)[2 ** N + 1:].sum()) / 2.0 ** N
                ratios.append(image.norm(w) ** 2 / block)
            s.check("f_N Fejer bound", anchor, "fejer ratio <= C(v)", max(fejer) <= bound, max(fejer), bound)
            spread = _spread(ratios)
            s.check("f_N block lower bound", "test functions detecting one dyadic block",
                    f"‖H_g f_N‖² / block mean within a factor {tol.bracket:g}", spread <= tol.bracket,
                    spread, tol.bracket)

    s = ctx.scenario(f"control {p['control']}")
    with s.guard("refused", anchor, control=True):
        hl_checks(parse_weight(p["control"]), corpus[1])
        s.check("refused", anchor, "M1 fails", False, detail="control accepted")


RUNNERS = {
    SuiteId.WEIGHT_LEMMAS: _weight_lemmas,
    SuiteId.MUCKENHOUPT_DICHOTOMY: _muckenhoupt,
    SuiteId.HILBERT_SANDWICH: _hilbert_sandwich,
    SuiteId.HS_IDENTITY: _hs_identity,
    SuiteId.SCHATTEN_EQUIVALENCE: _schatten_equivalence,
    SuiteId.COMPACTNESS_DICHOTOMY: _compactness,
    SuiteId.BERGMAN_COROLLARY: _bergman,
    SuiteId.HARDY_LITTLEWOOD: _hardy_littlewood,
}


def run_suite(
    suite: SuiteId,
    config: Optional[CliConfig] = None,
    profile: str = "full",
    workers: int = 1,
) -> SuiteResult:
    """Run one pinned suite; never raises for refusals inside scenarios."""
    suite = SuiteId(suite)
    config = config or CliConfig()
    ctx = SuiteContext(suite_params(suite, profile), config.tolerances, workers)
    logger.info("suite %s (%s) started", suite.value, profile)
    RUNNERS[suite](ctx)
    result = SuiteResult(id=suite, scenarios=[s.result() for s in ctx.scenarios])
    logger.info("suite %s finished: %d pass, %d fail", suite.value, result.count(Verdict.PASS),
                result.count(Verdict.FAIL))
    return result


def run_suites(
    suites: Sequence[SuiteId],
    config: Optional[CliConfig] = None,
    profile: str = "full",
    workers: Optional[int] = None,
) -> Report:
    """Run suites (concurrently when workers > 1) and assemble the report in the given order."""
    config = config or CliConfig()
    workers = workers or config.sweep.workers or get_settings().workers
    suites = [SuiteId(s) for s in suites]
    if workers > 1 and len(suites) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(suites))) as pool:
            results = list(pool.map(lambda sid: run_suite(sid, config, profile, 1), suites))
    else:
        results = [run_suite(sid, config, profile, workers) for sid in suites]
    return Report(
        version=__version__,
        config_hash=content_key(dump_config(config), profile),
        suites=results,
    )


def report_rows(report: Report) -> Iterator[Dict[str, str]]:
    for suite in report.suites:
        for scenario in suite.scenarios:
            for a in scenario.assertions:
                yield {
                    "suite": suite.id.value,
                    "scenario": scenario.name,
                    "assertion": a.name,
                    "anchor": a.anchor,
                    "value": format_number(a.value),
                    "bound": format_number(a.bound),
                    "verdict": a.verdict.value,
                }


def write_csv(report: Report, stream: TextIO) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(report_rows(report))
