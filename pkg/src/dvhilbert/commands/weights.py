"""
`weights report`: doubling, product conditions and vg2 per weight.
"""

import logging

from ..config import CliConfig
from ..errors import HypothesisError
from ..schemas import ConditionReport
from ..weights import condition_report, lemma_checks, parse_weight
from .output import emit

logger = logging.getLogger(__name__)

COLUMNS = [
    "weight", "doubling", "doubling_ratio", "beta", "m1", "m1_verdict", "m2", "m2_verdict",
    "m3", "m4", "vg2", "failed_conditions",
]


def register_commands(sub, common) -> None:
    group = sub.add_parser("weights", help="radial weight diagnostics")
    actions = group.add_subparsers(dest="action", required=True)
    report = actions.add_parser("report", parents=[common], help="doubling, M1-M4 and vg2 for each weight")
    report.add_argument("--weight", action="append", help="std:<a>, bergman:<spec>, exp:<c>:<g> or table:<path>")
    report.add_argument("--depth", type=int, help="dyadic grid depth for the condition suprema")
    report.add_argument("--lemmas", action="store_true", help="also run the two-sided weight estimates")
    report.set_defaults(func=report_command)


def _row(report: ConditionReport) -> dict:
    return {
        "weight": report.weight,
        "doubling": report.doubling.verdict,
        "doubling_ratio": report.doubling.sup_ratio,
        "beta": report.doubling.beta_estimate,
        "m1": report.m1.value,
        "m1_verdict": report.m1.verdict.value,
        "m2": report.m2.value,
        "m2_verdict": report.m2.verdict.value,
        "m3": report.m3.value,
        "m4": report.m4.value,
        "vg2": report.vg2.kind.value,
        "failed_conditions": ";".join(report.failed_conditions),
    }


def report_command(args, config: CliConfig) -> int:
    rows, data = [], []
    for spec in config.weights.specs:
        w = parse_weight(spec, config.weights.precision)
        report = condition_report(w, config.weights.depth)
        entry = {"conditions": report}
        if args.lemmas:
            try:
                entry["lemmas"] = lemma_checks(w)
            except HypothesisError as exc:
                logger.warning("%s", exc)
                entry["lemmas"] = None
        data.append(entry)
        rows.append(_row(report))
    emit(config.output, data, rows, COLUMNS)
    return 0
