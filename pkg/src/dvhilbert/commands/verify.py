"""
`verify <suite|all>`: run pinned suites and write the report.
"""

from ..config import CliConfig
from ..errors import VerificationFailed
from ..schemas import SuiteId, Verdict
from ..suites import PROFILES
from ..verify import CSV_COLUMNS, report_rows, run_suites
from .output import emit

SUMMARY_COLUMNS = ["suite", "scenario", "pass", "fail", "indeterminate", "outside"]


def register_commands(sub, common) -> None:
    parser = sub.add_parser("verify", parents=[common], help="run verification suites")
    parser.add_argument("suite", choices=[s.value for s in SuiteId] + ["all"])
    parser.add_argument("--profile", choices=sorted(PROFILES), default="full")
    parser.set_defaults(func=verify_command)


def _summary(report) -> list:
    rows = []
    for suite in report.suites:
        for scenario in suite.scenarios:
            verdicts = [a.verdict for a in scenario.assertions]
            rows.append({
                "suite": suite.id.value,
                "scenario": scenario.name,
                "pass": verdicts.count(Verdict.PASS),
                "fail": verdicts.count(Verdict.FAIL),
                "indeterminate": verdicts.count(Verdict.INDETERMINATE),
                "outside": verdicts.count(Verdict.OUTSIDE),
            })
    return rows


def verify_command(args, config: CliConfig) -> int:
    suites = list(SuiteId) if args.suite == "all" else [SuiteId(args.suite)]
    report = run_suites(suites, config, args.profile, config.sweep.workers)
    failed = report.count(Verdict.FAIL)
    message = "success" if failed == 0 else f"{failed} assertion(s) failed"
    if config.output.format.value == "csv":
        emit(config.output, report, list(report_rows(report)), CSV_COLUMNS, message)
    else:
        emit(config.output, report, _summary(report), SUMMARY_COLUMNS, message)
    if failed:
        raise VerificationFailed(failed, report.total)
    return 0
