"""
`operator matrix` and `operator schatten`.
"""

from ..config import CliConfig, get_settings
from ..operators import hg_matrix
from ..schatten import sweep
from ..schemas import BasisKind
from ..symbols import parse_symbol
from ..weights import parse_weight
from .output import emit

SWEEP_COLUMNS = [
    "weight", "symbol", "N", "p", "s_p_norm", "b_norm", "b_norm_matched", "ratio", "rel_change",
    "quasi_norm", "monotone", "truncation", "truncation_converged", "outside_hypotheses",
]


def register_commands(sub, common) -> None:
    group = sub.add_parser("operator", help="truncations of H_g and their Schatten norms")
    actions = group.add_subparsers(dest="action", required=True)

    matrix = actions.add_parser("matrix", parents=[common], help="N x N truncation of H_g")
    matrix.add_argument("--weight", action="append")
    matrix.add_argument("--symbol", action="append")
    matrix.add_argument("--N", help="truncation size (first value is used)")
    matrix.add_argument("--basis", choices=[BasisKind.MONOMIAL.value, BasisKind.BLOCK.value],
                        default=BasisKind.MONOMIAL.value)
    matrix.set_defaults(func=matrix_command)

    schatten = actions.add_parser("schatten", parents=[common], help="S_p norms against B(2,p) over N")
    schatten.add_argument("--weight", action="append")
    schatten.add_argument("--symbol", action="append")
    schatten.add_argument("--p", help="comma-separated exponents, inf allowed")
    schatten.add_argument("--N", help="comma-separated increasing truncation sizes")
    schatten.set_defaults(func=schatten_command)


def matrix_command(args, config: CliConfig) -> int:
    w = parse_weight(config.weights.specs[0], config.weights.precision)
    g = parse_symbol(config.symbols.specs[0])
    M = hg_matrix(w, g, config.sweep.n_list[0], BasisKind(args.basis),
                  workers=config.sweep.workers or get_settings().workers)
    columns = ["j"] + [str(n) for n in range(M.size)]
    rows = [{"j": j, **{str(n): float(v) for n, v in enumerate(row)}} for j, row in enumerate(M.entries)]
    data = {
        "weight": M.weight,
        "symbol": M.symbol,
        "basis": M.basis.value,
        "entries": M.entries.tolist(),
        "diagnostics": M.diagnostics,
    }
    emit(config.output, data, rows, columns)
    return 0


def schatten_command(args, config: CliConfig) -> int:
    workers = config.sweep.workers or get_settings().workers
    tables = [
        sweep(parse_weight(w_spec, config.weights.precision), parse_symbol(g_spec),
              config.sweep.p_list, config.sweep.n_list, workers, config.tolerances.svd_tol,
              config.tolerances.truncation)
        for w_spec in config.weights.specs
        for g_spec in config.symbols.specs
    ]
    rows = [
        {"weight": t.weight, "symbol": t.symbol, "outside_hypotheses": t.outside_hypotheses, **row.model_dump()}
        for t in tables
        for row in t.rows
    ]
    emit(config.output, tables, rows, SWEEP_COLUMNS)
    return 0
