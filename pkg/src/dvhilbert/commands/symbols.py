"""
`symbol bnorm` and `symbol blocks`.
"""

from ..config import CliConfig
from ..symbols import block_profile, bnorm, parse_symbol
from .output import emit

NORM_COLUMNS = ["symbol", "p", "method", "verdict", "value", "extrapolated", "rate"]
BLOCK_COLUMNS = ["symbol", "n", "B_n", "sqrt_B_n"]


def register_commands(sub, common) -> None:
    group = sub.add_parser("symbol", help="symbol block quantities and B(2,p) norms")
    actions = group.add_subparsers(dest="action", required=True)

    norm = actions.add_parser("bnorm", parents=[common], help="‖g - g(0)‖ in B(2,p)")
    norm.add_argument("--symbol", action="append", help="log, pow:<b>, poly:<c0,c1,...> or blockw:<theta>")
    norm.add_argument("--p", help="comma-separated exponents, inf allowed")
    norm.add_argument("--method", choices=["blocks", "integral"])
    norm.add_argument("--n-max", type=int, dest="n_max")
    norm.set_defaults(func=bnorm_command)

    blocks = actions.add_parser("blocks", parents=[common], help="dyadic block values B_n")
    blocks.add_argument("--symbol", action="append")
    blocks.add_argument("--n-max", type=int, dest="n_max")
    blocks.set_defaults(func=blocks_command)


def bnorm_command(args, config: CliConfig) -> int:
    results = [
        bnorm(parse_symbol(spec), p, config.symbols.method, config.symbols.n_max)
        for spec in config.symbols.specs
        for p in config.sweep.p_list
    ]
    rows = [
        {
            "symbol": r.symbol,
            "p": r.p,
            "method": r.method.value,
            "verdict": r.verdict.value,
            "value": r.value,
            "extrapolated": r.extrapolated,
            "rate": r.rate.describe() if r.rate else None,
        }
        for r in results
    ]
    emit(config.output, results, rows, NORM_COLUMNS)
    return 0


def blocks_command(args, config: CliConfig) -> int:
    profiles = [block_profile(parse_symbol(spec), config.symbols.n_max) for spec in config.symbols.specs]
    rows = [
        {"symbol": profile.symbol, "n": n, "B_n": value, "sqrt_B_n": value ** 0.5}
        for profile in profiles
        for n, value in enumerate(profile.values)
    ]
    emit(config.output, profiles, rows, BLOCK_COLUMNS)
    return 0
