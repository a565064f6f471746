"""
`hilbert norm`: lower estimate of ‖H: L²(V̂₂) -> D_v‖ and the M1/M2 shapes.
"""

from ..config import CliConfig
from ..operators import hilbert_norm_estimate
from ..weights import parse_weight
from .output import emit

COLUMNS = [
    "weight", "top_singular_value", "probe_sup", "lower_estimate", "m1", "m2", "floor_shape", "ceiling_shape",
]


def register_commands(sub, common) -> None:
    group = sub.add_parser("hilbert", help="classical Hilbert operator on L²(V̂₂)")
    actions = group.add_subparsers(dest="action", required=True)
    norm = actions.add_parser("norm", parents=[common], help="discretized operator and phi_r probes")
    norm.add_argument("--weight", action="append")
    norm.add_argument("--D", type=int, help="number of dyadic cells (<= 64)")
    norm.add_argument("--J", type=int, help="number of output monomials")
    norm.add_argument("--probe-depth", type=int, default=40, help="phi_r truncated at 1 - 2^-depth")
    norm.set_defaults(func=norm_command)


def norm_command(args, config: CliConfig) -> int:
    estimates = [
        hilbert_norm_estimate(parse_weight(spec, config.weights.precision), config.sweep.hilbert_d,
                              config.sweep.hilbert_j, depth=args.probe_depth)
        for spec in config.weights.specs
    ]
    rows = [e.model_dump(exclude={"probes"}) for e in estimates]
    emit(config.output, estimates, rows, COLUMNS)
    return 0
