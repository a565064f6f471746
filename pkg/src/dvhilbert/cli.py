"""
dvhilbert command-line interface.

Configuration resolves as built-in defaults < config file < flags;
`--dump-config` prints the resolved file. Exit status: 0 success, 1 failed
verification, 2 usage/config/hypothesis errors, 3 numerical non-convergence.
"""

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .commands import register_all
from .commands.output import open_output
from .config import CliConfig, dump_config, get_settings, load_config_file
from .errors import DvHilbertError
from .schemas import OutputFormat, Precision

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _common_options(suppress: bool) -> argparse.ArgumentParser:
    """Options accepted both before and after the subcommand."""
    default = argparse.SUPPRESS if suppress else None
    parser = argparse.ArgumentParser(add_help=False, argument_default=default)
    parser.add_argument("--config", help="INI config file with [weights] [symbols] [sweep] [tolerances] [output]")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])
    parser.add_argument("--output", help="write to this path instead of stdout")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--precision", choices=[p.value for p in Precision])
    parser.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--dump-config", dest="dump_config", action="store_true",
                        default=argparse.SUPPRESS if suppress else False)
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dvhilbert",
        description="Generalized Hilbert operators on weighted Dirichlet spaces",
        parents=[_common_options(False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="group")
    register_all(sub, _common_options(True))
    return parser


def _split(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [item.strip() for item in value.split(",") if item.strip()]


def resolve_config(args: argparse.Namespace) -> CliConfig:
    config = load_config_file(args.config) if args.config else CliConfig()
    arg = lambda name: getattr(args, name, None)
    overrides = {
        "weights": {"specs": arg("weight"), "depth": arg("depth"), "precision": arg("precision")},
        "symbols": {"specs": arg("symbol"), "n_max": arg("n_max"), "method": arg("method")},
        "sweep": {
            "p_list": _split(arg("p")),
            "n_list": _split(arg("N")),
            "workers": arg("workers"),
            "hilbert_d": arg("D"),
            "hilbert_j": arg("J"),
        },
        "output": {"format": arg("format"), "path": arg("output")},
    }
    return config.merged(overrides)


def _configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or get_settings().log_level).upper(), logging.WARNING),
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(args.log_level)
        config = resolve_config(args)
        if args.dump_config:
            with open_output(config.output) as stream:
                stream.write(dump_config(config))
            return 0
        if not args.group or not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            print("error: a command is required", file=sys.stderr)
            return 2
        logger.debug("resolved config:\n%s", dump_config(config))
        return args.func(args, config)
    except DvHilbertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def run() -> None:
    sys.exit(main())
