"""
Command groups of the dvhilbert CLI; each module registers its own subparsers.
"""

from . import hilbert, operators, symbols, verify, weights

GROUPS = (weights, symbols, operators, hilbert, verify)


def register_all(sub, common) -> None:
    for group in GROUPS:
        group.register_commands(sub, common)
