"""
Pinned verification suites: the parameters each suite runs with.

`full` is the acceptance configuration; `quick` keeps every scenario and
control but shrinks sizes for smoke runs.
"""

import math
from typing import Any, Dict

from .errors import InputError
from .schemas import SuiteId

INF = math.inf

# 验收配置
FULL: Dict[SuiteId, Dict[str, Any]] = {
    SuiteId.WEIGHT_LEMMAS: {
        "alphas": [-0.5, 0.0, 0.5, 1.0, 1.5],
        "moment_xs": [0.0, 1.0, 7.0, 50.0, 200.0],
        "extended_xs": [2000.0, 20000.0],
        "tail_rs": [0.0, 0.5, 0.9, 0.999],
        "lemma_weights": ["std:0.5", "std:1", "exp:1:0.5"],
        "controls": ["exp:1:0.5"],
    },
    SuiteId.MUCKENHOUPT_DICHOTOMY: {
        "alphas": [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5],
        "depth": 24,
    },
    SuiteId.HILBERT_SANDWICH: {
        "alphas": [0.5, 1.0, 1.5],
        "D_list": [8, 16, 32, 64],
        "J": 64,
        "radii": [0.5, 0.9, 0.99, 0.999],
        "bound_radii": [0.5, 0.9, 0.99],
        "depth": 40,
        "control_alpha": 2.0,
        "control_depths": [10, 20, 30, 40],
        "oracle_sizes": [64, 128, 256, 512],
    },
    SuiteId.HS_IDENTITY: {
        "alphas": [1.0, 0.5],
        "symbols": ["pow:0.6", "pow:0.75", "poly:0,1,0,1"],
        "N": 512,
        "column_checks": 32,
        "parseval_n": 10,
        "control": "std:2.5",
    },
    SuiteId.SCHATTEN_EQUIVALENCE: {
        "alphas": [0.5, 1.0, 1.5],
        "symbols": ["pow:0.6", "pow:0.75", "pow:0.9"],
        "p_list": [1.0, 2.0, 4.0, INF],
        "N_list": [256, 512, 1024, 2048, 4096],
        "log_N_list": [64, 128, 256, 512, 1024, 2048, 4096],
        "log_p_list": [1.0, 2.0, 4.0],
        "sigma_blocks": 8,
        "sigma_N": 1024,
        "control": "std:2.5",
        "control_N_list": [64, 128, 256],
    },
    SuiteId.COMPACTNESS_DICHOTOMY: {
        "members": ["pow:0.75", "poly:0,1,0,1", "blockw:0.5"],
        "non_members": ["log", "blockw:0"],
        "n_max": 20,
        "bounded_N_list": [128, 256, 512, 1024],
    },
    SuiteId.BERGMAN_COROLLARY: {
        "omega": "std:-0.5",
        "symbol": "pow:0.75",
        "p_list": [2.0, INF],
        "N_list": [256, 512, 1024, 2048, 4096],
        "tail_rs": [0.0, 0.5, 0.9, 0.99],
        "control": "std:1.5",
    },
    SuiteId.HARDY_LITTLEWOOD: {
        "alphas": [0.5, 1.0, 1.5],
        "fn_levels": [1, 2, 3, 4, 5, 6, 7, 8],
        "fn_symbol": "pow:0.75",
        "control": "std:-0.5",
    },
}

# 快速配置: 保留全部场景, 缩小规模
QUICK: Dict[SuiteId, Dict[str, Any]] = {
    **FULL,
    SuiteId.HILBERT_SANDWICH: {
        **FULL[SuiteId.HILBERT_SANDWICH],
        "D_list": [8, 16, 32],
        "J": 32,
        "oracle_sizes": [32, 64, 128],
    },
    SuiteId.HS_IDENTITY: {**FULL[SuiteId.HS_IDENTITY], "N": 128, "column_checks": 16},
    SuiteId.SCHATTEN_EQUIVALENCE: {
        **FULL[SuiteId.SCHATTEN_EQUIVALENCE],
        "alphas": [1.0],
        "N_list": [128, 256, 512],
        "log_N_list": [64, 128, 256, 512],
        "sigma_N": 512,
    },
    SuiteId.BERGMAN_COROLLARY: {**FULL[SuiteId.BERGMAN_COROLLARY], "N_list": [128, 256, 512]},
    SuiteId.HARDY_LITTLEWOOD: {**FULL[SuiteId.HARDY_LITTLEWOOD], "fn_levels": [1, 2, 3, 4, 5]},
}

PROFILES = {"full": FULL, "quick": QUICK}


def _check_sigma(params: Dict[str, Any]) -> None:
    # sigma_n spans indices up to 2^(n+1) - 1; the trace norm must see all of them
    blocks, N = params["sigma_blocks"], params["sigma_N"]
    if N < 2 ** (blocks + 1):
        raise InputError(f"sigma_N={N} is below 2^(sigma_blocks+1)={2 ** (blocks + 1)}", "verify")
    if N not in params["log_N_list"]:
        raise InputError(f"sigma_N={N} is not one of log_N_list", "verify")


def suite_params(suite: SuiteId, profile: str = "full") -> Dict[str, Any]:
    if profile not in PROFILES:
        raise InputError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}", "verify")
    params = PROFILES[profile][SuiteId(suite)]
    if "sigma_blocks" in params:
        _check_sigma(params)
    return params
