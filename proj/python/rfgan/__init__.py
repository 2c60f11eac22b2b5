"""Restricted f-divergences, their duals and the estimators built on them.

Distributions are plain lists of nonnegative weights (normalized on use);
feature maps are lists of rows, one row per feature.
"""

import json

from ._rfgan import (
    Error,
    check_generator,
    cmd_check_generator,
    cmd_divergence,
    cmd_dual,
    cmd_fit,
    cmd_gap,
    cmd_primal,
    cmd_verify_suite,
    divergence,
    dual,
    fit,
    gap,
    generators,
    moment_projection,
    primal,
    run_suite,
    suites,
)

__all__ = [
    "Error",
    "check_generator",
    "cmd_check_generator",
    "cmd_divergence",
    "cmd_dual",
    "cmd_fit",
    "cmd_gap",
    "cmd_primal",
    "cmd_verify_suite",
    "divergence",
    "dual",
    "error_code",
    "fit",
    "gap",
    "generators",
    "load_report",
    "moment_projection",
    "primal",
    "run_suite",
    "suites",
]


def error_code(exc):
    """Code name carried by an rfgan.Error, e.g. "UnknownGenerator"."""
    return exc.args[1] if len(exc.args) > 1 else None


def load_report(output):
    """Parse the report text of a cmd_* result; "inf" strings become floats."""
    def fix(v):
        if v in ("inf", "-inf", "nan"):
            return float(v)
        if isinstance(v, list):
            return [fix(x) for x in v]
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        return v
    return fix(json.loads(output["report"]))
