"""Hybrid call-graph fusion and bug-prediction toolkit."""

from ._callfuse import (
    CallfuseError,
    MissingInputError,
    StageError,
    count_invocations,
    enumerate_configs,
    extract_static,
    f_measure,
    merge_graphs,
    run_stage,
    wilcoxon,
)

__all__ = [
    "CallfuseError",
    "MissingInputError",
    "StageError",
    "count_invocations",
    "enumerate_configs",
    "extract_static",
    "f_measure",
    "merge_graphs",
    "run_stage",
    "wilcoxon",
]
