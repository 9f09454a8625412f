"""Python bindings for the crim effort estimator."""

from ._crim import (
    ComplexityUnavailable,
    ContractViolation,
    DomainError,
    Error,
    InputError,
    InsufficientData,
    ParameterError,
    ToolError,
    collect_git,
    contribution_rate,
    cyclomatic_complexity,
    estimate_jsonl,
    fit_mbcr,
    impute_time,
    levenshtein_words,
    line_diff_delta,
    report_jsonl,
    synth_generate,
    tokenize_words,
)

__all__ = [
    "ComplexityUnavailable",
    "ContractViolation",
    "DomainError",
    "Error",
    "InputError",
    "InsufficientData",
    "ParameterError",
    "ToolError",
    "collect_git",
    "contribution_rate",
    "cyclomatic_complexity",
    "estimate_jsonl",
    "fit_mbcr",
    "impute_time",
    "levenshtein_words",
    "line_diff_delta",
    "report_jsonl",
    "synth_generate",
    "tokenize_words",
]
