"""Backward parabolic reconstruction from noisy final-time data."""

from ._backpar import (
    ConfigError,
    DomainError,
    Error,
    QRParams,
    TruncationParams,
    case_names,
    eigenvalues,
    fit_rate,
    method_names,
    p_beta,
    q_beta,
    qr_params,
    report_csv,
    run_mise,
    source,
    truncation_params,
    validate,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "QRParams",
    "TruncationParams",
    "case_names",
    "eigenvalues",
    "fit_rate",
    "method_names",
    "p_beta",
    "q_beta",
    "qr_params",
    "report_csv",
    "run_mise",
    "source",
    "truncation_params",
    "validate",
]
