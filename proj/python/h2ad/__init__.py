"""Subarray DOA estimation, source-number sensing and CRLB tools."""

from ._core import (
    ArrayConfig,
    Combining,
    ConfigError,
    DegenerateSubspaceError,
    Error,
    InputError,
    InsufficientSupportError,
    ModelOrderError,
    NumericError,
    SourceScene,
    candidates,
    crlb,
    edc_count,
    eigen_features,
    fuse,
    hermitian_eig,
    orthogonality_profile,
    run,
    sample_covariance,
    simulate,
    steering,
)

__all__ = [
    "ArrayConfig",
    "Combining",
    "ConfigError",
    "DegenerateSubspaceError",
    "Error",
    "InputError",
    "InsufficientSupportError",
    "ModelOrderError",
    "NumericError",
    "SourceScene",
    "candidates",
    "crlb",
    "edc_count",
    "eigen_features",
    "fuse",
    "hermitian_eig",
    "orthogonality_profile",
    "run",
    "sample_covariance",
    "simulate",
    "steering",
]
