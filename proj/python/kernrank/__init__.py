"""Numerical rank, Taylor jets and regularized inversion for integral kernels."""

import json

from . import _kernrank
from ._kernrank import (
    DomainViolation,
    KernrankError,
    MismatchDetected,
    QuadratureNotConverged,
    SingularSystem,
    ValidationError,
    __version__,
    evaluate,
    kernel_matrix,
    kernel_name,
    numerical_rank,
    taylor_coeffs,
)

__all__ = [
    "DomainViolation",
    "KernrankError",
    "MismatchDetected",
    "QuadratureNotConverged",
    "SingularSystem",
    "ValidationError",
    "__version__",
    "evaluate",
    "finite_rank",
    "fullrank_mc",
    "kernel_matrix",
    "kernel_name",
    "null_moment_check",
    "numerical_rank",
    "run",
    "taylor_coeffs",
    "verify",
]


def fullrank_mc(kernel, k, trials, seed, rel_threshold=0.0, extended=False, equilibrate=False):
    """Monte Carlo rank report as a dict."""
    return json.loads(_kernrank.fullrank_mc(kernel, k, trials, seed, rel_threshold, extended, equilibrate))


def finite_rank(kernel, k_max, trials, seed):
    return json.loads(_kernrank.finite_rank(kernel, k_max, trials, seed))


def null_moment_check(x_grid, S):
    return json.loads(_kernrank.null_moment_check(list(x_grid), S))


def run(config):
    """Run a config dict (same keys as a manifest's "config") and return the manifest dict."""
    return json.loads(_kernrank.run(json.dumps(config)))


def verify(manifest):
    """Re-run a manifest dict; raises MismatchDetected if the payload differs."""
    _kernrank.verify(json.dumps(manifest))
