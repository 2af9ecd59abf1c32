"""Minimum-norm least squares via SVD with rank truncation, plus diagnostics."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from pielm.assembly import ResidualSystem
from pielm.basis import FieldWeights, KernelSet

DEFAULT_RANK_TOL = 1e-10


class DegenerateSystemError(ValueError):
    """The system matrix is identically zero."""


@dataclass(frozen=True)
class LsqReport:
    relative_residual: float
    effective_rank: int
    sigma_max: float
    sigma_min_kept: float
    solve_time: float


def solve_least_squares(
    system: ResidualSystem,
    rank_tol: float = DEFAULT_RANK_TOL,
    kernels: KernelSet | None = None,
    label: str = "",
) -> tuple[FieldWeights, LsqReport]:
    """Minimum-norm solution of min ||A c - b||_2.

    Singular values below rank_tol * sigma_max are truncated. The weight
    vector is split per field when the system couples (u, v, p).
    """
    if not (0.0 < rank_tol < 1.0):
        raise ValueError("rank_tol must lie in (0, 1)")
    A, b = system.A, system.b
    if not np.any(A):
        raise DegenerateSystemError("system matrix is all zero")

    t0 = time.perf_counter()
    c, _, rank, svals = scipy.linalg.lstsq(A, b, cond=rank_tol, lapack_driver="gelsd")
    solve_time = time.perf_counter() - t0

    residual = np.linalg.norm(A @ c - b)
    rel = residual / max(np.linalg.norm(b), np.finfo(float).eps)
    report = LsqReport(
        relative_residual=float(rel),
        effective_rank=int(rank),
        sigma_max=float(svals[0]),
        sigma_min_kept=float(svals[rank - 1]) if rank > 0 else 0.0,
        solve_time=solve_time,
    )
    weights = split_weights(c, system, kernels, label)
    return weights, report


def split_weights(c, system: ResidualSystem, kernels: KernelSet | None, label: str = "") -> FieldWeights:
    """Split the stacked solution vector into per-field weights."""
    if kernels is None:
        kernels = _placeholder_kernels(system.n_kernels)
    n_k = system.n_kernels
    if system.fields == ("u",):
        return FieldWeights(c_u=c, kernels=kernels, label=label)
    if system.fields == ("u", "v", "p"):
        return FieldWeights(
            c_u=c[:n_k], c_v=c[n_k : 2 * n_k], c_p=c[2 * n_k :], kernels=kernels, label=label
        )
    raise ValueError(f"unsupported field layout {system.fields}")


def _placeholder_kernels(n_k: int) -> KernelSet:
    # unit-width kernels at the origin; used when the caller only wants the
    # raw solution vector (e.g. synthetic systems in tests)
    zeros = np.zeros(n_k)
    ones = np.ones(n_k)
    return KernelSet(zeros, zeros, ones, ones)
