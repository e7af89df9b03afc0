"""Numerical search for a PSD Gram matrix meeting a :class:`ConstraintSystem`.

Two methods share one report type:

``dykstra``
    Alternating projections between the PSD cone and the affine constraint
    set with Dykstra's correction on the cone side. The affine projection is
    closed form because the classes partition the matrix entries.
``ipm``
    The interior point method of :mod:`sl3cert.ipm`, which maximizes the
    eigenvalue margin. Much faster on badly conditioned instances.

Matrices are plain symmetric ``float64`` ndarrays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, TextIO

import numpy as np
import scipy.linalg as sla

from .gram import ConstraintSystem, ProductTable, assemble, build_product_table, class_sums
from .group_ring import laplacian, target, to_vector
from .ipm import max_margin
from .matrix_group import Basis, GeneratorSet

log = logging.getLogger(__name__)

DEFAULT_EPS = Fraction(561, 2000)


@dataclass
class SolverConfig:
    tolerance: float = 1e-9
    max_iterations: int = 200_000
    psd_floor: float = 0.0
    method: str = "ipm"
    mode: str = "fixed-eps"
    # final interior push for dykstra; None means 1e-6 * trace / m
    final_floor: float | None = None
    window: tuple = (Fraction(0), DEFAULT_EPS)
    resolution: Fraction = Fraction(1, 10_000)
    ipm_max_iterations: int = 80
    check_every: int = 10
    log_stream: TextIO | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.method not in ("ipm", "dykstra"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.mode not in ("fixed-eps", "bisection"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class SolveReport:
    P: np.ndarray
    iterations: int
    affine_residual: float
    psd_residual: float
    converged: bool
    method: str = "dykstra"
    # PSD-side iterate; equals P when P is itself PSD
    P_psd: np.ndarray | None = field(default=None, repr=False)
    margin: float | None = None

    @property
    def residual(self) -> float:
        return max(self.affine_residual, self.psd_residual)


def _complement_basis(kernel: np.ndarray) -> np.ndarray:
    k = np.asarray(kernel, dtype=float).reshape(1, -1)
    return sla.null_space(k)


def project_psd(M: np.ndarray, floor: float = 0.0, kernel: np.ndarray | None = None) -> np.ndarray:
    """Nearest matrix (Frobenius) with eigenvalues >= floor.

    With ``kernel`` given the projection is onto PSD matrices annihilating
    that vector, and the floor applies on its orthogonal complement only.
    """
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    if kernel is None:
        w, V = np.linalg.eigh(M)
        out = (V * np.maximum(w, floor)) @ V.T
    else:
        B = kernel if kernel.ndim == 2 and kernel.shape[1] == M.shape[0] - 1 else _complement_basis(kernel)
        w, V = np.linalg.eigh(B.T @ M @ B)
        W = B @ V
        out = (W * np.maximum(w, floor)) @ W.T
    return 0.5 * (out + out.T)


class _Affine:
    """Precomputed per-class data for the closed-form affine projection."""

    def __init__(self, cs: ConstraintSystem):
        self.m = cs.m
        self.slots = cs.table.flat_slots()
        self.sizes = cs.class_sizes().astype(float)
        self.rhs = cs.rhs_array()
        self.table = cs.table

    def deficit(self, M: np.ndarray) -> np.ndarray:
        return self.rhs - np.bincount(self.slots, weights=M.ravel(), minlength=len(self.rhs))

    def project(self, M: np.ndarray) -> np.ndarray:
        d = self.deficit(M) / self.sizes
        out = M + d[self.slots].reshape(self.m, self.m)
        return 0.5 * (out + out.T)


def project_affine(M: np.ndarray, cs: ConstraintSystem) -> np.ndarray:
    """Add each class's deficit, split evenly, to its members.

    Exact Euclidean projection since every entry lies in exactly one class.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (cs.m, cs.m):
        raise ValueError(f"expected a {cs.m}x{cs.m} matrix")
    return _Affine(cs).project(M)


def affine_residual(M: np.ndarray, cs: ConstraintSystem) -> float:
    return float(np.abs(cs.rhs_array() - class_sums(M, cs.table)).max(initial=0.0))


def psd_residual(M: np.ndarray) -> float:
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(max(0.0, -w[0])) if w.size else 0.0


def _csv_logger(stream: TextIO | None) -> Callable | None:
    if stream is None:
        return None
    stream.write("iteration,affine_residual,psd_residual\n")

    def emit(it, aff, psd):
        stream.write(f"{it},{aff:.6e},{psd:.6e}\n")

    return emit


def _kernel_for(cs: ConstraintSystem) -> np.ndarray | None:
    # all class sums add up to 1^T P 1; zero total forces P 1 = 0 for PSD P
    if sum(cs.rhs) == 0:
        return np.ones(cs.m) / np.sqrt(cs.m)
    return None


def _dykstra(cs: ConstraintSystem, config: SolverConfig) -> SolveReport:
    aff = _Affine(cs)
    m = cs.m
    kernel = _kernel_for(cs)
    basis = _complement_basis(kernel) if kernel is not None else None
    emit = _csv_logger(config.log_stream)

    X = np.zeros((m, m))
    q = np.zeros((m, m))
    Y = aff.project(X)
    converged = False
    it = 0
    a_res = p_res = np.inf
    for it in range(1, config.max_iterations + 1):
        Y = aff.project(X)
        Z = Y + q
        X = project_psd(Z, config.psd_floor, basis)
        q = Z - X
        if it % config.check_every == 0 or it == config.max_iterations:
            a_res = float(np.abs(aff.deficit(X)).max(initial=0.0))
            p_res = psd_residual(Y)
            if emit:
                emit(it, a_res, p_res)
            if max(a_res, p_res) <= config.tolerance:
                converged = True
                break

    P_psd = X
    floor = config.final_floor
    if floor is None:
        floor = 1e-6 * np.trace(Y) / m
    P = aff.project(project_psd(Y, max(floor, config.psd_floor), basis))
    a_fin = float(np.abs(aff.deficit(P)).max(initial=0.0))
    p_fin = psd_residual(P)
    if not converged:
        log.info("dykstra stopped after %d iterations, residuals %.3e / %.3e", it, a_res, p_res)
    return SolveReport(
        P=P,
        iterations=it,
        affine_residual=a_fin,
        psd_residual=p_fin,
        converged=converged and max(a_fin, p_fin) <= config.tolerance,
        method="dykstra",
        P_psd=P_psd,
    )


def _ipm(cs: ConstraintSystem, config: SolverConfig) -> SolveReport:
    emit = _csv_logger(config.log_stream)
    res = max_margin(cs, tol=config.tolerance, max_iterations=config.ipm_max_iterations, log=emit)
    P = project_affine(res.P, cs)
    a_res = affine_residual(P, cs)
    p_res = psd_residual(P)
    log.info("ipm %s after %d iterations, margin %.3e", res.status, res.iterations, res.margin)
    return SolveReport(
        P=P,
        iterations=res.iterations,
        affine_residual=a_res,
        psd_residual=p_res,
        converged=max(a_res, p_res) <= config.tolerance,
        method="ipm",
        P_psd=res.P_psd,
        margin=res.margin,
    )


def solve_feasibility(cs: ConstraintSystem, config: SolverConfig | None = None) -> SolveReport:
    """Look for a PSD P meeting ``cs``; non-convergence is a report state."""
    config = config or SolverConfig()
    if config.method == "dykstra":
        return _dykstra(cs, config)
    return _ipm(cs, config)


def max_eps_bisection(gens: GeneratorSet, basis: Basis, config: SolverConfig | None = None,
                      table: ProductTable | None = None) -> tuple[Fraction, SolveReport | None]:
    """Largest eps in ``config.window`` (to ``config.resolution``) found feasible.

    The lower end of the window is assumed feasible and is not checked, so
    the returned report is None when no midpoint converged.
    """
    config = config or SolverConfig()
    lo, hi = (Fraction(x) for x in config.window)
    if lo > hi:
        raise ValueError("empty bisection window")
    table = table or build_product_table(basis)
    best = None
    while hi - lo > config.resolution:
        mid = (lo + hi) / 2
        report = solve_feasibility(assemble(table, target(mid, gens)), config)
        log.info("eps=%s converged=%s residual=%.3e", mid, report.converged, report.residual)
        if report.converged:
            lo, best = mid, report
        else:
            hi = mid
    return lo, best


def laplacian_gram_witness(gens: GeneratorSet, basis: Basis) -> np.ndarray:
    """Rank-one exact Gram matrix v v^T of Delta^2, where v holds Delta's coefficients."""
    v = to_vector(laplacian(gens), basis)
    return np.outer(v, v)
