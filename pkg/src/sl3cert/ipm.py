"""Primal-dual interior point method for the class-partitioned Gram problems.

Solves, for symmetric P,

    maximize  t   subject to   class sums of P = rhs,   P - t*K >= 0

where K is the identity, or the projector onto the complement of the
all-ones vector when the right-hand side sums to zero (then every feasible
P has the all-ones vector in its kernel and the problem is posed on that
face, which restores a strictly feasible point). The maximal margin t is
the largest eigenvalue floor any feasible P can have; t < 0 means the
constraints are infeasible.

Constraints for g and g^-1 coincide on symmetric matrices and are merged
into one orbit constraint. The method is the HKM direction with a Mehrotra
predictor-corrector and one free variable (t) handled by bordering the
Schur complement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sparse

from .gram import ConstraintSystem


@dataclass
class IPMResult:
    P: np.ndarray  # lift of X + t*I plus a least-norm fix: meets the constraints, min eigenvalue ~ t
    P_psd: np.ndarray  # lift of X + max(t, 0)*I: PSD, off the constraints by ~|t|
    margin: float
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float
    gap: float
    status: str


class OrbitOperator:
    """Orbit constraints compressed to the kernel-free subspace.

    ``V`` is m x n with orthonormal columns; compressed matrices X live in
    n x n and lift to V X V^T.
    """

    def __init__(self, cs: ConstraintSystem):
        table = cs.table
        m = table.m
        self.m = m
        slots = table.flat_slots().reshape(m, m)
        # class k and the class of its inverse are transposes of each other
        inv_slot = np.empty(table.num_classes, dtype=np.int64)
        inv_slot[slots.ravel()] = slots.T.ravel()
        rep = np.minimum(np.arange(table.num_classes), inv_slot)
        reps, orbit_of_class = np.unique(rep, return_inverse=True)
        rhs_class = list(cs.rhs)
        rhs_orbit = [Fraction(0)] * len(reps)
        for k, o in enumerate(orbit_of_class):
            rhs_orbit[o] += rhs_class[k]

        self.centered = sum(rhs_orbit) == 0
        if self.centered:
            u = np.full((m, 1), 1.0 / np.sqrt(m))
            self.V = sla.null_space(u.T)
            # the orbit of the identity is implied by the others on this face
            e_orbit = orbit_of_class[slots[0, 0]]
            keep = np.ones(len(reps), dtype=bool)
            keep[e_orbit] = False
        else:
            self.V = np.eye(m)
            keep = np.ones(len(reps), dtype=bool)
        new_index = np.full(len(reps), -1, dtype=np.int64)
        new_index[keep] = np.arange(keep.sum())
        orbit = new_index[orbit_of_class[slots]]  # m x m, -1 for the dropped orbit
        self.orbit = orbit
        self.ncon = int(keep.sum())
        self.rhs = np.array([float(r) for r, k in zip(rhs_orbit, keep) if k])
        self.n = self.V.shape[1]

        valid = orbit.ravel() >= 0
        flat = np.flatnonzero(valid)
        self._flat = flat
        self._flat_orbit = orbit.ravel()[flat]
        self._p = flat // m
        self._q = flat % m
        self._rows = [(np.flatnonzero(orbit[i] >= 0), orbit[i][orbit[i] >= 0]) for i in range(m)]
        self.F = self.apply(np.eye(self.n))

    def lift(self, X: np.ndarray) -> np.ndarray:
        return self.V @ X @ self.V.T

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Orbit sums of the lifted matrix."""
        L = self.lift(X).ravel()
        return np.bincount(self._flat_orbit, weights=L[self._flat], minlength=self.ncon)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        Y = np.zeros(self.m * self.m)
        Y[self._flat] = y[self._flat_orbit]
        Y = Y.reshape(self.m, self.m)
        return self.V.T @ Y @ self.V

    def schur(self, X: np.ndarray, Zinv: np.ndarray) -> np.ndarray:
        """M[k, l] = <A_k, X A_l Zinv> for the compressed constraint matrices."""
        XL = self.lift(X)
        ZL = self.lift(Zinv)
        m, nc = self.m, self.ncon
        M = np.zeros((nc, nc))
        p, q, orb = self._p, self._q, self._flat_orbit
        for i in range(m):
            # W[l, p] = sum_q [orbit(p, q) = l] * ZL[q, i]
            W = sparse.csr_matrix((ZL[q, i], (orb, p)), shape=(nc, m))
            U = W @ XL  # U[l, j] = sum_p W[l, p] XL[p, j]
            cols, rows = self._rows[i]
            if len(np.unique(rows)) == len(rows):
                M[rows] += U[:, cols].T
            else:
                np.add.at(M, rows, U[:, cols].T)
        return 0.5 * (M + M.T)


def _restore_feasibility(op: OrbitOperator, X: np.ndarray, t: float) -> np.ndarray:
    """Least-norm change of X + t*I (within the face) that meets the orbit sums."""
    r = op.rhs - op.apply(X) - op.F * t
    G = op.schur(np.eye(op.n), np.eye(op.n))
    try:
        w = sla.solve(G, r, assume_a="pos")
    except (np.linalg.LinAlgError, sla.LinAlgWarning):
        w = np.linalg.lstsq(G, r, rcond=None)[0]
    dX = op.adjoint(w)
    return X + t * np.eye(op.n) + 0.5 * (dX + dX.T)


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    L = np.linalg.cholesky(X)
    S = sla.solve_triangular(L, dX, lower=True)
    S = sla.solve_triangular(L, S.T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (S + S.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def max_margin(cs: ConstraintSystem, tol: float = 1e-9, max_iterations: int = 100,
               log: Callable[[int, float, float], None] | None = None) -> IPMResult:
    """Maximize the eigenvalue margin t of a Gram matrix satisfying ``cs``."""
    op = OrbitOperator(cs)
    n = op.n
    b = op.rhs
    F = op.F
    FF = float(F @ F)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    X = scale * np.eye(n)
    Z = scale * np.eye(n)
    y = np.zeros(op.ncon)
    t = 0.0
    normb = 1.0 + np.linalg.norm(b)
    status = "max_iterations"
    it = 0
    for it in range(1, max_iterations + 1):
        Rp = b - op.apply(X) - F * t
        Rd = -Z - op.adjoint(y)
        Rf = -1.0 - F @ y
        mu = np.trace(X @ Z) / n
        pinf = np.linalg.norm(Rp) / normb
        dinf = np.linalg.norm(Rd) / (1.0 + np.sqrt(n)) + abs(Rf) / (1.0 + np.sqrt(FF))
        gap = n * mu / (1.0 + abs(t))
        if log is not None:
            log(it, float(np.abs(Rp).max()), max(0.0, -t))
        if pinf < tol and dinf < tol and gap < tol:
            status = "optimal"
            break

        try:
            Zinv = np.linalg.inv(Z)
            Zinv = 0.5 * (Zinv + Zinv.T)
            M = op.schur(X, Zinv)
            M[np.diag_indices_from(M)] += 1e-14 * np.abs(np.diag(M)).max()
            chol = sla.cho_factor(M, lower=True, check_finite=False)
            MinvF = sla.cho_solve(chol, F, check_finite=False)
            FMF = float(F @ MinvF)
            XRdZ = X @ Rd @ Zinv

            def direction(Rc):
                # Rc is the complementarity target minus X Z (plus any corrector)
                G = Rc @ Zinv - XRdZ
                h = Rp - op.apply(0.5 * (G + G.T))
                Minvh = sla.cho_solve(chol, h, check_finite=False)
                dt = (F @ Minvh - Rf) / FMF
                dy = Minvh - MinvF * dt
                dZ = Rd - op.adjoint(dy)
                dX = G + X @ op.adjoint(dy) @ Zinv
                dX = 0.5 * (dX + dX.T)
                return dX, dy, dZ, dt

            XZ = X @ Z
            dXa, dya, dZa, dta = direction(-XZ)
            ap = min(1.0, _max_step(X, dXa))
            ad = min(1.0, _max_step(Z, dZa))
            mu_aff = np.trace((X + ap * dXa) @ (Z + ad * dZa)) / n
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
            dX, dy, dZ, dt = direction(sigma * mu * np.eye(n) - XZ - dXa @ dZa)
            gamma = 0.9 + 0.09 * min(ap, ad)
            ap = min(1.0, gamma * _max_step(X, dX))
            ad = min(1.0, gamma * _max_step(Z, dZ))
        except np.linalg.LinAlgError:
            # Schur complement or iterate lost definiteness; keep the last iterate
            status = "numerical_limit"
            break
        X = X + ap * dX
        X = 0.5 * (X + X.T)
        t = t + ap * dt
        Z = Z + ad * dZ
        Z = 0.5 * (Z + Z.T)
        y = y + ad * dy

    Rp = b - op.apply(X) - F * t
    Rd = -Z - op.adjoint(y)
    P = op.lift(_restore_feasibility(op, X, t))
    P_psd = op.lift(X + max(t, 0.0) * np.eye(n))
    return IPMResult(
        P=0.5 * (P + P.T),
        P_psd=0.5 * (P_psd + P_psd.T),
        margin=float(t),
        iterations=it,
        primal_infeasibility=float(np.abs(Rp).max(initial=0.0)),
        dual_infeasibility=float(np.linalg.norm(Rd)),
        gap=float(np.trace(X @ Z)),
        status=status,
    )
