"""Direct solution of the assembled block system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import dgecon, dgetrf, dlange

from arcscreen.assembly import BlockSystem

__all__ = ["Solution", "SolverError", "solve", "condition_estimate"]


class SolverError(RuntimeError):
    """Raised when the linear system is singular or the solve is inaccurate."""


@dataclass
class Solution:
    """Coefficients of the discrete surface solution and layer density."""

    system: BlockSystem
    U: np.ndarray            # coefficients in the U-space
    psi: np.ndarray          # coefficients in the psi-space
    residual_norm: float     # ||M x - rhs||_inf / (||M||_inf ||x||_inf + ||rhs||_inf)
    condition: float         # 1-norm condition estimate of the full matrix

    def eval_U(self, s, derivative_order: int = 0):
        return self.system.u_space.eval_function(self.U, s, derivative_order)

    def eval_psi(self, s):
        """Evaluate the layer density; not defined at the arc endpoints for
        the enriched space (the density is unbounded there)."""
        space = self.system.psi_space
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if space.n_singular > 0 and (
                np.any(s_arr == space.a) or np.any(s_arr == space.b)):
            raise ValueError(
                "enriched layer density is unbounded at the arc endpoints; "
                "evaluate strictly inside the arc")
        return space.eval_function(self.psi, s)


def condition_estimate(M: np.ndarray) -> float:
    """1-norm condition number estimate (Hager/Higham style, via LAPACK)."""
    M = np.ascontiguousarray(np.atleast_2d(M), dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError("condition estimate requires a square matrix")
    anorm = dlange("1", M)
    lu, piv, info = dgetrf(M)
    if info > 0:
        return np.inf
    rcond, _ = dgecon(lu, anorm, norm="1")
    return float(1.0 / rcond) if rcond > 0.0 else np.inf


def _active_indices(system: BlockSystem) -> np.ndarray | None:
    """Degrees of freedom that participate in the solve.

    For the standard method the density space omits the two endpoint hat
    functions: without the endpoint enrichment those hats chase the unbounded
    edge behaviour of the density and pollute the Galerkin solution, so the
    density is sought among the interior hats only.  The enriched space keeps
    every hat (the dedicated edge functions absorb the singular part).
    Returns None when all degrees of freedom are active.
    """
    if system.spec is None or system.spec.method != "standard":
        return None
    dim_u = system.u_space.dim
    n_hats = system.psi_space.n_hats
    drop = {dim_u, dim_u + n_hats - 1}
    total = dim_u + system.psi_space.dim
    return np.array([i for i in range(total) if i not in drop], dtype=int)


def solve(system: BlockSystem, refine: bool = True) -> Solution:
    """LU solve of the block matrix with one step of iterative refinement;
    verifies the scaled residual is at machine level.  Inactive density
    degrees of freedom (endpoint hats in the standard method) are removed
    from the solve and reported as exact zeros in the coefficient vector."""
    M = system.full_matrix()
    rhs = system.full_rhs()
    active = _active_indices(system)
    full_size = M.shape[0]
    if active is not None:
        M = M[np.ix_(active, active)]
        rhs = rhs[active]
    try:
        lu, piv = lu_factor(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SolverError(f"LU factorization failed: {exc}") from exc
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        k = int(np.argmin(diag))
        raise SolverError(f"matrix is singular: zero pivot at index {k}")

    x = lu_solve((lu, piv), rhs)
    if refine:
        r = rhs - M @ x
        x = x + lu_solve((lu, piv), r)

    mnorm = np.max(np.sum(np.abs(M), axis=1))
    res = float(np.max(np.abs(M @ x - rhs)))
    scaled = res / (mnorm * np.max(np.abs(x)) + np.max(np.abs(rhs)))
    if scaled > 1e-10:
        raise SolverError(
            f"solve did not reach machine-level residual: scaled residual "
            f"{scaled:.3e} > 1e-10 (matrix likely near-singular)")

    cond = condition_estimate(M)
    if active is not None:
        full = np.zeros(full_size)
        full[active] = x
        x = full
    dimU = system.u_space.dim
    return Solution(system=system, U=x[:dimU].copy(), psi=x[dimU:].copy(),
                    residual_norm=scaled, condition=cond)
