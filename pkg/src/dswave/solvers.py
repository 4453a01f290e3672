"""Narrow convex-optimization backend: one LP and one QP entry point.

Everything upstream talks to these two functions only, so the heavy
numerical dependencies stay isolated here.  Problems arrive in the
canonical inequality form

    minimize   c @ x         (LP)   or   0.5 * x @ Q @ x   (QP)
    subject to A_ub @ x <= b_ub,

with free variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

import cvxopt
import cvxopt.solvers

cvxopt.solvers.options["show_progress"] = False

__all__ = ["ConvexResult", "solve_lp", "solve_qp"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
FAILED = "failed"

# Tiny ridge keeps PSD-singular quadratic objectives factorizable.
_QP_RIDGE = 1e-9


@dataclass
class ConvexResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int
    message: str = ""


def solve_lp(c, a_ub, b_ub) -> ConvexResult:
    """Minimize c@x subject to a_ub@x <= b_ub (variables free).

    Uses the interior-point method with crossover, falling back to the
    simplex-based default if it reports a numerical problem.
    """
    a_ub = sparse.csr_matrix(a_ub)
    bounds = [(None, None)] * a_ub.shape[1]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs-ipm")
    if res.status in (1, 4):  # iteration limit / numerical trouble
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    status = {0: OPTIMAL, 2: INFEASIBLE}.get(res.status, FAILED)
    x = np.asarray(res.x) if status == OPTIMAL else None
    objective = float(res.fun) if status == OPTIMAL else np.nan
    return ConvexResult(status=status, x=x, objective=objective,
                        iterations=int(res.nit), message=res.message or "")


def solve_qp(q_matrix, a_ub, b_ub) -> ConvexResult:
    """Minimize 0.5*x@Q@x subject to a_ub@x <= b_ub (variables free)."""
    q = np.asarray(q_matrix, dtype=float)
    n = q.shape[0]
    p = cvxopt.matrix(q + _QP_RIDGE * np.eye(n))
    g = cvxopt.matrix(np.asarray(a_ub, dtype=float))
    h = cvxopt.matrix(np.asarray(b_ub, dtype=float))
    try:
        sol = cvxopt.solvers.qp(p, cvxopt.matrix(np.zeros(n)), g, h)
    except (ValueError, ArithmeticError) as exc:
        return ConvexResult(status=FAILED, x=None, objective=np.nan,
                            iterations=0, message=str(exc))
    iterations = int(sol.get("iterations", 0))
    if sol["status"] == "optimal":
        x = np.asarray(sol["x"]).ravel()
        return ConvexResult(status=OPTIMAL, x=x,
                            objective=float(0.5 * x @ q @ x),
                            iterations=iterations)
    if sol["status"] == "primal infeasible":
        return ConvexResult(status=INFEASIBLE, x=None, objective=np.nan,
                            iterations=iterations)
    return ConvexResult(status=FAILED, x=None, objective=np.nan,
                        iterations=iterations, message=sol["status"])
