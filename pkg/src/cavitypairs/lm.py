"""Levenberg-Marquardt least squares with analytic Jacobians.

Small and explicit so that every accepted iteration, the damping, and the
convergence test are visible to callers (see :class:`LMOutcome`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np


@dataclass
class LMOutcome:
    params: np.ndarray
    cost: float                      # sum of squared residuals
    jacobian: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    gradient_measure: float
    history: List[float] = field(default_factory=list)
    message: str = ""


def _gradient_measure(J: np.ndarray, r: np.ndarray) -> float:
    """Largest cosine between the residual and a Jacobian column."""
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(J, axis=0)
    cn = np.where(cn == 0, 1.0, cn)
    return float(np.max(np.abs(J.T @ r) / (cn * rn)))


def levenberg_marquardt(residual: Callable[[np.ndarray], np.ndarray],
                        jacobian: Callable[[np.ndarray], np.ndarray],
                        p0, max_iter: int = 200, gtol: float = 1e-8, xtol: float = 1e-14,
                        ftol_zero: float = 1e-28, lam0: float = 1e-3,
                        cost_floor: float = 0.0) -> LMOutcome:
    """Minimize ||residual(p)||^2.

    ``converged`` is set only when the gradient test passes: the cosine
    between the residual vector and every Jacobian column is below ``gtol``,
    or the cost is below ``ftol_zero`` times the initial cost or below the
    absolute ``cost_floor`` (residuals at rounding level, where the cosine
    is noise).  A stalled step without a small gradient is reported as not
    converged.
    """
    p = np.array(p0, dtype=float)
    r = residual(p)
    J = jacobian(p)
    cost = float(r @ r)
    cost0 = max(cost, 1e-300)
    history = [cost]
    lam = lam0
    it = 0
    msg = "iteration limit"
    converged = False
    while it < max_iter:
        gm = _gradient_measure(J, r)
        if gm <= gtol or cost <= max(ftol_zero * cost0, cost_floor):
            converged, msg = True, "gradient below tolerance"
            break
        A = J.T @ J
        g = J.T @ r
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e16:
            try:
                step = -np.linalg.solve(A + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + step
            rt = residual(trial)
            ct = float(rt @ rt) if np.all(np.isfinite(rt)) else np.inf
            if ct < cost:
                small = np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
                p, r, cost = trial, rt, ct
                J = jacobian(p)
                history.append(cost)
                lam = max(lam / 10.0, 1e-12)
                accepted = True
                break
            lam *= 10.0
        it += 1
        if not accepted:
            gm = _gradient_measure(J, r)
            converged = gm <= gtol or cost <= max(ftol_zero * cost0, cost_floor)
            msg = "gradient below tolerance" if converged else "no further decrease"
            break
        if small:
            gm = _gradient_measure(J, r)
            converged = gm <= gtol or cost <= max(ftol_zero * cost0, cost_floor)
            msg = "gradient below tolerance" if converged else "step below tolerance"
            break
    gm = _gradient_measure(J, r)
    return LMOutcome(p, cost, J, r, it, converged, gm, history, msg)


def covariance(outcome: LMOutcome) -> np.ndarray:
    """Linearized covariance scaled by the residual variance."""
    J = outcome.jacobian
    m, n = J.shape
    dof = max(m - n, 1)
    s2 = outcome.cost / dof
    try:
        inv = np.linalg.pinv(J.T @ J)
    except np.linalg.LinAlgError:
        return np.full((n, n), np.nan)
    return inv * s2
