"""Restarted GMRES (Arnoldi with modified Gram-Schmidt and Givens rotations).

Protocol: zero initial guess, stop once ``||b - A x||_2 <= tol * ||b||_2``,
``maxit`` caps the total number of inner iterations across restarts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

__all__ = ["GmresConfig", "GmresOutcome", "GmresStatus", "gmres"]

BREAKDOWN_TOL = 1e-14


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 10
    maxit: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.restart < 1 or self.maxit < 1:
            raise ValueError("restart and maxit must be at least 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


class GmresStatus(enum.Enum):
    CONVERGED = "converged"
    MAXIT = "maxit"
    BREAKDOWN = "breakdown"


@dataclass
class GmresOutcome:
    solution: np.ndarray
    iterations: int
    converged: bool
    final_relres: float
    status: GmresStatus
    residual_history: list[float]


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def gmres(
    apply: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    config: GmresConfig = GmresConfig(),
) -> GmresOutcome:
    b = np.asarray(b, dtype=float)
    n = b.size
    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return GmresOutcome(x, 0, True, 0.0, GmresStatus.CONVERGED, [0.0])

    target = config.tol * bnorm
    m = config.restart
    total = 0
    r = b.copy()
    rnorm = bnorm
    history = [1.0]

    while True:
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = rnorm
        V[0] = r / rnorm
        j_used = 0
        broke = False

        for j in range(m):
            if total >= config.maxit:
                break
            w = np.array(apply(V[j]), dtype=float)  # copy: apply may return its input
            for i in range(j + 1):
                H[i, j] = np.dot(w, V[i])
                w -= H[i, j] * V[i]
            hnext = float(np.linalg.norm(w))
            H[j + 1, j] = hnext
            for i in range(j):
                hi, hk = H[i, j], H[i + 1, j]
                H[i, j] = cs[i] * hi + sn[i] * hk
                H[i + 1, j] = -sn[i] * hi + cs[i] * hk
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            j_used = j + 1
            history.append(abs(g[j + 1]) / bnorm)
            if hnext <= BREAKDOWN_TOL * bnorm:
                broke = True
                break
            V[j + 1] = w / hnext
            if abs(g[j + 1]) <= target:
                break

        if j_used:
            R = np.triu(H[:j_used, :j_used])
            if np.all(np.abs(np.diag(R)) > 0.0):
                y = scipy.linalg.solve_triangular(R, g[:j_used])
            else:  # singular operator: least-squares step
                y = np.linalg.lstsq(R, g[:j_used], rcond=None)[0]
            x += V[:j_used].T @ y
        r = b - apply(x)
        rnorm = float(np.linalg.norm(r))
        relres = rnorm / bnorm
        if rnorm <= target:
            return GmresOutcome(x, total, True, relres, GmresStatus.CONVERGED, history)
        if broke:
            return GmresOutcome(x, total, False, relres, GmresStatus.BREAKDOWN, history)
        if total >= config.maxit:
            return GmresOutcome(x, total, False, relres, GmresStatus.MAXIT, history)
