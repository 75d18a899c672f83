"""Crank-Nicolson time stepping for the space-fractional convection equation

    u_t = -D ((1+beta)/2 d^a u/dx^a + (1-beta)/2 d^a u/d(-x)^a) + q

on ``N`` interior nodes ``x_i = x_L + i h`` with zero values outside.

Each step solves ``(I + c B) U^{n+1} = (I - c B) U^n + tau q^{n+1/2}`` where
``B = (1+beta)/2 B_hat + (1-beta)/2 B_hat^T``.  The first column of
``B_hat`` is twice the difference-quotient sum, so the coupling that makes
``c B`` equal to ``(D tau / 2)`` times the discrete operator is
``c = mu_alpha / 2`` with ``mu_alpha = D tau / (2 Gamma(3-a) h^a)``.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

from fracconv.coeff import Scheme, check_alpha
from fracconv.krylov import GmresConfig, gmres
from fracconv.toeplitz import ToeplitzOperator, build_bhat, combine_beta

__all__ = [
    "ProblemSpec",
    "GridSpec",
    "SolveReport",
    "Direct",
    "Gmres",
    "CrankNicolsonSystem",
    "TimeStepper",
    "mu_alpha",
    "assemble",
    "run",
    "error_h2",
    "stability_norm_check",
    "STABLE_ALPHA_MAX",
    "DENSE_CAP",
]

log = logging.getLogger(__name__)

#: Largest alpha with a nonnegative symbol real part, per scheme.
STABLE_ALPHA_MAX = {Scheme.M1: 1.0, Scheme.M2: 0.986, Scheme.M3: 0.997}

DENSE_CAP = 2**13


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    beta: float
    D: float
    x_domain: tuple[float, float]
    T: float
    u0: Callable[[np.ndarray], np.ndarray]
    q: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    exact: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    def __post_init__(self):
        check_alpha(self.alpha)
        if not (-1.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.D > 0.0:
            raise ValueError("diffusion coefficient D must be positive")
        if not self.x_domain[0] < self.x_domain[1]:
            raise ValueError("x_domain must satisfy x_L < x_R")
        if not self.T > 0.0:
            raise ValueError("horizon T must be positive")


@dataclass(frozen=True)
class GridSpec:
    M: int
    N: int
    tau: float
    h: float
    x_left: float = 0.0

    @classmethod
    def build(cls, problem: ProblemSpec, M: int, N: int) -> GridSpec:
        if M < 2 or N < 2:
            raise ValueError("need M, N >= 2")
        xL, xR = problem.x_domain
        return cls(M=M, N=N, tau=problem.T / M, h=(xR - xL) / (N + 1), x_left=xL)

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.h * np.arange(1, self.N + 1)


@dataclass(frozen=True)
class Direct:
    explicit_inverse: bool = False
    max_n: int = DENSE_CAP


@dataclass(frozen=True)
class Gmres:
    tol: float
    restart: int = 10
    maxit: Optional[int] = None  # None means N - 1


Method = Union[Direct, Gmres]


@dataclass
class SolveReport:
    final_solution: np.ndarray
    cpu_seconds: float
    error_h2: Optional[float] = None
    avg_gmres_iters: Optional[float] = None
    gmres_failures: int = 0
    x: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "error_h2": self.error_h2,
            "cpu_seconds": self.cpu_seconds,
            "avg_gmres_iters": self.avg_gmres_iters,
            "gmres_failures": self.gmres_failures,
            "n": int(self.final_solution.size),
        }


def mu_alpha(problem: ProblemSpec, grid: GridSpec) -> float:
    a = problem.alpha
    return problem.D * grid.tau / (2.0 * math.gamma(3.0 - a) * grid.h**a)


@dataclass(frozen=True)
class CrankNicolsonSystem:
    operator: ToeplitzOperator  # B_m^{alpha,beta}
    coupling: float  # mu_alpha / 2

    @property
    def n(self) -> int:
        return self.operator.n

    def apply_plus(self, v: np.ndarray) -> np.ndarray:
        return v + self.coupling * self.operator.matvec(v)

    def apply_minus(self, v: np.ndarray) -> np.ndarray:
        return v - self.coupling * self.operator.matvec(v)

    def dense_plus(self) -> np.ndarray:
        return np.eye(self.n) + self.coupling * self.operator.dense()

    def dense_minus(self) -> np.ndarray:
        return np.eye(self.n) - self.coupling * self.operator.dense()


def assemble(scheme, problem: ProblemSpec, grid: GridSpec) -> CrankNicolsonSystem:
    scheme = Scheme.parse(scheme)
    if problem.alpha > STABLE_ALPHA_MAX[scheme]:
        warnings.warn(
            f"alpha={problem.alpha} is outside the range where scheme {scheme.name} "
            f"has a nonnegative symbol (alpha <= {STABLE_ALPHA_MAX[scheme]})",
            RuntimeWarning,
            stacklevel=2,
        )
    op = combine_beta(build_bhat(scheme, problem.alpha, grid.N), problem.beta)
    return CrankNicolsonSystem(op, 0.5 * mu_alpha(problem, grid))


class TimeStepper:
    """Advances ``U^n -> U^{n+1}`` with a precomputed direct solve or GMRES."""

    def __init__(self, system: CrankNicolsonSystem, method: Method):
        self.system = system
        self.method = method
        self.iterations: list[int] = []
        self.failures = 0
        if isinstance(method, Direct):
            if system.n > method.max_n:
                raise ValueError(
                    f"direct solve refused: N={system.n} exceeds dense cap {method.max_n}"
                )
            A = system.dense_plus()
            if method.explicit_inverse:
                self._inv = np.linalg.inv(A)
                self._lu = None
            else:
                self._inv = None
                self._lu = scipy.linalg.lu_factor(A, check_finite=False)
        elif isinstance(method, Gmres):
            maxit = method.maxit if method.maxit is not None else max(system.n - 1, 1)
            self._gmres = GmresConfig(restart=method.restart, maxit=maxit, tol=method.tol)
        else:
            raise TypeError(f"unknown method {method!r}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if isinstance(self.method, Direct):
            if self._inv is not None:
                return self._inv @ rhs
            return scipy.linalg.lu_solve(self._lu, rhs, check_finite=False)
        out = gmres(self.system.apply_plus, rhs, self._gmres)
        self.iterations.append(out.iterations)
        if not out.converged:
            self.failures += 1
            log.warning("GMRES stopped (%s) at relres %.3e", out.status.value, out.final_relres)
        return out.solution

    def step(self, U: np.ndarray, source: Optional[np.ndarray], tau: float) -> np.ndarray:
        rhs = self.system.apply_minus(U)
        if source is not None:
            rhs = rhs + tau * source
        return self.solve(rhs)


def error_h2(U: np.ndarray, exact: np.ndarray, h: float) -> float:
    """Discrete 2-norm ``h^(1/2) ||U - exact||_2``."""
    U = np.asarray(U, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if U.shape != exact.shape:
        raise ValueError(f"length mismatch: {U.shape} vs {exact.shape}")
    return math.sqrt(h) * float(np.linalg.norm(U - exact))


def run(scheme, problem: ProblemSpec, grid: GridSpec, method: Method) -> SolveReport:
    """March ``M`` steps from ``u0`` sampled at the interior nodes.

    Timing covers the time march only; the factorization (direct) is done
    before the clock starts.
    """
    system = assemble(scheme, problem, grid)
    stepper = TimeStepper(system, method)
    x = grid.x
    U = np.asarray(problem.u0(x), dtype=float)
    tau = grid.tau
    start = time.perf_counter()
    for n in range(grid.M):
        src = None if problem.q is None else problem.q(x, (n + 0.5) * tau)
        U = stepper.step(U, src, tau)
    elapsed = time.perf_counter() - start

    err = None
    if problem.exact is not None:
        err = error_h2(U, problem.exact(x, grid.M * tau), grid.h)
    iters = float(np.mean(stepper.iterations)) if stepper.iterations else None
    return SolveReport(U, elapsed, err, iters, stepper.failures, x)


def stability_norm_check(scheme, alpha: float, beta: float, mu: float, N: int) -> float:
    """Spectral norm of ``(I + mu B)^{-1} (I - mu B)`` for ``B = B_m^{alpha,beta}``."""
    if N > DENSE_CAP:
        raise ValueError(f"N={N} exceeds dense cap {DENSE_CAP}")
    B = combine_beta(build_bhat(scheme, alpha, N), beta).dense()
    eye = np.eye(N)
    A = np.linalg.solve(eye + mu * B, eye - mu * B)
    return float(np.linalg.norm(A, 2))
