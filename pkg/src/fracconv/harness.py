"""Reproduction runs: manufactured-solution example, Levy-Smirnov example,
convergence tables and their CSV/JSON emission."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma

from fracconv.coeff import Scheme, check_alpha
from fracconv.solver import Direct, GridSpec, Gmres, ProblemSpec, SolveReport, run

__all__ = [
    "Example1Spec",
    "Example2Spec",
    "TableRow",
    "ConvergenceTable",
    "example1_exact",
    "example1_source",
    "example1_problem",
    "example2_problem",
    "levy_smirnov",
    "grid_couple",
    "tol_from_rule",
    "run_example1",
    "run_example2",
    "convergence_table",
    "emit_table",
    "load_table_json",
    "TABLE_COLUMNS",
    "DIRECT_M_CAP",
    "GMRES_M_CAP",
]

DIRECT_M_CAP = 2**12
GMRES_M_CAP = 2**13

TABLE_COLUMNS = ("M", "E_direct", "Time_direct", "E_gmres", "Rate", "Time_gmres", "Iter")


# --------------------------------------------------------------------------
# Example 1: u(x, t) = exp(-t) (x - xL)^4 (xR - x)^4


def _poly_coeffs(length: float) -> list[tuple[int, float]]:
    # y^4 (L - y)^4 = sum_i C(4,i) L^(4-i) (-1)^i y^(4+i)
    return [(4 + i, math.comb(4, i) * length ** (4 - i) * (-1) ** i) for i in range(5)]


def example1_exact(x, t, domain: tuple[float, float] = (0.0, 2.0)):
    xL, xR = domain
    x = np.asarray(x, dtype=float)
    inside = (x > xL) & (x < xR)
    v = np.where(inside, (x - xL) ** 4 * (xR - x) ** 4, 0.0)
    return math.exp(-t) * v


def _left_rl(y: np.ndarray, alpha: float, length: float) -> np.ndarray:
    """Left R-L derivative of the profile at distance ``y >= 0`` from its left end."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, None)
    out = np.zeros_like(y)
    for j, c in _poly_coeffs(length):
        out += c * gamma(j + 1) / gamma(j + 1 - alpha) * y ** (j - alpha)
    return out


def example1_source(alpha, beta, x, t, D: float = 1.0, domain: tuple[float, float] = (0.0, 2.0)):
    """``q = u_t + D ((1+b)/2 d^a u/dx^a + (1-b)/2 d^a u/d(-x)^a)`` in closed form.

    The profile is symmetric about the domain midpoint, so the right-sided
    derivative at ``x`` is the left-sided one at the mirrored point.
    Valid for ``x`` inside the domain.
    """
    xL, xR = domain
    length = xR - xL
    x = np.asarray(x, dtype=float)
    left = _left_rl(x - xL, alpha, length)
    right = _left_rl(xR - x, alpha, length)
    frac = 0.5 * (1.0 + beta) * left + 0.5 * (1.0 - beta) * right
    return math.exp(-t) * (-example1_exact(x, 0.0, domain) + D * frac)


@dataclass(frozen=True)
class Example1Spec:
    alpha: float
    beta: float
    M: int
    D: float = 1.0
    domain: tuple[float, float] = (0.0, 2.0)
    T: float = 1.0


def example1_problem(spec: Example1Spec) -> ProblemSpec:
    a, b, D, dom = spec.alpha, spec.beta, spec.D, spec.domain
    return ProblemSpec(
        alpha=a,
        beta=b,
        D=D,
        x_domain=dom,
        T=spec.T,
        u0=lambda x: example1_exact(x, 0.0, dom),
        q=lambda x, t: example1_source(a, b, x, t, D, dom),
        exact=lambda x, t: example1_exact(x, t, dom),
    )


# --------------------------------------------------------------------------
# Example 2: Levy-Smirnov density from a narrow Gaussian


def levy_smirnov(x):
    """``exp(-1/(2x)) / sqrt(2 pi x^3)`` for ``x > 0``, zero otherwise."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    xp = x[pos]
    out[pos] = np.exp(-0.5 / xp) / np.sqrt(2.0 * math.pi * xp**3)
    return out


@dataclass(frozen=True)
class Example2Spec:
    M: int
    alpha: float = 0.5
    beta: float = 1.0
    D: float = 1.0
    domain: tuple[float, float] = (-1.0, 20.0)
    T: float = math.sqrt(2.0)
    eps_over_h: float = 2.0


def example2_problem(spec: Example2Spec, h: float) -> ProblemSpec:
    eps = spec.eps_over_h * h

    def u0(x):
        return np.exp(-((x / eps) ** 2)) / (eps * math.sqrt(math.pi))

    return ProblemSpec(
        alpha=spec.alpha,
        beta=spec.beta,
        D=spec.D,
        x_domain=spec.domain,
        T=spec.T,
        u0=u0,
        q=None,
        exact=lambda x, t: levy_smirnov(x),
    )


# --------------------------------------------------------------------------
# Grid coupling and tolerance rules


def grid_couple(scheme, alpha: float, M: int) -> int:
    """``N = M`` for M1, ``N = floor(M^(2/(3-alpha)))`` for M2/M3."""
    scheme = Scheme.parse(scheme)
    check_alpha(alpha)
    if M < 4:
        raise ValueError("M must be at least 4")
    if scheme is Scheme.M1:
        return M
    N = math.floor(M ** (2.0 / (3.0 - alpha)))
    # guard against pow landing just below an exact integer
    if (N + 1) ** (3.0 - alpha) <= M**2:
        N += 1
    return N


def tol_from_rule(rule, tau: float) -> float:
    """``"tau3"`` -> tau^3, ``"10tau3"`` -> 10 tau^3, otherwise a literal value."""
    if isinstance(rule, (int, float)):
        return float(rule)
    key = str(rule).strip().lower().replace("*", "").replace("^", "")
    if key in ("tau3", "1tau3"):
        return tau**3
    if key.endswith("tau3"):
        return float(key[: -len("tau3")]) * tau**3
    return float(key)


# --------------------------------------------------------------------------
# Runs and tables


@dataclass
class TableRow:
    M: int
    N: int
    E_direct: Optional[float] = None
    Time_direct: Optional[float] = None
    E_gmres: Optional[float] = None
    Rate: Optional[float] = None
    Time_gmres: Optional[float] = None
    Iter: Optional[float] = None
    notes: str = ""


@dataclass
class ConvergenceTable:
    rows: list[TableRow]
    meta: dict = field(default_factory=dict)

    def fill_rates(self) -> None:
        """``Rate[j] = log2(E[j-1] / E[j])``, taken from GMRES errors when present."""
        prev = None
        for row in self.rows:
            err = row.E_gmres if row.E_gmres is not None else row.E_direct
            if prev is not None and err is not None and err > 0.0 and prev > 0.0:
                row.Rate = math.log2(prev / err)
            else:
                row.Rate = None
            prev = err

    def rates(self) -> list[Optional[float]]:
        return [r.Rate for r in self.rows]


def _method_for(method: str, tau: float, tol_rule) -> Direct | Gmres:
    if method in ("d", "direct"):
        return Direct()
    if method in ("g", "gmres"):
        return Gmres(tol=tol_from_rule(tol_rule, tau))
    raise ValueError(f"unknown method {method!r}")


def run_example1(
    spec: Example1Spec, scheme, method: str = "gmres", tol_rule="tau3", N: Optional[int] = None
) -> SolveReport:
    problem = example1_problem(spec)
    if N is None:
        N = grid_couple(scheme, spec.alpha, spec.M)
    grid = GridSpec.build(problem, spec.M, N)
    return run(scheme, problem, grid, _method_for(method, grid.tau, tol_rule))


def run_example2(
    spec: Example2Spec, scheme, method: str = "gmres", tol_rule="10tau3", N: Optional[int] = None
) -> SolveReport:
    if N is None:
        N = grid_couple(scheme, spec.alpha, spec.M)
    xL, xR = spec.domain
    h = (xR - xL) / (N + 1)
    problem = example2_problem(spec, h)
    grid = GridSpec.build(problem, spec.M, N)
    return run(scheme, problem, grid, _method_for(method, grid.tau, tol_rule))


def convergence_table(
    example: str,
    scheme,
    m_list: Sequence[int],
    methods: Sequence[str] = ("direct", "gmres"),
    tol_rule=None,
    direct_cap: int = DIRECT_M_CAP,
    gmres_cap: int = GMRES_M_CAP,
    **spec_kwargs,
) -> ConvergenceTable:
    """Run one table block; rows above the desk caps are marked unattempted."""
    scheme = Scheme.parse(scheme)
    if example == "example1":
        make, runner = Example1Spec, run_example1
        tol_rule = "tau3" if tol_rule is None else tol_rule
    elif example == "example2":
        make, runner = Example2Spec, run_example2
        tol_rule = "10tau3" if tol_rule is None else tol_rule
    else:
        raise ValueError(f"unknown example {example!r}")

    rows = []
    for M in m_list:
        spec = make(M=M, **spec_kwargs)
        N = grid_couple(scheme, spec.alpha, M)
        row = TableRow(M=M, N=N)
        skipped = []
        for method in methods:
            full = "direct" if method in ("d", "direct") else "gmres"
            cap = direct_cap if full == "direct" else gmres_cap
            if M > cap:
                skipped.append(full)
                continue
            rep = runner(spec, scheme, full, tol_rule)
            if full == "direct":
                row.E_direct, row.Time_direct = rep.error_h2, rep.cpu_seconds
            else:
                row.E_gmres, row.Time_gmres, row.Iter = rep.error_h2, rep.cpu_seconds, rep.avg_gmres_iters
        if skipped:
            row.notes = "unattempted: " + ",".join(skipped)
        rows.append(row)
    table = ConvergenceTable(rows, meta={"example": example, "scheme": scheme.name.lower(), "tol_rule": str(tol_rule), **{k: v for k, v in spec_kwargs.items()}})
    table.fill_rates()
    return table


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def emit_table(table: ConvergenceTable, path, fmt: str = "csv") -> Path:
    """Write the table as CSV (published column order) or JSON."""
    if not table.rows:
        raise ValueError("refusing to emit an empty table")
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(TABLE_COLUMNS)
                for row in table.rows:
                    writer.writerow([_fmt(getattr(row, c)) for c in TABLE_COLUMNS])
        elif fmt == "json":
            doc = {"columns": list(TABLE_COLUMNS), "meta": table.meta, "rows": [asdict(r) for r in table.rows]}
            path.write_text(json.dumps(doc, indent=2, default=str))
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"could not write table to {path}: {exc}") from exc
    return path


def load_table_json(path) -> ConvergenceTable:
    doc = json.loads(Path(path).read_text())
    return ConvergenceTable([TableRow(**r) for r in doc["rows"]], doc.get("meta", {}))
