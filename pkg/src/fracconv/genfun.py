"""Generating functions of the three weight sequences.

``g_m(theta, alpha) = sum_k W_k exp(i k theta)`` is evaluated three ways:

* :func:`g_direct` -- partial sum of the series,
* :func:`re_g_closed` -- real part from the ``H1``/``H2`` lattice sums,
* :func:`g_k_form` -- Lerch/zeta expansion valid for ``0 < theta < 2 pi``.

Nonnegativity of ``Re g_m`` on ``(0, pi]`` is what makes the symmetric part
of the scheme matrix positive semidefinite; :func:`stability_scan` checks it
on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import bernoulli

from fracconv.coeff import M3_SHIFT1, M3_SHIFT2, Scheme, check_alpha, scheme_weights

__all__ = [
    "HSeriesParams",
    "ScanReport",
    "zeta_real",
    "h1",
    "h2",
    "h_tail",
    "g_direct",
    "re_g_closed",
    "g_k_form",
    "stability_scan",
    "g3_weight_feasibility",
    "consistency_slope",
    "KAPPA",
]

#: Leading-order multiplier of ``Gamma(3-a) (-i theta)^a`` in each symbol.
KAPPA = {Scheme.M1: 2.0, Scheme.M2: 1.0, Scheme.M3: 1.0}

# The shifted scheme written as I1 + I2/2 + I3/4 - (F-Q)(1-z) I3 - R(1-z^2) I3.
F_MINUS_Q = M3_SHIFT1
R_WEIGHT = M3_SHIFT2

TOL_SCAN = 1e-10


@dataclass(frozen=True)
class HSeriesParams:
    n_max: int = 1000
    r_max: int = 40
    tail_tol: float = 1e-16

    def __post_init__(self):
        if self.n_max < 1 or self.r_max < 1:
            raise ValueError("n_max and r_max must be at least 1")


# --------------------------------------------------------------------------
# Riemann zeta on the real line

_EM_N = 16
_EM_J = 14
_B2J = bernoulli(2 * _EM_J)[2::2]


def _zeta_em(s: float) -> float:
    # Euler-Maclaurin with N = 16 terms and 14 Bernoulli corrections; used for s >= 1/2.
    N = _EM_N
    head = math.fsum(n ** (-s) for n in range(1, N))
    total = head + N ** (1.0 - s) / (s - 1.0) + 0.5 * N ** (-s)
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, _EM_J + 1):
        term = _B2J[j - 1] / math.factorial(2 * j) * rising * N ** (-s - 2 * j + 1)
        total += term
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return total


def _sin_half_pi(s: float) -> float:
    """``sin(pi s / 2)`` with exact argument reduction."""
    t = math.fmod(s / 2.0, 2.0)
    n = round(t)
    r = t - n
    v = math.sin(math.pi * r)
    return -v if n % 2 else v


def zeta_real(s: float) -> float:
    """Riemann zeta function for real ``s != 1``."""
    s = float(s)
    if not math.isfinite(s):
        raise ValueError(f"zeta argument must be finite, got {s}")
    if s == 1.0:
        raise ValueError("zeta has a pole at s = 1")
    if s == 0.0:
        return -0.5
    if s >= 0.5:
        return _zeta_em(s)
    sn = _sin_half_pi(s)
    if sn == 0.0:
        return 0.0
    return 2.0**s * math.pi ** (s - 1.0) * sn * math.gamma(1.0 - s) * _zeta_em(1.0 - s)


# --------------------------------------------------------------------------
# H1, H2 lattice sums


def _check_theta(theta, upper=math.pi):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > upper):
        raise ValueError(f"theta must lie in (0, {upper:g}]")
    return theta


def _h_parts(theta: np.ndarray, alpha: float, n_max: int):
    p = alpha - 3.0
    n = np.arange(n_max + 1, dtype=float)[:, None]
    th = np.atleast_1d(theta)[None, :]
    left = (2.0 * math.pi * n + th) ** p
    right = (2.0 * math.pi * (n + 1.0) - th) ** p
    return left.sum(axis=0), right.sum(axis=0)


def h_tail(theta, alpha: float, n_max: int = 1000):
    """Estimated remainders of the two lattice sums beyond ``n_max``.

    Midpoint-rule integrals of ``(2 pi n + theta)^(alpha-3)`` and
    ``(2 pi (n+1) - theta)^(alpha-3)`` from ``n_max + 1/2`` to infinity;
    returns ``(tail_left, tail_right)``.
    """
    alpha = check_alpha(alpha)
    theta = np.asarray(theta, dtype=float)
    q = 2.0 - alpha
    two_pi = 2.0 * math.pi
    tl = (two_pi * (n_max + 0.5) + theta) ** (-q) / (two_pi * q)
    tr = (two_pi * (n_max + 1.5) - theta) ** (-q) / (two_pi * q)
    return tl, tr


def _h_pair(theta, alpha, n_max, tail):
    alpha = check_alpha(alpha)
    th = _check_theta(theta)
    left, right = _h_parts(th, alpha, n_max)
    if tail:
        tl, tr = h_tail(np.atleast_1d(th), alpha, n_max)
        left, right = left + tl, right + tr
    H1 = math.cos(alpha * math.pi / 2.0) * (left - right)
    H2 = math.sin(alpha * math.pi / 2.0) * (left + right)
    if th.ndim == 0:
        return float(H1[0]), float(H2[0])
    return H1, H2


def h1(theta, alpha: float, n_max: int = 1000, tail: bool = False):
    """``cos(a pi/2) sum_n ((2n pi + theta)^(a-3) - (2(n+1) pi - theta)^(a-3))``."""
    return _h_pair(theta, alpha, n_max, tail)[0]


def h2(theta, alpha: float, n_max: int = 1000, tail: bool = False):
    """``sin(a pi/2) sum_n ((2n pi + theta)^(a-3) + (2(n+1) pi - theta)^(a-3))``."""
    return _h_pair(theta, alpha, n_max, tail)[1]


# --------------------------------------------------------------------------
# Three evaluation routes


_TAIL_DIFFS = 4


def g_direct(scheme, theta, alpha: float, K: int, tail: bool = False):
    """Partial sum ``sum_{k<K} W_k exp(i k theta)``.

    The M1 weights are ``2 b_k + c_k`` without the 1/2 prefactor of the
    difference quotient.  Accepts scalar or array ``theta``.

    With ``tail=True`` the remainder ``sum_{k>=K}`` is added from its Euler
    transform ``z^K/(1-z) sum_j (z/(1-z))^j Delta^j W_K``, which is accurate
    once ``K * theta >> 1``.
    """
    w = scheme_weights(scheme, alpha, K + _TAIL_DIFFS + 1 if tail else K).weights
    head = w[:K]
    diffs = [w[K:]]
    for _ in range(_TAIL_DIFFS):
        diffs.append(np.diff(diffs[-1]))
    theta_arr = np.asarray(theta, dtype=float)
    k = np.arange(K, dtype=float)
    flat = theta_arr.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    for i, t in enumerate(flat):
        out[i] = np.dot(head, np.exp(1j * k * t))
        if tail:
            z = np.exp(1j * t)
            ratio = z / (1.0 - z)
            rem = sum(ratio**j * d[0] for j, d in enumerate(diffs))
            out[i] += z**K / (1.0 - z) * rem
    if theta_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(theta_arr.shape)


def _g3_polys(c, s, fq, r):
    g31 = (
        (6 * c - 9 * c**3 + 4 * c**5)
        + 4 * fq * (-8 * c + 32 * c**3 - 40 * c**5 + 16 * c**7)
        + 4 * r * (4 * c - 56 * c**3 + 164 * c**5 - 176 * c**7 + 64 * c**9)
    )
    g32 = (
        s**3 * (-1 + 4 * s**2)
        + 8 * s**3 * fq * (-1 + 8 * s**2 - 8 * s**4)
        + 16 * s**3 * r * (-1 + 13 * s**2 - 28 * s**4 + 16 * s**6)
    )
    return g31, g32


def angle_factors(scheme, theta):
    """The trigonometric multipliers ``(g_m1, g_m2)`` of ``H1`` and ``H2``."""
    scheme = Scheme.parse(scheme)
    th = np.asarray(theta, dtype=float)
    c, s = np.cos(th / 2.0), np.sin(th / 2.0)
    if scheme is Scheme.M1:
        return c + s * np.sin(th), s - s * np.cos(th)
    if scheme is Scheme.M2:
        return (
            c + s * np.sin(th) - s**2 * np.cos(1.5 * th),
            s - s * np.cos(th) - s**2 * np.sin(1.5 * th),
        )
    return _g3_polys(c, s, F_MINUS_Q, R_WEIGHT)


def re_g_closed(scheme, theta, alpha: float, n_max: int = 1000, tail: bool = False):
    """Real part of ``g_m`` from the lattice-sum closed form.

    ``Re g_m = C_m sin^3(theta/2) Gamma(3-a) (g_m1 H1 + g_m2 H2)`` with
    ``C_1 = 16`` and ``C_2 = C_3 = 8``.  With ``tail=True`` the truncated
    sums get the :func:`h_tail` estimate added.
    """
    scheme = Scheme.parse(scheme)
    alpha = check_alpha(alpha)
    th = _check_theta(theta)
    H1, H2 = _h_pair(th, alpha, n_max, tail)
    f1, f2 = angle_factors(scheme, th)
    scale = 16.0 if scheme is Scheme.M1 else 8.0
    val = scale * np.sin(th / 2.0) ** 3 * math.gamma(3.0 - alpha) * (f1 * H1 + f2 * H2)
    return float(val) if th.ndim == 0 else val


def _symbol_multiplier(scheme: Scheme, z):
    """``g_m = multiplier(z) * I1`` with ``z = exp(i theta)``."""
    w = 1.0 - z
    if scheme is Scheme.M1:
        return 2.0 + w
    base = 1.0 + 0.5 * w + 0.25 * w**2
    if scheme is Scheme.M2:
        return base
    return base - F_MINUS_Q * w**3 - R_WEIGHT * (1.0 - z * z) * w**2


def _i1_k_form(theta: np.ndarray, alpha: float, r_max: int, tail_tol: float):
    gam = math.gamma(3.0 - alpha)
    # principal branch: (-i theta)^p = theta^p exp(-i p pi/2)
    singular = gam * theta ** (alpha - 3.0) * np.exp(-0.5j * (alpha - 3.0) * math.pi)
    series = np.zeros_like(theta, dtype=complex)
    ipow = np.ones_like(theta, dtype=complex)
    quiet = 0
    for r in range(r_max + 1):
        term = zeta_real(alpha - 2.0 - r) * ipow
        series = series + term
        small = np.max(np.abs(term)) < tail_tol * max(1.0, float(np.max(np.abs(series))))
        # zeta(alpha-2-r) can be tiny by accident near even integers: need two quiet terms
        quiet = quiet + 1 if small else 0
        if quiet >= 2:
            break
        ipow = ipow * (1j * theta) / (r + 1)
    s3 = np.sin(theta / 2.0) ** 3
    return 8j * np.exp(0.5j * theta) * s3 * (singular + series)


def g_k_form(scheme, theta, alpha: float, r_max: int = 40, tail_tol: float = 1e-16):
    """``g_m`` through the zeta expansion of ``I1``; ``I2``, ``I3`` via ``(1 - e^{i theta})``."""
    scheme = Scheme.parse(scheme)
    alpha = check_alpha(alpha)
    th = np.asarray(theta, dtype=float)
    if np.any(th <= 0.0) or np.any(th >= 2.0 * math.pi):
        raise ValueError("the zeta expansion needs 0 < theta < 2 pi")
    flat = np.atleast_1d(th)
    val = _symbol_multiplier(scheme, np.exp(1j * flat)) * _i1_k_form(flat, alpha, r_max, tail_tol)
    return complex(val[0]) if th.ndim == 0 else val.reshape(th.shape)


# --------------------------------------------------------------------------
# Scans and diagnostics


@dataclass
class ScanReport:
    scheme: Scheme
    theta_grid: np.ndarray
    alpha_grid: np.ndarray
    values: np.ndarray  # Re g_m, shape (len(theta_grid), len(alpha_grid))
    min_value: float
    argmin: tuple[float, float]  # (theta, alpha)
    nonnegative: np.ndarray  # per alpha
    tol: float = TOL_SCAN
    params: HSeriesParams = field(default_factory=HSeriesParams)

    def min_over_theta(self) -> np.ndarray:
        return self.values.min(axis=0)

    def summary(self) -> dict:
        return {
            "scheme": self.scheme.name.lower(),
            "min": self.min_value,
            "argmin": {"theta": self.argmin[0], "alpha": self.argmin[1]},
            "tol": self.tol,
            "n_max": self.params.n_max,
            "verdicts": [
                {"alpha": float(a), "min_re_g": float(m), "nonnegative": bool(ok)}
                for a, m, ok in zip(self.alpha_grid, self.min_over_theta(), self.nonnegative)
            ],
        }


def stability_scan(
    scheme,
    alpha_grid,
    theta_grid,
    params: HSeriesParams | None = None,
    tol: float = TOL_SCAN,
    tail: bool = False,
) -> ScanReport:
    """Evaluate ``Re g_m`` on the product grid and record where it dips below ``-tol``.

    Ties in the minimum go to the smallest theta, then the smallest alpha.
    """
    scheme = Scheme.parse(scheme)
    params = params or HSeriesParams()
    alphas = np.sort(np.asarray(alpha_grid, dtype=float).ravel())
    thetas = np.sort(np.asarray(theta_grid, dtype=float).ravel())
    if alphas.size == 0 or thetas.size == 0:
        raise ValueError("grids must be nonempty")
    values = np.empty((thetas.size, alphas.size))
    for j, a in enumerate(alphas):
        values[:, j] = re_g_closed(scheme, thetas, a, params.n_max, tail=tail)
    flat = int(np.argmin(values))  # first occurrence in C order
    i, j = np.unravel_index(flat, values.shape)
    return ScanReport(
        scheme=scheme,
        theta_grid=thetas,
        alpha_grid=alphas,
        values=values,
        min_value=float(values[i, j]),
        argmin=(float(thetas[i]), float(alphas[j])),
        nonnegative=values.min(axis=0) >= -tol,
        tol=tol,
        params=params,
    )


def g3_weight_feasibility(f_minus_q: float, r: float) -> tuple[float, float, float]:
    """The three necessary conditions on the shift weights for ``g_32 >= 0``.

    All three being nonnegative is impossible: (i)+(ii) forces ``8R >= 1``
    while (i)+(iii) forces ``8R <= 0``.
    """
    return (
        -1.0 - 8.0 * f_minus_q - 16.0 * r,
        8.0 * f_minus_q + 24.0 * r,
        1.0 + 8.0 * f_minus_q + 8.0 * r,
    )


def consistency_slope(scheme, alpha: float, theta_samples) -> float:
    """Log-log slope of ``|g_m - kappa_m Gamma(3-a) (-i theta)^a|`` against ``theta``."""
    scheme = Scheme.parse(scheme)
    alpha = check_alpha(alpha)
    th = np.asarray(theta_samples, dtype=float)
    if th.size < 4:
        raise ValueError("need at least 4 theta samples")
    if np.any(th <= 0.0) or np.any(th > 0.5) or np.any(np.diff(th) >= 0.0):
        raise ValueError("theta samples must decrease within (0, 0.5]")
    g = g_k_form(scheme, th, alpha)
    lead = KAPPA[scheme] * math.gamma(3.0 - alpha) * th**alpha * np.exp(-0.5j * math.pi * alpha)
    resid = np.abs(g - lead)
    slope, _ = np.polyfit(np.log(th), np.log(resid), 1)
    return float(slope)
