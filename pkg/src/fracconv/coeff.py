"""Coefficient sequences and per-scheme lag weights.

All four sequences are backward differences of ``f(x) = x**(2 - alpha)``
extended by zero for ``x < 0``::

    a_k = f(k+1) - 2 f(k) + f(k-1)       (second difference)
    b_k = a_k - a_{k-1}                   (third)
    c_k = b_k - b_{k-1}                   (fourth)
    d_k = c_k - c_{k-1}                   (fifth)

so that ``a_0 = b_0 = c_0 = d_0 = 1`` and the low-k boundary terms use
``a_j = 0`` for ``j < 0``.

Naive differencing of ``k**(2 - alpha)`` loses roughly ``log10(k**5)``
digits for the fifth difference, which makes the tail garbage long before
``k = 10**5``.  Beyond :data:`SERIES_START` the differences are therefore
evaluated from the binomial expansion of ``(k + j)**p`` in powers of
``1/k``, which has no cancellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Scheme",
    "WeightTable",
    "check_alpha",
    "a_seq",
    "b_seq",
    "c_seq",
    "d_seq",
    "sequences",
    "scheme_weights",
    "weight_tail_sum",
    "M3_D_WEIGHT",
    "M3_SHIFT1",
    "M3_SHIFT2",
]

# Weights of the shifted scheme, kept as the published decimal literals.
M3_D_WEIGHT = 0.369
M3_SHIFT1 = -0.23
M3_SHIFT2 = 0.111

#: First lag evaluated by the 1/k series instead of direct differencing.
SERIES_START = 5
# (first lag, number of terms): the series ratio is about 4/k.
_SERIES_BANDS = ((5, 200), (16, 40))


class Scheme(enum.Enum):
    """The three upwind approximations."""

    M1 = 1  # second order, 2b + c
    M2 = 2  # order 3 - alpha, b + c/2 + d/4
    M3 = 3  # order 3 - alpha, shifted

    @classmethod
    def parse(cls, value: Scheme | str | int) -> Scheme:
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            if not key.startswith("M"):
                key = "M" + key
            try:
                return cls[key]
            except KeyError:
                raise ValueError(f"unknown scheme {value!r}") from None
        return cls(int(value))

    @property
    def prefactor(self) -> float:
        """Scale ``rho`` so the approximation is ``rho / (Gamma(3-a) h^a) * sum W_k f(x - kh)``."""
        return 0.5 if self is Scheme.M1 else 1.0


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"fractional order must lie in (0, 1), got {alpha}")
    return alpha


@lru_cache(maxsize=None)
def _series_table(order: int, terms: int) -> np.ndarray:
    """``S[r] = sum_j (-1)^j C(order, j) (1 - j)^r`` for r < terms."""
    S = np.zeros(terms)
    for r in range(terms):
        S[r] = float(
            sum((-1) ** j * math.comb(order, j) * (1 - j) ** r for j in range(order + 1))
        )
    return S


def _backward_diff(alpha: float, order: int, k: np.ndarray) -> np.ndarray:
    """``sum_j (-1)^j C(order, j) f(k + 1 - j)`` for integer lags ``k >= 0``."""
    p = 2.0 - alpha
    k = np.asarray(k, dtype=np.int64)
    out = np.empty(k.shape, dtype=float)

    small = k < SERIES_START
    if np.any(small):
        ks = k[small].astype(float)
        acc = np.zeros_like(ks)
        for j in range(order + 1):
            x = ks + 1.0 - j
            fx = np.where(x > 0.0, np.abs(x) ** p, 0.0)
            acc += (-1) ** j * math.comb(order, j) * fx
        out[small] = acc

    for i, (start, terms) in enumerate(_SERIES_BANDS):
        stop = _SERIES_BANDS[i + 1][0] if i + 1 < len(_SERIES_BANDS) else None
        band = k >= start if stop is None else (k >= start) & (k < stop)
        if np.any(band):
            out[band] = _binomial_series(p, order, k[band].astype(float), terms)
    return out


def _binomial_series(p: float, order: int, k: np.ndarray, terms: int) -> np.ndarray:
    # (k + 1 - j)**p = k**p * sum_r C(p, r) ((1 - j)/k)**r; orders below `order` cancel exactly.
    S = _series_table(order, terms)
    binom = 1.0
    total = np.zeros_like(k)
    inv = 1.0 / k
    power = np.ones_like(k)
    for r in range(terms):
        if r >= order:
            total += (binom * S[r]) * power
        binom *= (p - r) / (r + 1)
        power *= inv
    return k**p * total


def _scalar(alpha: float, order: int, k: int) -> float:
    alpha = check_alpha(alpha)
    if k < 0:
        raise ValueError("lag index must be nonnegative")
    return float(_backward_diff(alpha, order, np.array([k]))[0])


def a_seq(alpha: float, k: int) -> float:
    return _scalar(alpha, 2, k)


def b_seq(alpha: float, k: int) -> float:
    return _scalar(alpha, 3, k)


def c_seq(alpha: float, k: int) -> float:
    return _scalar(alpha, 4, k)


def d_seq(alpha: float, k: int) -> float:
    return _scalar(alpha, 5, k)


def sequences(alpha: float, K: int) -> dict[str, np.ndarray]:
    """Arrays ``a, b, c, d`` for lags ``0..K-1``."""
    alpha = check_alpha(alpha)
    k = np.arange(K)
    return {name: _backward_diff(alpha, order, k) for name, order in zip("abcd", (2, 3, 4, 5))}


@dataclass(frozen=True)
class WeightTable:
    scheme: Scheme
    alpha: float
    weights: np.ndarray
    prefactor: float

    def __len__(self) -> int:
        return len(self.weights)


def _shift(v: np.ndarray, lag: int) -> np.ndarray:
    out = np.zeros_like(v)
    out[lag:] = v[: len(v) - lag]
    return out


def scheme_weights(scheme: Scheme | str | int, alpha: float, K: int) -> WeightTable:
    """Lag weights ``W_k``, ``k = 0..K-1``, of the chosen approximation.

    M3 folds the two shifted copies of the ``d`` sequence into the lag index:
    ``W_k = b_k + 0.5 c_k + 0.369 d_k - 0.23 d_{k-1} + 0.111 d_{k-2}``.
    """
    scheme = Scheme.parse(scheme)
    if K < 3:
        raise ValueError(f"truncation length must be at least 3, got {K}")
    s = sequences(alpha, K)
    b, c, d = s["b"], s["c"], s["d"]
    if scheme is Scheme.M1:
        w = 2.0 * b + c
    elif scheme is Scheme.M2:
        w = b + 0.5 * c + 0.25 * d
    else:
        w = b + 0.5 * c + M3_D_WEIGHT * d + M3_SHIFT1 * _shift(d, 1) + M3_SHIFT2 * _shift(d, 2)
    return WeightTable(scheme, float(alpha), w, scheme.prefactor)


def weight_tail_sum(scheme: Scheme | str | int, alpha: float, K: int) -> float:
    """Partial sum of the weights; tends to zero like ``K**-alpha``."""
    w = scheme_weights(scheme, alpha, K).weights
    return math.fsum(w)
